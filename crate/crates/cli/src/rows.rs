//! Result rows and their CSV/JSON serialization.
//!
//! Every experiment emits the same row shape so downstream tooling parses
//! one schema: `experiment,params,metric,estimate,se_or_residual,oracle,
//! pass,wall_clock_s`. The wall clock is deliberately the last column so
//! determinism checks can strip it with a single suffix cut.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

/// Version stamped into every `# schema=<experiment>/<version>` header.
pub const SCHEMA_VERSION: u32 = 1;

/// One output row: an estimate, its uncertainty or residual, the closed-form
/// value when one exists, and a gate verdict when the row is gated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    /// Compact `key=value` pairs joined by `;` (comma-free for CSV safety).
    pub params: String,
    pub metric: String,
    pub estimate: f64,
    pub se_or_residual: Option<f64>,
    pub oracle: Option<f64>,
    /// `Some(true)` / `Some(false)` for gated rows, `None` for context rows.
    pub pass: Option<bool>,
    pub wall_clock_s: f64,
}

impl ResultRow {
    pub fn new(metric: impl Into<String>, estimate: f64) -> Self {
        ResultRow {
            experiment: String::new(),
            params: String::new(),
            metric: metric.into(),
            estimate,
            se_or_residual: None,
            oracle: None,
            pass: None,
            wall_clock_s: 0.0,
        }
    }

    pub fn se(mut self, se: f64) -> Self {
        self.se_or_residual = Some(se);
        self
    }

    pub fn oracle(mut self, oracle: f64) -> Self {
        self.oracle = Some(oracle);
        self
    }

    pub fn gate(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }

    fn csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let pass = match self.pass {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "",
        };
        format!(
            "{},{},{},{},{},{},{},{:.3}",
            self.experiment,
            self.params,
            self.metric,
            self.estimate,
            opt(self.se_or_residual),
            opt(self.oracle),
            pass,
            self.wall_clock_s
        )
    }
}

/// Renders the full CSV document for one experiment.
pub fn render_csv(experiment: &str, rows: &[ResultRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# schema={experiment}/{SCHEMA_VERSION}\n"));
    out.push_str("experiment,params,metric,estimate,se_or_residual,oracle,pass,wall_clock_s\n");
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

/// Drops the trailing wall-clock column from every data line, so two runs of
/// the same seed can be compared bit for bit.
pub fn strip_wall_clock(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            if line.starts_with('#') || line.starts_with("experiment,") {
                line.to_string()
            } else {
                match line.rsplit_once(',') {
                    Some((head, _)) => head.to_string(),
                    None => line.to_string(),
                }
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Every gated row passed (rows without a gate do not count).
pub fn all_gates_pass(rows: &[ResultRow]) -> bool {
    rows.iter().all(|r| r.pass != Some(false))
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    schema: String,
    experiment: &'a str,
    rows: usize,
    gated: usize,
    failed: usize,
    pass: bool,
    wall_clock_s: f64,
}

/// Writes `<dir>/<experiment>.csv` and `<dir>/<experiment>.json`, returning
/// the rendered CSV for further comparison.
pub fn write_outputs(
    dir: &Path,
    experiment: &str,
    rows: &[ResultRow],
) -> std::io::Result<String> {
    std::fs::create_dir_all(dir)?;
    let csv = render_csv(experiment, rows);
    std::fs::write(dir.join(format!("{experiment}.csv")), &csv)?;
    let summary = Summary {
        schema: format!("{experiment}-summary/{SCHEMA_VERSION}"),
        experiment,
        rows: rows.len(),
        gated: rows.iter().filter(|r| r.pass.is_some()).count(),
        failed: rows.iter().filter(|r| r.pass == Some(false)).count(),
        pass: all_gates_pass(rows),
        wall_clock_s: rows.first().map(|r| r.wall_clock_s).unwrap_or(0.0),
    };
    let mut file = std::fs::File::create(dir.join(format!("{experiment}.json")))?;
    serde_json::to_writer_pretty(&mut file, &summary)?;
    file.write_all(b"\n")?;
    Ok(csv)
}
