//! Experiment implementations: each module turns its config into result rows.
//!
//! `run` is the single entry point: it dispatches on the config variant,
//! stamps the experiment id and a shared wall clock onto every row, and
//! leaves all file writing (row CSVs, sweep tables, trajectory dumps) under
//! `out_dir` or at paths named in the config.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{CliError, ExperimentConfig};
use crate::rows::ResultRow;

/// Resolves a config-named output file: relative paths land inside
/// `out_dir`. The parent directory is created so callers can open the file.
fn resolve_artifact(out_dir: &Path, path: &Path) -> Result<PathBuf, CliError> {
    let resolved = if path.is_absolute() {
        path.to_path_buf()
    } else {
        out_dir.join(path)
    };
    if let Some(parent) = resolved.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(resolved)
}

mod barrier_vs_snowb;
mod darning;
mod feller;
mod gamma_continuity;
mod hitting;
mod kernels;
mod laplace;
mod phase_sweep;
mod recovery;
mod snowb_rebirth;
mod trace_vs_snowb;

/// Runs one experiment and returns its stamped rows.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<ResultRow>, CliError> {
    let started = Instant::now();
    let mut rows = match config {
        ExperimentConfig::Hitting(c) => hitting::rows(c, out_dir)?,
        ExperimentConfig::Laplace(c) => laplace::rows(c)?,
        ExperimentConfig::Feller(c) => feller::rows(c)?,
        ExperimentConfig::SnowbRebirth(c) => snowb_rebirth::rows(c)?,
        ExperimentConfig::TraceVsSnowb(c) => trace_vs_snowb::rows(c)?,
        ExperimentConfig::Darning(c) => darning::rows(c, out_dir)?,
        ExperimentConfig::BarrierVsSnowb(c) => barrier_vs_snowb::rows(c)?,
        ExperimentConfig::PhaseSweep(c) => phase_sweep::rows(c, out_dir)?,
        ExperimentConfig::GammaContinuity(c) => gamma_continuity::rows(c, out_dir)?,
        ExperimentConfig::Recovery(c) => recovery::rows(c)?,
        ExperimentConfig::Kernels(c) => kernels::rows(c, out_dir)?,
    };
    let wall = started.elapsed().as_secs_f64();
    for row in &mut rows {
        row.experiment = config.id().to_string();
        row.wall_clock_s = wall;
    }
    Ok(rows)
}

/// Comma-free rendering of a float list for the params column.
pub(crate) fn fmt_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

/// Chi-square p-value of observed counts against measure-proportional
/// expectations; errors bubble up as configuration problems (they can only
/// come from empty or degenerate count vectors).
pub(crate) fn measure_chi_square_p(
    counts: &[u64],
    weights: &[f64],
) -> Result<(f64, f64), CliError> {
    let total: u64 = counts.iter().sum();
    let expected: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let outcome = walsh_core::montecarlo::chi_square(counts, &expected)?;
    Ok((outcome.statistic, outcome.p_value))
}
