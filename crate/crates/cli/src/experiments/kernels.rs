//! Nullspace dimensions of the four assembled forms.
//!
//! Constants per ray are flat for every form; what distinguishes the forms
//! is how many independent constants survive. Decoupled rays keep one per
//! ray (`M`), while any origin coupling — elastic, glued, or through a
//! collar — pins them to a single shared constant (`1`). The dimensions are
//! computed by matrix inertia and must match exactly.

use std::io::Write;
use std::path::Path;

use walsh_core::{assemble, AngularMeasure, BarrierProfile, FormKind, FormMatrix, Grid};

use crate::config::{CliError, KernelsConfig};
use crate::rows::ResultRow;

fn export_matrix(prefix: &Path, label: &str, matrix: &FormMatrix) -> std::io::Result<()> {
    let stem = prefix
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "matrix".to_string());
    let dir = prefix.parent().unwrap_or(std::path::Path::new("."));
    std::fs::create_dir_all(dir)?;

    let mut coo = std::fs::File::create(dir.join(format!("{stem}.{label}.coo.csv")))?;
    writeln!(coo, "row,col,value")?;
    for (row, col, value) in matrix.coo_triplets() {
        writeln!(coo, "{row},{col},{value}")?;
    }

    let mut mass = std::fs::File::create(dir.join(format!("{stem}.{label}.mass.csv")))?;
    writeln!(mass, "index,mass")?;
    for (index, value) in matrix.mass().iter().enumerate() {
        writeln!(mass, "{index},{value}")?;
    }
    Ok(())
}

pub fn rows(cfg: &KernelsConfig, out_dir: &Path) -> Result<Vec<ResultRow>, CliError> {
    let grid = Grid::new(cfg.n_rays, cfg.nodes_per_ray, cfg.spacing)?;
    let measure = AngularMeasure::uniform(cfg.n_rays)?;
    let barrier = BarrierProfile::uniform(cfg.barrier_b, cfg.barrier_epsilon)?;

    let cases: [(FormKind, usize); 4] = [
        (FormKind::Reflecting, cfg.n_rays),
        (FormKind::Snapping(cfg.kappa), 1),
        (FormKind::Walsh, 1),
        (FormKind::Barrier(barrier), 1),
    ];

    let mut out = Vec::new();
    for (kind, expected) in cases {
        let label = kind.label();
        let matrix = assemble(kind, &grid, &measure)?;
        let dimension = matrix.kernel_dimension();
        if let Some(prefix) = &cfg.matrix_out {
            let resolved = super::resolve_artifact(out_dir, prefix)?;
            export_matrix(&resolved, label, &matrix)?;
        }
        let mut row = ResultRow::new(format!("kernel_dim_{label}"), dimension as f64)
            .oracle(expected as f64)
            .gate(dimension == expected);
        row.params = format!(
            "M={};N={};h={};kappa={};barrier_b={};barrier_epsilon={}",
            cfg.n_rays, cfg.nodes_per_ray, cfg.spacing, cfg.kappa, cfg.barrier_b, cfg.barrier_epsilon
        );
        out.push(row);
    }
    Ok(out)
}
