//! Assembly and solution of the four quadratic forms on a truncated star grid.
//!
//! The four forms share the Dirichlet part `1/2 sum_j w_j int a(r) f_j'(r)^2 dr`
//! (conductivity `a` is 1 except inside a barrier collar) and differ at the
//! origin: `Walsh` and `Barrier` glue all rays to one origin value, `Reflecting`
//! keeps rays fully decoupled, and `Snapping(kappa)` keeps per-ray origin
//! values but adds the pairwise coupling
//! `(kappa/2) sum_{j,k} w_j w_k (f_j(0) - f_k(0)) (g_j(0) - g_k(0))`,
//! i.e. the origin block `kappa (diag(w) - w w^T)`.
//!
//! The stiffness matrix is stored structurally (one edge weight per grid cell
//! plus the dense origin block), which keeps it bitwise symmetric by
//! construction and lets resolvents be computed by exact elimination: each ray
//! chain is folded onto the origin by a Thomas sweep and the remaining
//! origin system (at most `n_rays` unknowns) is solved densely. The same
//! elimination run at a negative shift counts pivot signs, which by
//! Sylvester's law of inertia yields the number of generalized eigenvalues of
//! `(A, Mass)` below the shift — the kernel-dimension probe.

use crate::domain::{AngularMeasure, BarrierProfile};
use crate::grid::{l2_distance_excluding_origin, DiscreteFunction, Grid, OriginMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Generalized eigenvalues below this threshold count as kernel directions.
pub const KERNEL_TOLERANCE: f64 = 1e-10;

/// Normwise backward error above which a solve is reported as a failure.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

/// The four quadratic forms on the star.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FormKind {
    /// Decoupled reflecting rays (separated origins).
    Reflecting,
    /// Per-ray origins coupled elastically with strength `kappa`.
    Snapping(f64),
    /// One glued origin value, unit conductivity.
    Walsh,
    /// One glued origin value, conductivity from the profile inside its collar.
    Barrier(BarrierProfile),
}

impl FormKind {
    /// Origin representation required of functions in this form's domain.
    pub fn origin_mode(&self) -> OriginMode {
        match self {
            FormKind::Walsh | FormKind::Barrier(_) => OriginMode::Shared,
            FormKind::Reflecting | FormKind::Snapping(_) => OriginMode::PerRay,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FormKind::Reflecting => "reflecting",
            FormKind::Snapping(_) => "snapping",
            FormKind::Walsh => "walsh",
            FormKind::Barrier(_) => "barrier",
        }
    }
}

/// Errors from assembly, solves and sweeps.
#[derive(Debug, Error)]
pub enum FormError {
    #[error("barrier profile does not align with the grid (breakpoints must fall on nodes inside the truncation)")]
    Misaligned,
    #[error("snapping coupling strength must be positive and finite, got {0}")]
    BadKappa(f64),
    #[error("resolvent rate must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error("resistance must be positive (finite or infinite), got {0}")]
    BadGamma(f64),
    #[error("measure has {measure} rays but grid has {grid}")]
    RayCountMismatch { measure: usize, grid: usize },
    #[error("function origin mode {found:?} does not match form layout {expected:?}")]
    OriginModeMismatch {
        expected: OriginMode,
        found: OriginMode,
    },
    #[error("vector length {found} does not match {expected} degrees of freedom")]
    DofMismatch { expected: usize, found: usize },
    #[error("linear solve failed: backward error {residual:e} exceeds tolerance")]
    Solver { residual: f64 },
    #[error("origin system is numerically singular")]
    SingularOrigin,
    #[error("sweep needs at least two entries, got {0}")]
    SweepTooShort(usize),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

/// Assembled quadratic form: per-cell edge weights, dense origin coupling
/// block (per-ray layouts only), and the trapezoidal mass vector.
#[derive(Debug, Clone)]
pub struct FormMatrix {
    kind: FormKind,
    grid: Grid,
    measure: AngularMeasure,
    layout: OriginMode,
    /// `edge[j][i]`: weight of the quadratic-form term
    /// `edge * (f[j][i+1] - f[j][i])^2` for cell `i` of ray `j`.
    edge: Vec<Vec<f64>>,
    /// Origin coupling block `kappa (diag(w) - w w^T)`; empty except Snapping.
    origin_block: Vec<Vec<f64>>,
    /// Mass per degree of freedom, in DOF order.
    mass: Vec<f64>,
}

/// Builds the stiffness structure and mass vector of `kind` on `grid`.
pub fn assemble(
    kind: FormKind,
    grid: &Grid,
    measure: &AngularMeasure,
) -> Result<FormMatrix, FormError> {
    if measure.n_rays() != grid.n_rays() {
        return Err(FormError::RayCountMismatch {
            measure: measure.n_rays(),
            grid: grid.n_rays(),
        });
    }
    match &kind {
        FormKind::Snapping(kappa) => {
            if !(*kappa > 0.0) || !kappa.is_finite() {
                return Err(FormError::BadKappa(*kappa));
            }
        }
        FormKind::Barrier(profile) if !grid.aligns_with(profile) => {
            return Err(FormError::Misaligned);
        }
        _ => {}
    }

    let m = grid.n_rays();
    let n = grid.nodes_per_ray();
    let h = grid.spacing();
    let layout = kind.origin_mode();

    let mut edge = vec![vec![0.0; n - 1]; m];
    for (j, ray) in edge.iter_mut().enumerate() {
        let w = measure.weight(j);
        for (i, e) in ray.iter_mut().enumerate() {
            let a_cell = match &kind {
                FormKind::Barrier(profile) => profile.conductivity(grid.node_r(i) + 0.5 * h),
                _ => 1.0,
            };
            *e = w * a_cell / (2.0 * h);
        }
    }

    let origin_block = match &kind {
        FormKind::Snapping(kappa) => {
            // kappa (diag(w) - w w^T); off-diagonals built once per pior pair so
            // the block is bitwise symmetric
            let w = measure.weights();
            let mut block = vec![vec![0.0; m]; m];
            for j in 0..m {
                block[j][j] = kappa * (w[j] * (1.0 - w[j]));
                for k in 0..j {
                    let off = -(kappa * (w[j] * w[k]));
                    block[j][k] = off;
                    block[k][j] = off;
                }
            }
            block
        }
        _ => Vec::new(),
    };

    let n_dofs = match layout {
        OriginMode::Shared => 1 + m * (n - 1),
        OriginMode::PerRay => m * n,
    };
    let mut mass = vec![0.0; n_dofs];
    match layout {
        OriginMode::Shared => {
            let mut origin_mass = 0.0;
            for j in 0..m {
                origin_mass += 0.5 * h * measure.weight(j);
            }
            mass[0] = origin_mass;
        }
        OriginMode::PerRay => {
            for j in 0..m {
                mass[j * n] = 0.5 * h * measure.weight(j);
            }
        }
    }
    for j in 0..m {
        let w = measure.weight(j);
        for i in 1..n {
            let node_mass = if i == n - 1 { 0.5 * h * w } else { h * w };
            let dof = match layout {
                OriginMode::Shared => 1 + j * (n - 1) + (i - 1),
                OriginMode::PerRay => j * n + i,
            };
            mass[dof] = node_mass;
        }
    }

    Ok(FormMatrix {
        kind,
        grid: *grid,
        measure: measure.clone(),
        layout,
        edge,
        origin_block,
        mass,
    })
}

/// Chain pivots and the origin Schur complement of `A + shift * Mass` after
/// eliminating every non-origin node (outer tip inward).
struct Elimination {
    /// `pivot[j][i]` for `i = 1..N-1`: modified diagonal of node `i` on ray `j`.
    pivot: Vec<Vec<f64>>,
    /// Dense origin system (1x1 for shared layouts, MxM otherwise).
    schur: Vec<Vec<f64>>,
}

impl FormMatrix {
    pub fn kind(&self) -> &FormKind {
        &self.kind
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn measure(&self) -> &AngularMeasure {
        &self.measure
    }

    pub fn layout(&self) -> OriginMode {
        self.layout
    }

    pub fn n_dofs(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Dense origin coupling block (empty unless the kind is Snapping).
    pub fn origin_coupling_block(&self) -> &[Vec<f64>] {
        &self.origin_block
    }

    /// Degree-of-freedom index of node `i` on ray `j`.
    pub fn dof(&self, ray: usize, node: usize) -> usize {
        let n = self.grid.nodes_per_ray();
        match self.layout {
            OriginMode::Shared => {
                if node == 0 {
                    0
                } else {
                    1 + ray * (n - 1) + (node - 1)
                }
            }
            OriginMode::PerRay => ray * n + node,
        }
    }

    /// Flattens a grid function into DOF order; its origin mode must match.
    pub fn function_to_dofs(&self, f: &DiscreteFunction) -> Result<Vec<f64>, FormError> {
        if f.origin_mode() != self.layout {
            return Err(FormError::OriginModeMismatch {
                expected: self.layout,
                found: f.origin_mode(),
            });
        }
        let mut x = vec![0.0; self.n_dofs()];
        for j in 0..self.grid.n_rays() {
            for i in 0..self.grid.nodes_per_ray() {
                x[self.dof(j, i)] = f.value(j, i);
            }
        }
        Ok(x)
    }

    /// Expands a DOF vector back into a grid function in this form's layout.
    pub fn dofs_to_function(&self, x: &[f64]) -> Result<DiscreteFunction, FormError> {
        if x.len() != self.n_dofs() {
            return Err(FormError::DofMismatch {
                expected: self.n_dofs(),
                found: x.len(),
            });
        }
        let mut values = vec![vec![0.0; self.grid.nodes_per_ray()]; self.grid.n_rays()];
        for (j, ray) in values.iter_mut().enumerate() {
            for (i, slot) in ray.iter_mut().enumerate() {
                *slot = x[self.dof(j, i)];
            }
        }
        Ok(DiscreteFunction::new(&self.grid, self.layout, values)?)
    }

    /// Quadratic form `x^T A x`, evaluated as an explicit sum of squares so it
    /// can never go negative through rounding.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64, FormError> {
        if x.len() != self.n_dofs() {
            return Err(FormError::DofMismatch {
                expected: self.n_dofs(),
                found: x.len(),
            });
        }
        let mut acc = 0.0;
        for j in 0..self.grid.n_rays() {
            for i in 0..self.grid.nodes_per_ray() - 1 {
                let d = x[self.dof(j, i + 1)] - x[self.dof(j, i)];
                acc += self.edge[j][i] * d * d;
            }
        }
        if let FormKind::Snapping(kappa) = &self.kind {
            let w = self.measure.weights();
            let mut coupling = 0.0;
            for j in 0..w.len() {
                for k in 0..j {
                    let d = x[self.dof(j, 0)] - x[self.dof(k, 0)];
                    coupling += w[j] * w[k] * d * d;
                }
            }
            acc += kappa * coupling;
        }
        Ok(acc)
    }

    /// Stiffness-matrix product `A x` from the edge/block structure.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, FormError> {
        if x.len() != self.n_dofs() {
            return Err(FormError::DofMismatch {
                expected: self.n_dofs(),
                found: x.len(),
            });
        }
        let mut out = vec![0.0; x.len()];
        for j in 0..self.grid.n_rays() {
            for i in 0..self.grid.nodes_per_ray() - 1 {
                let u = self.dof(j, i);
                let v = self.dof(j, i + 1);
                let t = self.edge[j][i] * (x[u] - x[v]);
                out[u] += t;
                out[v] -= t;
            }
        }
        if !self.origin_block.is_empty() {
            for j in 0..self.grid.n_rays() {
                let row = &self.origin_block[j];
                let mut acc = 0.0;
                for (k, b) in row.iter().enumerate() {
                    acc += b * x[self.dof(k, 0)];
                }
                out[self.dof(j, 0)] += acc;
            }
        }
        Ok(out)
    }

    /// `(A + shift * Mass) x`.
    fn shifted_matvec(&self, shift: f64, x: &[f64]) -> Result<Vec<f64>, FormError> {
        let mut out = self.matvec(x)?;
        for (o, (&m, &xi)) in out.iter_mut().zip(self.mass.iter().zip(x)) {
            *o += shift * m * xi;
        }
        Ok(out)
    }

    /// Infinity norm (maximum absolute row sum) of `A + shift * Mass`.
    fn shifted_inf_norm(&self, shift: f64) -> f64 {
        let m = self.grid.n_rays();
        let n = self.grid.nodes_per_ray();
        let mut best = 0.0_f64;
        match self.layout {
            OriginMode::Shared => {
                let mut row = shift * self.mass[0];
                for j in 0..m {
                    row += 2.0 * self.edge[j][0];
                }
                best = best.max(row);
            }
            OriginMode::PerRay => {
                for j in 0..m {
                    let mut row = shift * self.mass[self.dof(j, 0)] + 2.0 * self.edge[j][0];
                    if !self.origin_block.is_empty() {
                        for k in 0..m {
                            row += self.origin_block[j][k].abs();
                        }
                    }
                    best = best.max(row);
                }
            }
        }
        for j in 0..m {
            for i in 1..n {
                let mut row = shift * self.mass[self.dof(j, i)] + 2.0 * self.edge[j][i - 1];
                if i < n - 1 {
                    row += 2.0 * self.edge[j][i];
                }
                best = best.max(row);
            }
        }
        best
    }

    #[allow(clippy::needless_range_loop)]
    fn eliminate(&self, shift: f64) -> Elimination {
        let m = self.grid.n_rays();
        let n = self.grid.nodes_per_ray();
        let mut pivot = vec![vec![0.0; n]; m];
        let n_origin = match self.layout {
            OriginMode::Shared => 1,
            OriginMode::PerRay => m,
        };
        let mut schur = vec![vec![0.0; n_origin]; n_origin];

        // origin diagonals before chain folding
        match self.layout {
            OriginMode::Shared => {
                let mut d = shift * self.mass[0];
                for j in 0..m {
                    d += self.edge[j][0];
                }
                schur[0][0] = d;
            }
            OriginMode::PerRay => {
                for j in 0..m {
                    schur[j][j] = shift * self.mass[self.dof(j, 0)] + self.edge[j][0];
                }
                if !self.origin_block.is_empty() {
                    for j in 0..m {
                        for k in 0..m {
                            schur[j][k] += self.origin_block[j][k];
                        }
                    }
                }
            }
        }

        for j in 0..m {
            // fold ray j from the outer tip down to node 1
            let diag = |i: usize| -> f64 {
                let mut d = shift * self.mass[self.dof(j, i)] + self.edge[j][i - 1];
                if i < n - 1 {
                    d += self.edge[j][i];
                }
                d
            };
            pivot[j][n - 1] = diag(n - 1);
            for i in (1..n - 1).rev() {
                let t = self.edge[j][i];
                pivot[j][i] = diag(i) - t * t / pivot[j][i + 1];
            }
            let t0 = self.edge[j][0];
            let o = match self.layout {
                OriginMode::Shared => 0,
                OriginMode::PerRay => j,
            };
            schur[o][o] -= t0 * t0 / pivot[j][1];
        }

        Elimination { pivot, schur }
    }

    /// One forward/backward substitution pass with an existing elimination.
    fn substitute(&self, elim: &Elimination, rhs: &[f64]) -> Result<Vec<f64>, FormError> {
        let m = self.grid.n_rays();
        let n = self.grid.nodes_per_ray();

        // fold the right-hand side along each ray
        let mut folded = vec![vec![0.0; n]; m];
        let n_origin = elim.schur.len();
        let mut origin_rhs = vec![0.0; n_origin];
        match self.layout {
            OriginMode::Shared => origin_rhs[0] = rhs[0],
            OriginMode::PerRay => {
                for j in 0..m {
                    origin_rhs[j] = rhs[self.dof(j, 0)];
                }
            }
        }
        for j in 0..m {
            folded[j][n - 1] = rhs[self.dof(j, n - 1)];
            for i in (1..n - 1).rev() {
                let t = self.edge[j][i];
                folded[j][i] =
                    rhs[self.dof(j, i)] + t * folded[j][i + 1] / elim.pivot[j][i + 1];
            }
            let t0 = self.edge[j][0];
            let o = match self.layout {
                OriginMode::Shared => 0,
                OriginMode::PerRay => j,
            };
            origin_rhs[o] += t0 * folded[j][1] / elim.pivot[j][1];
        }

        let origin =
            dense_solve(elim.schur.clone(), origin_rhs).ok_or(FormError::SingularOrigin)?;

        let mut x = vec![0.0; self.n_dofs()];
        match self.layout {
            OriginMode::Shared => x[0] = origin[0],
            OriginMode::PerRay => {
                for j in 0..m {
                    x[self.dof(j, 0)] = origin[j];
                }
            }
        }
        for j in 0..m {
            let o = match self.layout {
                OriginMode::Shared => origin[0],
                OriginMode::PerRay => origin[j],
            };
            x[self.dof(j, 1)] = (folded[j][1] + self.edge[j][0] * o) / elim.pivot[j][1];
            for i in 2..n {
                x[self.dof(j, i)] = (folded[j][i]
                    + self.edge[j][i - 1] * x[self.dof(j, i - 1)])
                    / elim.pivot[j][i];
            }
        }
        Ok(x)
    }

    /// Solves `(lambda * Mass + A) x = rhs` by exact elimination plus
    /// iterative refinement, verifying the normwise backward error against
    /// [`SOLVER_TOLERANCE`]. Refinement reuses the factorization, so strong
    /// conductivity contrasts cost at most two extra substitution passes.
    pub fn solve_shifted(&self, lambda: f64, rhs: &[f64]) -> Result<Vec<f64>, FormError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(FormError::BadLambda(lambda));
        }
        if rhs.len() != self.n_dofs() {
            return Err(FormError::DofMismatch {
                expected: self.n_dofs(),
                found: rhs.len(),
            });
        }
        let elim = self.eliminate(lambda);
        let mut x = self.substitute(&elim, rhs)?;
        let norm_a = self.shifted_inf_norm(lambda);
        let rhs_inf = rhs.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));

        // never return a silently inaccurate solution: require the normwise
        // backward error a stable direct solve guarantees, a criterion that
        // does not degrade when the entry scales of the matrix and the
        // right-hand side are far apart
        let mut backward = f64::INFINITY;
        for _ in 0..3 {
            let mut residual = self.shifted_matvec(lambda, &x)?;
            for (r, &b) in residual.iter_mut().zip(rhs) {
                *r = b - *r;
            }
            let res_inf = residual.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            let x_inf = x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            let denom = norm_a * x_inf + rhs_inf;
            backward = if denom > 0.0 { res_inf / denom } else { res_inf };
            if backward <= SOLVER_TOLERANCE {
                return Ok(x);
            }
            let correction = self.substitute(&elim, &residual)?;
            for (xi, di) in x.iter_mut().zip(&correction) {
                *xi += di;
            }
        }
        Err(FormError::Solver { residual: backward })
    }

    /// Resolvent `f = (lambda * Mass + A)^{-1} Mass g` of the form at rate
    /// `lambda`. Functions whose origin mode differs from the form's layout
    /// are adapted first: per-ray data enters a shared-origin system through
    /// the measure average at the origin, and shared data is reinterpreted
    /// per-ray unchanged.
    pub fn resolvent(
        &self,
        lambda: f64,
        g: &DiscreteFunction,
    ) -> Result<DiscreteFunction, FormError> {
        let adapted;
        let g = if g.origin_mode() == self.layout {
            g
        } else {
            adapted = match self.layout {
                OriginMode::Shared => g.to_shared(&self.measure)?,
                OriginMode::PerRay => g.to_per_ray(),
            };
            &adapted
        };
        let g_dofs = self.function_to_dofs(g)?;
        let rhs: Vec<f64> = g_dofs
            .iter()
            .zip(self.mass.iter())
            .map(|(&gi, &mi)| mi * gi)
            .collect();
        let x = self.solve_shifted(lambda, &rhs)?;
        self.dofs_to_function(&x)
    }

    /// Number of generalized eigenvalues of `(A, Mass)` below
    /// [`KERNEL_TOLERANCE`]: the dimension of the (numerical) kernel.
    ///
    /// Computed as the negative inertia of `A - tol * Mass` via the same
    /// elimination used for solves (Sylvester's law: congruent matrices share
    /// pivot signs), so no eigenvector iteration is needed.
    pub fn kernel_dimension(&self) -> usize {
        let elim = self.eliminate(-KERNEL_TOLERANCE);
        let mut count = 0;
        for ray in &elim.pivot {
            for &p in &ray[1..] {
                if p < 0.0 {
                    count += 1;
                }
            }
        }
        count += jacobi_eigenvalues(elim.schur)
            .into_iter()
            .filter(|&e| e < 0.0)
            .count();
        count
    }

    /// Stiffness matrix as sorted coordinate triplets `(row, col, value)`,
    /// suitable for text export; symmetric entries carry bitwise-equal values.
    pub fn coo_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut rows: Vec<std::collections::BTreeMap<usize, f64>> =
            vec![std::collections::BTreeMap::new(); self.n_dofs()];
        let mut add = |r: usize, c: usize, v: f64| {
            *rows[r].entry(c).or_insert(0.0) += v;
        };
        for j in 0..self.grid.n_rays() {
            for i in 0..self.grid.nodes_per_ray() - 1 {
                let u = self.dof(j, i);
                let v = self.dof(j, i + 1);
                let e = self.edge[j][i];
                add(u, u, e);
                add(v, v, e);
                add(u, v, -e);
                add(v, u, -e);
            }
        }
        if !self.origin_block.is_empty() {
            for j in 0..self.grid.n_rays() {
                for k in 0..self.grid.n_rays() {
                    add(self.dof(j, 0), self.dof(k, 0), self.origin_block[j][k]);
                }
            }
        }
        rows.into_iter()
            .enumerate()
            .flat_map(|(r, cols)| cols.into_iter().map(move |(c, v)| (r, c, v)))
            .collect()
    }
}

/// Gaussian elimination with partial pivoting for the small dense origin
/// system (at most `n_rays` unknowns).
#[allow(clippy::needless_range_loop)]
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Eigenvalues of a small dense symmetric matrix by cyclic Jacobi rotations.
#[allow(clippy::needless_range_loop)]
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    if n <= 1 {
        return a.into_iter().map(|row| row[0]).collect();
    }
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter().map(|v| v * v))
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// One row of a barrier-family resolvent sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub gamma_bar: f64,
    pub norm: f64,
}

/// Output of [`mosco_sweep`]: per-profile resolvent distances to the target
/// form, plus the sweep geometry for reporting.
#[derive(Debug, Clone)]
pub struct MoscoSweep {
    pub rows: Vec<SweepRow>,
    pub lambda: f64,
    pub grid_h: f64,
    pub grid_l: f64,
    pub n_rays: usize,
    /// Set when the resistance trend of the profile family points away from
    /// the target form's phase.
    pub warning: Option<String>,
}

/// Resolvent-convergence sweep: for each barrier profile, assembles the
/// barrier form, applies its resolvent to `g`, and reports the L2 distance
/// (origin node excluded — see [`l2_distance_excluding_origin`]) to the
/// target form's resolvent of the same `g`.
pub fn mosco_sweep(
    profiles: &[BarrierProfile],
    target: &FormKind,
    lambda: f64,
    g: &DiscreteFunction,
    grid: &Grid,
    measure: &AngularMeasure,
) -> Result<MoscoSweep, FormError> {
    if profiles.len() < 2 {
        return Err(FormError::SweepTooShort(profiles.len()));
    }
    let target_matrix = assemble(target.clone(), grid, measure)?;
    let target_resolvent = target_matrix.resolvent(lambda, g)?;

    let rows: Vec<SweepRow> = profiles
        .par_iter()
        .map(|profile| -> Result<SweepRow, FormError> {
            let matrix = assemble(FormKind::Barrier(profile.clone()), grid, measure)?;
            let f = matrix.resolvent(lambda, g)?;
            Ok(SweepRow {
                epsilon: profile.epsilon(),
                gamma_bar: profile.resistance(),
                norm: l2_distance_excluding_origin(&f, &target_resolvent, grid, measure),
            })
        })
        .collect::<Result<_, _>>()?;

    let warning = phase_warning(&rows, target);
    Ok(MoscoSweep {
        rows,
        lambda,
        grid_h: grid.spacing(),
        grid_l: grid.outer_radius(),
        n_rays: grid.n_rays(),
        warning,
    })
}

/// Warns when the resistance trend of the swept family contradicts the
/// phase selected by the target form (growing resistance decouples the rays;
/// vanishing resistance glues them; a finite limit `gamma` matches the
/// elastic coupling `kappa = 1 / (2 gamma)`).
fn phase_warning(rows: &[SweepRow], target: &FormKind) -> Option<String> {
    let first = rows.first()?.gamma_bar;
    let last = rows.last()?.gamma_bar;
    match target {
        FormKind::Reflecting => {
            if last < first {
                return Some(format!(
                    "resistance falls from {first} to {last} but the reflecting limit needs it to grow"
                ));
            }
        }
        FormKind::Walsh => {
            if last > first {
                return Some(format!(
                    "resistance grows from {first} to {last} but the glued limit needs it to vanish"
                ));
            }
        }
        FormKind::Snapping(kappa) => {
            let gamma_target = 0.5 / kappa;
            let d_first = (first - gamma_target).abs();
            let d_last = (last - gamma_target).abs();
            if d_last > d_first + 1e-12 && d_last > 1e-9 * gamma_target.max(1.0) {
                return Some(format!(
                    "resistance moves away from {gamma_target} (|{first} - {gamma_target}| -> |{last} - {gamma_target}|)"
                ));
            }
        }
        FormKind::Barrier(_) => {}
    }
    None
}

/// One row of an elastic-coupling continuity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub gamma_bar: f64,
    pub kappa: f64,
    pub norm: f64,
}

/// Output of [`gamma_continuity_sweep`].
#[derive(Debug, Clone)]
pub struct GammaSweep {
    pub rows: Vec<GammaRow>,
    pub lambda: f64,
    pub grid_h: f64,
    pub grid_l: f64,
    pub n_rays: usize,
    /// L2 size (origin excluded) of the limit resolvent, for relative gates.
    pub limit_resolvent_norm: f64,
}

/// Continuity of the elastic form in its resistance parameter: for each
/// `gamma_n` assembles `Snapping(1 / (2 gamma_n))` and reports the resolvent
/// distance to the limit form (`gamma = inf` means the decoupled reflecting
/// form, i.e. zero coupling).
pub fn gamma_continuity_sweep(
    gammas: &[f64],
    gamma_limit: f64,
    lambda: f64,
    g: &DiscreteFunction,
    grid: &Grid,
    measure: &AngularMeasure,
) -> Result<GammaSweep, FormError> {
    if gammas.is_empty() {
        return Err(FormError::SweepTooShort(gammas.len()));
    }
    let kind_for = |gamma: f64| -> Result<FormKind, FormError> {
        if gamma.is_infinite() && gamma > 0.0 {
            Ok(FormKind::Reflecting)
        } else if gamma.is_finite() && gamma > 0.0 {
            Ok(FormKind::Snapping(0.5 / gamma))
        } else {
            Err(FormError::BadGamma(gamma))
        }
    };
    let limit_matrix = assemble(kind_for(gamma_limit)?, grid, measure)?;
    let limit_resolvent = limit_matrix.resolvent(lambda, g)?;
    let zero = DiscreteFunction::from_fn(grid, OriginMode::PerRay, |_, _| 0.0)?;
    let limit_resolvent_norm =
        l2_distance_excluding_origin(&limit_resolvent, &zero, grid, measure);

    let rows: Vec<GammaRow> = gammas
        .par_iter()
        .map(|&gamma| -> Result<GammaRow, FormError> {
            let kind = kind_for(gamma)?;
            let kappa = match kind {
                FormKind::Snapping(k) => k,
                _ => 0.0,
            };
            let matrix = assemble(kind, grid, measure)?;
            let f = matrix.resolvent(lambda, g)?;
            Ok(GammaRow {
                gamma_bar: gamma,
                kappa,
                norm: l2_distance_excluding_origin(&f, &limit_resolvent, grid, measure),
            })
        })
        .collect::<Result<_, _>>()?;

    Ok(GammaSweep {
        rows,
        lambda,
        grid_h: grid.spacing(),
        grid_l: grid.outer_radius(),
        n_rays: grid.n_rays(),
        limit_resolvent_norm,
    })
}

/// The interpolation that carries an elastic-domain function into the barrier
/// form's domain at matching energy: inside the collar it ramps linearly in
/// the barrier's scale from the common origin value
/// `c = (measure average of the origin values)` up to each ray's own origin
/// value at the collar edge,
/// `g_n(r) = c + (g_j(0) - c) * s(r) / gamma`, `s(r) = int_0^r dt / b(t)`,
/// and outside it continues with the shifted original, `g_j(r - epsilon)`.
///
/// Its collar energy telescopes exactly to
/// `(1 / (2 gamma)) * sum_j w_j (g_j(0) - c)^2`, the elastic coupling at
/// `kappa = 1 / (2 gamma)`; the tail beyond `L - epsilon` is truncated by the
/// shift.
pub fn recovery_sequence(
    g: &DiscreteFunction,
    profile: &BarrierProfile,
    grid: &Grid,
    measure: &AngularMeasure,
) -> Result<DiscreteFunction, FormError> {
    if measure.n_rays() != grid.n_rays() || g.values().len() != grid.n_rays() {
        return Err(FormError::RayCountMismatch {
            measure: measure.n_rays(),
            grid: grid.n_rays(),
        });
    }
    if !grid.aligns_with(profile) {
        return Err(FormError::Misaligned);
    }
    let h = grid.spacing();
    let k = grid
        .node_index(profile.epsilon())
        .ok_or(FormError::Misaligned)?;
    let gamma = profile.resistance();
    let origins = g.origin_values();
    let c = measure.average(&origins);

    // cumulative scale s at nodes 0..=k (midpoint conductivity per cell,
    // exact for aligned piecewise-constant profiles)
    let mut s = vec![0.0; k + 1];
    for i in 0..k {
        s[i + 1] = s[i] + h / profile.conductivity(grid.node_r(i) + 0.5 * h);
    }

    let n = grid.nodes_per_ray();
    let mut values = vec![vec![0.0; n]; grid.n_rays()];
    for (j, ray) in values.iter_mut().enumerate() {
        for (i, slot) in ray.iter_mut().enumerate() {
            *slot = if i < k {
                c + (origins[j] - c) * (s[i] / gamma)
            } else {
                g.value(j, i - k)
            };
        }
    }
    Ok(DiscreteFunction::new(grid, OriginMode::Shared, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::form_energy;
    use crate::grid::l2_norm;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform_setup(m: usize, n: usize, h: f64) -> (Grid, AngularMeasure) {
        (
            Grid::new(m, n, h).unwrap(),
            AngularMeasure::uniform(m).unwrap(),
        )
    }

    #[test]
    fn snapping_origin_block_is_kappa_times_projection_complement() {
        // M = 2, equal weights: block must be kappa * [[1/4, -1/4], [-1/4, 1/4]]
        let (grid, eta) = uniform_setup(2, 5, 0.25);
        let kappa = 1.7;
        let matrix = assemble(FormKind::Snapping(kappa), &grid, &eta).unwrap();
        let block = matrix.origin_coupling_block();
        assert_relative_eq!(block[0][0], 0.25 * kappa, epsilon = 1e-15);
        assert_relative_eq!(block[1][1], 0.25 * kappa, epsilon = 1e-15);
        assert_relative_eq!(block[0][1], -0.25 * kappa, epsilon = 1e-15);
        assert_eq!(block[0][1], block[1][0]);

        // general weights: kappa (diag(w) - w w^T), PSD with kernel = constants
        let grid3 = Grid::new(3, 5, 0.25).unwrap();
        let eta3 = AngularMeasure::from_weights(vec![0.5, 0.3, 0.2]).unwrap();
        let matrix3 = assemble(FormKind::Snapping(2.0), &grid3, &eta3).unwrap();
        let block3 = matrix3.origin_coupling_block();
        for j in 0..3 {
            for k in 0..3 {
                let w = eta3.weights();
                let expected = if j == k {
                    2.0 * w[j] * (1.0 - w[j])
                } else {
                    -2.0 * w[j] * w[k]
                };
                assert_relative_eq!(block3[j][k], expected, epsilon = 1e-15);
            }
        }
        let mut eigs = jacobi_eigenvalues(block3.to_vec());
        eigs.sort_by(f64::total_cmp);
        assert!(eigs[0].abs() < 1e-14, "kernel eigenvalue ~ 0");
        assert!(eigs[1] > 1e-3, "coupling must be definite off constants");
    }

    #[test]
    fn constants_are_annihilated_by_every_kind() {
        let (grid, eta) = uniform_setup(4, 20, 0.1);
        let profile = BarrierProfile::uniform(2.0, 0.5).unwrap();
        for kind in [
            FormKind::Reflecting,
            FormKind::Snapping(1.0),
            FormKind::Walsh,
            FormKind::Barrier(profile),
        ] {
            let matrix = assemble(kind, &grid, &eta).unwrap();
            let ones = vec![1.0; matrix.n_dofs()];
            let out = matrix.matvec(&ones).unwrap();
            // uniform weights make the row sums exactly zero
            assert!(out.iter().all(|&v| v == 0.0), "{:?}", matrix.kind());
            assert_eq!(matrix.quadratic_form(&ones).unwrap(), 0.0);
        }
    }

    #[test]
    fn unit_conductivity_barrier_assembles_bitwise_as_walsh() {
        let (grid, eta) = uniform_setup(3, 50, 0.02);
        let walsh = assemble(FormKind::Walsh, &grid, &eta).unwrap();
        for profile in [
            BarrierProfile::uniform(1.0, 0.1).unwrap(),
            BarrierProfile::power_law(1.0, 0.0, 0.2).unwrap(),
        ] {
            let barrier = assemble(FormKind::Barrier(profile), &grid, &eta).unwrap();
            assert_eq!(walsh.coo_triplets(), barrier.coo_triplets());
            assert_eq!(walsh.mass(), barrier.mass());
        }
    }

    #[test]
    fn mass_vector_is_the_trapezoid_rule() {
        let grid = Grid::new(2, 3, 0.5).unwrap();
        let eta = AngularMeasure::uniform(2).unwrap();
        let walsh = assemble(FormKind::Walsh, &grid, &eta).unwrap();
        // shared origin: h/2 summed over both half-weights = 0.25
        assert_relative_eq!(walsh.mass()[0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(walsh.mass()[walsh.dof(1, 1)], 0.25, epsilon = 1e-15);
        assert_relative_eq!(walsh.mass()[walsh.dof(1, 2)], 0.125, epsilon = 1e-15);
        let total: f64 = walsh.mass().iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-14); // both rays of length 1

        let refl = assemble(FormKind::Reflecting, &grid, &eta).unwrap();
        assert_relative_eq!(refl.mass()[refl.dof(0, 0)], 0.125, epsilon = 1e-15);
    }

    #[test]
    fn energies_match_the_direct_evaluator_across_kinds() {
        let (grid, eta) = uniform_setup(4, 40, 0.05);
        let profile = BarrierProfile::new(vec![0.0, 0.1, 0.25], vec![3.0, 0.5]).unwrap();
        let shapes = |j: usize, r: f64| (1.0 + j as f64) * (-(r + 0.3 * j as f64)).exp();
        let per_ray = DiscreteFunction::from_fn(&grid, OriginMode::PerRay, shapes).unwrap();
        let shared = per_ray.to_shared(&eta).unwrap();
        for kind in [
            FormKind::Reflecting,
            FormKind::Snapping(0.8),
            FormKind::Walsh,
            FormKind::Barrier(profile),
        ] {
            let matrix = assemble(kind.clone(), &grid, &eta).unwrap();
            let f = match matrix.layout() {
                OriginMode::Shared => &shared,
                OriginMode::PerRay => &per_ray,
            };
            let dofs = matrix.function_to_dofs(f).unwrap();
            let via_matrix = matrix.quadratic_form(&dofs).unwrap();
            let direct = form_energy(&kind, f, &grid, &eta).unwrap();
            assert_relative_eq!(via_matrix, direct, max_relative = 1e-12);
            // and the matvec route agrees with the sum-of-squares route
            let ax = matrix.matvec(&dofs).unwrap();
            let xtax: f64 = dofs.iter().zip(&ax).map(|(x, y)| x * y).sum();
            assert_relative_eq!(via_matrix, xtax, max_relative = 1e-10);
        }
    }

    #[test]
    fn quadratic_form_never_goes_negative() {
        let (grid, eta) = uniform_setup(3, 25, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [
            FormKind::Reflecting,
            FormKind::Snapping(2.5),
            FormKind::Walsh,
        ] {
            let matrix = assemble(kind, &grid, &eta).unwrap();
            for _ in 0..100 {
                let x: Vec<f64> = (0..matrix.n_dofs())
                    .map(|_| rng.random::<f64>() * 2.0 - 1.0)
                    .collect();
                assert!(matrix.quadratic_form(&x).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn structured_solver_matches_a_dense_reference() {
        // small PerRay and Shared systems solved densely from the exported
        // triplets must agree with the elimination solver
        let grid = Grid::new(3, 5, 0.3).unwrap();
        let eta = AngularMeasure::from_weights(vec![0.2, 0.5, 0.3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in [FormKind::Snapping(1.3), FormKind::Walsh, FormKind::Reflecting] {
            let matrix = assemble(kind, &grid, &eta).unwrap();
            let n = matrix.n_dofs();
            let lambda = 0.7;
            let rhs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();

            let mut dense = vec![vec![0.0; n]; n];
            for (r, c, v) in matrix.coo_triplets() {
                dense[r][c] += v;
            }
            for (i, row) in dense.iter_mut().enumerate() {
                row[i] += lambda * matrix.mass()[i];
            }
            let reference = dense_solve(dense, rhs.clone()).unwrap();
            let solved = matrix.solve_shifted(lambda, &rhs).unwrap();
            for (a, b) in solved.iter().zip(&reference) {
                assert_relative_eq!(a, b, max_relative = 1e-11, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn coo_export_is_sorted_and_bitwise_symmetric() {
        let (grid, eta) = uniform_setup(4, 8, 0.2);
        let matrix = assemble(FormKind::Snapping(0.9), &grid, &eta).unwrap();
        let triplets = matrix.coo_triplets();
        assert!(triplets.windows(2).all(|w| w[0].0 < w[1].0
            || (w[0].0 == w[1].0 && w[0].1 < w[1].1)));
        let lookup: std::collections::HashMap<(usize, usize), f64> = triplets
            .iter()
            .map(|&(r, c, v)| ((r, c), v))
            .collect();
        for &(r, c, v) in &triplets {
            assert_eq!(lookup[&(c, r)], v, "entry ({r},{c}) not symmetric");
        }
        // the triplets reproduce the structural matvec
        let x: Vec<f64> = (0..matrix.n_dofs()).map(|i| (i as f64 * 0.37).sin()).collect();
        let ax = matrix.matvec(&x).unwrap();
        let mut via_coo = vec![0.0; x.len()];
        for &(r, c, v) in &triplets {
            via_coo[r] += v * x[c];
        }
        for (a, b) in ax.iter().zip(&via_coo) {
            assert_relative_eq!(a, b, epsilon = 1e-12, max_relative = 1e-10);
        }
    }

    #[test]
    fn resolvent_of_a_constant_is_the_scaled_constant() {
        let (grid, eta) = uniform_setup(4, 30, 0.1);
        let profile = BarrierProfile::uniform(0.25, 0.3).unwrap();
        for kind in [
            FormKind::Reflecting,
            FormKind::Snapping(1.0),
            FormKind::Walsh,
            FormKind::Barrier(profile),
        ] {
            let matrix = assemble(kind, &grid, &eta).unwrap();
            let g = DiscreteFunction::from_fn(&grid, matrix.layout(), |_, _| 3.0).unwrap();
            for lambda in [0.5, 2.0] {
                let f = matrix.resolvent(lambda, &g).unwrap();
                for ray in f.values() {
                    for &v in ray {
                        assert_relative_eq!(v, 3.0 / lambda, max_relative = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn resolvent_support_shows_the_coupling_structure() {
        let (grid, eta) = uniform_setup(3, 200, 0.02);
        let bump = |j: usize, r: f64| {
            if j == 1 && (0.5..1.5).contains(&r) {
                (1.0 - (r - 1.0).abs() / 0.5).max(0.0)
            } else {
                0.0
            }
        };
        let g = DiscreteFunction::from_fn(&grid, OriginMode::PerRay, bump).unwrap();

        // decoupled rays: mass on ray 1 stays on ray 1, exactly
        let refl = assemble(FormKind::Reflecting, &grid, &eta).unwrap();
        let f_refl = refl.resolvent(1.0, &g).unwrap();
        for j in [0usize, 2] {
            assert!(f_refl.values()[j].iter().all(|&v| v == 0.0));
        }
        assert!(f_refl.values()[1].iter().any(|&v| v > 0.0));

        // glued origin spreads it everywhere
        let walsh = assemble(FormKind::Walsh, &grid, &eta).unwrap();
        let f_walsh = walsh.resolvent(1.0, &g).unwrap();
        for ray in f_walsh.values() {
            assert!(ray.iter().all(|&v| v > 0.0));
        }
        // and so does the elastic coupling
        let snap = assemble(FormKind::Snapping(1.0), &grid, &eta).unwrap();
        let f_snap = snap.resolvent(1.0, &g).unwrap();
        for ray in f_snap.values() {
            assert!(ray.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn resolvent_is_a_contraction_after_scaling() {
        let (grid, eta) = uniform_setup(3, 150, 0.02);
        let g = DiscreteFunction::from_fn(&grid, OriginMode::PerRay, |j, r| {
            ((j as f64 + 1.0) * r).sin()
        })
        .unwrap();
        let g_norm = l2_norm(&g, &grid, &eta);
        for kind in [FormKind::Snapping(2.0), FormKind::Reflecting] {
            let matrix = assemble(kind, &grid, &eta).unwrap();
            for lambda in [0.1, 1.0, 10.0] {
                let f = matrix.resolvent(lambda, &g).unwrap();
                assert!(lambda * l2_norm(&f, &grid, &eta) <= g_norm * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn resolvent_high_rate_asymptotics_recover_the_data() {
        let (grid, eta) = uniform_setup(2, 500, 0.01);
        let g = DiscreteFunction::from_fn(&grid, OriginMode::Shared, |_, r| (-r).exp()).unwrap();
        let walsh = assemble(FormKind::Walsh, &grid, &eta).unwrap();
        let lambda = 1e6;
        let f = walsh.resolvent(lambda, &g).unwrap();
        let scaled = DiscreteFunction::new(
            &grid,
            OriginMode::Shared,
            g.values()
                .iter()
                .map(|ray| ray.iter().map(|v| v / lambda).collect())
                .collect(),
        )
        .unwrap();
        let rel = crate::grid::l2_distance(&f, &scaled, &grid, &eta)
            / l2_norm(&scaled, &grid, &eta);
        assert!(rel < 1e-3, "rel = {rel}");
    }

    #[test]
    fn kernel_dimensions_reflect_the_origin_coupling() {
        let (grid, eta) = uniform_setup(4, 300, 0.01);
        let profile = BarrierProfile::power_law(1.0, -1.0, 0.05).unwrap();
        let dims = [
            (FormKind::Reflecting, 4),
            (FormKind::Snapping(1.0), 1),
            (FormKind::Snapping(1e-6), 1), // tiny but nonzero coupling still glues
            (FormKind::Walsh, 1),
            (FormKind::Barrier(profile), 1),
        ];
        for (kind, expected) in dims {
            let matrix = assemble(kind, &grid, &eta).unwrap();
            assert_eq!(matrix.kernel_dimension(), expected, "{:?}", matrix.kind());
        }
        // three rays: reflecting kernel tracks the ray count
        let (grid3, eta3) = uniform_setup(3, 100, 0.02);
        let refl = assemble(FormKind::Reflecting, &grid3, &eta3).unwrap();
        assert_eq!(refl.kernel_dimension(), 3);
    }

    #[test]
    fn misaligned_or_invalid_inputs_are_rejected() {
        let (grid, eta) = uniform_setup(2, 10, 0.1);
        let misaligned = BarrierProfile::uniform(1.0, 0.15).unwrap();
        assert!(matches!(
            assemble(FormKind::Barrier(misaligned), &grid, &eta),
            Err(FormError::Misaligned)
        ));
        assert!(matches!(
            assemble(FormKind::Snapping(0.0), &grid, &eta),
            Err(FormError::BadKappa(_))
        ));
        let matrix = assemble(FormKind::Walsh, &grid, &eta).unwrap();
        assert!(matches!(
            matrix.solve_shifted(-1.0, &vec![0.0; matrix.n_dofs()]),
            Err(FormError::BadLambda(_))
        ));
        let wrong_mode = DiscreteFunction::from_fn(&grid, OriginMode::Shared, |_, r| r).unwrap();
        assert!(matrix.function_to_dofs(&wrong_mode).is_ok());
        let per_ray = wrong_mode.to_per_ray();
        assert!(matches!(
            matrix.function_to_dofs(&per_ray),
            Err(FormError::OriginModeMismatch { .. })
        ));
    }

    #[test]
    fn recovery_sequence_ramps_in_scale_and_carries_exact_energy() {
        // flat antisymmetric data across a two-piece collar: the recovered
        // function climbs the scale function and its collar energy equals the
        // elastic coupling at kappa = 1/(2 gamma)
        let grid = Grid::new(2, 17, 0.0125).unwrap();
        let eta = AngularMeasure::uniform(2).unwrap();
        let profile = BarrierProfile::new(vec![0.0, 0.05, 0.1], vec![2.0, 4.0]).unwrap();
        assert_relative_eq!(profile.resistance(), 0.0375, epsilon = 1e-15);
        let g = DiscreteFunction::from_fn(&grid, OriginMode::PerRay, |j, _| {
            if j == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .unwrap();
        let rec = recovery_sequence(&g, &profile, &grid, &eta).unwrap();
        assert_eq!(rec.origin_mode(), OriginMode::Shared);
        assert_eq!(rec.value(0, 0), 0.0); // the averaged origin value c = 0
        // node at r = 0.05: s = 0.025, so value = 0.025 / 0.0375 = 2/3
        assert_relative_eq!(rec.value(0, 4), 2.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(rec.value(1, 4), -2.0 / 3.0, max_relative = 1e-13);
        // outside the collar the shifted original (still flat) continues
        assert_relative_eq!(rec.value(0, 8), 1.0, epsilon = 1e-13);
        assert_relative_eq!(rec.value(0, 16), 1.0, epsilon = 1e-13);

        // energy: pure collar term (1/(2 gamma)) sum_j w_j (g_j0 - c)^2,
        // which equals the pairwise elastic energy at kappa = 1/(2 gamma)
        let energy = form_energy(
            &FormKind::Barrier(profile.clone()),
            &rec,
            &grid,
            &eta,
        )
        .unwrap();
        let gamma = profile.resistance();
        assert_relative_eq!(energy, 1.0 / (2.0 * gamma), max_relative = 1e-12);
        let kappa = 0.5 / gamma;
        let elastic = form_energy(&FormKind::Snapping(kappa), &g, &grid, &eta).unwrap();
        assert_relative_eq!(energy, elastic, max_relative = 1e-12);
    }

    #[test]
    fn recovery_energy_error_shrinks_linearly_with_the_grid() {
        // non-flat data: the discrete energy approaches the continuum target
        // (left-rectangle quadrature of the radial energy on [0, L - eps]
        // plus the exact collar term) at first order in h
        let eta = AngularMeasure::uniform(2).unwrap();
        let profile = BarrierProfile::uniform(0.02, 0.01).unwrap(); // gamma = 0.5
        let gamma = profile.resistance();
        let sign = |j: usize| if j == 0 { 1.0 } else { -1.0 };
        let g_fn = |j: usize, r: f64| sign(j) * (-3.0 * r).exp();
        let g_prime_sq = |r: f64| 9.0 * (-6.0 * r).exp(); // (g_j')^2, ray-independent

        let mut errors = Vec::new();
        for &h in &[1e-3f64, 5e-4] {
            let n = (0.2 / h).round() as usize + 1;
            let grid = Grid::new(2, n, h).unwrap();
            let g = DiscreteFunction::from_fn(&grid, OriginMode::PerRay, g_fn).unwrap();
            let rec = recovery_sequence(&g, &profile, &grid, &eta).unwrap();
            let energy =
                form_energy(&FormKind::Barrier(profile.clone()), &rec, &grid, &eta).unwrap();

            let cells = ((grid.outer_radius() - profile.epsilon()) / h).round() as usize;
            let radial: f64 = (0..cells).map(|i| h * g_prime_sq(i as f64 * h)).sum();
            let collar = (1.0 / (2.0 * gamma)) * (0.5 * 1.0 + 0.5 * 1.0);
            let target = 0.5 * radial + collar;
            errors.push((energy - target).abs() / target);
        }
        let ratio = errors[1] / errors[0];
        assert!(
            (0.3..0.7).contains(&ratio),
            "expected first-order decay, errors {errors:?}"
        );
    }

    #[test]
    fn mosco_sweep_descends_to_the_matching_phase() {
        let grid = Grid::new(3, 401, 2.5e-3).unwrap();
        let eta = AngularMeasure::from_weights(vec![0.5, 0.25, 0.25]).unwrap();
        let g = DiscreteFunction::from_fn(&grid, OriginMode::PerRay, |j, r| {
            (1.0 + 0.5 * j as f64) * (-r).exp()
        })
        .unwrap();
        // constant resistance 0.5 family -> elastic limit kappa = 1
        let profiles: Vec<BarrierProfile> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&eps| BarrierProfile::power_law(2.0, -1.0, eps).unwrap())
            .collect();
        let sweep = mosco_sweep(
            &profiles,
            &FormKind::Snapping(1.0),
            1.0,
            &g,
            &grid,
            &eta,
        )
        .unwrap();
        assert!(sweep.warning.is_none());
        for pair in sweep.rows.windows(2) {
            assert!(
                pair[1].norm < pair[0].norm,
                "norms must decrease: {:?}",
                sweep.rows
            );
        }
        for row in &sweep.rows {
            assert_relative_eq!(row.gamma_bar, 0.5, epsilon = 1e-12);
        }

        // a unit-conductivity profile is the glued form already: zero distance
        let trivial = vec![
            BarrierProfile::uniform(1.0, 0.1).unwrap(),
            BarrierProfile::uniform(1.0, 0.05).unwrap(),
        ];
        let flat = mosco_sweep(&trivial, &FormKind::Walsh, 1.0, &g, &grid, &eta).unwrap();
        for row in &flat.rows {
            assert!(row.norm < 1e-12, "row {row:?}");
        }

        // growing resistance against a glued target draws the warning
        let contrary: Vec<BarrierProfile> = [0.1, 0.05]
            .iter()
            .map(|&eps| BarrierProfile::power_law(1.0, -2.0, eps).unwrap())
            .collect();
        let warned = mosco_sweep(&contrary, &FormKind::Walsh, 1.0, &g, &grid, &eta).unwrap();
        assert!(warned.warning.is_some());
    }

    #[test]
    fn gamma_sweep_converges_geometrically_and_reaches_reflecting() {
        let grid = Grid::new(4, 401, 2.5e-3).unwrap();
        let eta = AngularMeasure::uniform(4).unwrap();
        let g = DiscreteFunction::from_fn(&grid, OriginMode::PerRay, |j, r| {
            (-r).exp() + if j % 2 == 0 { 0.3 } else { -0.3 } * (-2.0 * r).exp()
        })
        .unwrap();
        let gammas: Vec<f64> = (1..=4).map(|n| 1.0 + 0.5f64.powi(n)).collect();
        let sweep = gamma_continuity_sweep(&gammas, 1.0, 1.0, &g, &grid, &eta).unwrap();
        for pair in sweep.rows.windows(2) {
            assert!(pair[1].norm < 0.8 * pair[0].norm, "{:?}", sweep.rows);
        }
        // equal resistance means identical matrices: distance exactly 0
        let same = gamma_continuity_sweep(&[1.0], 1.0, 1.0, &g, &grid, &eta).unwrap();
        assert_eq!(same.rows[0].norm, 0.0);

        // vanishing coupling approaches the decoupled form
        let toward_inf =
            gamma_continuity_sweep(&[5e5], f64::INFINITY, 1.0, &g, &grid, &eta).unwrap();
        assert!(toward_inf.rows[0].kappa <= 1e-6);
        assert!(toward_inf.limit_resolvent_norm > 0.0);
        assert!(
            toward_inf.rows[0].norm < 1e-6 * toward_inf.limit_resolvent_norm,
            "norm {} vs limit {}",
            toward_inf.rows[0].norm,
            toward_inf.limit_resolvent_norm
        );
        assert!(matches!(
            gamma_continuity_sweep(&[-1.0], 1.0, 1.0, &g, &grid, &eta),
            Err(FormError::BadGamma(_))
        ));
    }
}
