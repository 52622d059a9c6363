//! Dense symmetric eigensolves and the spectral Poisson inverse.
//!
//! The default path reduces `H` to tridiagonal form with Householder
//! reflections, finds every eigenvalue with implicit-shift QL, and recovers
//! only the requested eigenvectors by inverse iteration on the tridiagonal
//! matrix followed by back-transformation. Cyclic Jacobi is kept as a slower
//! alternative that shares no code with the default path.

mod jacobi;
mod tridiag;

use alloc::vec::Vec;

use crate::error::{ensure, Result};
use crate::geometry::{ManifoldGrid, Spectral};
use crate::linalg::DenseMatrix;
use crate::num::sqrt;
use crate::operator::{Discretization, SpectralOperator};

pub use jacobi::jacobi_eigen;
pub use tridiag::{inverse_iteration, ql_eigenvalues, tridiagonalize, Tridiagonal, MAX_ITERATIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    #[default]
    HouseholderQl,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Diagnostics {
    pub ql_sweeps: usize,
    pub inverse_iterations: usize,
    pub jacobi_sweeps: usize,
}

/// Relative gap under which neighbouring eigenvalues form one multiplet.
pub const MULTIPLET_TOL: f64 = 1e-8;

/// Lowest eigenpairs of an operator.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<f64>,
    /// Eigenvectors normalized with the grid quadrature, `Σ w u² = 1`.
    pub vectors: Vec<Vec<f64>>,
    /// `‖H u - λ u‖ / ‖u‖` for each pair.
    pub residuals: Vec<f64>,
    /// Multiplet label of each eigenvalue; equal labels mean a degenerate group.
    pub multiplets: Vec<usize>,
    pub solver: Solver,
    pub diagnostics: Diagnostics,
}

impl EigenResult {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index ranges of the multiplets, in order.
    pub fn multiplet_ranges(&self) -> Vec<core::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.len() {
            if i == self.len() || self.multiplets[i] != self.multiplets[start] {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    pub fn max_relative_residual(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.residuals)
            .map(|(l, r)| r / (1.0 + l.abs()))
            .fold(0.0, f64::max)
    }
}

/// Unit eigenvectors (Euclidean) and ascending eigenvalues of a symmetric matrix.
pub fn eigh_dense(a: &DenseMatrix, count: usize, solver: Solver) -> Result<(Vec<f64>, Vec<Vec<f64>>, Diagnostics)> {
    let n = a.dim();
    ensure!(count >= 1 && count <= n, "count must be in 1..={n}, got {count}");
    let mut diag = Diagnostics::default();
    let (values, mut vectors) = match solver {
        Solver::HouseholderQl => {
            let t = tridiagonalize(a.clone());
            let (all, sweeps) = ql_eigenvalues(&t.diag, &t.off)?;
            diag.ql_sweeps = sweeps;
            let values = all[..count].to_vec();
            let (mut vecs, its) = inverse_iteration(&t, &values)?;
            diag.inverse_iterations = its;
            for v in &mut vecs {
                t.back_transform(v);
            }
            (values, vecs)
        }
        Solver::Jacobi => {
            let (vals, v, sweeps) = jacobi_eigen(a)?;
            diag.jacobi_sweeps = sweeps;
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|i, j| vals[*i].total_cmp(&vals[*j]));
            order.truncate(count);
            let values = order.iter().map(|i| vals[*i]).collect();
            let vecs = order.iter().map(|j| jacobi::column(&v, *j)).collect();
            (values, vecs)
        }
    };
    for v in &mut vectors {
        fix_sign(v);
    }
    // Rayleigh quotients against the original matrix are accurate to the
    // rounding of one matrix-vector product, well below the reduction error
    let mut pairs: Vec<(f64, Vec<f64>)> = vectors
        .into_iter()
        .zip(&values)
        .map(|(v, l)| {
            let q = crate::num::dot(&v, &a.matvec(&v));
            (if q.is_finite() { q } else { *l }, v)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (values, vectors) = pairs.into_iter().unzip();
    Ok((values, vectors, diag))
}

/// Largest-magnitude entry made positive (first one on ties).
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// The lowest `count` eigenpairs of `op` with the default solver.
pub fn eigh(op: &SpectralOperator, count: usize) -> Result<EigenResult> {
    eigh_with(op, count, Solver::default())
}

pub fn eigh_with(op: &SpectralOperator, count: usize, solver: Solver) -> Result<EigenResult> {
    let (values, mut vectors, diagnostics) = eigh_dense(op.matrix(), count, solver)?;
    let scale = 1.0 / sqrt(op.grid().weight());
    for v in &mut vectors {
        for x in v.iter_mut() {
            *x *= scale;
        }
    }
    // a dense matvec carries rounding of order eps ‖H‖, which for fine grids
    // swamps small eigenvalue differences; the precise apply does not
    let spectral = match op.discretization() {
        Discretization::Fourier => Some(Spectral::new(op.grid())),
        Discretization::Fd2 => None,
    };
    let g = op.grid();
    let mut pairs: Vec<(f64, Vec<f64>)> = values
        .iter()
        .zip(vectors)
        .map(|(l, v)| {
            let hv = op.apply_precise_with(spectral.as_ref(), &v)?;
            let q = g.inner(&v, &hv) / g.inner(&v, &v);
            Ok((if q.is_finite() { q } else { *l }, v))
        })
        .collect::<Result<_>>()?;
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (values, vectors): (Vec<f64>, Vec<Vec<f64>>) = pairs.into_iter().unzip();
    let residuals = values
        .iter()
        .zip(&vectors)
        .map(|(l, v)| residual(op, *l, v))
        .collect::<Result<Vec<_>>>()?;
    let mut multiplets = Vec::with_capacity(values.len());
    let mut label = 0;
    for i in 0..values.len() {
        if i > 0 && values[i] - values[i - 1] > MULTIPLET_TOL * (1.0 + values[i].abs()) {
            label += 1;
        }
        multiplets.push(label);
    }
    Ok(EigenResult {
        values,
        vectors,
        residuals,
        multiplets,
        solver,
        diagnostics,
    })
}

/// `‖H u - λ u‖ / ‖u‖` in the quadrature-weighted norm.
pub fn residual(op: &SpectralOperator, lambda: f64, u: &[f64]) -> Result<f64> {
    let hu = op.apply(u)?;
    let g = op.grid();
    let nu = g.norm(u);
    ensure!(nu > 0.0, "residual of the zero vector");
    let r: Vec<f64> = hu.iter().zip(u).map(|(h, x)| h - lambda * x).collect();
    Ok(g.norm(&r) / nu)
}

/// Zero-mean solution of `-Δu = rhs` by division in the analytic eigenbasis.
pub fn poisson_solve(grid: &ManifoldGrid, rhs: &[f64]) -> Result<Vec<f64>> {
    ensure!(
        rhs.len() == grid.len(),
        "right-hand side has {} entries, grid has {}",
        rhs.len(),
        grid.len()
    );
    let mean = grid.mean(rhs);
    let scale = crate::num::max_abs(rhs).max(1.0);
    ensure!(
        mean.abs() <= 1e-10 * scale,
        "right-hand side must have zero mean (mean = {mean:e})"
    );
    Ok(Spectral::new(grid).poisson(rhs))
}
