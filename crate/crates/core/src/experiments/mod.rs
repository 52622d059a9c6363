//! Parameter sweeps that turn the limit statements about `Λⱼ(α)` into
//! numbers: the one-dimensional transition at `α*`, the spike limit, Hill's
//! lower bound, the collapse on the torus and a projected-gradient minimizer.
//!
//! Every sweep is deterministic. Randomness (random `q`, optimizer kicks) is
//! supplied by the caller as sample vectors.

mod collapse;
mod hill;
mod optimize;
mod spike;
mod transition;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::eigensolve::{eigh, EigenResult};
use crate::error::{ensure, Result};
use crate::geometry::ManifoldGrid;
use crate::num::{log_log_slope, powf};
use crate::operator::{assemble_diagonal, Discretization};

pub use collapse::{excision_cutoff, torus_collapse, CollapseSetup};
pub use hill::{hill_check, hill_lower_bound, HillBound, HillBoundInput, HillBranch, HillCheck};
pub use optimize::{
    directional_derivative_fd, eigenvalue_gradient, minimize_potential, EigenGradient, MinimizeSetup, StepRule,
    StopReason, Trajectory, MONOTONE_TOL,
};
pub use spike::{negative_coupling_sweep, spike_limit, test_function_bound, SpikeSetup};
pub use transition::transition_sweep;

/// Residual bound every reported eigenvalue must meet, relative to `1 + |λ|`.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// One value of the swept parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub parameter: f64,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub derived: BTreeMap<String, f64>,
}

/// A one-parameter sweep. When `inner` is nonempty the sweep is
/// two-dimensional and `eigenvalues[i]` belongs to `inner[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: String,
    pub inner_parameter: Option<String>,
    pub inner: Vec<f64>,
    pub points: Vec<SweepPoint>,
    pub constants: BTreeMap<String, f64>,
    pub metadata: BTreeMap<String, String>,
    /// Named pass/fail outcomes of the sweep's own invariants.
    pub checks: BTreeMap<String, bool>,
}

impl SweepResult {
    pub(crate) fn new(parameter: &str, grid: &ManifoldGrid, discretization: Discretization) -> Self {
        let mut metadata = BTreeMap::new();
        metadata.insert("manifold".to_string(), grid.kind().name().to_string());
        let pts = grid.points();
        let lens = grid.lengths();
        let (n, l) = if grid.dim() == 1 {
            (format!("{}", pts[0]), format!("{:?}", lens[0]))
        } else {
            (format!("{}x{}", pts[0], pts[1]), format!("{:?}x{:?}", lens[0], lens[1]))
        };
        metadata.insert("nodes".to_string(), n);
        metadata.insert("lengths".to_string(), l);
        metadata.insert("discretization".to_string(), discretization.name().to_string());
        metadata.insert("residual_tol".to_string(), format!("{RESIDUAL_TOL:e}"));
        SweepResult {
            parameter: parameter.to_string(),
            inner_parameter: None,
            inner: Vec::new(),
            points: Vec::new(),
            constants: BTreeMap::new(),
            metadata,
            checks: BTreeMap::new(),
        }
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.parameter).collect()
    }

    /// Largest `residual / (1 + |λ|)` over all points.
    pub fn max_scaled_residual(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| p.eigenvalues.iter().zip(&p.residuals))
            .map(|(l, r)| r / (1.0 + l.abs()))
            .fold(0.0, f64::max)
    }

    /// Parameter values strictly increasing or strictly decreasing.
    pub fn is_monotone(&self) -> bool {
        let p = self.parameters();
        p.windows(2).all(|w| w[1] > w[0]) || p.windows(2).all(|w| w[1] < w[0])
    }

    pub fn residuals_ok(&self) -> bool {
        self.max_scaled_residual() <= RESIDUAL_TOL
    }

    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.get(key).copied()
    }

    pub(crate) fn set(&mut self, key: &str, value: f64) {
        self.constants.insert(key.to_string(), value);
    }

    pub(crate) fn check(&mut self, key: &str, pass: bool) {
        self.checks.insert(key.to_string(), pass);
    }

    pub(crate) fn finish(&mut self) {
        let mono = self.is_monotone();
        let res = self.residuals_ok();
        self.check("parameters_monotone", mono);
        self.check("residuals_within_tolerance", res);
    }
}

impl SweepPoint {
    pub(crate) fn new(parameter: f64, eig: &EigenResult) -> Self {
        SweepPoint {
            parameter,
            eigenvalues: eig.values.clone(),
            residuals: eig.residuals.clone(),
            derived: BTreeMap::new(),
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.derived.get(key).copied()
    }

    pub(crate) fn set(&mut self, key: &str, value: f64) {
        self.derived.insert(key.to_string(), value);
    }
}

/// Limit and leading order of `y(h) ≈ y* + C hᵖ` from three points.
///
/// The order is solved from the ratio of successive differences, so the
/// samples need not be geometrically spaced. Returns `None` when the
/// differences change sign or the order leaves `(0.05, 10)`.
pub fn richardson_limit(h: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d1 = y[0] - y[1];
    let d2 = y[1] - y[2];
    if !(d1 * d2 > 0.0) || h.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let target = d1 / d2;
    let ratio = |p: f64| (powf(h[0], p) - powf(h[1], p)) / (powf(h[1], p) - powf(h[2], p));
    let (mut lo, mut hi) = (0.05, 10.0);
    let (glo, ghi) = (ratio(lo) - target, ratio(hi) - target);
    if glo * ghi > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = ratio(mid) - target;
        if (g > 0.0) == (ghi > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let c = d2 / (powf(h[1], p) - powf(h[2], p));
    Some((y[2] - c * powf(h[2], p), p))
}

/// Gap between the `fd2` and `fourier` spectra per grid size, and its
/// observed order in `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationGap {
    pub sizes: Vec<usize>,
    pub gaps: Vec<f64>,
    pub order: f64,
}

/// Solves `-Δ + V` with both discretizations on each grid produced by
/// `setup(N)` and fits `max_j |λⱼ(fd2) - λⱼ(fourier)| ~ hᵖ`.
pub fn discretization_gap(
    sizes: &[usize],
    count: usize,
    mut setup: impl FnMut(usize) -> Result<(ManifoldGrid, Vec<f64>)>,
) -> Result<DiscretizationGap> {
    ensure!(sizes.len() >= 2, "need at least two grid sizes");
    ensure!(sizes.windows(2).all(|w| w[1] > w[0]), "grid sizes must increase");
    let mut gaps = Vec::with_capacity(sizes.len());
    let mut hs = Vec::with_capacity(sizes.len());
    for n in sizes {
        let (grid, v) = setup(*n)?;
        let a = eigh(
            &assemble_diagonal(&grid, v.clone(), 1.0, Discretization::Fourier),
            count,
        )?;
        let b = eigh(&assemble_diagonal(&grid, v, 1.0, Discretization::Fd2), count)?;
        let gap = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        gaps.push(gap);
        hs.push(grid.spacing(0));
    }
    let order = log_log_slope(&hs, &gaps);
    Ok(DiscretizationGap {
        sizes: sizes.to_vec(),
        gaps,
        order,
    })
}

pub(crate) fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// Least-squares polynomial fit of degree `< xs.len()` (at most 2); returns
/// the intercept.
pub(crate) fn fit_intercept(xs: &[f64], ys: &[f64]) -> f64 {
    match xs.len() {
        1 => ys[0],
        2 => ys[1] - (ys[0] - ys[1]) / (xs[0] - xs[1]) * xs[1],
        _ => {
            // normal equations for a + b x + c x²
            let mut m = [[0.0f64; 3]; 3];
            let mut r = [0.0f64; 3];
            for (x, y) in xs.iter().zip(ys) {
                let p = [1.0, *x, x * x];
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] += p[i] * p[j];
                    }
                    r[i] += p[i] * y;
                }
            }
            solve3(m, r)[0]
        }
    }
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> [f64; 3] {
    for k in 0..3 {
        let p = (k..3).max_by(|a, b| m[*a][k].abs().total_cmp(&m[*b][k].abs())).unwrap();
        m.swap(k, p);
        r.swap(k, p);
        for i in k + 1..3 {
            let f = m[i][k] / m[k][k];
            for j in k..3 {
                m[i][j] -= f * m[k][j];
            }
            r[i] -= f * r[k];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|j| m[i][j] * x[j]).sum();
        x[i] = (r[i] - s) / m[i][i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_recovers_power_law() {
        for p in [1.0, 1.5, 2.0, 3.0] {
            let h = [0.2, 0.1, 0.05];
            let y = h.map(|x| 3.0 + 0.7 * powf(x, p));
            let (lim, q) = richardson_limit(h, y).unwrap();
            assert!((lim - 3.0).abs() < 1e-10, "{lim}");
            assert!((q - p).abs() < 1e-8);
        }
        // unequal spacing
        let h = [0.2, 0.12, 0.07];
        let y = h.map(|x| -1.0 + 2.0 * x * x);
        let (lim, q) = richardson_limit(h, y).unwrap();
        assert!((lim + 1.0).abs() < 1e-10 && (q - 2.0).abs() < 1e-8);
        assert!(richardson_limit([0.2, 0.1, 0.05], [1.0, 2.0, 1.5]).is_none());
    }

    #[test]
    fn intercept_fits() {
        assert_eq!(fit_intercept(&[0.1], &[4.0]), 4.0);
        let xs = [0.04, 0.02];
        let ys = xs.map(|x| 1.0 + 3.0 * x);
        assert!((fit_intercept(&xs, &ys) - 1.0).abs() < 1e-14);
        let xs = [0.04, 0.02, 0.01, 0.005];
        let ys = xs.map(|x| -2.0 + 3.0 * x - 5.0 * x * x);
        assert!((fit_intercept(&xs, &ys) + 2.0).abs() < 1e-10);
    }
}
