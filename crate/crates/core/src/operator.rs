//! Assembly of the dense symmetric matrix of `H = -Δ + α F(κ)`.

use alloc::vec::Vec;

use crate::error::{ensure, Result};
use crate::geometry::{Basis1d, ManifoldGrid, ManifoldKind, Spectral};
use crate::linalg::DenseMatrix;
use crate::potentials::{CouplingFunction, PotentialField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Discretization {
    /// Exact differentiation of the trigonometric interpolant.
    #[default]
    Fourier,
    /// Second-order central differences (3-point / 5-point stencils).
    Fd2,
}

impl Discretization {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fourier => "fourier",
            Self::Fd2 => "fd2",
        }
    }
}

/// Dense matrix of `-Δ + α F(κ)` on a grid, plus assembly diagnostics.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    grid: ManifoldGrid,
    alpha: f64,
    discretization: Discretization,
    /// Diagonal potential term `α F(κ(xᵢ))`.
    potential: Vec<f64>,
    matrix: DenseMatrix,
    /// Largest `|A_ij - A_ji|` before symmetrization.
    asymmetry: f64,
}

/// Pre-symmetrization defect allowed, relative to the largest entry.
pub const ASYMMETRY_TOL: f64 = 1e-12;

/// Dense matrix of `-Δ` alone.
pub fn laplacian_matrix(grid: &ManifoldGrid, discretization: Discretization) -> DenseMatrix {
    let axis = |a: usize| {
        let n = grid.points()[a];
        match discretization {
            Discretization::Fourier => {
                DenseMatrix::from_row_major(n, Basis1d::new(n, grid.lengths()[a]).laplacian_matrix())
            }
            Discretization::Fd2 => {
                let h = grid.spacing(a);
                let c = 1.0 / (h * h);
                DenseMatrix::from_fn(n, |i, j| {
                    let d = (j + n - i) % n;
                    if d == 0 {
                        2.0 * c
                    } else if d == 1 || d == n - 1 {
                        -c
                    } else {
                        0.0
                    }
                })
            }
        }
    };
    match grid.kind() {
        ManifoldKind::Circle => axis(0),
        ManifoldKind::Torus => DenseMatrix::kronecker_sum(&axis(0), &axis(1)),
    }
}

/// Assembles `-Δ + α F(κ)`; `α` may be negative.
pub fn assemble(
    grid: &ManifoldGrid,
    potential: &PotentialField,
    coupling: &CouplingFunction,
    alpha: f64,
    discretization: Discretization,
) -> Result<SpectralOperator> {
    ensure!(potential.grid() == grid, "potential was sampled on a different grid");
    ensure!(alpha.is_finite(), "alpha must be finite");
    let diag: Vec<f64> = coupling
        .apply(potential.samples())
        .into_iter()
        .map(|f| alpha * f)
        .collect();
    ensure!(
        diag.iter().all(|v| v.is_finite()),
        "alpha F(kappa) is not finite on the grid"
    );
    Ok(assemble_diagonal(grid, diag, alpha, discretization))
}

/// `-Δ + diag(v)` for an already evaluated potential term.
pub fn assemble_diagonal(
    grid: &ManifoldGrid,
    potential: Vec<f64>,
    alpha: f64,
    discretization: Discretization,
) -> SpectralOperator {
    assert_eq!(potential.len(), grid.len(), "potential length must match the grid");
    let mut matrix = laplacian_matrix(grid, discretization);
    for (i, v) in potential.iter().enumerate() {
        matrix.add(i, i, *v);
    }
    let asymmetry = matrix.max_asymmetry();
    matrix.symmetrize();
    SpectralOperator {
        grid: grid.clone(),
        alpha,
        discretization,
        potential,
        matrix,
        asymmetry,
    }
}

impl SpectralOperator {
    pub fn grid(&self) -> &ManifoldGrid {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn discretization(&self) -> Discretization {
        self.discretization
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// The diagonal `α F(κ(xᵢ))`.
    pub fn potential_term(&self) -> &[f64] {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    /// Matrix-vector product `H u`.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        ensure!(
            u.len() == self.dim(),
            "vector has length {}, operator has dimension {}",
            u.len(),
            self.dim()
        );
        Ok(self.matrix.matvec(u))
    }

    /// `H u` with `-Δ` applied in its eigenbasis (Fourier) or by its stencil
    /// (fd2) instead of the dense matrix. Same operator, but the rounding
    /// scales with the spectral content of `u` rather than with `‖H‖`.
    pub fn apply_precise(&self, u: &[f64]) -> Result<Vec<f64>> {
        let spectral = match self.discretization {
            Discretization::Fourier => Some(Spectral::new(&self.grid)),
            Discretization::Fd2 => None,
        };
        self.apply_precise_with(spectral.as_ref(), u)
    }

    pub(crate) fn apply_precise_with(&self, spectral: Option<&Spectral>, u: &[f64]) -> Result<Vec<f64>> {
        ensure!(
            u.len() == self.dim(),
            "vector has length {}, operator has dimension {}",
            u.len(),
            self.dim()
        );
        let mut out = match (self.discretization, spectral) {
            (Discretization::Fourier, Some(s)) => s.neg_laplacian(u),
            (Discretization::Fourier, None) => Spectral::new(&self.grid).neg_laplacian(u),
            (Discretization::Fd2, _) => fd2_apply(&self.grid, u),
        };
        for ((o, v), x) in out.iter_mut().zip(&self.potential).zip(u) {
            *o += v * x;
        }
        Ok(out)
    }

    /// `∫ u H u / ∫ u²` with the grid quadrature and [`Self::apply_precise`].
    pub fn rayleigh_quotient(&self, u: &[f64]) -> Result<f64> {
        let hu = self.apply_precise(u)?;
        let den = self.grid.inner(u, u);
        ensure!(den > 0.0, "Rayleigh quotient of the zero vector");
        Ok(self.grid.inner(u, &hu) / den)
    }
}

/// Periodic second differences along each axis.
fn fd2_apply(grid: &ManifoldGrid, u: &[f64]) -> Vec<f64> {
    let n1 = grid.points()[0];
    let n2 = grid.points().get(1).copied().unwrap_or(1);
    let mut out = alloc::vec![0.0; u.len()];
    for axis in 0..grid.dim() {
        let h = grid.spacing(axis);
        let c = 1.0 / (h * h);
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let (prev, next) = if axis == 0 {
                    (((i1 + n1 - 1) % n1) * n2 + i2, ((i1 + 1) % n1) * n2 + i2)
                } else {
                    (i1 * n2 + (i2 + n2 - 1) % n2, i1 * n2 + (i2 + 1) % n2)
                };
                let i = i1 * n2 + i2;
                out[i] += c * ((u[i] - u[prev]) + (u[i] - u[next]));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::laplace_eigenbasis;
    use crate::num::PI;
    use crate::potentials::{constant_potential, CouplingKind};

    #[test]
    fn fourier_laplacian_reproduces_eigenpairs_below_quarter_nyquist() {
        for g in [
            ManifoldGrid::circle(1.0, 64).unwrap(),
            ManifoldGrid::torus(1.0, 1.5, 16, 16).unwrap(),
        ] {
            let op = assemble_diagonal(&g, alloc::vec![0.0; g.len()], 0.0, Discretization::Fourier);
            let quarter = g.len() / 4;
            for v in laplace_eigenbasis(&g, quarter).unwrap() {
                let hv = op.apply(&v.samples).unwrap();
                for (a, b) in hv.iter().zip(&v.samples) {
                    assert!((a - v.eigenvalue * b).abs() <= 1e-10 * (1.0 + v.eigenvalue));
                }
            }
            assert!(op.asymmetry() <= ASYMMETRY_TOL * op.matrix().inf_norm());
        }
    }

    #[test]
    fn constant_potential_shifts_by_alpha_f0() {
        let g = ManifoldGrid::circle(1.0, 32).unwrap();
        let k0 = 2.0 * PI;
        let f = CouplingFunction::square(k0);
        let op = assemble(&g, &constant_potential(&g, k0), &f, 0.1, Discretization::Fourier).unwrap();
        let v0 = alloc::vec![1.0; 32];
        let hv = op.apply(&v0).unwrap();
        for x in hv {
            assert!((x - 0.1 * 4.0 * PI * PI).abs() < 1e-9);
        }
        assert!((op.rayleigh_quotient(&v0).unwrap() - 0.4 * PI * PI).abs() < 1e-9);
    }

    #[test]
    fn fd2_stencil() {
        let g = ManifoldGrid::circle(2.0, 8).unwrap();
        let m = laplacian_matrix(&g, Discretization::Fd2);
        let c = 16.0;
        assert_eq!(m.row(0), &[2.0 * c, -c, 0.0, 0.0, 0.0, 0.0, 0.0, -c]);
        let t = ManifoldGrid::torus(1.0, 1.0, 8, 8).unwrap();
        let m = laplacian_matrix(&t, Discretization::Fd2);
        assert_eq!(m.get(0, 0), 4.0 * 64.0);
        assert_eq!(m.row(9).iter().filter(|v| **v != 0.0).count(), 5);
    }

    #[test]
    fn precise_apply_matches_matrix() {
        for g in [
            ManifoldGrid::circle(1.0, 24).unwrap(),
            ManifoldGrid::torus(1.0, 2.0, 8, 12).unwrap(),
        ] {
            let f = CouplingFunction::square(1.5);
            let k: Vec<f64> = (0..g.len()).map(|i| 1.5 + 0.3 * crate::num::sin(i as f64)).collect();
            let p = crate::potentials::project_to_constraint(&g, k, 1.5);
            let u: Vec<f64> = (0..g.len()).map(|i| crate::num::cos(0.7 * i as f64)).collect();
            for d in [Discretization::Fourier, Discretization::Fd2] {
                let op = assemble(&g, &p, &f, 0.8, d).unwrap();
                let a = op.apply(&u).unwrap();
                let b = op.apply_precise(&u).unwrap();
                let scale = op.matrix().inf_norm();
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() <= 1e-12 * scale, "{d:?}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn errors() {
        let g = ManifoldGrid::circle(1.0, 16).unwrap();
        let other = ManifoldGrid::circle(1.0, 32).unwrap();
        let f = CouplingFunction::new(CouplingKind::Identity, 1.0).unwrap();
        let p = constant_potential(&other, 1.0);
        assert!(assemble(&g, &p, &f, 1.0, Discretization::Fourier).is_err());
        let op = assemble(&g, &constant_potential(&g, 1.0), &f, 1.0, Discretization::Fd2).unwrap();
        assert!(op.apply(&[1.0; 3]).is_err());
        assert!(op.rayleigh_quotient(&[0.0; 16]).is_err());
    }
}
