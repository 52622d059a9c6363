//! Second-order perturbation of the principal eigenvalue for potentials
//! `κ = κ₀ + ε q` with zero-mean `q`.
//!
//! With `F(κ₀ + εq) = f₀ + f₁ q ε + f₂ q² ε² + …` the principal eigenvalue
//! expands as `λ₀ = ℓ₀ + ℓ₁ ε + ℓ₂ ε² + …` where `ℓ₀ = α f₀`, `ℓ₁ = 0`, the
//! corrector solves `-Δφ₁ = -α f₁ q`, and
//!
//! ```text
//! ℓ₂ = (α f₂ / |M|) ∫ q² + (α f₁ / |M|) ∫ q φ₁
//!    = (f₂ / (α f₁² |M|)) ∫ (Δφ₁)² - (1 / |M|) ∫ |∇φ₁|²
//!    = (α / |M|) Σ_{j≥1} c_j² (f₂ - α f₁² / μ_j),   q = Σ c_j v_j.
//! ```
//!
//! The last form makes the sign law explicit: every term is positive once
//! `α < α* = μ₁ f₂ / f₁²`.

use alloc::vec::Vec;

use crate::eigensolve::{eigh, poisson_solve};
use crate::error::{ensure, Error, Result};
use crate::geometry::{ManifoldGrid, Spectral};
use crate::num::{log_log_slope, max_abs};
use crate::operator::{assemble, Discretization};
use crate::potentials::{constant_potential, project_to_constraint, CouplingFunction};

/// `|f₁|` below which the critical coupling is undefined.
pub const F1_TOL: f64 = 1e-12;

/// `α* = μ₁ F''(κ₀) / (2 F'(κ₀)²) = μ₁ f₂ / f₁²`.
pub fn critical_alpha(coupling: &CouplingFunction, mu1: f64) -> Result<f64> {
    let f1 = coupling.f1();
    if f1.abs() <= F1_TOL {
        return Err(Error::UndefinedCriticalCoupling { f1 });
    }
    Ok(mu1 * coupling.f2() / (f1 * f1))
}

fn check_zero_mean(grid: &ManifoldGrid, q: &[f64]) -> Result<()> {
    ensure!(
        q.len() == grid.len(),
        "perturbation has {} samples, grid has {}",
        q.len(),
        grid.len()
    );
    let m = grid.mean(q);
    ensure!(
        m.abs() <= 1e-10 * max_abs(q).max(1.0),
        "perturbation must have zero mean (mean = {m:e})"
    );
    Ok(())
}

/// Zero-mean corrector `φ₁` with `-Δφ₁ = -α f₁ q`.
pub fn solve_phi1(grid: &ManifoldGrid, q: &[f64], coupling: &CouplingFunction, alpha: f64) -> Result<Vec<f64>> {
    check_zero_mean(grid, q)?;
    let c = -alpha * coupling.f1();
    let rhs: Vec<f64> = q.iter().map(|v| c * v).collect();
    poisson_solve(grid, &rhs)
}

/// `ℓ₂` by its three algebraically equivalent routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ell2 {
    /// `(α f₂/|M|) ∫ q² + (α f₁/|M|) ∫ q φ₁`.
    pub value: f64,
    /// `(f₂/(α f₁²|M|)) ∫ (Δφ₁)² - (1/|M|) ∫ |∇φ₁|²`; undefined when `α f₁ = 0`.
    pub gradient_form: Option<f64>,
    /// `(α/|M|) Σ_{j≥1} c_j² (f₂ - α f₁²/μ_j)`.
    pub spectral_form: f64,
}

impl Ell2 {
    /// Largest disagreement between the available forms.
    pub fn spread(&self) -> f64 {
        let mut s = (self.value - self.spectral_form).abs();
        if let Some(g) = self.gradient_form {
            s = s.max((self.value - g).abs()).max((g - self.spectral_form).abs());
        }
        s
    }
}

/// Second-order coefficient of `λ₀(κ₀ + εq)`. `q` should be band-limited
/// below the Nyquist mode for the gradient form to be exact.
pub fn ell2(grid: &ManifoldGrid, q: &[f64], coupling: &CouplingFunction, alpha: f64) -> Result<Ell2> {
    check_zero_mean(grid, q)?;
    ensure!(
        q.iter().any(|v| *v != 0.0),
        "perturbation q must not vanish identically"
    );
    let phi1 = solve_phi1(grid, q, coupling, alpha)?;
    Ok(ell2_with(grid, q, &phi1, coupling, alpha))
}

fn ell2_with(grid: &ManifoldGrid, q: &[f64], phi1: &[f64], coupling: &CouplingFunction, alpha: f64) -> Ell2 {
    let vol = grid.measure();
    let (f1, f2) = (coupling.f1(), coupling.f2());
    let value = alpha * f2 / vol * grid.inner(q, q) + alpha * f1 / vol * grid.inner(q, phi1);

    let spectral = Spectral::new(grid);
    let gradient_form = if alpha * f1 != 0.0 {
        let lap = spectral.neg_laplacian(phi1);
        let grad_sq: f64 = spectral.gradient(phi1).iter().map(|g| grid.inner(g, g)).sum();
        Some(f2 / (alpha * f1 * f1 * vol) * grid.inner(&lap, &lap) - grad_sq / vol)
    } else {
        None
    };

    let coeffs = spectral.analyze(q);
    let spectral_form = alpha / vol
        * coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(c, a)| a * a * (f2 - alpha * f1 * f1 / spectral.eigenvalue(c)))
            .sum::<f64>();
    Ell2 {
        value,
        gradient_form,
        spectral_form,
    }
}

/// The expansion data `(ℓ₀, ℓ₁, ℓ₂, α*)` together with `φ₁` and `q`.
#[derive(Debug, Clone)]
pub struct PerturbationReport {
    pub ell0: f64,
    pub ell1: f64,
    pub ell2: Ell2,
    /// `None` when `F'(κ₀)` vanishes.
    pub alpha_star: Option<f64>,
    pub phi1: Vec<f64>,
    pub q: Vec<f64>,
    /// `mean(φ₁)`, zero in the chosen gauge.
    pub phi1_mean: f64,
    /// `max |-Δφ₁ + α f₁ q|` from the spectral Laplacian.
    pub corrector_residual: f64,
}

pub fn perturbation_report(
    grid: &ManifoldGrid,
    q: &[f64],
    coupling: &CouplingFunction,
    alpha: f64,
) -> Result<PerturbationReport> {
    let e2 = ell2(grid, q, coupling, alpha)?;
    let phi1 = solve_phi1(grid, q, coupling, alpha)?;
    let lap = Spectral::new(grid).neg_laplacian(&phi1);
    let corrector_residual = lap
        .iter()
        .zip(q)
        .map(|(l, qv)| (l + alpha * coupling.f1() * qv).abs())
        .fold(0.0, f64::max);
    let mu1 = crate::geometry::first_nonzero_eigenvalue(grid);
    Ok(PerturbationReport {
        ell0: alpha * coupling.f0(),
        // ℓ₁ = α f₁ ⟨q, φ₀⟩ / |M| with φ₀ = 1
        ell1: alpha * coupling.f1() * grid.mean(q),
        ell2: e2,
        alpha_star: critical_alpha(coupling, mu1).ok(),
        phi1_mean: grid.mean(&phi1),
        phi1,
        q: q.to_vec(),
        corrector_residual,
    })
}

/// Direct eigensolves against the truncated expansion `ℓ₀ + ℓ₂ ε²`.
#[derive(Debug, Clone)]
pub struct ExpansionReport {
    pub epsilons: Vec<f64>,
    /// `λ₀(κ₀ + εq)` for each `ε`.
    pub lambdas: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `λ₀` of the constant potential, solved on the same operator.
    pub lambda_constant: f64,
    pub ell0: f64,
    pub ell2: f64,
    /// `|λ₀(ε) - ℓ₀ - ℓ₂ ε²|`.
    pub remainders: Vec<f64>,
    /// Log-log slope of the remainders against `ε`.
    pub fitted_order: f64,
}

impl ExpansionReport {
    /// `λ₀(ε) - λ₀(0)` for each `ε`.
    pub fn differences(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| l - self.lambda_constant).collect()
    }
}

/// Fraction of `|κ₀|` the perturbation amplitude may reach.
pub const EPSILON_GUARD: f64 = 0.1;

pub fn verify_expansion(
    grid: &ManifoldGrid,
    q: &[f64],
    coupling: &CouplingFunction,
    alpha: f64,
    epsilons: &[f64],
    discretization: Discretization,
) -> Result<ExpansionReport> {
    ensure!(epsilons.len() >= 2, "need at least two epsilon values");
    ensure!(epsilons.iter().all(|e| *e > 0.0), "epsilon values must be positive");
    ensure!(
        epsilons.windows(2).all(|w| w[1] < w[0]),
        "epsilon values must be strictly decreasing"
    );
    let k0 = coupling.kappa0();
    let qmax = max_abs(q);
    ensure!(
        epsilons[0] * qmax <= EPSILON_GUARD * k0.abs(),
        "epsilon * max|q| = {} leaves the perturbative range ({} |kappa0|)",
        epsilons[0] * qmax,
        EPSILON_GUARD
    );
    let e2 = ell2(grid, q, coupling, alpha)?.value;
    let ell0 = alpha * coupling.f0();

    let base = assemble(grid, &constant_potential(grid, k0), coupling, alpha, discretization)?;
    let lambda_constant = eigh(&base, 1)?.values[0];

    let mut lambdas = Vec::with_capacity(epsilons.len());
    let mut residuals = Vec::with_capacity(epsilons.len());
    for eps in epsilons {
        let samples = q.iter().map(|v| k0 + eps * v).collect();
        let field = project_to_constraint(grid, samples, k0);
        let op = assemble(grid, &field, coupling, alpha, discretization)?;
        let r = eigh(&op, 1)?;
        lambdas.push(r.values[0]);
        residuals.push(r.residuals[0]);
    }
    let remainders: Vec<f64> = epsilons
        .iter()
        .zip(&lambdas)
        .map(|(e, l)| (l - ell0 - e2 * e * e).abs())
        .collect();
    let fitted_order = log_log_slope(epsilons, &remainders);
    Ok(ExpansionReport {
        epsilons: epsilons.to_vec(),
        lambdas,
        residuals,
        lambda_constant,
        ell0,
        ell2: e2,
        remainders,
        fitted_order,
    })
}

/// Eigenvalues `γ_j = (α μ_j - 1) μ_j` of `α Δ² + Δ`.
pub fn lemma_gamma(alpha: f64, mus: &[f64]) -> Result<Vec<f64>> {
    ensure!(alpha > 0.0, "alpha must be positive, got {alpha}");
    Ok(mus.iter().map(|mu| (alpha * mu - 1.0) * mu).collect())
}

/// `I_α(u) = ∫ α (Δu)² - |∇u|²` with spectral derivatives.
pub fn functional_i(grid: &ManifoldGrid, u: &[f64], alpha: f64) -> f64 {
    let spectral = Spectral::new(grid);
    let lap = spectral.neg_laplacian(u);
    let grad_sq: f64 = spectral.gradient(u).iter().map(|g| grid.inner(g, g)).sum();
    alpha * grid.inner(&lap, &lap) - grad_sq
}

/// `Σ_j a_j² (α μ_j² - μ_j)` for `u = Σ a_j v_j`; equals [`functional_i`]
/// below the Nyquist mode.
pub fn functional_i_modal(grid: &ManifoldGrid, u: &[f64], alpha: f64) -> f64 {
    let spectral = Spectral::new(grid);
    spectral
        .analyze(u)
        .iter()
        .enumerate()
        .map(|(c, a)| {
            let mu = spectral.eigenvalue(c);
            a * a * (alpha * mu * mu - mu)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::laplace_eigenbasis;
    use crate::num::PI;
    use crate::potentials::CouplingKind;

    fn unit_circle(n: usize) -> ManifoldGrid {
        ManifoldGrid::circle(1.0, n).unwrap()
    }

    #[test]
    fn critical_alpha_values() {
        let mu1 = 4.0 * PI * PI;
        let f = CouplingFunction::square(2.0 * PI);
        assert!((critical_alpha(&f, mu1).unwrap() - 0.25).abs() < 1e-15);
        for k0 in [0.5, 3.0, -2.0] {
            let f = CouplingFunction::square(k0);
            let want = mu1 / (4.0 * k0 * k0);
            assert!((critical_alpha(&f, mu1).unwrap() - want).abs() < 1e-12 * want);
        }
        let lin = CouplingFunction::new(CouplingKind::Identity, 1.0).unwrap();
        assert_eq!(critical_alpha(&lin, mu1).unwrap(), 0.0);
        let flat = CouplingFunction::square(0.0);
        assert!(matches!(
            critical_alpha(&flat, mu1),
            Err(Error::UndefinedCriticalCoupling { .. })
        ));
    }

    #[test]
    fn phi1_single_mode() {
        let g = unit_circle(32);
        let b = laplace_eigenbasis(&g, 2).unwrap();
        let f = CouplingFunction::square(2.0 * PI);
        let alpha = 0.3;
        let phi = solve_phi1(&g, &b[1].samples, &f, alpha).unwrap();
        for (p, v) in phi.iter().zip(&b[1].samples) {
            let want = -alpha / b[1].eigenvalue * f.f1() * v;
            assert!((p - want).abs() < 1e-14);
        }
        assert!(solve_phi1(&g, &[0.0; 32], &f, alpha).unwrap().iter().all(|x| *x == 0.0));
        assert!(solve_phi1(&g, &b[1].samples, &f, 0.0)
            .unwrap()
            .iter()
            .all(|x| *x == 0.0));
        assert!(solve_phi1(&g, &[1.0; 32], &f, alpha).is_err());
    }

    #[test]
    fn ell2_single_modes() {
        let g = unit_circle(64);
        let b = laplace_eigenbasis(&g, 4).unwrap();
        let f = CouplingFunction::square(2.0 * PI);
        let alpha = 0.2;
        let v1 = ell2(&g, &b[1].samples, &f, alpha).unwrap();
        let want = alpha * (f.f2() - alpha * f.f1() * f.f1() / b[1].eigenvalue);
        assert!((v1.value - want).abs() < 1e-12);
        assert!(v1.spread() < 1e-10);
        // next wavenumber: larger μ, larger ℓ₂
        let v2 = ell2(&g, &b[3].samples, &f, alpha).unwrap();
        let want2 = alpha * (f.f2() - alpha * f.f1() * f.f1() / b[3].eigenvalue);
        assert!((v2.value - want2).abs() < 1e-12);
        assert!(v2.value > v1.value);
        // transition value
        let at = ell2(&g, &b[1].samples, &f, 0.25).unwrap();
        assert!(at.value.abs() < 1e-12, "{}", at.value);
        assert!(ell2(&g, &[0.0; 64], &f, 0.25).is_err());
    }

    #[test]
    fn report_gauge_and_ell1() {
        let g = ManifoldGrid::torus(1.0, 1.0, 16, 16).unwrap();
        let b = laplace_eigenbasis(&g, 6).unwrap();
        let q: Vec<f64> = b[1]
            .samples
            .iter()
            .zip(&b[5].samples)
            .map(|(x, y)| x + 0.5 * y)
            .collect();
        let f = CouplingFunction::new(CouplingKind::Exp, 0.5).unwrap();
        let r = perturbation_report(&g, &q, &f, 1.0).unwrap();
        assert!(r.ell1.abs() <= 1e-10);
        assert!(r.phi1_mean.abs() <= 1e-10);
        assert!(r.corrector_residual < 1e-10);
        assert!(r.ell2.spread() < 1e-9);
        assert_eq!(r.ell0, f.f0());
    }

    #[test]
    fn lemma_values() {
        let mu1 = 4.0 * PI * PI;
        let g = lemma_gamma(1.0 / mu1, &[0.0, mu1]).unwrap();
        assert_eq!(g[0], 0.0);
        assert!(g[1].abs() < 1e-12);
        let g = lemma_gamma(2.0 / mu1, &[mu1]).unwrap();
        assert!((g[0] - mu1).abs() < 1e-12);
        assert!(lemma_gamma(0.0, &[1.0]).is_err());
    }

    #[test]
    fn functional_single_mode_and_constant() {
        let g = unit_circle(32);
        let b = laplace_eigenbasis(&g, 2).unwrap();
        let mu = b[1].eigenvalue;
        for alpha in [0.5 / mu, 1.0 / mu, 3.0 / mu] {
            let i = functional_i(&g, &b[1].samples, alpha);
            assert!((i - (alpha * mu * mu - mu)).abs() < 1e-9);
        }
        assert!(functional_i(&g, &b[1].samples, 0.5 / mu) < 0.0);
        assert!(functional_i(&g, &[2.0; 32], 1.0).abs() < 1e-12);
    }

    #[test]
    fn expansion_signs() {
        let g = unit_circle(64);
        let b = laplace_eigenbasis(&g, 2).unwrap();
        let f = CouplingFunction::square(2.0 * PI);
        let eps = [0.04, 0.02, 0.01];
        let sub = verify_expansion(&g, &b[1].samples, &f, 0.1, &eps, Discretization::Fourier).unwrap();
        assert!(sub.differences().iter().all(|d| *d > 0.0));
        let sup = verify_expansion(&g, &b[1].samples, &f, 0.5, &eps, Discretization::Fourier).unwrap();
        assert!(sup.differences().iter().all(|d| *d < 0.0));
        assert!(sub.fitted_order >= 2.7 && sup.fitted_order >= 2.7);
        assert!(verify_expansion(&g, &b[1].samples, &f, 0.1, &[0.01, 0.02], Discretization::Fourier).is_err());
        assert!(verify_expansion(&g, &b[1].samples, &f, 0.1, &[1.0, 0.5], Discretization::Fourier).is_err());
    }
}
