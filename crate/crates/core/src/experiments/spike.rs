use alloc::vec::Vec;

use super::{richardson_limit, strictly_decreasing, SweepPoint, SweepResult};
use crate::eigensolve::eigh;
use crate::error::{ensure, Result};
use crate::geometry::{first_nonzero_eigenvalue, ManifoldGrid};
use crate::num::{sin, sqrt, PI};
use crate::operator::{assemble, Discretization};
use crate::perturbation::critical_alpha;
use crate::potentials::{spike_potential_1d, CouplingFunction, Smoothing};

/// Shared inputs of the one-dimensional spike sweeps.
#[derive(Debug, Clone)]
pub struct SpikeSetup<'a> {
    pub grid: &'a ManifoldGrid,
    pub coupling: &'a CouplingFunction,
    pub alpha: f64,
    /// Spike widths, strictly decreasing.
    pub deltas: &'a [f64],
    pub smoothing: Smoothing,
    pub discretization: Discretization,
}

/// `J_δ` for `u = √(2/L) sin(πs/L)` against the hard spike of width `δ`:
/// `μ₁/4 + αF(0) + α (F(κ₀L/δ) - F(0)) (2/L) ∫₀^δ sin²(πs/L) ds`.
pub fn test_function_bound(coupling: &CouplingFunction, length: f64, alpha: f64, delta: f64) -> f64 {
    let height = coupling.kappa0() * length / delta;
    let f0 = coupling.eval(0.0);
    let integral = 0.5 * delta - length * sin(2.0 * PI * delta / length) / (4.0 * PI);
    PI * PI / (length * length) + alpha * f0 + alpha * (coupling.eval(height) - f0) * 2.0 / length * integral
}

fn spike_sweep(setup: &SpikeSetup<'_>) -> Result<SweepResult> {
    let SpikeSetup {
        grid,
        coupling,
        alpha,
        deltas,
        smoothing,
        discretization,
    } = *setup;
    ensure!(grid.dim() == 1, "spike sweeps run on a circle grid");
    ensure!(!deltas.is_empty(), "delta list is empty");
    ensure!(strictly_decreasing(deltas), "delta values must be strictly decreasing");
    let l = grid.measure();
    let mu1 = first_nonzero_eigenvalue(grid);
    let limit = 0.25 * mu1 + alpha * coupling.eval(0.0);

    // the discrete test function: √(2/L) |sin(πs/L)|, vanishing at the spike
    let u: Vec<f64> = (0..grid.len())
        .map(|i| sqrt(2.0 / l) * sin(PI * grid.node(i)[0] / l).abs())
        .collect();

    let mut out = SweepResult::new("delta", grid, discretization);
    out.set("mu1", mu1);
    out.set("limit", limit);
    out.set("alpha", alpha);
    out.set("kappa0", coupling.kappa0());
    for &delta in deltas {
        let field = spike_potential_1d(grid, coupling.kappa0(), delta, smoothing)?;
        let op = assemble(grid, &field, coupling, alpha, discretization)?;
        let r = eigh(&op, 1)?;
        let mut p = SweepPoint::new(delta, &r);
        p.set("excess", r.values[0] - limit);
        p.set("test_function_rayleigh", op.rayleigh_quotient(&u)?);
        p.set("test_function_analytic", test_function_bound(coupling, l, alpha, delta));
        p.set("peak", field.samples().iter().fold(f64::MIN, |m, v| m.max(*v)));
        out.points.push(p);
    }
    Ok(out)
}

/// `λ₀(κ_δ)` along shrinking spikes for `α > α*`, where the infimum over
/// the constraint set is `μ₁/4 + αF(0)` and is not attained.
///
/// The three finest widths are Richardson-extrapolated with a fitted order
/// (`extrapolated`, `fitted_order`); `extrapolation_error` is relative to
/// the limit.
pub fn spike_limit(setup: &SpikeSetup<'_>) -> Result<SweepResult> {
    let mu1 = first_nonzero_eigenvalue(setup.grid);
    if let Ok(a) = critical_alpha(setup.coupling, mu1) {
        ensure!(
            setup.alpha > a,
            "spike limit needs alpha above the critical coupling {a}, got {}",
            setup.alpha
        );
        let mut out = spike_sweep(setup)?;
        out.set("alpha_star", a);
        return finish_limit(out);
    }
    ensure!(setup.alpha > 0.0, "spike limit needs a positive alpha");
    finish_limit(spike_sweep(setup)?)
}

fn finish_limit(mut out: SweepResult) -> Result<SweepResult> {
    let limit = out.constant("limit").unwrap_or(0.0);
    let strict = out.points.iter().all(|p| p.eigenvalues[0] > limit);
    out.check("above_limit_at_every_delta", strict);
    let n = out.points.len();
    if n >= 3 {
        let tail = &out.points[n - 3..];
        let h = [tail[0].parameter, tail[1].parameter, tail[2].parameter];
        let y = [tail[0].eigenvalues[0], tail[1].eigenvalues[0], tail[2].eigenvalues[0]];
        if let Some((lim, order)) = richardson_limit(h, y) {
            out.set("extrapolated", lim);
            out.set("fitted_order", order);
            out.set("extrapolation_error", ((lim - limit) / limit).abs());
        }
    }
    out.finish();
    Ok(out)
}

/// Spike sweep for `α < 0`: `λ₀` decreases without bound as the spike
/// narrows. `unbounded_trend` records strict decrease along the sweep.
pub fn negative_coupling_sweep(setup: &SpikeSetup<'_>) -> Result<SweepResult> {
    ensure!(
        setup.alpha < 0.0,
        "negative coupling sweep needs alpha < 0, got {}",
        setup.alpha
    );
    let mut out = spike_sweep(setup)?;
    let decreasing = out.points.windows(2).all(|w| w[1].eigenvalues[0] < w[0].eigenvalues[0]);
    out.check("decreasing_without_bound", decreasing);
    out.finish();
    Ok(out)
}
