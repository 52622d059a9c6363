use alloc::vec::Vec;

use crate::eigensolve::{eigh, MULTIPLET_TOL};
use crate::error::{ensure, Error, Result};
use crate::geometry::ManifoldGrid;
use crate::operator::{assemble, Discretization};
use crate::potentials::{project_to_constraint, CouplingFunction, PotentialField};

/// Allowed increase of `λ` across an accepted step, relative to `1 + |λ|`.
pub const MONOTONE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Fixed(f64),
    /// Armijo backtracking from `initial`, shrinking by `shrink`. The first
    /// trial of each step doubles the previously accepted length, capped at
    /// `initial`.
    Backtracking {
        initial: f64,
        shrink: f64,
        armijo: f64,
        max_trials: usize,
    },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Backtracking {
            initial: 0.05,
            shrink: 0.5,
            armijo: 1e-4,
            max_trials: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    /// The step budget ran out.
    MaxSteps,
    /// The projected gradient vanished to tolerance.
    Stationary,
    /// The tracked eigenvalue became multiple; its derivative is undefined.
    Degenerate {
        iteration: usize,
        gap: f64,
    },
    LineSearch {
        iteration: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub index: usize,
    /// Potential samples at each accepted iterate, starting point first.
    pub iterates: Vec<Vec<f64>>,
    pub lambdas: Vec<f64>,
    /// Weighted norm of the mean-projected gradient at each iterate.
    pub gradient_norms: Vec<f64>,
    /// Step length that produced each iterate after the first.
    pub step_sizes: Vec<f64>,
    /// `|mean(κ) - κ₀|` at each iterate.
    pub mean_errors: Vec<f64>,
    /// Relative gap between the analytic and central-difference directional
    /// derivatives, when checking was requested.
    pub gradient_checks: Vec<f64>,
    pub stop: StopReason,
}

impl Trajectory {
    /// `λ` never increases by more than [`MONOTONE_TOL`].
    pub fn is_monotone(&self) -> bool {
        self.lambdas
            .windows(2)
            .all(|w| w[1] <= w[0] + MONOTONE_TOL * (1.0 + w[0].abs()))
    }

    pub fn max_mean_error(&self) -> f64 {
        self.mean_errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn final_lambda(&self) -> f64 {
        *self.lambdas.last().expect("trajectory holds the start point")
    }

    /// Maps degeneracy and line-search stops to errors.
    pub fn into_result(self) -> Result<Self> {
        match self.stop {
            StopReason::Degenerate { iteration, gap } => Err(Error::Degeneracy {
                index: self.index,
                iteration,
                gap,
            }),
            StopReason::LineSearch { iteration } => Err(Error::LineSearchFailure { iteration }),
            _ => Ok(self),
        }
    }
}

/// First-order data of `λⱼ` at a potential.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenGradient {
    pub lambda: f64,
    /// `α F'(κ) uⱼ²` minus its mean, with `Σ w uⱼ² = 1`.
    pub gradient: Vec<f64>,
    /// Distance to the nearest other eigenvalue.
    pub gap: f64,
}

/// Hellmann–Feynman derivative of `λⱼ` with respect to `κ`, projected onto
/// zero-mean directions.
pub fn eigenvalue_gradient(
    grid: &ManifoldGrid,
    coupling: &CouplingFunction,
    alpha: f64,
    kappa: &[f64],
    index: usize,
    discretization: Discretization,
) -> Result<EigenGradient> {
    let field = PotentialField::from_samples(grid, kappa.to_vec())?;
    let op = assemble(grid, &field, coupling, alpha, discretization)?;
    let r = eigh(&op, (index + 2).min(grid.len()))?;
    ensure!(index < r.values.len(), "eigenvalue index {index} out of range");
    let lambda = r.values[index];
    let mut gap = f64::INFINITY;
    if index > 0 {
        gap = gap.min(lambda - r.values[index - 1]);
    }
    if index + 1 < r.values.len() {
        gap = gap.min(r.values[index + 1] - lambda);
    }
    let u = &r.vectors[index];
    let mut gradient: Vec<f64> = kappa
        .iter()
        .zip(u)
        .map(|(k, v)| alpha * coupling.derivative(*k) * v * v)
        .collect();
    let m = grid.mean(&gradient);
    for g in &mut gradient {
        *g -= m;
    }
    Ok(EigenGradient { lambda, gradient, gap })
}

/// `(λⱼ(κ + hη) - λⱼ(κ - hη)) / 2h`.
#[allow(clippy::too_many_arguments)]
pub fn directional_derivative_fd(
    grid: &ManifoldGrid,
    coupling: &CouplingFunction,
    alpha: f64,
    kappa: &[f64],
    direction: &[f64],
    index: usize,
    h: f64,
    discretization: Discretization,
) -> Result<f64> {
    ensure!(h > 0.0, "finite-difference step must be positive");
    ensure!(
        direction.len() == kappa.len(),
        "direction length must match the potential"
    );
    let eval = |s: f64| -> Result<f64> {
        let k: Vec<f64> = kappa.iter().zip(direction).map(|(k, d)| k + s * d).collect();
        let field = PotentialField::from_samples(grid, k)?;
        let op = assemble(grid, &field, coupling, alpha, discretization)?;
        Ok(eigh(&op, index + 1)?.values[index])
    };
    Ok((eval(h)? - eval(-h)?) / (2.0 * h))
}

/// Relative size of the finite-difference step used for gradient checks.
const FD_STEP: f64 = 1e-4;

fn gradient_check(
    grid: &ManifoldGrid,
    coupling: &CouplingFunction,
    alpha: f64,
    kappa: &[f64],
    g: &EigenGradient,
    index: usize,
    discretization: Discretization,
) -> Result<f64> {
    let norm = grid.norm(&g.gradient);
    let eta: Vec<f64> = g.gradient.iter().map(|v| v / norm).collect();
    let scale = kappa.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let h = FD_STEP * scale / eta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let fd = directional_derivative_fd(grid, coupling, alpha, kappa, &eta, index, h, discretization)?;
    let hf = grid.inner(&g.gradient, &eta);
    Ok((fd - hf).abs() / hf.abs().max(fd.abs()).max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone, Copy)]
pub struct MinimizeSetup<'a> {
    pub grid: &'a ManifoldGrid,
    pub coupling: &'a CouplingFunction,
    pub alpha: f64,
    /// Index `j` of the eigenvalue being minimized.
    pub index: usize,
    pub steps: usize,
    pub rule: StepRule,
    pub discretization: Discretization,
    /// Compare the analytic derivative with central differences at each iterate.
    pub check_gradient: bool,
    /// Projected-gradient norm, relative to `1 + |λ|`, treated as stationary.
    pub gradient_tol: f64,
}

/// Projected-gradient descent of `λⱼ` over potentials with fixed mean.
///
/// Each step moves along `-∇λⱼ` projected to zero mean and re-projects the
/// iterate to the constraint to remove rounding drift. The trajectory is
/// returned even when it stops on a degenerate eigenvalue or a failed line
/// search; [`Trajectory::into_result`] turns those stops into errors.
pub fn minimize_potential(setup: &MinimizeSetup<'_>, start: &PotentialField) -> Result<Trajectory> {
    let MinimizeSetup {
        grid,
        coupling,
        alpha,
        index,
        steps,
        rule,
        discretization,
        check_gradient,
        gradient_tol,
    } = *setup;
    ensure!(start.grid() == grid, "start potential lives on a different grid");
    ensure!(
        start.kappa0() == coupling.kappa0(),
        "start potential mean {} differs from the coupling's kappa0 {}",
        start.kappa0(),
        coupling.kappa0()
    );
    ensure!(index < grid.len(), "eigenvalue index {index} out of range");
    match rule {
        StepRule::Fixed(t) => ensure!(t > 0.0, "step size must be positive"),
        StepRule::Backtracking {
            initial,
            shrink,
            armijo,
            max_trials,
        } => ensure!(
            initial > 0.0 && shrink > 0.0 && shrink < 1.0 && armijo > 0.0 && armijo < 1.0 && max_trials > 0,
            "invalid backtracking parameters"
        ),
    }
    let k0 = start.kappa0();
    let mut kappa = start.samples().to_vec();
    let mut g = eigenvalue_gradient(grid, coupling, alpha, &kappa, index, discretization)?;
    let mut t_prev = match rule {
        StepRule::Fixed(t) => t,
        StepRule::Backtracking { initial, .. } => initial,
    };
    let mut traj = Trajectory {
        index,
        iterates: Vec::new(),
        lambdas: Vec::new(),
        gradient_norms: Vec::new(),
        step_sizes: Vec::new(),
        mean_errors: Vec::new(),
        gradient_checks: Vec::new(),
        stop: StopReason::MaxSteps,
    };

    for it in 0..=steps {
        let gnorm = grid.norm(&g.gradient);
        traj.iterates.push(kappa.clone());
        traj.lambdas.push(g.lambda);
        traj.gradient_norms.push(gnorm);
        traj.mean_errors.push((grid.mean(&kappa) - k0).abs());
        if g.gap <= MULTIPLET_TOL * (1.0 + g.lambda.abs()) {
            traj.stop = StopReason::Degenerate {
                iteration: it,
                gap: g.gap,
            };
            break;
        }
        if gnorm <= gradient_tol * (1.0 + g.lambda.abs()) {
            traj.stop = StopReason::Stationary;
            break;
        }
        if check_gradient {
            traj.gradient_checks.push(gradient_check(
                grid,
                coupling,
                alpha,
                &kappa,
                &g,
                index,
                discretization,
            )?);
        }
        if it == steps {
            break;
        }

        let trial = |t: f64| -> Result<(Vec<f64>, EigenGradient)> {
            let k: Vec<f64> = kappa.iter().zip(&g.gradient).map(|(k, d)| k - t * d).collect();
            let k = project_to_constraint(grid, k, k0).into_samples();
            let ng = eigenvalue_gradient(grid, coupling, alpha, &k, index, discretization)?;
            Ok((k, ng))
        };
        let accepted = match rule {
            StepRule::Fixed(t) => {
                let (k, ng) = trial(t)?;
                (ng.lambda <= g.lambda + MONOTONE_TOL * (1.0 + g.lambda.abs())).then_some((t, k, ng))
            }
            StepRule::Backtracking {
                initial,
                shrink,
                armijo,
                max_trials,
            } => {
                let mut t = (2.0 * t_prev).min(initial);
                let mut found = None;
                for _ in 0..max_trials {
                    let (k, ng) = trial(t)?;
                    if ng.lambda <= g.lambda - armijo * t * gnorm * gnorm {
                        found = Some((t, k, ng));
                        break;
                    }
                    t *= shrink;
                }
                found
            }
        };
        match accepted {
            Some((t, k, ng)) => {
                t_prev = t;
                traj.step_sizes.push(t);
                kappa = k;
                g = ng;
            }
            None => {
                traj.stop = StopReason::LineSearch { iteration: it };
                break;
            }
        }
    }
    Ok(traj)
}
