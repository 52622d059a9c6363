//! One runner per subcommand. Each returns a CSV table and a summary; file
//! emission is separate so runs can be compared in memory.
//!
//! CSV columns per subcommand:
//!
//! | subcommand       | columns |
//! |------------------|---------|
//! | `spectrum`       | `index,eigenvalue,residual,multiplet` |
//! | `perturb`        | `q,ell2,ell2_gradient,ell2_spectral,spread,ell1,phi1_mean,expansion_order` |
//! | `sweep-alpha`    | `alpha,epsilon,lambda0,lambda0_constant,difference,sign,residual,ell2_fit,ell2_theory` |
//! | `spike-limit`    | `delta,lambda0,residual,excess,test_function_rayleigh,test_function_analytic` |
//! | `torus-collapse` | `delta,j,eigenvalue,residual,excision_bound,target` |
//! | `hill-bound`     | `potential,v_min,i_value,branch,bound,lambda0,residual,holds` |
//! | `lemma-check`    | `alpha,sample,functional_i,modal_sum,difference` |
//! | `optimize`       | `iteration,lambda,gradient_norm,step,mean_error,gradient_check` |

use std::path::{Path, PathBuf};

use mineig_core::eigensolve::residual;
use mineig_core::experiments::{
    hill_check, minimize_potential, negative_coupling_sweep, spike_limit, torus_collapse, transition_sweep,
    CollapseSetup, HillBoundInput, MinimizeSetup, SpikeSetup, StepRule, StopReason, SweepResult, RESIDUAL_TOL,
};
use mineig_core::geometry::first_nonzero_eigenvalue;
use mineig_core::operator::ASYMMETRY_TOL;
use mineig_core::perturbation::{
    critical_alpha, functional_i, functional_i_modal, lemma_gamma, perturbation_report, verify_expansion,
};
use mineig_core::potentials::{
    ball_potential, constant_potential, mode_perturbation, project_to_constraint, spike_potential_1d, Extension,
};
use mineig_core::{assemble, eigh, laplace_eigenbasis, Error, ManifoldKind, PotentialField};
use serde_json::{Map, Value};

use crate::config::{PotentialKind, QKind, RunConfig};
use crate::output::{real, reals, Csv, Phases, Summary};
use crate::random::{band_limited, seeded, SeededRng};
use crate::table::load_table;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Spectrum,
    Perturb,
    SweepAlpha,
    SpikeLimit,
    TorusCollapse,
    HillBound,
    LemmaCheck,
    Optimize,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Perturb => "perturb",
            Command::SweepAlpha => "sweep-alpha",
            Command::SpikeLimit => "spike-limit",
            Command::TorusCollapse => "torus-collapse",
            Command::HillBound => "hill-bound",
            Command::LemmaCheck => "lemma-check",
            Command::Optimize => "optimize",
        }
    }
}

/// Output of one run. `failure` carries a numerical stop that still
/// produced data (an optimizer halted on a degenerate eigenvalue).
#[derive(Debug, Clone)]
pub struct Report {
    pub command: Command,
    pub csv: Csv,
    pub summary: Summary,
    pub failure: Option<CliError>,
}

struct Run<'a> {
    cfg: &'a RunConfig,
    rng: SeededRng,
    phases: Phases,
    results: Map<String, Value>,
    invariants: std::collections::BTreeMap<String, bool>,
}

impl Run<'_> {
    fn result(&mut self, key: &str, v: impl Into<Value>) {
        self.results.insert(key.into(), v.into());
    }

    fn invariant(&mut self, key: &str, pass: bool) {
        self.invariants.insert(key.into(), pass);
    }

    fn absorb_sweep(&mut self, sweep: &SweepResult) {
        for (k, v) in &sweep.constants {
            self.results.insert(k.clone(), real(*v));
        }
        for (k, v) in &sweep.metadata {
            self.results.insert(format!("meta_{k}"), Value::from(v.clone()));
        }
        for (k, v) in &sweep.checks {
            self.invariants.insert(k.clone(), *v);
        }
    }
}

pub fn execute(command: Command, cfg: &RunConfig, timings: bool) -> Result<Report, CliError> {
    let mut run = Run {
        cfg,
        rng: seeded(cfg.seed),
        phases: Phases::new(timings),
        results: Map::new(),
        invariants: Default::default(),
    };
    run.result("discretization", cfg.discretization.name());
    run.result("manifold", cfg.grid.kind().name());
    run.phases.start("compute");
    let (csv, failure) = match command {
        Command::Spectrum => (spectrum(&mut run)?, None),
        Command::Perturb => (perturb(&mut run)?, None),
        Command::SweepAlpha => (sweep_alpha(&mut run)?, None),
        Command::SpikeLimit => (spike(&mut run)?, None),
        Command::TorusCollapse => (collapse(&mut run)?, None),
        Command::HillBound => (hill(&mut run)?, None),
        Command::LemmaCheck => (lemma(&mut run)?, None),
        Command::Optimize => optimize(&mut run)?,
    };
    let status = match &failure {
        None => "ok".to_string(),
        Some(e) => e.to_string(),
    };
    let summary = Summary {
        command: command.name().into(),
        config: cfg.entries.clone(),
        seed: cfg.seed,
        results: run.results,
        invariants: run.invariants,
        phases: run.phases.to_json(),
        status,
    };
    Ok(Report {
        command,
        csv,
        summary,
        failure,
    })
}

/// Writes `<out>/<subcommand>.csv` and `<out>/summary.json`.
pub fn write_report(report: &Report, out: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", out.display()));
    std::fs::create_dir_all(out).map_err(io)?;
    let csv = out.join(format!("{}.csv", report.command.name()));
    let json = out.join("summary.json");
    std::fs::write(&csv, report.csv.render()).map_err(io)?;
    std::fs::write(&json, report.summary.render()).map_err(io)?;
    Ok((csv, json))
}

fn build_potential(run: &mut Run<'_>) -> Result<PotentialField, CliError> {
    let cfg = run.cfg;
    let g = &cfg.grid;
    let k0 = cfg.kappa0;
    let field = match cfg.potential {
        PotentialKind::Constant => constant_potential(g, k0),
        PotentialKind::Mode => {
            let basis = laplace_eigenbasis(g, cfg.mode + 1)?;
            mode_perturbation(g, k0, cfg.amplitude, &basis[cfg.mode])?
        }
        PotentialKind::Random => {
            let q = band_limited(g, cfg.modes, &mut run.rng);
            project_to_constraint(g, q.iter().map(|v| k0 + cfg.amplitude * v).collect(), k0)
        }
        PotentialKind::Spike => match g.kind() {
            ManifoldKind::Circle => spike_potential_1d(g, k0, cfg.delta, cfg.smoothing)?,
            ManifoldKind::Torus => ball_potential(g, k0, cfg.center, cfg.delta, cfg.smoothing)?,
        },
        PotentialKind::Ball => ball_potential(g, k0, cfg.center, cfg.delta, cfg.smoothing)?,
        PotentialKind::Table => {
            let path = cfg.potential_table.as_ref().expect("validated at parse time");
            let t = load_table(path, Extension::Periodic)?;
            PotentialField::from_samples(g, t.sample_on(g))?
        }
    };
    Ok(field)
}

fn scaled_ok(values: &[f64], residuals: &[f64]) -> bool {
    values
        .iter()
        .zip(residuals)
        .all(|(l, r)| *r <= RESIDUAL_TOL * (1.0 + l.abs()))
}

fn spectrum(run: &mut Run<'_>) -> Result<Csv, CliError> {
    let cfg = run.cfg;
    let f = cfg.coupling_function()?;
    let field = build_potential(run)?;
    let op = assemble(&cfg.grid, &field, &f, cfg.alpha, cfg.discretization)?;
    let r = eigh(&op, cfg.count.clamp(1, cfg.grid.len()))?;
    let mut csv = Csv::new(&["index", "eigenvalue", "residual", "multiplet"]);
    for i in 0..r.len() {
        csv.push(vec![
            i.into(),
            r.values[i].into(),
            r.residuals[i].into(),
            r.multiplets[i].into(),
        ]);
    }
    run.result("eigenvalues", reals(&r.values));
    run.result("max_relative_residual", real(r.max_relative_residual()));
    run.result("potential_mean", real(field.mean()));
    run.result("reference_energy", real(cfg.alpha * f.f0()));
    run.invariant("residuals_within_tolerance", scaled_ok(&r.values, &r.residuals));
    let scale = op.matrix().inf_norm().max(1.0);
    run.invariant("operator_symmetric", op.asymmetry() <= ASYMMETRY_TOL * scale);
    run.invariant(
        "potential_in_constraint",
        (field.mean() - field.kappa0()).abs() <= 1e-12 * field.kappa0().abs().max(1.0),
    );
    Ok(csv)
}

fn perturbations(run: &mut Run<'_>) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let cfg = run.cfg;
    Ok(match cfg.q {
        QKind::Mode => {
            if cfg.mode == 0 {
                return Err(CliError::Validation("q mode must be nonconstant (mode >= 1)".into()));
            }
            let basis = laplace_eigenbasis(&cfg.grid, cfg.mode + 1)?;
            vec![(format!("v{}", cfg.mode), basis[cfg.mode].samples.clone())]
        }
        QKind::Random => (0..cfg.samples.max(1))
            .map(|i| (format!("r{i}"), band_limited(&cfg.grid, cfg.modes, &mut run.rng)))
            .collect(),
    })
}

fn perturb(run: &mut Run<'_>) -> Result<Csv, CliError> {
    let cfg = run.cfg;
    let f = cfg.coupling_function()?;
    let alpha = cfg.alpha;
    let mu1 = first_nonzero_eigenvalue(&cfg.grid);
    let alpha_star = match critical_alpha(&f, mu1) {
        Ok(a) => Some(a),
        Err(Error::UndefinedCriticalCoupling { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let qs = perturbations(run)?;
    let mut csv = Csv::new(&[
        "q",
        "ell2",
        "ell2_gradient",
        "ell2_spectral",
        "spread",
        "ell1",
        "phi1_mean",
        "expansion_order",
    ]);
    let (mut forms, mut ell1_zero, mut gauge, mut orders_ok) = (true, true, true, true);
    let mut sign_law = true;
    let mut first_ell2 = f64::NAN;
    let mut first_ell0 = f64::NAN;
    for (i, (label, q)) in qs.iter().enumerate() {
        let rep = perturbation_report(&cfg.grid, q, &f, alpha)?;
        let order = if cfg.epsilons.is_empty() {
            f64::NAN
        } else {
            let e = verify_expansion(&cfg.grid, q, &f, alpha, &cfg.epsilons, cfg.discretization)?;
            orders_ok &= e.fitted_order >= 2.7;
            e.fitted_order
        };
        let e2 = rep.ell2;
        forms &= e2.spread() <= 1e-9;
        ell1_zero &= rep.ell1.abs() <= 1e-10;
        gauge &= rep.phi1_mean.abs() <= 1e-10;
        if let Some(a) = alpha_star {
            // ℓ₂ > 0 for every q below α*; above α*, ℓ₂ < 0 for the first mode
            if alpha < a {
                sign_law &= e2.value > 0.0;
            } else if alpha > a && label == "v1" {
                sign_law &= e2.value < 0.0;
            }
        }
        if i == 0 {
            first_ell2 = e2.value;
            first_ell0 = rep.ell0;
        }
        csv.push(vec![
            label.as_str().into(),
            e2.value.into(),
            e2.gradient_form.unwrap_or(f64::NAN).into(),
            e2.spectral_form.into(),
            e2.spread().into(),
            rep.ell1.into(),
            rep.phi1_mean.into(),
            order.into(),
        ]);
    }
    run.result("alpha", real(alpha));
    run.result("alpha_star", alpha_star.map(real).unwrap_or(Value::Null));
    if alpha_star.is_none() {
        run.result("alpha_star_status", "undefined: F'(kappa0) vanishes");
    }
    run.result("mu1", real(mu1));
    run.result("f0", real(f.f0()));
    run.result("f1", real(f.f1()));
    run.result("f2", real(f.f2()));
    run.result("ell0", real(first_ell0));
    run.result("ell2", real(first_ell2));
    run.invariant("ell2_forms_agree", forms);
    run.invariant("ell1_vanishes", ell1_zero);
    run.invariant("phi1_zero_mean", gauge);
    run.invariant("ell2_sign_law", sign_law);
    if !cfg.epsilons.is_empty() {
        run.invariant("expansion_order_at_least_2.7", orders_ok);
    }
    Ok(csv)
}

fn sweep_alpha(run: &mut Run<'_>) -> Result<Csv, CliError> {
    let cfg = run.cfg;
    let f = cfg.coupling_function()?;
    let alphas = if cfg.alphas.is_empty() {
        vec![cfg.alpha]
    } else {
        cfg.alphas.clone()
    };
    let eps = if cfg.epsilons.is_empty() {
        vec![0.02]
    } else {
        cfg.epsilons.clone()
    };
    let q = match cfg.q {
        QKind::Mode if cfg.mode == 1 => None,
        _ => Some(perturbations(run)?.swap_remove(0).1),
    };
    let s = transition_sweep(&cfg.grid, &f, &alphas, &eps, q.as_deref(), cfg.discretization)?;
    let mut csv = Csv::new(&[
        "alpha",
        "epsilon",
        "lambda0",
        "lambda0_constant",
        "difference",
        "sign",
        "residual",
        "ell2_fit",
        "ell2_theory",
    ]);
    for p in &s.points {
        let lc = p.get("lambda_constant").unwrap_or(f64::NAN);
        for (i, e) in s.inner.iter().enumerate() {
            let d = p.eigenvalues[i] - lc;
            let sign = if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            };
            csv.push(vec![
                p.parameter.into(),
                (*e).into(),
                p.eigenvalues[i].into(),
                lc.into(),
                d.into(),
                sign.into(),
                p.residuals[i].into(),
                p.get("ell2_fit").unwrap_or(f64::NAN).into(),
                p.get("ell2_theory").unwrap_or(f64::NAN).into(),
            ]);
        }
    }
    run.absorb_sweep(&s);
    if let Some(err) = s.constant("alpha_c_relative_error") {
        run.invariant("alpha_c_within_2_percent", err <= 0.02);
    }
    Ok(csv)
}

fn spike(run: &mut Run<'_>) -> Result<Csv, CliError> {
    let cfg = run.cfg;
    let f = cfg.coupling_function()?;
    let deltas = if cfg.deltas.is_empty() {
        vec![0.2, 0.1, 0.05, 0.025]
    } else {
        cfg.deltas.clone()
    };
    let setup = SpikeSetup {
        grid: &cfg.grid,
        coupling: &f,
        alpha: cfg.alpha,
        deltas: &deltas,
        smoothing: cfg.smoothing,
        discretization: cfg.discretization,
    };
    let s = if cfg.alpha < 0.0 {
        negative_coupling_sweep(&setup)?
    } else {
        spike_limit(&setup)?
    };
    let mut csv = Csv::new(&[
        "delta",
        "lambda0",
        "residual",
        "excess",
        "test_function_rayleigh",
        "test_function_analytic",
    ]);
    for p in &s.points {
        csv.push(vec![
            p.parameter.into(),
            p.eigenvalues[0].into(),
            p.residuals[0].into(),
            p.get("excess").unwrap_or(f64::NAN).into(),
            p.get("test_function_rayleigh").unwrap_or(f64::NAN).into(),
            p.get("test_function_analytic").unwrap_or(f64::NAN).into(),
        ]);
    }
    run.absorb_sweep(&s);
    if let Some(err) = s.constant("extrapolation_error") {
        run.invariant("extrapolation_within_2_percent", err <= 0.02);
    }
    Ok(csv)
}

fn collapse(run: &mut Run<'_>) -> Result<Csv, CliError> {
    let cfg = run.cfg;
    let f = cfg.coupling_function()?;
    let deltas = if cfg.deltas.is_empty() {
        vec![0.2, 0.12, 0.07]
    } else {
        cfg.deltas.clone()
    };
    let setup = CollapseSetup {
        grid: &cfg.grid,
        coupling: &f,
        alpha: cfg.alpha,
        deltas: &deltas,
        count: cfg.count.clamp(1, cfg.grid.len()),
        center: cfg.center,
        smoothing: cfg.smoothing,
        discretization: cfg.discretization,
    };
    let s = torus_collapse(&setup)?;
    let mut csv = Csv::new(&["delta", "j", "eigenvalue", "residual", "excision_bound", "target"]);
    for p in &s.points {
        for (j, (l, r)) in p.eigenvalues.iter().zip(&p.residuals).enumerate() {
            csv.push(vec![
                p.parameter.into(),
                j.into(),
                (*l).into(),
                (*r).into(),
                p.get(&format!("excision_bound_{j}")).unwrap_or(f64::NAN).into(),
                s.constant(&format!("target_{j}")).unwrap_or(f64::NAN).into(),
            ]);
        }
    }
    run.absorb_sweep(&s);
    if let (Some(last), Some(mu1)) = (s.points.last(), s.constant("mu_1")) {
        run.result("lambda0_finest", real(last.eigenvalues[0]));
        if cfg.grid.kind() == ManifoldKind::Torus {
            run.invariant("lambda0_below_0.15_mu1", last.eigenvalues[0] <= 0.15 * mu1);
            if let Some(l1) = last.eigenvalues.get(1) {
                run.invariant("lambda1_within_10_percent_of_mu1", ((l1 - mu1) / mu1).abs() <= 0.1);
            }
        } else {
            let floor = cfg.alpha * f.f0();
            run.invariant(
                "circle_stays_above_reference",
                s.points.iter().all(|p| p.eigenvalues[0] >= floor * (1.0 - 1e-6)),
            );
        }
    }
    Ok(csv)
}

fn hill(run: &mut Run<'_>) -> Result<Csv, CliError> {
    let cfg = run.cfg;
    if cfg.grid.kind() != ManifoldKind::Circle {
        return Err(CliError::Validation("hill-bound runs on a circle".into()));
    }
    let l = cfg.grid.measure();
    let potentials: Vec<Vec<f64>> = match cfg.potential {
        PotentialKind::Random => (0..cfg.samples.max(1))
            .map(|_| {
                let q = band_limited(&cfg.grid, cfg.modes, &mut run.rng);
                q.iter().map(|v| cfg.kappa0 + cfg.amplitude * v).collect()
            })
            .collect(),
        _ => vec![build_potential(run)?.into_samples()],
    };
    let mut csv = Csv::new(&[
        "potential",
        "v_min",
        "i_value",
        "branch",
        "bound",
        "lambda0",
        "residual",
        "holds",
    ]);
    let mut all = true;
    let mut sharp = true;
    for (i, v) in potentials.into_iter().enumerate() {
        let constant = v.iter().all(|x| *x == v[0]);
        let c = hill_check(&HillBoundInput::new(l, v)?, cfg.discretization)?;
        all &= c.holds;
        if constant {
            sharp &= (c.lambda0 - c.bound.bound).abs() <= 1e-10;
        }
        csv.push(vec![
            i.into(),
            c.bound.v_min.into(),
            c.bound.i_value.into(),
            c.bound.branch.name().into(),
            c.bound.bound.into(),
            c.lambda0.into(),
            c.residual.into(),
            c.holds.into(),
        ]);
    }
    run.result("branch_constant", real(std::f64::consts::PI.powi(2) / (l * l)));
    run.result("potentials", csv.rows().len());
    run.invariant("bound_below_lambda0", all);
    run.invariant("equality_for_constants", sharp);
    Ok(csv)
}

fn lemma(run: &mut Run<'_>) -> Result<Csv, CliError> {
    let cfg = run.cfg;
    let g = &cfg.grid;
    let mu1 = first_nonzero_eigenvalue(g);
    let alphas = if cfg.alphas.is_empty() {
        vec![0.5 / mu1, 1.0 / mu1, 2.0 / mu1]
    } else {
        cfg.alphas.clone()
    };
    let basis = laplace_eigenbasis(g, cfg.modes.clamp(1, g.len() - 2) + 1)?;
    let v1 = basis[1].samples.clone();
    let us: Vec<Vec<f64>> = (0..cfg.samples)
        .map(|_| band_limited(g, cfg.modes, &mut run.rng))
        .collect();
    let mus: Vec<f64> = basis.iter().map(|b| b.eigenvalue).collect();

    let mut csv = Csv::new(&["alpha", "sample", "functional_i", "modal_sum", "difference"]);
    let (mut modal_ok, mut nonneg, mut witness, mut gamma_ok) = (true, true, true, true);
    let mut gammas = Map::new();
    for &alpha in &alphas {
        let gam = lemma_gamma(alpha, &mus)?;
        gamma_ok &= gam.iter().zip(&mus).all(|(gm, mu)| *gm == (alpha * mu - 1.0) * mu);
        // γ₁ ≥ 0 exactly when α μ₁ ≥ 1
        gamma_ok &= (gam[1] >= 0.0) == (alpha * mu1 >= 1.0);
        gammas.insert(crate::output::fmt_real(alpha), reals(&gam));
        let mut rows = vec![("v1".to_string(), &v1)];
        rows.extend(us.iter().enumerate().map(|(i, u)| (format!("r{i}"), u)));
        for (label, u) in rows {
            let a = functional_i(g, u, alpha);
            let b = functional_i_modal(g, u, alpha);
            modal_ok &= (a - b).abs() <= 1e-9 * (1.0 + a.abs());
            if alpha * mu1 >= 1.0 - 1e-12 {
                nonneg &= a >= -1e-9;
            } else if label == "v1" {
                witness &= a < 0.0;
            }
            csv.push(vec![
                alpha.into(),
                label.as_str().into(),
                a.into(),
                b.into(),
                (a - b).into(),
            ]);
        }
    }
    run.result("mu1", real(mu1));
    run.result("threshold_alpha", real(1.0 / mu1));
    run.result("gamma", Value::Object(gammas));
    run.result("mu", reals(&mus));
    run.invariant("gamma_closed_form", gamma_ok);
    run.invariant("modal_identity", modal_ok);
    run.invariant("nonnegative_above_threshold", nonneg);
    run.invariant("negative_witness_below_threshold", witness);
    Ok(csv)
}

fn optimize(run: &mut Run<'_>) -> Result<(Csv, Option<CliError>), CliError> {
    let cfg = run.cfg;
    let g = &cfg.grid;
    let f = cfg.coupling_function()?;
    let k0 = cfg.kappa0;
    let mut start: Vec<f64> = vec![k0; g.len()];
    if cfg.amplitude != 0.0 && cfg.potential == PotentialKind::Mode {
        let basis = laplace_eigenbasis(g, cfg.mode + 1)?;
        for (s, v) in start.iter_mut().zip(&basis[cfg.mode].samples) {
            *s += cfg.amplitude * v;
        }
    }
    if cfg.kick != 0.0 {
        let q = band_limited(g, cfg.modes, &mut run.rng);
        for (s, v) in start.iter_mut().zip(&q) {
            *s += cfg.kick * v;
        }
    }
    let start = project_to_constraint(g, start, k0);
    let setup = MinimizeSetup {
        grid: g,
        coupling: &f,
        alpha: cfg.alpha,
        index: cfg.index,
        steps: cfg.steps,
        rule: StepRule::Backtracking {
            initial: cfg.step,
            shrink: 0.5,
            armijo: 1e-4,
            max_trials: 40,
        },
        discretization: cfg.discretization,
        check_gradient: cfg.check_gradient,
        gradient_tol: 1e-8,
    };
    let t = minimize_potential(&setup, &start)?;
    let mut csv = Csv::new(&[
        "iteration",
        "lambda",
        "gradient_norm",
        "step",
        "mean_error",
        "gradient_check",
    ]);
    for i in 0..t.lambdas.len() {
        let step = if i == 0 { 0.0 } else { t.step_sizes[i - 1] };
        csv.push(vec![
            i.into(),
            t.lambdas[i].into(),
            t.gradient_norms[i].into(),
            step.into(),
            t.mean_errors[i].into(),
            t.gradient_checks.get(i).copied().unwrap_or(f64::NAN).into(),
        ]);
    }
    let stop = match t.stop {
        StopReason::MaxSteps => "max-steps",
        StopReason::Stationary => "stationary",
        StopReason::Degenerate { .. } => "degeneracy-stop",
        StopReason::LineSearch { .. } => "line-search-failure",
    };
    let reference = cfg.alpha * f.f0();
    run.result("stop", stop);
    run.result("initial_lambda", real(t.lambdas[0]));
    run.result("final_lambda", real(t.final_lambda()));
    run.result("reference_energy", real(reference));
    run.result("iterations", t.lambdas.len() - 1);
    // the optimizer's eigen-solves share the residual tolerance
    let op = assemble(
        g,
        &PotentialField::from_samples(g, t.iterates.last().unwrap().clone())?,
        &f,
        cfg.alpha,
        cfg.discretization,
    )?;
    let last = eigh(&op, cfg.index + 1)?;
    let res = residual(&op, last.values[cfg.index], &last.vectors[cfg.index])?;
    run.result("final_residual", real(res));
    run.invariant("lambda_non_increasing", t.is_monotone());
    run.invariant(
        "iterates_in_constraint",
        t.max_mean_error() <= 1e-12 * k0.abs().max(1.0),
    );
    if cfg.check_gradient {
        run.invariant(
            "gradient_matches_finite_differences",
            t.gradient_checks.iter().all(|e| *e <= 1e-5),
        );
    }
    let failure = t.into_result().err().map(CliError::from);
    Ok((csv, failure))
}
