//! Fixed-mean potential fields, coupling functions `F`, and the concentrated
//! potential families used to push eigenvalues toward their infima.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{ensure, invalid, Result};
use crate::geometry::{geodesic_ball_indicator, LaplaceEigenpair, ManifoldGrid};
use crate::num::{cos, exp, PI};

/// Tolerance for membership in the constraint set `K`.
pub const MEAN_TOL: f64 = 1e-12;

/// A sampled field `κ` whose grid mean is its declared `κ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    grid: ManifoldGrid,
    samples: Vec<f64>,
    kappa0: f64,
}

impl PotentialField {
    /// Checks that `samples` already has mean `kappa0`.
    pub fn new(grid: &ManifoldGrid, samples: Vec<f64>, kappa0: f64) -> Result<Self> {
        ensure!(
            samples.len() == grid.len(),
            "potential has {} samples, grid has {} nodes",
            samples.len(),
            grid.len()
        );
        ensure!(
            samples.iter().all(|v| v.is_finite()),
            "potential samples must be finite"
        );
        let mean = grid.mean(&samples);
        ensure!(
            (mean - kappa0).abs() <= MEAN_TOL * kappa0.abs().max(1.0),
            "potential mean {mean} differs from kappa0 {kappa0}"
        );
        Ok(Self {
            grid: grid.clone(),
            samples,
            kappa0,
        })
    }

    /// Takes the sample mean as `κ₀`.
    pub fn from_samples(grid: &ManifoldGrid, samples: Vec<f64>) -> Result<Self> {
        ensure!(
            samples.len() == grid.len(),
            "potential has {} samples, grid has {} nodes",
            samples.len(),
            grid.len()
        );
        let kappa0 = grid.mean(&samples);
        Self::new(grid, samples, kappa0)
    }

    pub fn grid(&self) -> &ManifoldGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn mean(&self) -> f64 {
        self.grid.mean(&self.samples)
    }

    /// Cyclic shift of the samples along each axis.
    pub fn translate(&self, shift: [usize; 2]) -> Self {
        let p = [self.grid.points()[0], *self.grid.points().get(1).unwrap_or(&1)];
        let mut out = self.samples.clone();
        for i in 0..self.grid.len() {
            let (i1, i2) = self.grid.split(i);
            let j = self.grid.join((i1 + shift[0]) % p[0], (i2 + shift[1]) % p[1]);
            out[j] = self.samples[i];
        }
        Self {
            grid: self.grid.clone(),
            samples: out,
            kappa0: self.kappa0,
        }
    }
}

pub fn constant_potential(grid: &ManifoldGrid, kappa0: f64) -> PotentialField {
    PotentialField {
        grid: grid.clone(),
        samples: alloc::vec![kappa0; grid.len()],
        kappa0,
    }
}

/// `κ = κ₀ + ε v` for a nonconstant Laplace eigenfunction `v`.
pub fn mode_perturbation(
    grid: &ManifoldGrid,
    kappa0: f64,
    epsilon: f64,
    mode: &LaplaceEigenpair,
) -> Result<PotentialField> {
    ensure!(
        mode.samples.len() == grid.len(),
        "eigenfunction sampled on {} nodes, grid has {}",
        mode.samples.len(),
        grid.len()
    );
    ensure!(mode.index >= 1, "mode must be nonconstant (index >= 1)");
    let samples = mode.samples.iter().map(|v| kappa0 + epsilon * v).collect();
    // the mode has zero discrete mean; snap away rounding
    Ok(project_to_constraint(grid, samples, kappa0))
}

/// Shifts `samples` by a constant so their mean is `κ₀`. Idempotent.
pub fn project_to_constraint(grid: &ManifoldGrid, mut samples: Vec<f64>, kappa0: f64) -> PotentialField {
    assert_eq!(samples.len(), grid.len(), "sample count must match the grid");
    let shift = kappa0 - grid.mean(&samples);
    let scale = samples.iter().fold(kappa0.abs(), |m, v| m.max(v.abs())).max(1.0);
    if shift.abs() > 4.0 * f64::EPSILON * scale {
        for v in &mut samples {
            *v += shift;
        }
    }
    PotentialField {
        grid: grid.clone(),
        samples,
        kappa0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Smoothing {
    /// Sharp indicator of the support.
    Hard,
    /// Raised-cosine edges of total width `δ / 10`, centred on the nominal edge.
    #[default]
    Mollified,
}

/// Ramp width of the mollified edges as a fraction of `δ`.
pub const RAMP_FRACTION: f64 = 0.1;

/// Smooth step: 0 below `-w/2`, 1 above `w/2`.
fn step(x: f64, w: f64) -> f64 {
    if x <= -0.5 * w {
        0.0
    } else if x >= 0.5 * w {
        1.0
    } else {
        0.5 * (1.0 - cos(PI * (x + 0.5 * w) / w))
    }
}

fn rescale_to_mean(grid: &ManifoldGrid, mut samples: Vec<f64>, kappa0: f64) -> Result<PotentialField> {
    let m = grid.mean(&samples);
    ensure!(m > 0.0, "concentrated profile has no mass on the grid");
    let s = kappa0 / m;
    for v in &mut samples {
        *v *= s;
    }
    // multiplicative rescale keeps the support; a final shift is only rounding
    Ok(project_to_constraint(grid, samples, kappa0))
}

/// One-dimensional spike `κ₀ L / δ` on `[0, δ)` (or its mollification), with
/// total mass fixed so the grid mean is exactly `κ₀`.
pub fn spike_potential_1d(
    grid: &ManifoldGrid,
    kappa0: f64,
    delta: f64,
    smoothing: Smoothing,
) -> Result<PotentialField> {
    ensure!(grid.dim() == 1, "spike potential needs a circle grid");
    let l = grid.measure();
    let h = grid.spacing(0);
    ensure!(
        delta >= 4.0 * h - 1e-12 * h && delta < l,
        "spike width {delta} is not resolvable (need 4h = {} <= delta < L = {l})",
        4.0 * h
    );
    let height = kappa0 * l / delta;
    let ramp = RAMP_FRACTION * delta;
    let samples = (0..grid.len())
        .map(|i| {
            let s = grid.node(i)[0];
            // signed coordinate, wrapped around the spike's centre
            let mut x = s - 0.5 * delta;
            if x > 0.5 * l {
                x -= l;
            }
            let x = x + 0.5 * delta;
            let p = match smoothing {
                Smoothing::Hard => {
                    if (0.0..delta - 1e-12 * h).contains(&x) {
                        1.0
                    } else {
                        0.0
                    }
                }
                Smoothing::Mollified => step(x, ramp) * step(delta - x, ramp),
            };
            height * p
        })
        .collect();
    rescale_to_mean(grid, samples, kappa0)
}

/// Minimum node count for a resolvable ball.
pub const MIN_BALL_NODES: usize = 12;

/// `κ₀ |M| / |B_δ|` on the geodesic ball around `center`, zero elsewhere.
pub fn ball_potential(
    grid: &ManifoldGrid,
    kappa0: f64,
    center: usize,
    delta: f64,
    smoothing: Smoothing,
) -> Result<PotentialField> {
    let ball = geodesic_ball_indicator(grid, center, delta)?;
    ensure!(
        ball.count() >= MIN_BALL_NODES,
        "ball of radius {delta} holds {} nodes, need at least {MIN_BALL_NODES}",
        ball.count()
    );
    let height = kappa0 * grid.measure() / ball.measure;
    let ramp = RAMP_FRACTION * delta;
    let samples = (0..grid.len())
        .map(|i| match smoothing {
            Smoothing::Hard => {
                if ball.mask[i] {
                    height
                } else {
                    0.0
                }
            }
            Smoothing::Mollified => height * step(delta - grid.periodic_distance(center, i), ramp),
        })
        .collect();
    rescale_to_mean(grid, samples, kappa0)
}

/// How a tabulated function extends beyond its abscissae.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// Period `x_last - x_first`; the last ordinate should match the first.
    Periodic,
    /// Constant continuation of the end values.
    Clamped,
}

/// Piecewise-linear interpolant through strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
    extension: Extension,
}

impl SampledFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, extension: Extension) -> Result<Self> {
        ensure!(xs.len() == ys.len(), "abscissae and ordinates differ in length");
        ensure!(xs.len() >= 2, "a table needs at least two rows");
        if let Some(i) = xs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(invalid(alloc::format!(
                "abscissae must be strictly increasing (row {})",
                i + 2
            )));
        }
        Ok(Self { xs, ys, extension })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    fn wrap(&self, x: f64) -> f64 {
        let (a, b) = (self.xs[0], *self.xs.last().unwrap());
        match self.extension {
            Extension::Clamped => x.clamp(a, b),
            Extension::Periodic => {
                let p = b - a;
                let mut t = (x - a) % p;
                if t < 0.0 {
                    t += p;
                }
                a + t
            }
        }
    }

    /// Segment index `i` with `xs[i] <= x <= xs[i+1]`.
    fn segment(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|v| *v <= x);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    fn slope(&self, i: usize) -> f64 {
        (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = self.wrap(x);
        let i = self.segment(x);
        self.ys[i] + self.slope(i) * (x - self.xs[i])
    }

    /// Segment slope; averaged across a knot when `x` sits exactly on one.
    pub fn derivative(&self, x: f64) -> f64 {
        let x = self.wrap(x);
        if let Some(k) = self.knot(x) {
            let left = if k > 0 { Some(self.slope(k - 1)) } else { None };
            let right = if k + 1 < self.xs.len() {
                Some(self.slope(k))
            } else {
                None
            };
            return match (left, right) {
                (Some(a), Some(b)) => 0.5 * (a + b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => 0.0,
            };
        }
        self.slope(self.segment(x))
    }

    /// Zero between knots; the slope jump over the local spacing at a knot.
    pub fn second_derivative(&self, x: f64) -> f64 {
        let x = self.wrap(x);
        match self.knot(x) {
            Some(k) if k > 0 && k + 1 < self.xs.len() => {
                (self.slope(k) - self.slope(k - 1)) / (0.5 * (self.xs[k + 1] - self.xs[k - 1]))
            }
            _ => 0.0,
        }
    }

    fn knot(&self, x: f64) -> Option<usize> {
        self.xs.iter().position(|v| *v == x)
    }

    /// Samples the interpolant at the grid nodes (first coordinate).
    pub fn sample_on(&self, grid: &ManifoldGrid) -> Vec<f64> {
        (0..grid.len()).map(|i| self.eval(grid.node(i)[0])).collect()
    }
}

/// Built-in coupling functions with analytic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingKind {
    /// `F(κ) = κ²`.
    Square,
    /// `F(κ) = κ`.
    Identity,
    /// `F(κ) = exp(κ)`.
    Exp,
    /// `F(κ) = Σ cᵢ κⁱ`.
    Polynomial(Vec<f64>),
    /// Piecewise-linear table, clamped outside its range.
    Table(Box<SampledFunction>),
}

impl CouplingKind {
    pub fn eval(&self, k: f64) -> f64 {
        match self {
            Self::Square => k * k,
            Self::Identity => k,
            Self::Exp => exp(k),
            Self::Polynomial(c) => c.iter().rev().fold(0.0, |acc, a| acc * k + a),
            Self::Table(t) => t.eval(k),
        }
    }

    pub fn derivative(&self, k: f64) -> f64 {
        match self {
            Self::Square => 2.0 * k,
            Self::Identity => 1.0,
            Self::Exp => exp(k),
            Self::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, a)| acc * k + i as f64 * a),
            Self::Table(t) => t.derivative(k),
        }
    }

    pub fn second_derivative(&self, k: f64) -> f64 {
        match self {
            Self::Square => 2.0,
            Self::Identity => 0.0,
            Self::Exp => exp(k),
            Self::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (i, a)| acc * k + (i * (i - 1)) as f64 * a),
            Self::Table(t) => t.second_derivative(k),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Square => "square",
            Self::Identity => "identity",
            Self::Exp => "exp",
            Self::Polynomial(_) => "polynomial",
            Self::Table(_) => "table",
        }
    }
}

/// `F` together with its Taylor data at the expansion point `κ₀`:
/// `f₀ = F(κ₀)`, `f₁ = F'(κ₀)`, `f₂ = F''(κ₀) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingFunction {
    kind: CouplingKind,
    kappa0: f64,
    f0: f64,
    f1: f64,
    f2: f64,
}

impl CouplingFunction {
    pub fn new(kind: CouplingKind, kappa0: f64) -> Result<Self> {
        let f0 = kind.eval(kappa0);
        let f1 = kind.derivative(kappa0);
        let f2 = 0.5 * kind.second_derivative(kappa0);
        ensure!(
            f0.is_finite() && f1.is_finite() && f2.is_finite(),
            "coupling {} is not finite at kappa0 = {kappa0}",
            kind.name()
        );
        Ok(Self {
            kind,
            kappa0,
            f0,
            f1,
            f2,
        })
    }

    pub fn square(kappa0: f64) -> Self {
        Self::new(CouplingKind::Square, kappa0).expect("square coupling is finite")
    }

    pub fn kind(&self) -> &CouplingKind {
        &self.kind
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn f1(&self) -> f64 {
        self.f1
    }

    pub fn f2(&self) -> f64 {
        self.f2
    }

    pub fn eval(&self, k: f64) -> f64 {
        self.kind.eval(k)
    }

    pub fn derivative(&self, k: f64) -> f64 {
        self.kind.derivative(k)
    }

    /// Pointwise `F(κ(xᵢ))`.
    pub fn apply(&self, samples: &[f64]) -> Vec<f64> {
        samples.iter().map(|k| self.eval(*k)).collect()
    }

    /// `|F'(κ₀) - (F(κ₀+h) - F(κ₀-h)) / 2h|` for the analytic-derivative check.
    pub fn derivative_defect(&self, h: f64) -> f64 {
        let fd = (self.eval(self.kappa0 + h) - self.eval(self.kappa0 - h)) / (2.0 * h);
        (self.f1 - fd).abs()
    }
}
