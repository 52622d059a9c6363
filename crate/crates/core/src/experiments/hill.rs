use alloc::vec::Vec;

use crate::eigensolve::eigh;
use crate::error::{ensure, Result};
use crate::geometry::ManifoldGrid;
use crate::num::{sqrt, PI};
use crate::operator::{assemble_diagonal, Discretization};

/// A periodic potential `V` sampled on a uniform grid of period `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct HillBoundInput {
    length: f64,
    samples: Vec<f64>,
    v_min: f64,
    i_value: f64,
}

impl HillBoundInput {
    pub fn new(length: f64, samples: Vec<f64>) -> Result<Self> {
        ensure!(!samples.is_empty(), "potential has no samples");
        ensure!(
            length > 0.0 && length.is_finite(),
            "period must be positive, got {length}"
        );
        ensure!(
            samples.iter().all(|v| v.is_finite()),
            "potential has non-finite samples"
        );
        let v_min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        // (1/L) ∫ (V - V_m)^{1/2} by the periodic trapezoid rule
        let i_value = samples.iter().map(|v| sqrt(v - v_min)).sum::<f64>() / samples.len() as f64;
        Ok(HillBoundInput {
            length,
            samples,
            v_min,
            i_value,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn i_value(&self) -> f64 {
        self.i_value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HillBranch {
    /// `I ≤ π/L`: bound `V_m + I²`.
    Subcritical,
    /// `I > π/L`: bound `V_m + π²/L²`.
    Supercritical,
}

impl HillBranch {
    pub fn name(self) -> &'static str {
        match self {
            HillBranch::Subcritical => "subcritical",
            HillBranch::Supercritical => "supercritical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillBound {
    pub bound: f64,
    pub branch: HillBranch,
    pub v_min: f64,
    pub i_value: f64,
}

/// Lower bound on the principal periodic eigenvalue of `-u'' + V u`.
pub fn hill_lower_bound(input: &HillBoundInput) -> HillBound {
    let l = input.length;
    let (bound, branch) = if input.i_value <= PI / l {
        (input.v_min + input.i_value * input.i_value, HillBranch::Subcritical)
    } else {
        (input.v_min + PI * PI / (l * l), HillBranch::Supercritical)
    };
    HillBound {
        bound,
        branch,
        v_min: input.v_min,
        i_value: input.i_value,
    }
}

/// The bound against a direct eigensolve of `-u'' + V u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillCheck {
    pub bound: HillBound,
    pub lambda0: f64,
    pub residual: f64,
    /// `bound ≤ λ₀` up to the larger of the solver residual and rounding.
    pub holds: bool,
}

pub fn hill_check(input: &HillBoundInput, discretization: Discretization) -> Result<HillCheck> {
    let grid = ManifoldGrid::circle(input.length, input.samples.len())?;
    let op = assemble_diagonal(&grid, input.samples.clone(), 1.0, discretization);
    let r = eigh(&op, 1)?;
    let bound = hill_lower_bound(input);
    let (lambda0, residual) = (r.values[0], r.residuals[0]);
    let slack = residual.max(1e-12 * (1.0 + lambda0.abs()));
    Ok(HillCheck {
        bound,
        lambda0,
        residual,
        holds: bound.bound <= lambda0 + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constant_potential_is_sharp() {
        let inp = HillBoundInput::new(1.0, vec![3.5; 64]).unwrap();
        assert_eq!(inp.i_value(), 0.0);
        let c = hill_check(&inp, Discretization::Fourier).unwrap();
        assert_eq!(c.bound.branch, HillBranch::Subcritical);
        assert_eq!(c.bound.bound, 3.5);
        assert!((c.lambda0 - 3.5).abs() < 1e-10);
        assert!(c.holds);
    }

    #[test]
    fn squared_sine() {
        let n = 256;
        let v: Vec<f64> = (0..n)
            .map(|i| {
                let s = crate::num::sin(2.0 * PI * i as f64 / n as f64);
                s * s
            })
            .collect();
        let inp = HillBoundInput::new(1.0, v).unwrap();
        assert!((inp.i_value() - 2.0 / PI).abs() < 1e-3);
        let c = hill_check(&inp, Discretization::Fourier).unwrap();
        assert_eq!(c.bound.branch, HillBranch::Subcritical);
        assert!((c.bound.bound - inp.i_value().powi(2)).abs() < 1e-15);
        assert!(c.holds && c.lambda0 > c.bound.bound);
    }

    #[test]
    fn tall_spike_is_supercritical() {
        let n = 256;
        let v: Vec<f64> = (0..n).map(|i| if i < 8 { 40000.0 } else { 0.0 }).collect();
        let inp = HillBoundInput::new(1.0, v).unwrap();
        let c = hill_check(&inp, Discretization::Fourier).unwrap();
        assert_eq!(c.bound.branch, HillBranch::Supercritical);
        assert!((c.bound.bound - PI * PI).abs() < 1e-12);
        assert!(c.holds);
        assert!(HillBoundInput::new(1.0, vec![]).is_err());
    }
}
