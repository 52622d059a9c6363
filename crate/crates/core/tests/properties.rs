//! Invariants under random inputs.

use mineig_core::experiments::{hill_check, HillBoundInput};
use mineig_core::perturbation::{ell2, functional_i, functional_i_modal};
use mineig_core::potentials::project_to_constraint;
use mineig_core::{assemble, eigh, laplace_eigenbasis, CouplingFunction, CouplingKind, Discretization, ManifoldGrid};
use proptest::prelude::*;

/// Zero-mean field with random coefficients on the first `modes` Laplace modes.
fn band_limited(grid: &ManifoldGrid, coeffs: &[f64]) -> Vec<f64> {
    let basis = laplace_eigenbasis(grid, coeffs.len() + 1).unwrap();
    let mut u = vec![0.0; grid.len()];
    for (b, c) in basis.iter().skip(1).zip(coeffs) {
        for (x, v) in u.iter_mut().zip(&b.samples) {
            *x += c * v;
        }
    }
    u
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ell2_forms_agree(coeffs in prop::collection::vec(-1.0f64..1.0, 6), alpha in 0.01f64..1.0, k0 in 0.5f64..4.0) {
        let g = ManifoldGrid::circle(1.0, 32).unwrap();
        let q = band_limited(&g, &coeffs);
        prop_assume!(g.norm(&q) > 1e-3);
        let f = CouplingFunction::new(CouplingKind::Exp, k0).unwrap();
        let e = ell2(&g, &q, &f, alpha).unwrap();
        prop_assert!(e.spread() < 1e-9 * (1.0 + e.value.abs()), "{:?}", e);
    }

    #[test]
    fn functional_matches_modal_sum(coeffs in prop::collection::vec(-1.0f64..1.0, 8), alpha in 0.0f64..0.1) {
        let g = ManifoldGrid::torus(1.0, 1.0, 12, 12).unwrap();
        let u = band_limited(&g, &coeffs);
        let a = functional_i(&g, &u, alpha);
        let b = functional_i_modal(&g, &u, alpha);
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn projection_is_idempotent(v in prop::collection::vec(-5.0f64..5.0, 16), k0 in -3.0f64..3.0) {
        let g = ManifoldGrid::circle(2.0, 16).unwrap();
        let p = project_to_constraint(&g, v, k0);
        prop_assert!((p.mean() - k0).abs() <= 1e-12 * (1.0 + k0.abs()));
        let again = project_to_constraint(&g, p.samples().to_vec(), k0);
        prop_assert_eq!(again.samples(), p.samples());
    }

    #[test]
    fn spectrum_is_translation_invariant(v in prop::collection::vec(0.0f64..3.0, 16), s in 0usize..16) {
        let g = ManifoldGrid::circle(1.0, 16).unwrap();
        let f = CouplingFunction::square(1.0);
        let p = project_to_constraint(&g, v, 1.0);
        let a = eigh(&assemble(&g, &p, &f, 0.7, Discretization::Fourier).unwrap(), 4).unwrap();
        let b = eigh(&assemble(&g, &p.translate([s, 0]), &f, 0.7, Discretization::Fourier).unwrap(), 4).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn hill_bound_never_exceeds_ground_state(coeffs in prop::collection::vec(-2.0f64..2.0, 8), shift in -1.0f64..1.0) {
        let g = ManifoldGrid::circle(1.0, 64).unwrap();
        let v: Vec<f64> = band_limited(&g, &coeffs).iter().map(|x| x + shift).collect();
        let c = hill_check(&HillBoundInput::new(1.0, v).unwrap(), Discretization::Fourier).unwrap();
        prop_assert!(c.holds, "{:?}", c);
    }

    #[test]
    fn ground_state_lies_between_potential_extremes(v in prop::collection::vec(0.0f64..4.0, 24)) {
        let g = ManifoldGrid::circle(1.0, 24).unwrap();
        let f = CouplingFunction::new(CouplingKind::Identity, 2.0).unwrap();
        let p = project_to_constraint(&g, v, 2.0);
        let lo = p.samples().iter().copied().fold(f64::INFINITY, f64::min);
        let r = eigh(&assemble(&g, &p, &f, 1.0, Discretization::Fd2).unwrap(), 1).unwrap();
        // λ₀ ≥ min V and λ₀ ≤ mean V (constant test function)
        prop_assert!(r.values[0] >= lo - 1e-10);
        prop_assert!(r.values[0] <= 2.0 + 1e-10);
    }
}
