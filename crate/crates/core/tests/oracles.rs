//! Independent oracles for the eigensolver and the operator assembly.

use mineig_core::eigensolve::{eigh_dense, Solver};
use mineig_core::linalg::DenseMatrix;
use mineig_core::operator::assemble_diagonal;
use mineig_core::{eigh, Discretization, ManifoldGrid};
use std::f64::consts::PI;

/// Number of eigenvalues of `a` below `sigma`, from the inertia of the
/// symmetric `LDLᵀ` factorization of `a - σI` (Sylvester's law).
fn count_below(a: &DenseMatrix, sigma: f64) -> usize {
    let n = a.dim();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a.get(i, j)).collect()).collect();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= sigma;
    }
    let mut neg = 0;
    for k in 0..n {
        let mut d = m[k][k];
        if d == 0.0 {
            d = -1e-300;
        }
        if d < 0.0 {
            neg += 1;
        }
        let (top, below) = m.split_at_mut(k + 1);
        for row in below {
            let f = row[k] / d;
            for (x, p) in row[k + 1..].iter_mut().zip(&top[k][k + 1..]) {
                *x -= f * p;
            }
        }
    }
    neg
}

/// All eigenvalues by bisection on the inertia count.
fn bisection_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let n = a.dim();
    let r = a.inf_norm() + 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-r, r);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(a, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }
}

#[test]
fn small_matrices_match_inertia_bisection() {
    let mut rng = Lcg(7);
    for trial in 0..200 {
        let n = 1 + trial % 8;
        let mut a = DenseMatrix::from_fn(n, |_, _| rng.next());
        a.symmetrize();
        let want = bisection_eigenvalues(&a);
        for solver in [Solver::HouseholderQl, Solver::Jacobi] {
            let (got, _, _) = eigh_dense(&a, n, solver).unwrap();
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-8, "{solver:?} n={n}: {g} vs {w}");
            }
        }
    }
}

#[test]
fn repeated_eigenvalues_match_inertia_bisection() {
    // a rank-one update of a multiple of the identity: eigenvalue 2 with multiplicity n - 1
    let n = 7;
    let v: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0).sqrt()).collect();
    let a = DenseMatrix::from_fn(n, |i, j| v[i] * v[j] + if i == j { 2.0 } else { 0.0 });
    let want = bisection_eigenvalues(&a);
    let (got, _, _) = eigh_dense(&a, n, Solver::HouseholderQl).unwrap();
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-10);
    }
    assert!((got[n - 1] - (2.0 + v.iter().map(|x| x * x).sum::<f64>())).abs() < 1e-12);
}

/// Mathieu characteristic value `a₀(q)` for `-u'' + 2q cos(2x) u = a u` with
/// period π, from the small-q series `-q²/2 + 7q⁴/128 - 29q⁶/2304`.
#[test]
fn mathieu_ground_state() {
    for q in [0.05f64, 0.1, 0.2] {
        let series = -q * q / 2.0 + 7.0 * q.powi(4) / 128.0 - 29.0 * q.powi(6) / 2304.0;
        let grid = ManifoldGrid::circle(PI, 64).unwrap();
        let v: Vec<f64> = (0..64).map(|i| 2.0 * q * (2.0 * grid.node(i)[0]).cos()).collect();
        let op = assemble_diagonal(&grid, v, 1.0, Discretization::Fourier);
        let got = eigh(&op, 1).unwrap().values[0];
        // next series term is O(q⁸)
        assert!(
            (got - series).abs() < 0.02 * q.powi(8) + 1e-12,
            "q={q}: {got} vs {series}"
        );
    }
}

/// Second-order differences: eigenvalue of wavenumber k is (4/h²) sin²(kh/2).
#[test]
fn fd2_free_spectrum() {
    let n = 40;
    let grid = ManifoldGrid::circle(1.0, n).unwrap();
    let h = 1.0 / n as f64;
    let op = assemble_diagonal(&grid, vec![0.0; n], 1.0, Discretization::Fd2);
    let got = eigh(&op, 7).unwrap().values;
    let mut want = vec![0.0];
    for k in 1..=3 {
        let w = 4.0 / (h * h) * (PI * k as f64 * h).sin().powi(2);
        want.push(w);
        want.push(w);
    }
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-9 * (1.0 + w), "{g} vs {w}");
    }
}

/// Torus Laplacian spectrum is the sum of the axis spectra.
#[test]
fn rectangular_torus_spectrum() {
    let grid = ManifoldGrid::torus(1.0, 2.0, 12, 16).unwrap();
    let op = assemble_diagonal(&grid, vec![0.0; grid.len()], 1.0, Discretization::Fourier);
    let got = eigh(&op, 9).unwrap().values;
    let mut want = Vec::new();
    for k1 in -3i32..=3 {
        for k2 in -5i32..=5 {
            want.push((2.0 * PI * k1 as f64).powi(2) + (PI * k2 as f64).powi(2));
        }
    }
    want.sort_by(f64::total_cmp);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-9 * (1.0 + w), "{g} vs {w}");
    }
}
