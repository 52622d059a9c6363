//! Cyclic Jacobi rotations: slow, simple, and a useful independent check.

use alloc::vec;
use alloc::vec::Vec;

use super::tridiag::MAX_ITERATIONS;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::num::sqrt;

/// Full eigendecomposition; columns of the returned row-major matrix are the
/// unit eigenvectors, in the order of the returned eigenvalues (unsorted).
pub fn jacobi_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix, usize)> {
    let n = a.dim();
    let mut a = a.clone();
    let mut v = DenseMatrix::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 });
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut sweeps = 0;
    loop {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += 2.0 * a.get(i, j) * a.get(i, j);
            }
        }
        if sqrt(off) <= f64::EPSILON * scale {
            break;
        }
        sweeps += 1;
        if sweeps > MAX_ITERATIONS {
            return Err(Error::NumericalFailure {
                what: alloc::format!("Jacobi off-diagonal norm stuck at {:e}", sqrt(off)),
                iterations: MAX_ITERATIONS,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + sqrt(theta * theta + 1.0));
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }
    let values = (0..n).map(|i| a.get(i, i)).collect();
    Ok((values, v, sweeps))
}

fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.dim();
    // A ← Jᵀ A J with J the (p, q) rotation
    for k in 0..n {
        let (akp, akq) = (a.get(k, p), a.get(k, q));
        a.set(k, p, c * akp - s * akq);
        a.set(k, q, s * akp + c * akq);
    }
    for k in 0..n {
        let (apk, aqk) = (a.get(p, k), a.get(q, k));
        a.set(p, k, c * apk - s * aqk);
        a.set(q, k, s * apk + c * aqk);
    }
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
    for k in 0..n {
        let (vkp, vkq) = (v.get(k, p), v.get(k, q));
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

#[allow(dead_code)]
pub(crate) fn column(m: &DenseMatrix, j: usize) -> Vec<f64> {
    let mut out = vec![0.0; m.dim()];
    for (i, o) in out.iter_mut().enumerate() {
        *o = m.get(i, j);
    }
    out
}
