//! Householder reduction to tridiagonal form, implicit-shift QL eigenvalues,
//! and inverse iteration for selected eigenvectors.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::num::{hypot, sqrt};

/// Iteration cap per eigenvalue, for both QL and inverse iteration.
pub const MAX_ITERATIONS: usize = 50;

/// `A = Q T Qᵀ` with `Q = H₀ H₁ ⋯ H_{n-2}` stored as Householder vectors.
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
    /// Lower triangle holds the Householder vectors below the subdiagonal.
    reflectors: DenseMatrix,
    tau: Vec<f64>,
}

/// Reduces a symmetric matrix (only the lower triangle is read).
pub fn tridiagonalize(mut a: DenseMatrix) -> Tridiagonal {
    let n = a.dim();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut tau = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(1) {
        let x0 = a.get(k + 1, k);
        let mut tail = 0.0;
        for i in k + 2..n {
            let x = a.get(i, k);
            tail += x * x;
        }
        if tail == 0.0 {
            tau[k] = 0.0;
            off[k] = x0;
            continue;
        }
        let norm = sqrt(x0 * x0 + tail);
        let beta = if x0 >= 0.0 { -norm } else { norm };
        let t = (beta - x0) / beta;
        let scale = 1.0 / (x0 - beta);
        tau[k] = t;
        off[k] = beta;

        let m = k + 1;
        v[m] = 1.0;
        for i in m + 1..n {
            v[i] = a.get(i, k) * scale;
            a.set(i, k, v[i]);
        }

        // p = τ A₂₂ v from the lower triangle, one contiguous pass per row
        for pi in &mut p[m..n] {
            *pi = 0.0;
        }
        for i in m..n {
            let row = &a.row(i)[m..=i];
            let vi = v[i];
            let mut s = 0.0;
            for (j, aij) in row[..row.len() - 1].iter().enumerate() {
                s += aij * v[m + j];
                p[m + j] += aij * vi;
            }
            p[i] += s + row[row.len() - 1] * vi;
        }
        let mut pv = 0.0;
        for i in m..n {
            p[i] *= t;
            pv += p[i] * v[i];
        }
        // w = p - (τ/2)(pᵀv) v, stored back into p
        let c = 0.5 * t * pv;
        for i in m..n {
            p[i] -= c * v[i];
        }
        for i in m..n {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a.row_mut(i)[m..=i];
            for (j, aij) in row.iter_mut().enumerate() {
                *aij -= vi * p[m + j] + wi * v[m + j];
            }
        }
    }
    for (i, d) in diag.iter_mut().enumerate() {
        *d = a.get(i, i);
    }
    Tridiagonal {
        diag,
        off,
        reflectors: a,
        tau,
    }
}

impl Tridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Infinity norm of `T`.
    pub fn norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// `x ← Q x`.
    pub fn back_transform(&self, x: &mut [f64]) {
        let n = self.dim();
        for k in (0..n.saturating_sub(1)).rev() {
            let t = self.tau[k];
            if t == 0.0 {
                continue;
            }
            let m = k + 1;
            let mut s = x[m];
            for i in m + 1..n {
                s += self.reflectors.get(i, k) * x[i];
            }
            s *= t;
            x[m] -= s;
            for i in m + 1..n {
                x[i] -= s * self.reflectors.get(i, k);
            }
        }
    }
}

/// All eigenvalues of a symmetric tridiagonal matrix, ascending, together
/// with the total number of QL sweeps.
pub fn ql_eigenvalues(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, usize)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(off);
    let mut total = 0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total += 1;
            if iter > MAX_ITERATIONS {
                return Err(Error::NumericalFailure {
                    what: alloc::format!("implicit QL did not converge for eigenvalue {l}"),
                    iterations: iter - 1,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok((d, total))
}

/// LU factorization of `T - λI` with partial pivoting (two superdiagonals).
struct ShiftedLu {
    main: Vec<f64>,
    up: Vec<f64>,
    up2: Vec<f64>,
    mult: Vec<f64>,
    swap: Vec<bool>,
}

impl ShiftedLu {
    fn new(t: &Tridiagonal, lambda: f64, tiny: f64) -> Self {
        let n = t.dim();
        let mut main: Vec<f64> = t.diag.iter().map(|d| d - lambda).collect();
        let mut up = vec![0.0; n];
        up[..n - 1].copy_from_slice(&t.off);
        let mut up2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swap = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            let low = t.off[i];
            if main[i].abs() >= low.abs() {
                if main[i] == 0.0 {
                    main[i] = tiny;
                }
                let l = low / main[i];
                mult[i] = l;
                main[i + 1] -= l * up[i];
            } else {
                let l = main[i] / low;
                mult[i] = l;
                swap[i] = true;
                let (old_up, old_main_next, old_up_next) = (up[i], main[i + 1], up[i + 1]);
                main[i] = low;
                up[i] = old_main_next;
                up2[i] = old_up_next;
                main[i + 1] = old_up - l * old_main_next;
                up[i + 1] = -l * old_up_next;
            }
        }
        for m in &mut main {
            if m.abs() < tiny {
                *m = if *m < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            main,
            up,
            up2,
            mult,
            swap,
        }
    }

    fn solve(&self, y: &mut [f64]) {
        let n = y.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.mult[i] * y[i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.up[i] * y[i + 1];
            }
            if i + 2 < n {
                s -= self.up2[i] * y[i + 2];
            }
            y[i] = s / self.main[i];
        }
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let nrm = sqrt(x.iter().map(|v| v * v).sum());
    for v in x.iter_mut() {
        *v /= nrm;
    }
    nrm
}

fn tridiag_residual(t: &Tridiagonal, lambda: f64, x: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut r = (t.diag[i] - lambda) * x[i];
        if i > 0 {
            r += t.off[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            r += t.off[i] * x[i + 1];
        }
        s += r * r;
    }
    sqrt(s)
}

/// Unit eigenvectors of `T` for ascending `lambdas`, by inverse iteration with
/// Gram-Schmidt inside clusters. Returns the vectors and total iterations.
pub fn inverse_iteration(t: &Tridiagonal, lambdas: &[f64]) -> Result<(Vec<Vec<f64>>, usize)> {
    let n = t.dim();
    let tnorm = t.norm().max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * tnorm;
    let tol = 16.0 * sqrt(n as f64) * f64::EPSILON * tnorm;
    let cluster_gap = 1e-3 * tnorm;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(lambdas.len());
    let mut cluster_start = 0;
    let mut total = 0;

    for (j, &lambda) in lambdas.iter().enumerate() {
        if j > 0 && lambda - lambdas[j - 1] > cluster_gap {
            cluster_start = j;
        }
        let lu = ShiftedLu::new(t, lambda, tiny);
        // deterministic, generic start vector
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * crate::num::sin(1.0 + (i as f64) * 0.7548776662 + j as f64 * 0.5698402910))
            .collect();
        normalize(&mut x);
        let mut converged_at = None;
        for it in 1..=MAX_ITERATIONS {
            total += 1;
            lu.solve(&mut x);
            for prev in &out[cluster_start..j] {
                let c = crate::num::dot(prev, &x);
                for (xi, pi) in x.iter_mut().zip(prev) {
                    *xi -= c * pi;
                }
            }
            normalize(&mut x);
            match converged_at {
                // one extra sweep after the residual test passes
                Some(_) => break,
                None if tridiag_residual(t, lambda, &x) <= tol => converged_at = Some(it),
                None => {}
            }
        }
        if converged_at.is_none() {
            return Err(Error::NumericalFailure {
                what: alloc::format!(
                    "inverse iteration for eigenvalue {j} stalled at residual {:e}",
                    tridiag_residual(t, lambda, &x)
                ),
                iterations: MAX_ITERATIONS,
            });
        }
        out.push(x);
    }
    Ok((out, total))
}
