//! Minimal dense row-major matrix used for operator assembly and eigensolves.

use alloc::vec;
use alloc::vec::Vec;

use crate::num::sqrt;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds from row-major data of length `n * n`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must have n*n entries");
        Self { n, data }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| crate::num::dot(self.row(i), x)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.data.iter().map(|v| v * v).sum())
    }

    /// Max absolute row sum; equals the 1-norm for symmetric matrices.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }

    /// Replaces the matrix by `(A + Aᵀ) / 2`.
    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }

    /// `A ⊗ I + I ⊗ B` for square `A` (n₁) and `B` (n₂).
    pub fn kronecker_sum(a: &DenseMatrix, b: &DenseMatrix) -> Self {
        let (n1, n2) = (a.n, b.n);
        let n = n1 * n2;
        let mut out = Self::zeros(n);
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let row = i1 * n2 + i2;
                let r = out.row_mut(row);
                for j1 in 0..n1 {
                    r[j1 * n2 + i2] += a.get(i1, j1);
                }
                for j2 in 0..n2 {
                    r[i1 * n2 + j2] += b.get(i2, j2);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_sum_small() {
        let a = DenseMatrix::from_row_major(2, vec![1.0, 2.0, 2.0, 3.0]);
        let b = DenseMatrix::from_row_major(2, vec![10.0, 20.0, 20.0, 30.0]);
        let k = DenseMatrix::kronecker_sum(&a, &b);
        let want = [
            [11.0, 20.0, 2.0, 0.0],
            [20.0, 31.0, 0.0, 2.0],
            [2.0, 0.0, 13.0, 20.0],
            [0.0, 2.0, 20.0, 33.0],
        ];
        for (i, row) in want.iter().enumerate() {
            assert_eq!(k.row(i), row);
        }
    }

    #[test]
    fn symmetrize_averages() {
        let mut m = DenseMatrix::from_row_major(2, vec![1.0, 2.0, 4.0, 3.0]);
        assert_eq!(m.max_asymmetry(), 2.0);
        m.symmetrize();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.max_asymmetry(), 0.0);
    }
}
