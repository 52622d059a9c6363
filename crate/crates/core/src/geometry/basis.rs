use alloc::vec;
use alloc::vec::Vec;

use super::{ManifoldGrid, ManifoldKind};
use crate::num::{cos, sin, sqrt, PI};

/// Real trigonometric basis on one periodic axis of `n` points and length `l`.
///
/// Mode order: `0` is the constant, `2k - 1` / `2k` are `cos` / `sin` of
/// wavenumber `k` for `1 ≤ k < n/2`, and `n - 1` is the Nyquist cosine.
/// Every mode is normalized so that `Σ h v² = 1` with `h = l / n`.
#[derive(Debug, Clone)]
pub struct Basis1d {
    n: usize,
    length: f64,
    /// `values[m * n + i]` is mode `m` at node `i`.
    values: Vec<f64>,
}

impl Basis1d {
    pub fn new(n: usize, length: f64) -> Self {
        // symmetric tables so cos(2πr/n) is bit-identical for r and n - r
        let half = n / 2;
        let mut ctab = vec![0.0; n];
        let mut stab = vec![0.0; n];
        for r in 0..=half {
            let t = 2.0 * PI * r as f64 / n as f64;
            ctab[r] = cos(t);
            stab[r] = sin(t);
        }
        stab[half] = 0.0;
        for r in half + 1..n {
            ctab[r] = ctab[n - r];
            stab[r] = -stab[n - r];
        }
        let amp = sqrt(2.0 / length);
        let c0 = 1.0 / sqrt(length);
        let mut values = vec![0.0; n * n];
        for m in 0..n {
            let row = &mut values[m * n..(m + 1) * n];
            let k = Self::wavenumber(m, n);
            for (i, v) in row.iter_mut().enumerate() {
                let r = (k * i) % n;
                *v = if m == 0 {
                    c0
                } else if m == n - 1 {
                    if i % 2 == 0 {
                        c0
                    } else {
                        -c0
                    }
                } else if m % 2 == 1 {
                    amp * ctab[r]
                } else {
                    amp * stab[r]
                };
            }
        }
        Self { n, length, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn wavenumber(m: usize, n: usize) -> usize {
        if n == 1 {
            0
        } else if m == n - 1 {
            n / 2
        } else {
            m.div_ceil(2)
        }
    }

    pub fn is_sine(&self, m: usize) -> bool {
        m != 0 && m != self.n - 1 && m.is_multiple_of(2)
    }

    /// Angular frequency `2πk / l` of mode `m`.
    pub fn frequency(&self, m: usize) -> f64 {
        2.0 * PI * Self::wavenumber(m, self.n) as f64 / self.length
    }

    /// Eigenvalue of `-d²/ds²` for mode `m`.
    pub fn eigenvalue(&self, m: usize) -> f64 {
        let w = self.frequency(m);
        w * w
    }

    pub fn mode(&self, m: usize) -> &[f64] {
        &self.values[m * self.n..(m + 1) * self.n]
    }

    fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Coefficients `a_m = Σ h v_m u` of samples `u`, read with the given stride.
    fn analyze_strided(&self, u: &[f64], offset: usize, stride: usize, out: &mut [f64]) {
        let h = self.spacing();
        for (m, o) in out.iter_mut().enumerate() {
            let mode = self.mode(m);
            let mut s = 0.0;
            for (i, v) in mode.iter().enumerate() {
                s += v * u[offset + i * stride];
            }
            *o = h * s;
        }
    }

    fn synthesize_strided(&self, a: &[f64], offset: usize, stride: usize, out: &mut [f64]) {
        for i in 0..self.n {
            out[offset + i * stride] = 0.0;
        }
        for (m, am) in a.iter().enumerate() {
            if *am == 0.0 {
                continue;
            }
            for (i, v) in self.mode(m).iter().enumerate() {
                out[offset + i * stride] += am * v;
            }
        }
    }

    /// Dense matrix of `-d²/ds²` in node space, `D = h Σ_m μ_m v_m v_mᵀ`.
    ///
    /// The matrix is circulant; its first row is summed directly from the
    /// eigenbasis and then wrapped, which keeps it exactly symmetric.
    pub fn laplacian_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let h = self.spacing();
        let mut row = vec![0.0; n];
        for (d, r) in row.iter_mut().enumerate().skip(1) {
            let mut s = 0.0;
            for m in 1..n {
                s += self.eigenvalue(m) * self.mode(m)[0] * self.mode(m)[d];
            }
            *r = h * s;
        }
        // zero row sum: constants lie exactly in the kernel
        row[0] = -row[1..].iter().sum::<f64>();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = row[(j + n - i) % n];
            }
        }
        out
    }
}

/// Separable spectral transforms on a [`ManifoldGrid`].
///
/// Coefficient arrays use the same x-major layout as node arrays, indexed by
/// per-axis mode numbers `(m1, m2)`.
#[derive(Debug, Clone)]
pub struct Spectral {
    grid: ManifoldGrid,
    axes: Vec<Basis1d>,
}

impl Spectral {
    pub fn new(grid: &ManifoldGrid) -> Self {
        let axes = grid
            .points()
            .iter()
            .zip(grid.lengths())
            .map(|(n, l)| Basis1d::new(*n, *l))
            .collect();
        Self {
            grid: grid.clone(),
            axes,
        }
    }

    pub fn grid(&self) -> &ManifoldGrid {
        &self.grid
    }

    pub fn axis(&self, a: usize) -> &Basis1d {
        &self.axes[a]
    }

    fn shape(&self) -> (usize, usize) {
        (self.grid.points[0], self.grid.points[1])
    }

    pub fn analyze(&self, u: &[f64]) -> Vec<f64> {
        let (n1, n2) = self.shape();
        let mut out = vec![0.0; n1 * n2];
        match self.grid.kind {
            ManifoldKind::Circle => self.axes[0].analyze_strided(u, 0, 1, &mut out),
            ManifoldKind::Torus => {
                let mut tmp = vec![0.0; n1 * n2];
                let mut col = vec![0.0; n2.max(n1)];
                for i1 in 0..n1 {
                    self.axes[1].analyze_strided(u, i1 * n2, 1, &mut col[..n2]);
                    tmp[i1 * n2..(i1 + 1) * n2].copy_from_slice(&col[..n2]);
                }
                for m2 in 0..n2 {
                    self.axes[0].analyze_strided(&tmp, m2, n2, &mut col[..n1]);
                    for m1 in 0..n1 {
                        out[m1 * n2 + m2] = col[m1];
                    }
                }
            }
        }
        out
    }

    pub fn synthesize(&self, a: &[f64]) -> Vec<f64> {
        let (n1, n2) = self.shape();
        let mut out = vec![0.0; n1 * n2];
        match self.grid.kind {
            ManifoldKind::Circle => self.axes[0].synthesize_strided(a, 0, 1, &mut out),
            ManifoldKind::Torus => {
                let mut tmp = vec![0.0; n1 * n2];
                for m2 in 0..n2 {
                    let col: Vec<f64> = (0..n1).map(|m1| a[m1 * n2 + m2]).collect();
                    self.axes[0].synthesize_strided(&col, m2, n2, &mut tmp);
                }
                for i1 in 0..n1 {
                    let row = tmp[i1 * n2..(i1 + 1) * n2].to_vec();
                    self.axes[1].synthesize_strided(&row, i1 * n2, 1, &mut out);
                }
            }
        }
        out
    }

    /// Eigenvalue of `-Δ` for the coefficient slot `c`.
    pub fn eigenvalue(&self, c: usize) -> f64 {
        let (m1, m2) = self.grid.split(c);
        match self.grid.kind {
            ManifoldKind::Circle => self.axes[0].eigenvalue(m1),
            ManifoldKind::Torus => self.axes[0].eigenvalue(m1) + self.axes[1].eigenvalue(m2),
        }
    }

    /// All modes `(μ, [m1, m2])` sorted ascending; ties by mode index.
    pub(crate) fn sorted_modes(&self) -> Vec<(f64, [usize; 2])> {
        let mut modes: Vec<(f64, [usize; 2])> = (0..self.grid.len())
            .map(|c| {
                let (m1, m2) = self.grid.split(c);
                (self.eigenvalue(c), [m1, m2])
            })
            .collect();
        modes.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut start = 0;
        while start < modes.len() {
            let mut end = start + 1;
            while end < modes.len() && super::is_tie(modes[start].0, modes[end].0) {
                end += 1;
            }
            modes[start..end].sort_by_key(|m| m.1);
            // a multiplet carries one representative value
            let mu = modes[start].0;
            for m in &mut modes[start..end] {
                m.0 = mu;
            }
            start = end;
        }
        modes
    }

    pub(crate) fn mode_samples(&self, m: [usize; 2]) -> Vec<f64> {
        match self.grid.kind {
            ManifoldKind::Circle => self.axes[0].mode(m[0]).to_vec(),
            ManifoldKind::Torus => {
                let a = self.axes[0].mode(m[0]);
                let b = self.axes[1].mode(m[1]);
                let mut out = Vec::with_capacity(a.len() * b.len());
                for x in a {
                    for y in b {
                        out.push(x * y);
                    }
                }
                out
            }
        }
    }

    /// `-Δu` evaluated spectrally.
    pub fn neg_laplacian(&self, u: &[f64]) -> Vec<f64> {
        let mut a = self.analyze(u);
        for (c, v) in a.iter_mut().enumerate() {
            *v *= self.eigenvalue(c);
        }
        self.synthesize(&a)
    }

    /// Spectral gradient; one node array per axis. The Nyquist cosine has a
    /// zero derivative on the grid, so this is exact only below Nyquist.
    pub fn gradient(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let a = self.analyze(u);
        let (n1, n2) = self.shape();
        (0..self.grid.dim())
            .map(|axis| {
                let basis = &self.axes[axis];
                let mut d = vec![0.0; a.len()];
                for m1 in 0..n1 {
                    for m2 in 0..n2 {
                        let (m, other) = if axis == 0 { (m1, m2) } else { (m2, m1) };
                        let src = a[m1 * n2 + m2];
                        if src == 0.0 || m == 0 || m == basis.len() - 1 {
                            continue;
                        }
                        let w = basis.frequency(m);
                        // d/ds: cos_k -> -w sin_k, sin_k -> w cos_k
                        let (target, factor) = if basis.is_sine(m) { (m - 1, w) } else { (m + 1, -w) };
                        let slot = if axis == 0 {
                            target * n2 + other
                        } else {
                            other * n2 + target
                        };
                        d[slot] += factor * src;
                    }
                }
                self.synthesize(&d)
            })
            .collect()
    }

    /// Zero-mean `u` with `-Δu = rhs`, dropping the constant mode of `rhs`.
    pub fn poisson(&self, rhs: &[f64]) -> Vec<f64> {
        let mut a = self.analyze(rhs);
        a[0] = 0.0;
        for (c, v) in a.iter_mut().enumerate().skip(1) {
            *v /= self.eigenvalue(c);
        }
        self.synthesize(&a)
    }
}
