//! Flat model manifolds: the circle of circumference `L` and the rectangular
//! torus `L₁ × L₂`, sampled on uniform periodic grids.
//!
//! Quadrature is the uniform trapezoid rule, which is exact for trigonometric
//! polynomials below the Nyquist order. That makes the sampled sine/cosine
//! eigenfunctions exactly orthonormal on the grid, so they double as oracles.

mod basis;

pub use basis::{Basis1d, Spectral};

use alloc::vec::Vec;

use crate::error::{ensure, Result};
use crate::num::{hypot, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldKind {
    Circle,
    Torus,
}

impl ManifoldKind {
    pub fn name(self) -> &'static str {
        match self {
            ManifoldKind::Circle => "circle",
            ManifoldKind::Torus => "torus",
        }
    }
}

/// Uniform periodic grid on a circle or torus.
///
/// Nodes are indexed x-major: node `i1 * n2 + i2` sits at `(i1 h1, i2 h2)`.
/// For the circle the second axis is a dummy of length 1 with a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldGrid {
    kind: ManifoldKind,
    lengths: [f64; 2],
    points: [usize; 2],
}

const MIN_POINTS: usize = 8;

fn check_axis(length: f64, points: usize) -> Result<()> {
    ensure!(
        length.is_finite() && length > 0.0,
        "length must be positive, got {length}"
    );
    ensure!(
        points >= MIN_POINTS && points.is_multiple_of(2),
        "points per dimension must be even and at least {MIN_POINTS}, got {points}"
    );
    Ok(())
}

impl ManifoldGrid {
    /// Circle of circumference `length` with nodes `s_j = j L / N`.
    pub fn circle(length: f64, points: usize) -> Result<Self> {
        check_axis(length, points)?;
        Ok(Self {
            kind: ManifoldKind::Circle,
            lengths: [length, 1.0],
            points: [points, 1],
        })
    }

    /// Rectangular torus `L₁ × L₂` with an `N₁ × N₂` tensor grid.
    pub fn torus(l1: f64, l2: f64, n1: usize, n2: usize) -> Result<Self> {
        check_axis(l1, n1)?;
        check_axis(l2, n2)?;
        Ok(Self {
            kind: ManifoldKind::Torus,
            lengths: [l1, l2],
            points: [n1, n2],
        })
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    /// Topological dimension (1 or 2).
    pub fn dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Circle => 1,
            ManifoldKind::Torus => 2,
        }
    }

    /// Side lengths of the active axes.
    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dim()]
    }

    /// Points per active axis.
    pub fn points(&self) -> &[usize] {
        &self.points[..self.dim()]
    }

    pub fn len(&self) -> usize {
        self.points[0] * self.points[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Total measure `|M|`.
    pub fn measure(&self) -> f64 {
        self.lengths().iter().product()
    }

    /// Uniform quadrature weight `|M| / (total nodes)`.
    pub fn weight(&self) -> f64 {
        self.spacing(0) * if self.dim() == 2 { self.spacing(1) } else { 1.0 }
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.points[axis] as f64
    }

    /// Coordinates of node `i`; the second entry is `0` on the circle.
    pub fn node(&self, i: usize) -> [f64; 2] {
        let (i1, i2) = self.split(i);
        match self.kind {
            ManifoldKind::Circle => [i1 as f64 * self.spacing(0), 0.0],
            ManifoldKind::Torus => [i1 as f64 * self.spacing(0), i2 as f64 * self.spacing(1)],
        }
    }

    pub fn nodes(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    pub(crate) fn split(&self, i: usize) -> (usize, usize) {
        (i / self.points[1], i % self.points[1])
    }

    pub(crate) fn join(&self, i1: usize, i2: usize) -> usize {
        i1 * self.points[1] + i2
    }

    /// Quadrature `Σ w f(xᵢ)`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weight() * f.iter().sum::<f64>()
    }

    /// Mean `(1/|M|) Σ w f(xᵢ)`.
    pub fn mean(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() / self.len() as f64
    }

    /// Weighted inner product `Σ w f g`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weight() * crate::num::dot(f, g)
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        crate::num::sqrt(self.inner(f, f))
    }

    /// Distance between two nodes in the flat quotient metric.
    pub fn periodic_distance(&self, a: usize, b: usize) -> f64 {
        let (a1, a2) = self.split(a);
        let (b1, b2) = self.split(b);
        let axis = |p: usize, q: usize, ax: usize| {
            let n = self.points[ax];
            let d = p.abs_diff(q);
            d.min(n - d) as f64 * self.spacing(ax)
        };
        match self.kind {
            ManifoldKind::Circle => axis(a1, b1, 0),
            ManifoldKind::Torus => hypot(axis(a1, b1, 0), axis(a2, b2, 1)),
        }
    }

    /// Half the shortest period: geodesic balls below this radius are embedded.
    pub fn injectivity_radius(&self) -> f64 {
        self.lengths().iter().fold(f64::INFINITY, |m, l| m.min(*l)) / 2.0
    }
}

/// One analytic eigenpair of `-Δ` sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceEigenpair {
    pub index: usize,
    pub eigenvalue: f64,
    /// Samples normalized so that `Σ w v² = 1`.
    pub samples: Vec<f64>,
    /// Size of the eigenvalue's multiplet on this grid.
    pub multiplicity: usize,
    /// Per-axis indices into [`Basis1d`]'s mode ordering.
    pub modes: [usize; 2],
    /// Per-axis integer wavenumbers `k`.
    pub wavenumbers: [usize; 2],
}

/// Relative tolerance under which two analytic eigenvalues are one multiplet.
const TIE_TOL: f64 = 1e-12;

/// The first `count` Laplace eigenpairs, ascending, multiplicities repeated.
///
/// Ties are broken by the per-axis mode order (cosine before sine within a
/// wavenumber, first axis before second).
pub fn laplace_eigenbasis(grid: &ManifoldGrid, count: usize) -> Result<Vec<LaplaceEigenpair>> {
    ensure!(
        count >= 1 && count <= grid.len(),
        "count must be in 1..={}, got {count}",
        grid.len()
    );
    let spectral = Spectral::new(grid);
    let mut modes = spectral.sorted_modes();
    let groups = tie_groups(&modes);
    modes.truncate(count);
    Ok(modes
        .into_iter()
        .enumerate()
        .map(|(index, (mu, m))| LaplaceEigenpair {
            index,
            eigenvalue: mu,
            samples: spectral.mode_samples(m),
            multiplicity: groups[index],
            modes: m,
            wavenumbers: [
                Basis1d::wavenumber(m[0], grid.points[0]),
                Basis1d::wavenumber(m[1], grid.points[1]),
            ],
        })
        .collect())
}

fn tie_groups(modes: &[(f64, [usize; 2])]) -> Vec<usize> {
    let mut sizes = alloc::vec![0; modes.len()];
    let mut start = 0;
    while start < modes.len() {
        let mut end = start + 1;
        while end < modes.len() && is_tie(modes[start].0, modes[end].0) {
            end += 1;
        }
        for s in &mut sizes[start..end] {
            *s = end - start;
        }
        start = end;
    }
    sizes
}

pub(crate) fn is_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Nodes within periodic distance `radius` of `center` (boundary included).
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    pub mask: Vec<bool>,
    /// Discrete measure `|B_δ| = (mask count) · w`.
    pub measure: f64,
}

impl Ball {
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }
}

pub fn geodesic_ball_indicator(grid: &ManifoldGrid, center: usize, radius: f64) -> Result<Ball> {
    ensure!(center < grid.len(), "center node {center} out of range");
    let rmax = grid.injectivity_radius();
    ensure!(
        radius > 0.0 && radius < rmax,
        "radius must lie in (0, {rmax}), got {radius}"
    );
    let slack = 1e-12 * radius;
    let mask: Vec<bool> = (0..grid.len())
        .map(|i| grid.periodic_distance(center, i) <= radius + slack)
        .collect();
    let count = mask.iter().filter(|m| **m).count();
    Ok(Ball {
        center,
        radius,
        mask,
        measure: count as f64 * grid.weight(),
    })
}

/// First nonzero Laplace eigenvalue `μ₁` of the continuum manifold.
pub fn first_nonzero_eigenvalue(grid: &ManifoldGrid) -> f64 {
    let lmax = grid.lengths().iter().fold(0.0f64, |m, l| m.max(*l));
    let w = 2.0 * PI / lmax;
    w * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_nodes_and_weights() {
        let g = ManifoldGrid::circle(1.0, 8).unwrap();
        assert_eq!(g.len(), 8);
        for i in 0..8 {
            assert_eq!(g.node(i)[0], i as f64 * 0.125);
        }
        assert_eq!(g.weight(), 0.125);
        let g = ManifoldGrid::circle(2.0 * PI, 16).unwrap();
        assert_eq!(g.measure(), 2.0 * PI);
        assert!((g.weight() * 16.0 - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn bad_grids_are_rejected() {
        assert!(ManifoldGrid::circle(-1.0, 8).is_err());
        assert!(ManifoldGrid::circle(1.0, 6).is_err());
        assert!(ManifoldGrid::circle(1.0, 9).is_err());
        assert!(ManifoldGrid::circle(f64::NAN, 8).is_err());
        assert!(ManifoldGrid::torus(1.0, 1.0, 7, 8).is_err());
        assert!(ManifoldGrid::torus(1.0, 0.0, 8, 8).is_err());
    }

    #[test]
    fn torus_measure() {
        let g = ManifoldGrid::torus(1.0, 1.0, 8, 8).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.weight(), 1.0 / 64.0);
        let g = ManifoldGrid::torus(1.0, 2.0, 8, 8).unwrap();
        assert_eq!(g.measure(), 2.0);
        assert!((g.weight() * g.len() as f64 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn circle_eigenvalues() {
        let g = ManifoldGrid::circle(1.0, 16).unwrap();
        let b = laplace_eigenbasis(&g, 3).unwrap();
        let mu1 = 4.0 * PI * PI;
        assert_eq!(b[0].eigenvalue, 0.0);
        assert!((b[1].eigenvalue - mu1).abs() < 1e-12);
        assert!((b[2].eigenvalue - mu1).abs() < 1e-12);
        assert_eq!(b[1].multiplicity, 2);
        // cosine before sine
        assert!((b[1].samples[0] - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(b[2].samples[0], 0.0);
    }

    #[test]
    fn torus_eigenvalues_match_enumeration() {
        // independent enumeration of (2πk₁)² + (2πk₂)² with both signs of k
        let mut oracle = Vec::new();
        for k1 in -3i32..=3 {
            for k2 in -3i32..=3 {
                oracle.push(4.0 * PI * PI * (k1 * k1 + k2 * k2) as f64);
            }
        }
        oracle.sort_by(f64::total_cmp);
        let g = ManifoldGrid::torus(1.0, 1.0, 16, 16).unwrap();
        let b = laplace_eigenbasis(&g, 13).unwrap();
        for (p, o) in b.iter().zip(&oracle) {
            assert!((p.eigenvalue - o).abs() < 1e-10, "{} vs {o}", p.eigenvalue);
        }
        assert_eq!(b[1].multiplicity, 4);
        assert_eq!(b[5].multiplicity, 4);
    }

    #[test]
    fn constant_mode_and_orthonormality() {
        for g in [
            ManifoldGrid::circle(1.7, 12).unwrap(),
            ManifoldGrid::torus(1.0, 1.5, 8, 10).unwrap(),
        ] {
            let b = laplace_eigenbasis(&g, g.len()).unwrap();
            let c = 1.0 / g.measure().sqrt();
            assert!(b[0].samples.iter().all(|v| (v - c).abs() < 1e-14));
            for i in 0..b.len() {
                for j in 0..b.len() {
                    let ip = g.inner(&b[i].samples, &b[j].samples);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() <= 1e-12, "<v{i},v{j}> = {ip}");
                }
                if i > 0 {
                    assert!(b[i].eigenvalue >= b[i - 1].eigenvalue);
                }
            }
        }
    }

    #[test]
    fn count_out_of_range() {
        let g = ManifoldGrid::circle(1.0, 8).unwrap();
        assert!(laplace_eigenbasis(&g, 9).is_err());
        assert!(laplace_eigenbasis(&g, 0).is_err());
        assert!(laplace_eigenbasis(&g, 8).is_ok());
    }

    #[test]
    fn ball_on_circle() {
        let g = ManifoldGrid::circle(1.0, 64).unwrap();
        let b = geodesic_ball_indicator(&g, 0, 0.25).unwrap();
        // nodes at distance exactly 0.25 are included: 33 nodes
        assert_eq!(b.count(), 33);
        assert!((b.measure - 0.5).abs() <= g.weight() + 1e-15);
        assert!(geodesic_ball_indicator(&g, 0, 1.0).is_err());
        assert!(geodesic_ball_indicator(&g, 0, 0.5).is_err());
        assert!(geodesic_ball_indicator(&g, 0, 0.0).is_err());
    }

    #[test]
    fn ball_on_torus() {
        let g = ManifoldGrid::torus(1.0, 1.0, 64, 64).unwrap();
        let center = g.join(20, 40);
        let b = geodesic_ball_indicator(&g, center, 0.1).unwrap();
        let area = PI * 0.01;
        let cell = g.weight();
        assert!((b.measure - area).abs() <= cell, "{} vs {area}", b.measure);
    }
}
