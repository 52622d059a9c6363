//! The single seeded generator and the random fields drawn from it.

use mineig_core::{laplace_eigenbasis, ManifoldGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Zero-mean field `Σ cⱼ vⱼ` over the first `modes` nonconstant Laplace
/// eigenfunctions with `cⱼ ~ U(-1, 1)`, scaled to unit root-mean-square.
pub fn band_limited(grid: &ManifoldGrid, modes: usize, rng: &mut SeededRng) -> Vec<f64> {
    let modes = modes.clamp(1, grid.len() - 2);
    let basis = laplace_eigenbasis(grid, modes + 1).expect("mode count checked against the grid");
    let mut u = vec![0.0; grid.len()];
    for b in basis.iter().skip(1) {
        let c: f64 = rng.gen_range(-1.0..1.0);
        for (x, v) in u.iter_mut().zip(&b.samples) {
            *x += c * v;
        }
    }
    let rms = (grid.inner(&u, &u) / grid.measure()).sqrt();
    if rms > 0.0 {
        u.iter_mut().for_each(|x| *x /= rms);
    }
    u
}
