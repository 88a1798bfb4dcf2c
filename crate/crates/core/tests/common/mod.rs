#![allow(dead_code)]

use std::f64::consts::PI;

use kbf_core::{make_grid, to_spectral, Grid, SpectralState};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn grid(n: usize) -> Grid {
    make_grid(n, 0.0, 2.0 * PI).unwrap()
}

pub fn benchmark_state(grid: &Grid) -> SpectralState {
    let v: Vec<f64> = grid.points().iter().map(|x| 0.5 + 0.25 * x.sin()).collect();
    to_spectral(&v, grid).unwrap()
}

/// Real-representable state with random coefficients on `|k| <= max_mode`.
pub fn random_band_limited(grid: &Grid, max_mode: i64, rng: &mut ChaCha8Rng) -> SpectralState {
    let n = grid.n_modes() as f64;
    let mut s = SpectralState::zeros(grid.clone());
    s.coeffs_mut()[0] = Complex64::new(rng.gen_range(-1.0..1.0) * n, 0.0);
    for k in 1..=max_mode {
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (n / 2.0);
        let j = grid.index_of(k).unwrap();
        let m = grid.index_of(-k).unwrap();
        s.coeffs_mut()[j] = c;
        s.coeffs_mut()[m] = c.conj();
    }
    s
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
