#![allow(dead_code)]

use nls_virial_core::{Field, Grid, GroundState, ProblemParams, SolverOptions};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn params(dim: usize, p: f64) -> ProblemParams<f64> {
    ProblemParams::new(dim, p).unwrap()
}

pub fn ground_state(dim: usize, p: f64, half_len: f64, points: usize) -> GroundState<f64> {
    let g = Grid::new(dim, half_len, points).unwrap();
    nls_virial_core::solve_ground_state(params(dim, p), g, &SolverOptions::default()).unwrap()
}

/// The standard 1D septic ground state on [-20, 20) with 512 points.
pub fn septic() -> GroundState<f64> {
    ground_state(1, 7.0, 20.0, 512)
}

/// Random smooth field: Fourier modes with |k| ≤ kmax and a Gaussian
/// envelope so the result is localized and band-limited.
pub fn band_limited(grid: &Grid<f64>, pp: ProblemParams<f64>, seed: u64, kmax: f64) -> Field<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex::new(0.0, 0.0); grid.len()];
    for (i, c) in spec.iter_mut().enumerate() {
        let k2 = grid.k_sq(i);
        if k2 <= kmax * kmax {
            let a = (-k2 / (kmax * kmax)).exp();
            *c = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * a;
        }
    }
    grid.inverse(&mut spec);
    let width = grid.half_len() / 6.0;
    let vals = spec
        .iter()
        .enumerate()
        .map(|(i, v)| *v * (-grid.radius_sq(i) / (2.0 * width * width)).exp())
        .collect();
    let u = Field::new(vals, grid.clone(), pp).unwrap();
    // envelope products stay band-limited to round-off; scale to unit mass
    let m = u.mass();
    u.scaled(1.0 / m.sqrt())
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
