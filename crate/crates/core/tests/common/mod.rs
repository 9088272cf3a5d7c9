#![allow(dead_code)]

use pencil_core::linalg::{complex_gaussian, identity, scale, spectral_norm, CMatrix};
use pencil_core::{c64, Pencil, RngStream};

pub fn rel_err(x: &CMatrix, y: &CMatrix) -> f64 {
    spectral_norm(&(x - y)).unwrap() / spectral_norm(y).unwrap().max(f64::MIN_POSITIVE)
}

/// `I + 0.3·G` with `G` Ginibre: condition number stays modest.
pub fn well_conditioned(n: usize, rng: &RngStream) -> CMatrix {
    &identity(n) + scale(&complex_gaussian(n, n, 1.0 / n as f64, rng), c64::new(0.3, 0.0))
}

pub fn random_pencil(n: usize, rng: &RngStream) -> Pencil {
    Pencil::new(complex_gaussian(n, n, 1.0 / n as f64, &rng.child("A")), well_conditioned(n, &rng.child("B"))).unwrap()
}

/// `(A⁻¹B)^(2^p)` by explicit inversion and repeated multiplication.
pub fn brute_power(a: &CMatrix, b: &CMatrix, p: usize) -> CMatrix {
    let mut m = pencil_core::linalg::solve(a, b).unwrap();
    for _ in 0..p {
        m = &m * &m;
    }
    m
}
