//! Inversion-based baseline: diagonalize `B̃⁻¹Ã` as a single matrix.

use faer::c64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::eigsolve::{eig, Variant};
use crate::grid::random_grid;
use crate::linalg::{identity, solve};
use crate::rpd::{perturb, ratios, rpd_params, DiagResult, RpdOptions};
use crate::{Pencil, Result, RngStream};

/// Perturbs and builds the grid exactly as [`crate::rpd::rpd`] does on the
/// same stream, then diagonalizes `X = B̃⁻¹Ã` with `B = I` throughout and
/// returns `S = B̃T`.
pub fn comparator_inversion(p: &Pencil, eps: f64, opts: &RpdOptions, rng: &RngStream) -> Result<DiagResult> {
    let n = p.n();
    let (mut params, gamma, omega) = rpd_params(n, eps, opts)?;
    params.variant = Variant::Matrix;
    let perturbed = perturb(p, gamma, rng);
    let grid = random_grid(omega, &rng.child("grid"))?;
    let x = solve(&perturbed.b, &perturbed.a)?;
    let n_alpha = (n as f64).powf(params.alpha);
    let product = Pencil { a: crate::linalg::scale(&x, c64::new(1.0 / n_alpha, 0.0)), b: identity(n) };
    let out = eig(&product, &grid, &params, &rng.child("eig"))?;
    let d = ratios(&out.d1, &out.d2, n_alpha);
    let s = &perturbed.b * &out.t;
    Ok(DiagResult { s, t: out.t, d, d1: out.d1, d2: out.d2, perturbed, grid, params, gamma, stats: out.stats })
}
