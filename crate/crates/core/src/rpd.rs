//! Randomized pencil diagonalization and its error metrics.

use alloc::vec::Vec;

use faer::c64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::eigsolve::{eig, EigParams, Mode, RunStats, Variant};
use crate::grid::{random_grid, Grid};
use crate::linalg::{diag, ginibre, ref_eig_vectors, scale, smallest_sv, solve_right, spectral_norm, CMatrix};
use crate::{Eigenvalue, Error, Pencil, Result, RngStream};

/// `|D2(i,i)|` at or below this marks an eigenvalue at infinity.
pub const INFINITY_GUARD: f64 = 1e-300;

/// Floor applied to `log₁₀` of a zero residual.
pub const LOG_FLOOR: f64 = -17.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RpdOptions {
    pub mode: Mode,
    /// Subproblems of at most this size go to the direct solver.
    pub cutoff: usize,
    /// Grid spacing replacing the mode's `ω`.
    pub omega: Option<f64>,
}

impl Default for RpdOptions {
    fn default() -> Self {
        RpdOptions { mode: Mode::Practical, cutoff: 1, omega: None }
    }
}

/// `(S, T, D)` with `A ≈ S·D·T⁻¹` and `B ≈ S·T⁻¹`.
#[derive(Clone, Debug)]
pub struct DiagResult {
    pub s: CMatrix,
    pub t: CMatrix,
    pub d: Vec<Eigenvalue>,
    pub d1: Vec<c64>,
    pub d2: Vec<c64>,
    /// `(Ã, B̃)`.
    pub perturbed: Pencil,
    pub grid: Grid,
    pub params: EigParams,
    pub gamma: f64,
    pub stats: RunStats,
}

impl DiagResult {
    /// `D` as a matrix; entries at infinity become `+∞`.
    pub fn d_matrix(&self) -> CMatrix {
        let values: Vec<c64> = self
            .d
            .iter()
            .map(|e| e.finite().unwrap_or(c64::new(f64::INFINITY, 0.0)))
            .collect();
        diag(&values)
    }

    pub fn eigenvalues(&self) -> &[Eigenvalue] {
        &self.d
    }
}

/// Parameters passed to EIG, plus `γ`, for an `n × n` input at accuracy `eps`.
pub fn rpd_params(n: usize, eps: f64, opts: &RpdOptions) -> Result<(EigParams, f64, f64)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("eps = {eps} must lie in (0, 1)")));
    }
    if n == 0 || opts.cutoff == 0 {
        return Err(Error::InvalidParameter("n and cutoff must be at least 1".into()));
    }
    let gamma = eps / 16.0;
    let nf = n as f64;
    let theta = if n >= 2 { 1.0 / nf } else { 0.5 };
    let (alpha, epsilon, beta, omega) = match opts.mode {
        Mode::Practical => (0.0, gamma / nf, gamma / nf, gamma / nf),
        Mode::Theoretical => {
            if n < 2 {
                return Err(Error::InvalidParameter("theoretical mode needs n >= 2".into()));
            }
            let alpha = (2.0 * (1.0 / gamma).ln() / nf.ln() + 3.0).ceil() / 2.0;
            let g5 = gamma.powi(5);
            let epsilon = g5 / (64.0 * nf.powf((11.0 * alpha + 25.0) / 3.0) + g5);
            let beta = eps * gamma * gamma / (24.0 * (1.0 + 4.0 * gamma)) * nf.powf(-3.0 * alpha - 5.0);
            let omega = gamma.powi(4) / 4.0 * nf.powf(-(8.0 * alpha + 13.0) / 3.0);
            (alpha, epsilon, beta, omega)
        }
    };
    if epsilon == 0.0 || beta == 0.0 {
        return Err(Error::ParameterUnderflow("epsilon/beta"));
    }
    let params = EigParams {
        mode: opts.mode,
        epsilon,
        alpha,
        beta,
        theta,
        n_global: n,
        cutoff: opts.cutoff,
        variant: Variant::Pencil,
    };
    Ok((params, gamma, opts.omega.unwrap_or(omega)))
}

/// Perturbs `(A, B)` by `γ`-scaled Ginibre draws from the `G1`/`G2` streams.
pub fn perturb(p: &Pencil, gamma: f64, rng: &RngStream) -> Pencil {
    let n = p.n();
    let g = c64::new(gamma, 0.0);
    Pencil {
        a: &p.a + scale(&ginibre(n, &rng.child("G1")), g),
        b: &p.b + scale(&ginibre(n, &rng.child("G2")), g),
    }
}

pub(crate) fn ratios(d1: &[c64], d2: &[c64], factor: f64) -> Vec<Eigenvalue> {
    d1.iter()
        .zip(d2)
        .map(|(a, b)| {
            if b.norm() <= INFINITY_GUARD {
                Eigenvalue::Infinite
            } else {
                Eigenvalue::Finite(a / b * factor)
            }
        })
        .collect()
}

/// Diagonalizes a pencil with `‖A‖₂, ‖B‖₂ ≤ 1` to backward error `eps`.
pub fn rpd(p: &Pencil, eps: f64, opts: &RpdOptions, rng: &RngStream) -> Result<DiagResult> {
    let n = p.n();
    let (params, gamma, omega) = rpd_params(n, eps, opts)?;
    let perturbed = perturb(p, gamma, rng);
    let grid = random_grid(omega, &rng.child("grid"))?;
    let n_alpha = (n as f64).powf(params.alpha);
    let scaled = Pencil { a: perturbed.a.clone(), b: scale(&perturbed.b, c64::new(n_alpha, 0.0)) };
    let out = eig(&scaled, &grid, &params, &rng.child("eig"))?;
    let d = ratios(&out.d1, &out.d2, n_alpha);
    let s = &perturbed.b * &out.t;
    Ok(DiagResult { s, t: out.t, d, d1: out.d1, d2: out.d2, perturbed, grid, params, gamma, stats: out.stats })
}

/// [`rpd`] for a pencil of any norm: normalizes by `c = max(‖A‖₂, ‖B‖₂)`,
/// diagonalizes, and scales `S` (and `Ã`, `B̃`) back by `c`, so the
/// residuals are relative to `c`.
pub fn rpd_normalized(p: &Pencil, eps: f64, opts: &RpdOptions, rng: &RngStream) -> Result<(DiagResult, f64)> {
    let (normalized, c) = p.normalized()?;
    let mut res = rpd(&normalized, eps, opts, rng)?;
    let factor = c64::new(c, 0.0);
    res.s = scale(&res.s, factor);
    res.perturbed = Pencil { a: scale(&res.perturbed.a, factor), b: scale(&res.perturbed.b, factor) };
    Ok((res, c))
}

/// `‖A − S·D·T⁻¹‖₂` and `‖B − S·T⁻¹‖₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub a: f64,
    pub b: f64,
    /// `‖A·T − S·D‖₂` and `‖B·T − S‖₂`, free of `T⁻¹`.
    pub a_right: f64,
    pub b_right: f64,
}

fn log10_clamped(x: f64) -> f64 {
    if x == 0.0 {
        LOG_FLOOR
    } else {
        x.log10().max(LOG_FLOOR)
    }
}

pub fn diag_residuals(p: &Pencil, res: &DiagResult) -> Result<Residuals> {
    let sd = &res.s * res.d_matrix();
    let a = spectral_or_inf(&(&p.a - solve_right(&res.t, &sd)?))?;
    let b = spectral_norm(&(&p.b - solve_right(&res.t, &res.s)?))?;
    let a_right = spectral_or_inf(&(&p.a * &res.t - &sd))?;
    let b_right = spectral_norm(&(&p.b * &res.t - &res.s))?;
    Ok(Residuals { a, b, a_right, b_right })
}

fn spectral_or_inf(m: &CMatrix) -> Result<f64> {
    if crate::linalg::all_finite(m) {
        spectral_norm(m)
    } else {
        Ok(f64::INFINITY)
    }
}

/// `log₁₀ max(‖A − SDT⁻¹‖₂, ‖B − ST⁻¹‖₂)`, floored at [`LOG_FLOOR`].
pub fn diag_error(p: &Pencil, res: &DiagResult) -> Result<f64> {
    let r = diag_residuals(p, res)?;
    Ok(log10_clamped(r.a.max(r.b)))
}

/// The same metric for `T`-based right forms `max(‖AT − SD‖₂, ‖BT − S‖₂)`.
pub fn diag_error_right(p: &Pencil, res: &DiagResult) -> Result<f64> {
    let r = diag_residuals(p, res)?;
    Ok(log10_clamped(r.a_right.max(r.b_right)))
}

fn sort_by_magnitude(v: &mut [c64]) {
    v.sort_by(|x, y| x.norm().total_cmp(&y.norm()));
}

/// Mean absolute error after sorting both sides by magnitude.
///
/// Oracle infinities are dropped together with the same number of
/// largest-magnitude approximations; approximations at infinity are dropped first.
pub fn eigen_error(approx: &[Eigenvalue], oracle: &[Eigenvalue]) -> Result<f64> {
    if approx.len() != oracle.len() {
        return Err(Error::LengthMismatch { left: approx.len(), right: oracle.len() });
    }
    let mut truth: Vec<c64> = oracle.iter().filter_map(|e| e.finite()).collect();
    let drop = oracle.len() - truth.len();
    let mut est: Vec<c64> = approx.iter().filter_map(|e| e.finite()).collect();
    let est_inf = approx.len() - est.len();
    if est_inf > drop {
        return Ok(f64::INFINITY);
    }
    sort_by_magnitude(&mut truth);
    sort_by_magnitude(&mut est);
    est.truncate(est.len() - (drop - est_inf));
    if truth.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = est.iter().zip(&truth).map(|(x, y)| (x - y).norm()).sum();
    Ok(total / truth.len() as f64)
}

/// Pairs approximate and true eigenvalues after sorting each by real part
/// (then imaginary part) and returns `|λ̃ᵢ − λᵢ|` in that order.
pub fn matched_errors(approx: &[c64], truth: &[c64]) -> Result<Vec<f64>> {
    if approx.len() != truth.len() {
        return Err(Error::LengthMismatch { left: approx.len(), right: truth.len() });
    }
    let key = |x: &c64, y: &c64| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
    let mut a = approx.to_vec();
    let mut t = truth.to_vec();
    a.sort_by(key);
    t.sort_by(key);
    Ok(a.iter().zip(&t).map(|(x, y)| (x - y).norm()).collect())
}

/// `(4·gap·κ_V·ε, 24·n·κ_V·ε)`: eigenvalue and eigenvector forward bounds.
pub fn forward_bound(n: usize, kappa_v: f64, gap: f64, eps: f64) -> (f64, f64) {
    (4.0 * gap * kappa_v * eps, 24.0 * n as f64 * kappa_v * eps)
}

/// Numerical check of the forward-error preconditions for a computed
/// diagonalization, treating `(SDT⁻¹, ST⁻¹)` as the nearby pencil.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardCheck {
    /// Smallest `ε` for which both residual conditions hold.
    pub epsilon: f64,
    pub applies: bool,
    pub eig_bound: f64,
    pub vec_bound: f64,
}

pub fn forward_check(p: &Pencil, residuals: &Residuals, gap: f64, kappa_v: f64) -> Result<ForwardCheck> {
    let sigma = smallest_sv(&p.b)?;
    let denom_a = sigma * gap;
    let denom_b = sigma * sigma * gap;
    let epsilon = if denom_a > 0.0 && denom_b > 0.0 {
        (residuals.a / denom_a).max(residuals.b / denom_b)
    } else {
        f64::INFINITY
    };
    let applies = epsilon.is_finite() && epsilon <= 1.0 / (32.0 * kappa_v) && spectral_norm(&p.a)? <= 1.0 + 1e-12;
    let (eig_bound, vec_bound) = forward_bound(p.n(), kappa_v, gap, epsilon);
    Ok(ForwardCheck { epsilon, applies, eig_bound, vec_bound })
}

/// `opt(m) = m³ + opt(⌈m/2⌉) + opt(⌊m/2⌋)` for `m > cutoff`, else 0.
pub fn optimal_cost(m: usize, cutoff: usize) -> f64 {
    if m <= cutoff.max(1) {
        return 0.0;
    }
    (m as f64).powi(3) + optimal_cost(m.div_ceil(2), cutoff) + optimal_cost(m / 2, cutoff)
}

/// `Σ m³·l` over the recorded splits relative to perfectly balanced
/// single-probe splitting; 1.0 when there was nothing to split.
pub fn efficiency_factor(stats: &RunStats, n: usize, cutoff: usize) -> f64 {
    let opt = optimal_cost(n, cutoff);
    if opt == 0.0 || stats.splits.is_empty() {
        return 1.0;
    }
    stats.pseudo_flops / opt
}

/// Minimum pairwise eigenvalue distance and the condition number of the
/// unit-column eigenvector matrix of `B⁻¹A` (an upper bound on `κ_V`).
pub fn gap_and_kappa_v(p: &Pencil) -> Result<(f64, f64)> {
    let (values, v) = ref_eig_vectors(p)?;
    Ok((gap(&values), crate::linalg::condition_number(&v)?))
}

/// Minimum pairwise distance; `+∞` for fewer than two values.
pub fn gap(values: &[c64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            best = best.min((values[i] - values[j]).norm());
        }
    }
    best
}
