//! Recursive spectral divide-and-conquer over a shattering grid.
//!
//! Each step picks a grid line, maps it to the unit circle with a Möbius
//! transformation, counts the eigenvalues beyond it from a rank-revealing
//! factorization of the implicitly squared pencil, deflates both sides and
//! recurses on the two half grids.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use faer::c64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::deflate::{deflate, left_pass, right_pass};
use crate::grid::{half_grid, search_order, Grid, GridLine, Orientation, Side};
use crate::irs::{mobius_left, mobius_right};
use crate::linalg::{columns, eigen, generalized_eigen, identity, CMatrix};
use crate::rrf::rank_count;
use crate::{Error, Pencil, Result, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Parameters exactly as required by the convergence analysis.
    Theoretical,
    /// Relaxed parameters used in experiments: `α = 0`, `p = ⌈log₂(n/ε)⌉`,
    /// rank threshold without the `1/n³` factor, no rescaling in recursion.
    Practical,
}

/// Whether subproblems are genuine pencils or single matrices (`B = I`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Pencil,
    /// `B = I` throughout; one basis serves as both right and left subspace.
    Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigParams {
    pub mode: Mode,
    /// Shattering tolerance ε.
    pub epsilon: f64,
    pub alpha: f64,
    /// Eigenvector accuracy β.
    pub beta: f64,
    /// Failure budget θ ∈ (0, 1).
    pub theta: f64,
    /// Size of the original problem.
    pub n_global: usize,
    /// Subproblems of size at most `cutoff` are solved directly (`1` keeps
    /// the recursion going down to scalars).
    pub cutoff: usize,
    pub variant: Variant,
}

impl EigParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidParameter(format!("theta = {} must lie in (0, 1)", self.theta)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon = {} must be positive", self.epsilon)));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta = {} must be positive", self.beta)));
        }
        if self.cutoff == 0 || self.n_global == 0 {
            return Err(Error::InvalidParameter("cutoff and n_global must be at least 1".into()));
        }
        Ok(())
    }
}

/// Quantities derived per subproblem from [`EigParams`] and the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub zeta: u32,
    pub eta: f64,
    pub delta: f64,
    /// Number of squaring steps.
    pub p: usize,
    pub rank_threshold: f64,
}

fn log2_one_minus(x: f64) -> f64 {
    (-x).ln_1p() / core::f64::consts::LN_2
}

/// Derives `ζ, η, δ, p` and the rank threshold for a subproblem of size `m`.
pub fn compute_params(params: &EigParams, m: usize, g: &Grid) -> Result<DerivedParams> {
    params.validate()?;
    let n = params.n_global as f64;
    let m = m as f64;
    let (eps, beta, theta, omega) = (params.epsilon, params.beta, params.theta, g.omega);
    let n_alpha = n.powf(params.alpha);
    let zeta = g.zeta();
    let z = zeta as f64;

    let log_54_n = if n > 1.0 { n.ln() / 1.25f64.ln() } else { 0.0 };
    let eta_a = 4.0 * core::f64::consts::PI / (315.0 * 8f64.sqrt()) * beta * eps * eps / (omega * n_alpha);
    let eta = if log_54_n > 0.0 { eta_a.min(1.0 / (2.0 * log_54_n)) } else { eta_a };
    let poly = n.powf(2.0 * params.alpha + 3.0);
    let root = (theta / 10.0).sqrt();
    let delta = (root * eps * eps / (7200.0 * poly))
        .min(theta / (2.0 * (theta + 10.0 * n.powi(6) * z)))
        .min(root * eta * eta / (288.0 * poly));

    match params.mode {
        Mode::Practical => {
            let p = (n / eps).log2().ceil().max(0.0) as usize;
            let rank_threshold = (theta / (10.0 * z)).sqrt() * (1.0 - delta);
            Ok(DerivedParams { zeta, eta, delta, p, rank_threshold })
        }
        Mode::Theoretical => {
            if eta == 0.0 {
                return Err(Error::ParameterUnderflow("eta"));
            }
            if delta == 0.0 {
                return Err(Error::ParameterUnderflow("delta"));
            }
            let x = eps / (105.0 * n_alpha);
            let t2 = (105.0 * n_alpha / eps - 1.0).log2();
            let t3 = -2.0 * (-0.5 * log2_one_minus(x)).log2();
            let frac = delta * core::f64::consts::PI * eps;
            let inner = (frac / (12.0 * n_alpha * m * omega + frac)).log2();
            let t4 = 1.0 + (inner / log2_one_minus(x)).log2();
            let p = [7.0, t2, t3, t4].into_iter().fold(f64::NEG_INFINITY, f64::max);
            if !p.is_finite() {
                return Err(Error::ParameterUnderflow("p"));
            }
            let rank_threshold = (theta / (10.0 * z)).sqrt() * (1.0 - delta) / n.powi(3);
            Ok(DerivedParams { zeta, eta, delta, p: p.ceil() as usize, rank_threshold })
        }
    }
}

/// One accepted divide step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub m: usize,
    pub k: usize,
    pub lines_checked: usize,
    pub orientation: Orientation,
    pub depth: usize,
    /// Position in the recursion tree: `R`/`L` per level, empty at the root.
    pub path: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub splits: Vec<SplitRecord>,
    /// `Σ m³·l` over all divide steps.
    pub pseudo_flops: f64,
    /// Subproblems handed to the dense direct solver.
    pub delegated: usize,
}

impl RunStats {
    pub fn merge(&mut self, other: RunStats) {
        self.splits.extend(other.splits);
        self.pseudo_flops += other.pseudo_flops;
        self.delegated += other.delegated;
    }
}

/// `T` holds approximate right unit eigenvectors; `(diag(d1), diag(d2))` is
/// the diagonal pencil.
#[derive(Clone, Debug)]
pub struct EigResult {
    pub t: CMatrix,
    pub d1: Vec<c64>,
    pub d2: Vec<c64>,
    pub stats: RunStats,
}

impl EigResult {
    pub fn d1_matrix(&self) -> CMatrix {
        crate::linalg::diag(&self.d1)
    }

    pub fn d2_matrix(&self) -> CMatrix {
        crate::linalg::diag(&self.d2)
    }
}

/// Diagonalizes the pencil over a grid assumed to shatter its pseudospectrum.
pub fn eig(p: &Pencil, g: &Grid, params: &EigParams, rng: &RngStream) -> Result<EigResult> {
    params.validate()?;
    let mut stats = RunStats::default();
    let (t, d1, d2) = eig_rec(p, g, params, rng, 0, String::new(), &mut stats)?;
    Ok(EigResult { t, d1, d2, stats })
}

/// Combines two child results under a parent split: `T = [U_k T̂ | U_{m−k} T̃]`
/// and block-diagonal `D1`, `D2`; the stats are merged.
pub fn assemble(ur_k: &CMatrix, ur_mk: &CMatrix, right: EigResult, left: EigResult) -> Result<EigResult> {
    if ur_k.ncols() != right.t.nrows() || ur_mk.ncols() != left.t.nrows() || ur_k.nrows() != ur_mk.nrows() {
        return Err(Error::ShapeMismatch {
            left: format!("U_k {}x{}, T̂ {}x{}", ur_k.nrows(), ur_k.ncols(), right.t.nrows(), right.t.ncols()),
            right: format!("U_mk {}x{}, T̃ {}x{}", ur_mk.nrows(), ur_mk.ncols(), left.t.nrows(), left.t.ncols()),
        });
    }
    let t = crate::linalg::hstack(&(ur_k * &right.t), &(ur_mk * &left.t))?;
    let mut d1 = right.d1;
    d1.extend(left.d1);
    let mut d2 = right.d2;
    d2.extend(left.d2);
    let mut stats = right.stats;
    stats.merge(left.stats);
    Ok(EigResult { t, d1, d2, stats })
}

type Parts = (CMatrix, Vec<c64>, Vec<c64>);

fn delegate(p: &Pencil, variant: Variant) -> Result<Parts> {
    match variant {
        Variant::Pencil => {
            let (alpha, beta, v) = generalized_eigen(&p.a, &p.b)?;
            Ok((v, alpha, beta))
        }
        Variant::Matrix => {
            let (values, v) = eigen(&p.a)?;
            let ones = alloc::vec![c64::new(1.0, 0.0); values.len()];
            Ok((v, values, ones))
        }
    }
}

struct Split {
    line: GridLine,
    k: usize,
    ur_k: CMatrix,
    lines_checked: usize,
    steps: usize,
    line_rng: RngStream,
}

fn line_label(line: &GridLine) -> String {
    let tag = match line.orientation {
        Orientation::Vertical => "v",
        Orientation::Horizontal => "h",
    };
    format!("line-{tag}{}", line.index)
}

/// Steered binary search over the lines of one orientation, falling back to
/// the median ordering once the search interval is exhausted; at most
/// `ζ/2` lines per orientation.
fn find_split(p: &Pencil, g: &Grid, params: &EigParams, rng: &RngStream, lines_so_far: &mut usize) -> Result<Option<Split>> {
    let m = p.n();
    let derived = compute_params(params, m, g)?;
    for orientation in [Orientation::Vertical, Orientation::Horizontal] {
        let side = g.side(orientation);
        if side < 2 {
            continue;
        }
        let mut tried: Vec<u64> = Vec::new();
        let (mut lo, mut hi) = (1u64, side - 1);
        let mut fallback = search_order(g, orientation);
        for _ in 0..g.search_budget() {
            let (index, steering) = if lo <= hi {
                (lo + (hi - lo) / 2, true)
            } else {
                match fallback.by_ref().find(|l| !tried.contains(&l.index)) {
                    Some(l) => (l.index, false),
                    None => break,
                }
            };
            tried.push(index);
            *lines_so_far += 1;
            let line = g.line(orientation, index)?;
            let line_rng = rng.child(&line_label(&line));
            let transformed = mobius_right(p, line.coordinate, orientation);
            let right = right_pass(&transformed, derived.p, &line_rng.child("right"))?;
            let k = rank_count(&right.r1, &right.r2, derived.rank_threshold);
            if 5 * k >= m && 5 * k <= 4 * m {
                return Ok(Some(Split {
                    line,
                    k,
                    ur_k: columns(&right.u, 0, k),
                    lines_checked: *lines_so_far,
                    steps: derived.p,
                    line_rng,
                }));
            }
            if steering {
                if 5 * k > 4 * m {
                    lo = index + 1;
                } else {
                    hi = index - 1;
                }
            }
        }
    }
    Ok(None)
}

fn project(ul: &CMatrix, m: &CMatrix, ur: &CMatrix) -> CMatrix {
    ul.adjoint() * m * ur
}

fn eig_rec(
    p: &Pencil,
    g: &Grid,
    params: &EigParams,
    rng: &RngStream,
    depth: usize,
    path: String,
    stats: &mut RunStats,
) -> Result<Parts> {
    let m = p.n();
    if m == 1 {
        return Ok((identity(1), alloc::vec![p.a[(0, 0)]], alloc::vec![p.b[(0, 0)]]));
    }
    if m <= params.cutoff {
        stats.delegated += 1;
        return delegate(p, params.variant);
    }

    let mut lines_checked = 0;
    let split = find_split(p, g, params, rng, &mut lines_checked)?
        .ok_or(Error::NoSplitFound { m, lines_checked })?;
    let Split { line, k, ur_k, lines_checked, steps, line_rng } = split;
    let h = line.coordinate;

    // The right pass that produced k is exactly DEFLATE's right pass on the
    // same stream, so only the left pass and the complement remain.
    let transformed = mobius_right(p, h, line.orientation);
    let complement = mobius_left(p, h, line.orientation);
    let complement_rng = line_rng.child("complement");
    let (ul_k, ur_mk, ul_mk) = match params.variant {
        Variant::Pencil => {
            let ul_k = columns(&left_pass(&transformed, steps, &line_rng.child("left"))?.u, 0, k);
            let pair = deflate(&complement, steps, m - k, &complement_rng)?;
            (ul_k, pair.ur, pair.ul)
        }
        Variant::Matrix => {
            let ur_mk = columns(&right_pass(&complement, steps, &complement_rng.child("right"))?.u, 0, m - k);
            (ur_k.clone(), ur_mk.clone(), ur_mk)
        }
    };

    let (b11, b22) = match params.variant {
        Variant::Pencil => (project(&ul_k, &p.b, &ur_k), project(&ul_mk, &p.b, &ur_mk)),
        Variant::Matrix => (identity(k), identity(m - k)),
    };
    let p11 = Pencil { a: project(&ul_k, &p.a, &ur_k), b: b11 };
    let p22 = Pencil { a: project(&ul_mk, &p.a, &ur_mk), b: b22 };

    stats.splits.push(SplitRecord {
        m,
        k,
        lines_checked,
        orientation: line.orientation,
        depth,
        path: path.clone(),
    });
    stats.pseudo_flops += (m as f64).powi(3) * lines_checked as f64;

    let child_params = match params.mode {
        Mode::Theoretical => EigParams {
            epsilon: params.epsilon * 4.0 / 5.0,
            beta: params.beta / 3.0,
            ..params.clone()
        },
        Mode::Practical => params.clone(),
    };
    let g_right = half_grid(g, &line, Side::Right)?;
    let g_left = half_grid(g, &line, Side::Left)?;
    let (t_hat, d1_hat, d2_hat) =
        eig_rec(&p11, &g_right, &child_params, &rng.child("R"), depth + 1, path.clone() + "R", stats)?;
    let (t_tilde, d1_tilde, d2_tilde) =
        eig_rec(&p22, &g_left, &child_params, &rng.child("L"), depth + 1, path + "L", stats)?;

    let t = crate::linalg::hstack(&(&ur_k * &t_hat), &(&ur_mk * &t_tilde))?;
    let mut d1 = d1_hat;
    d1.extend(d1_tilde);
    let mut d2 = d2_hat;
    d2.extend(d2_tilde);
    Ok((t, d1, d2))
}
