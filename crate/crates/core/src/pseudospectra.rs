//! Pseudospectra of pencils, Bauer–Fike radii, shattering checks and the chordal metric.
//!
//! The ε-pseudospectrum of `(A, B)` is the set of `z` with
//! `σₙ(A − zB) ≤ ε(1 + |z|)`.

use alloc::vec::Vec;

use faer::c64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::grid::{BoxLocation, Grid, Orientation};
use crate::linalg::{identity, smallest_sv, solve, spectral_norm, svd_values, CMatrix, Eigenvalue};
use crate::{Error, Pencil, Result};

/// Largest value reported by the level fields.
pub const LEVEL_CAP: f64 = 16.0;

/// Default number of samples per grid segment in [`verify_shattering`].
pub const DEFAULT_SAMPLES_PER_EDGE: usize = 64;

/// `σₙ(A − zB)`.
pub fn sigma_min_at(p: &Pencil, z: c64) -> Result<f64> {
    smallest_sv(&p.shifted(z))
}

pub fn in_pseudospectrum(p: &Pencil, z: c64, eps: f64) -> Result<bool> {
    Ok(sigma_min_at(p, z)? <= eps * (1.0 + z.norm()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    /// `resolution × resolution` lattice points, real part varying fastest.
    pub fn points(&self, resolution: usize) -> Vec<c64> {
        let step = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / (resolution - 1) as f64;
        let mut out = Vec::with_capacity(resolution * resolution);
        for j in 0..resolution {
            for i in 0..resolution {
                out.push(c64::new(step(self.re_min, self.re_max, i), step(self.im_min, self.im_max, j)));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelPoint {
    pub re: f64,
    pub im: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelField {
    pub region: Region,
    pub resolution: usize,
    pub points: Vec<LevelPoint>,
}

fn level_field(region: &Region, resolution: usize, mut value: impl FnMut(c64) -> Result<f64>) -> Result<LevelField> {
    if resolution < 2 {
        return Err(Error::InvalidParameter("resolution must be at least 2".into()));
    }
    let points = region
        .points(resolution)
        .into_iter()
        .map(|z| Ok(LevelPoint { re: z.re, im: z.im, value: value(z)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelField { region: *region, resolution, points })
}

fn capped_log(numerator: f64, sigma: f64) -> f64 {
    if sigma <= numerator * 10f64.powf(-LEVEL_CAP) {
        LEVEL_CAP
    } else {
        (numerator / sigma).log10().min(LEVEL_CAP)
    }
}

/// `log₁₀[(1 + |z|)/σₙ(A − zB)]` on a lattice over `region`, capped at [`LEVEL_CAP`].
pub fn pseudospec_levels(p: &Pencil, region: &Region, resolution: usize) -> Result<LevelField> {
    level_field(region, resolution, |z| Ok(capped_log(1.0 + z.norm(), sigma_min_at(p, z)?)))
}

/// `log₁₀ ‖(X − zI)⁻¹‖₂` on a lattice over `region`, capped at [`LEVEL_CAP`].
pub fn matrix_pseudospec_levels(x: &CMatrix, region: &Region, resolution: usize) -> Result<LevelField> {
    let eye = identity(x.nrows());
    level_field(region, resolution, |z| {
        Ok(capped_log(1.0, smallest_sv(&(x - faer::Scale(z) * &eye))?))
    })
}

/// Whether the ε-pseudospectrum is bounded, i.e. `ε < σₙ(B)`.
pub fn bounded_check(p: &Pencil, eps: f64) -> Result<bool> {
    Ok(eps < smallest_sv(&p.b)?)
}

/// Radius of the discs around the eigenvalues that contain the ε-pseudospectrum:
/// `ε κ_V ‖B⁻¹‖ (1 + (ε‖B⁻¹‖ + ‖B⁻¹A‖)/(1 − ε‖B⁻¹‖))`.
pub fn bauer_fike_radius(p: &Pencil, eps: f64, kappa_v: f64) -> Result<f64> {
    let sigma_min = smallest_sv(&p.b)?;
    if !(eps < sigma_min) {
        return Err(Error::UnboundedPseudospectrum { eps, sigma_min });
    }
    let binv = spectral_norm(&solve(&p.b, &identity(p.n()))?)?;
    let binv_a = spectral_norm(&solve(&p.b, &p.a)?)?;
    Ok(eps * kappa_v * binv * (1.0 + (eps * binv + binv_a) / (1.0 - eps * binv)))
}

/// A point `⟨α, β⟩` of the projective line; the eigenvalue is `α/β`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projective {
    pub alpha: c64,
    pub beta: c64,
}

impl Projective {
    pub fn new(alpha: c64, beta: c64) -> Self {
        Projective { alpha, beta }
    }

    pub fn finite(lambda: c64) -> Self {
        Projective { alpha: lambda, beta: c64::new(1.0, 0.0) }
    }

    pub fn infinity() -> Self {
        Projective { alpha: c64::new(1.0, 0.0), beta: c64::new(0.0, 0.0) }
    }
}

impl From<Eigenvalue> for Projective {
    fn from(e: Eigenvalue) -> Self {
        match e {
            Eigenvalue::Finite(z) => Projective::finite(z),
            Eigenvalue::Infinite => Projective::infinity(),
        }
    }
}

/// `|α₁β₂ − β₁α₂| / (‖(α₁, β₁)‖ ‖(α₂, β₂)‖)`.
pub fn chordal_distance(l1: Projective, l2: Projective) -> Result<f64> {
    let n1 = (l1.alpha.norm_sqr() + l1.beta.norm_sqr()).sqrt();
    let n2 = (l2.alpha.norm_sqr() + l2.beta.norm_sqr()).sqrt();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::DegeneratePoint);
    }
    let d = (l1.alpha * l2.beta - l1.beta * l2.alpha).norm() / (n1 * n2);
    Ok(d.min(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// A sampled grid point lies in the ε-pseudospectrum.
    GridPointInPseudospectrum { z: c64, ratio: f64 },
    EigenvalueOutsideGrid(Eigenvalue),
    EigenvalueOnGridLine(c64),
    SharedBox { i: u64, j: u64, count: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShatterReport {
    pub shattered: bool,
    /// Smallest `σₙ(A − zB)/(ε(1 + |z|))` over the sampled grid points
    /// (a certified lower bound where a sample was skipped).
    pub min_grid_sigma_ratio: f64,
    pub eigenvalue_boxes: Vec<(c64, (u64, u64))>,
    pub violations: Vec<Violation>,
    /// Samples whose singular value was actually computed.
    pub evaluated_samples: usize,
    pub total_samples: usize,
}

/// Checks that the grid avoids the ε-pseudospectrum and that every oracle
/// eigenvalue sits alone in a box.
///
/// Each grid segment is sampled at `samples_per_edge` equispaced points. A
/// sample is skipped when `σₙ(A − z'B) ≥ σₙ(A − zB) − |z − z'|·‖B‖₂` from the
/// last evaluated point `z` on the same line already certifies it; the
/// reported ratio then uses that lower bound. At most one violation is
/// recorded per segment.
pub fn verify_shattering(
    p: &Pencil,
    g: &Grid,
    eps: f64,
    samples_per_edge: usize,
    oracle_eigs: &[Eigenvalue],
) -> Result<ShatterReport> {
    if samples_per_edge < 2 {
        return Err(Error::InvalidParameter("samples_per_edge must be at least 2".into()));
    }
    let norm_b = spectral_norm(&p.b)?;
    let mut violations = Vec::new();
    let mut min_ratio = f64::INFINITY;
    let (mut evaluated, mut total) = (0usize, 0usize);

    for orientation in [Orientation::Vertical, Orientation::Horizontal] {
        let (lines, segments) = match orientation {
            Orientation::Vertical => (g.s1, g.s2),
            Orientation::Horizontal => (g.s2, g.s1),
        };
        for index in 0..=lines {
            let h = g.line(orientation, index)?.coordinate;
            let point = |t: f64| match orientation {
                Orientation::Vertical => c64::new(h, g.im0 + t * g.omega),
                Orientation::Horizontal => c64::new(g.re0 + t * g.omega, h),
            };
            let mut anchor: Option<(c64, f64)> = None;
            for seg in 0..segments {
                let mut flagged = false;
                for k in 0..samples_per_edge {
                    let z = point(seg as f64 + k as f64 / (samples_per_edge - 1) as f64);
                    let level = eps * (1.0 + z.norm());
                    total += 1;
                    if let Some((za, sa)) = anchor {
                        let d = (z - za).norm();
                        let lower = sa - d * norm_b;
                        if lower > level {
                            min_ratio = min_ratio.min(lower / level);
                            continue;
                        }
                    }
                    let sigma = sigma_min_at(p, z)?;
                    evaluated += 1;
                    anchor = Some((z, sigma));
                    let ratio = sigma / level;
                    min_ratio = min_ratio.min(ratio);
                    if ratio <= 1.0 && !flagged {
                        violations.push(Violation::GridPointInPseudospectrum { z, ratio });
                        flagged = true;
                    }
                }
            }
        }
    }

    let mut eigenvalue_boxes: Vec<(c64, (u64, u64))> = Vec::new();
    for &e in oracle_eigs {
        match e {
            Eigenvalue::Infinite => violations.push(Violation::EigenvalueOutsideGrid(e)),
            Eigenvalue::Finite(z) => match g.box_of(z) {
                BoxLocation::Inside(i, j) => eigenvalue_boxes.push((z, (i, j))),
                BoxLocation::Outside => violations.push(Violation::EigenvalueOutsideGrid(e)),
                BoxLocation::OnGridLine => violations.push(Violation::EigenvalueOnGridLine(z)),
            },
        }
    }
    let mut keys: Vec<(u64, u64)> = eigenvalue_boxes.iter().map(|(_, b)| *b).collect();
    keys.sort_unstable();
    let mut i = 0;
    while i < keys.len() {
        let mut j = i + 1;
        while j < keys.len() && keys[j] == keys[i] {
            j += 1;
        }
        if j - i > 1 {
            violations.push(Violation::SharedBox { i: keys[i].0, j: keys[i].1, count: j - i });
        }
        i = j;
    }

    Ok(ShatterReport {
        shattered: violations.is_empty(),
        min_grid_sigma_ratio: min_ratio,
        eigenvalue_boxes,
        violations,
        evaluated_samples: evaluated,
        total_samples: total,
    })
}

/// Smallest singular value of `A − zB` for `z` on `count` points of the unit
/// circle, relative to `‖(A, B)‖₂`; a sampled proxy for the distance of the
/// spectrum to the unit circle.
pub fn unit_circle_margin(p: &Pencil, count: usize) -> Result<f64> {
    let stacked = crate::linalg::hstack(&p.a, &p.b)?;
    let norm = svd_values(&stacked)?[0];
    let mut best = f64::INFINITY;
    for k in 0..count {
        let t = 2.0 * core::f64::consts::PI * k as f64 / count as f64;
        best = best.min(sigma_min_at(p, c64::new(t.cos(), t.sin()))?);
    }
    Ok(best / norm)
}
