//! Orthonormal bases for the deflating subspaces of the eigenvalues outside the unit circle.

use crate::irs::irs;
use crate::linalg::{adjoint, columns, CMatrix};
use crate::rrf::{grurv2, GrurvResult, Power};
use crate::{Error, Pencil, Result, RngStream};

/// Right (`ur`) and left (`ul`) bases, each `n × k` with orthonormal columns.
#[derive(Clone, Debug)]
pub struct DeflatePair {
    pub ur: CMatrix,
    pub ul: CMatrix,
}

/// IRS on `(A, B)` followed by GRURV of `(A_p + B_p)⁻¹A_p`; the leading
/// columns of `U` span the right deflating subspace.
pub fn right_pass(p: &Pencil, steps: usize, rng: &RngStream) -> Result<GrurvResult> {
    let out = irs(&p.a, &p.b, steps)?;
    grurv2(&(&out.ap + &out.bp), &out.ap, Power::Minus, Power::Plus, rng)
}

/// IRS on `(Aᴴ, Bᴴ)` followed by GRURV of `𝒜_pᴴ(𝒜_p + ℬ_p)⁻ᴴ`; the leading
/// columns of `U` span the left deflating subspace.
pub fn left_pass(p: &Pencil, steps: usize, rng: &RngStream) -> Result<GrurvResult> {
    let out = irs(&adjoint(&p.a), &adjoint(&p.b), steps)?;
    grurv2(&adjoint(&out.ap), &adjoint(&(&out.ap + &out.bp)), Power::Plus, Power::Minus, rng)
}

/// Bases for the right and left deflating subspaces of the `k` eigenvalues
/// of `(A, B)` outside the unit circle.
///
/// The caller asserts that no eigenvalue lies on the circle and exactly `k`
/// lie outside; this is not checked. The right and left passes draw from
/// the child streams `right` and `left`.
pub fn deflate(p: &Pencil, steps: usize, k: usize, rng: &RngStream) -> Result<DeflatePair> {
    check_k(p, k)?;
    let right = right_pass(p, steps, &rng.child("right"))?;
    let left = left_pass(p, steps, &rng.child("left"))?;
    Ok(DeflatePair {
        ur: columns(&right.u, 0, k),
        ul: columns(&left.u, 0, k),
    })
}

pub(crate) fn check_k(p: &Pencil, k: usize) -> Result<()> {
    if k == 0 || k > p.n() {
        return Err(Error::InvalidK { k, n: p.n() });
    }
    Ok(())
}
