//! Randomized rank-revealing factorizations: RURV, RULV and the two-factor
//! generalized form GRURV.

use crate::linalg::{adjoint, haar_unitary, ql_full, qr_full, rq_full, shape_mismatch, CMatrix};
use crate::{Result, RngStream};

/// `A = U R V` with `V` Haar-distributed and `R` upper triangular.
#[derive(Clone, Debug)]
pub struct RurvResult {
    pub u: CMatrix,
    pub r: CMatrix,
    pub v: CMatrix,
}

/// `A = U L V` with `V` Haar-distributed and `L` lower triangular.
#[derive(Clone, Debug)]
pub struct RulvResult {
    pub u: CMatrix,
    pub l: CMatrix,
    pub v: CMatrix,
}

/// `A₁^{m₁} A₂^{m₂} = U R₁^{m₁} R₂^{m₂} V`.
#[derive(Clone, Debug)]
pub struct GrurvResult {
    pub u: CMatrix,
    pub r1: CMatrix,
    pub r2: CMatrix,
    pub v: CMatrix,
}

/// Exponent `±1` of a factor in a GRURV product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Power {
    Plus,
    Minus,
}

pub fn rurv(a: &CMatrix, rng: &RngStream) -> RurvResult {
    let v = haar_unitary(a.nrows(), rng);
    let (u, r) = qr_full(&(a * v.adjoint()));
    RurvResult { u, r, v }
}

pub fn rulv(a: &CMatrix, rng: &RngStream) -> RulvResult {
    let v = haar_unitary(a.nrows(), rng);
    let (u, l) = ql_full(&(a * v.adjoint()));
    RulvResult { u, l, v }
}

/// Two-factor GRURV of `A₁^{m₁} A₂^{m₂}`.
///
/// The rightmost factor is handled first: RURV of `A₂` for `m₂ = +1`, RULV of
/// `A₂ᴴ` for `m₂ = −1` (with `R₂ = Lᴴ`). Then `A₁` is reduced against the
/// current left factor by QR of `A₁U` (`m₁ = +1`) or RQ of `UᴴA₁` (`m₁ = −1`).
pub fn grurv2(a1: &CMatrix, a2: &CMatrix, m1: Power, m2: Power, rng: &RngStream) -> Result<GrurvResult> {
    let n = a1.nrows();
    if a1.ncols() != n || a2.nrows() != n || a2.ncols() != n {
        return Err(shape_mismatch(a1, a2));
    }
    let (u_cur, r2, v) = match m2 {
        Power::Plus => {
            let f = rurv(a2, rng);
            (f.u, f.r, f.v)
        }
        Power::Minus => {
            let f = rulv(&adjoint(a2), rng);
            (f.u, adjoint(&f.l), f.v)
        }
    };
    let (u, r1) = match m1 {
        Power::Plus => qr_full(&(a1 * &u_cur)),
        Power::Minus => {
            let (r, q) = rq_full(&(u_cur.adjoint() * a1));
            (adjoint(&q), r)
        }
    };
    Ok(GrurvResult { u, r1, r2, v })
}

/// Number of indices with `|R₂(i,i)/R₁(i,i)| ≥ threshold`; a zero `R₁(i,i)`
/// counts as above the threshold.
pub fn rank_count(r1: &CMatrix, r2: &CMatrix, threshold: f64) -> usize {
    let n = r1.nrows().min(r1.ncols()).min(r2.nrows()).min(r2.ncols());
    (0..n)
        .filter(|&i| {
            let d1 = r1[(i, i)].norm();
            let d2 = r2[(i, i)].norm();
            d1 == 0.0 || d2 / d1 >= threshold
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, diag_real, identity, solve, solve_right, spectral_norm, svd_values};
    use faer::c64;

    fn rel(x: &CMatrix, y: &CMatrix) -> f64 {
        spectral_norm(&(x - y)).unwrap() / spectral_norm(y).unwrap()
    }

    #[test]
    fn rurv_of_identity() {
        let f = rurv(&identity(4), &RngStream::new(1));
        for s in svd_values(&f.r).unwrap() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(rel(&(&f.u * &f.r * &f.v), &identity(4)) < 1e-12);
    }

    #[test]
    fn rurv_reveals_rank_one() {
        let x = complex_gaussian(8, 1, 1.0, &RngStream::new(2).child("x"));
        let y = complex_gaussian(1, 8, 1.0, &RngStream::new(2).child("y"));
        let a = &x * &y;
        let norm = spectral_norm(&a).unwrap();
        let f = rurv(&a, &RngStream::new(3));
        for i in 1..8 {
            assert!(f.r[(i, i)].norm() <= 1e-10 * norm);
        }
        let g = rulv(&a, &RngStream::new(3));
        assert!(rel(&(&g.u * &g.l * &g.v), &a) < 1e-12);
    }

    #[test]
    fn grurv_identity_pair() {
        let eye = identity(5);
        let f = grurv2(&eye, &eye, Power::Minus, Power::Plus, &RngStream::new(4)).unwrap();
        let prod = &f.u * solve(&f.r1, &f.r2).unwrap() * &f.v;
        assert!(rel(&prod, &eye) < 1e-10);
    }

    #[test]
    fn grurv_sign_patterns() {
        let rng = RngStream::new(5);
        let a1 = &complex_gaussian(8, 8, 1.0, &rng.child("a1")) + &identity(8);
        let a2 = complex_gaussian(8, 8, 1.0, &rng.child("a2"));

        let f = grurv2(&a1, &a2, Power::Minus, Power::Plus, &rng.child("f")).unwrap();
        let want = solve(&a1, &a2).unwrap();
        assert!(rel(&(&f.u * solve(&f.r1, &f.r2).unwrap() * &f.v), &want) < 1e-9);

        let f = grurv2(&a1, &a2, Power::Plus, Power::Minus, &rng.child("g")).unwrap();
        let want = solve_right(&a2, &a1).unwrap();
        let got = &f.u * solve_right(&f.r2, &f.r1).unwrap() * &f.v;
        assert!(rel(&got, &want) < 1e-9);

        let f = grurv2(&a1, &a2, Power::Plus, Power::Plus, &rng.child("h")).unwrap();
        assert!(rel(&(&f.u * &f.r1 * &f.r2 * &f.v), &(&a1 * &a2)) < 1e-12);
    }

    #[test]
    fn rank_count_examples() {
        assert_eq!(rank_count(&identity(2), &diag_real(&[1.0, 1e-12]), 1e-6), 1);
        assert_eq!(rank_count(&identity(3), &diag_real(&[0.0; 3]), 1e-6), 0);
        let mut r1 = identity(2);
        r1[(1, 1)] = c64::new(0.0, 0.0);
        assert_eq!(rank_count(&r1, &diag_real(&[1e-9, 1e-9]), 1e-6), 1);
    }
}
