//! Dense complex kernels, random matrix ensembles and the pencil type.

use alloc::format;
use alloc::vec::Vec;

use faer::{c64, Mat};
#[allow(unused_imports)]
use num_traits::Float;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result, RngStream};

pub type CMatrix = Mat<c64>;

/// Unit roundoff of `f64`.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// A generalized eigenvalue, finite or at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Eigenvalue {
    Finite(c64),
    Infinite,
}

impl Eigenvalue {
    pub fn finite(self) -> Option<c64> {
        match self {
            Eigenvalue::Finite(z) => Some(z),
            Eigenvalue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Eigenvalue::Infinite)
    }

    /// Magnitude, with `+∞` for the point at infinity.
    pub fn magnitude(self) -> f64 {
        match self {
            Eigenvalue::Finite(z) => z.norm(),
            Eigenvalue::Infinite => f64::INFINITY,
        }
    }
}

/// A square matrix pencil `(A, B)`.
#[derive(Clone, Debug)]
pub struct Pencil {
    pub a: CMatrix,
    pub b: CMatrix,
}

impl Pencil {
    pub fn new(a: CMatrix, b: CMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
            return Err(Error::ShapeMismatch {
                left: format!("A is {}x{}", a.nrows(), a.ncols()),
                right: format!("B is {}x{}", b.nrows(), b.ncols()),
            });
        }
        if a.nrows() == 0 {
            return Err(Error::InvalidParameter("pencil must be at least 1x1".into()));
        }
        if !all_finite(&a) || !all_finite(&b) {
            return Err(Error::InvalidParameter("pencil entries must be finite".into()));
        }
        Ok(Pencil { a, b })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// `(Aᴴ, Bᴴ)`.
    pub fn adjoint(&self) -> Pencil {
        Pencil {
            a: self.a.adjoint().to_owned(),
            b: self.b.adjoint().to_owned(),
        }
    }

    /// Scales both matrices by `1 / max(‖A‖₂, ‖B‖₂)` and returns the factor used.
    ///
    /// A zero pencil is returned unchanged with factor 1.
    pub fn normalized(&self) -> Result<(Pencil, f64)> {
        let scale = spectral_norm(&self.a)?.max(spectral_norm(&self.b)?);
        if scale == 0.0 {
            return Ok((self.clone(), 1.0));
        }
        let inv = c64::new(1.0 / scale, 0.0);
        Ok((
            Pencil {
                a: faer::Scale(inv) * &self.a,
                b: faer::Scale(inv) * &self.b,
            },
            scale,
        ))
    }

    /// `A − zB`.
    pub fn shifted(&self, z: c64) -> CMatrix {
        &self.a - faer::Scale(z) * &self.b
    }
}

pub fn all_finite(m: &CMatrix) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite()))
}

pub fn identity(n: usize) -> CMatrix {
    Mat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    Mat::zeros(rows, cols)
}

pub fn diag(values: &[c64]) -> CMatrix {
    let n = values.len();
    Mat::from_fn(n, n, |i, j| if i == j { values[i] } else { c64::new(0.0, 0.0) })
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let n = values.len();
    Mat::from_fn(n, n, |i, j| c64::new(if i == j { values[i] } else { 0.0 }, 0.0))
}

pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.adjoint().to_owned()
}

pub fn scale(m: &CMatrix, s: c64) -> CMatrix {
    faer::Scale(s) * m
}

pub fn columns(m: &CMatrix, start: usize, count: usize) -> CMatrix {
    m.as_ref().submatrix(0, start, m.nrows(), count).to_owned()
}

pub fn block(m: &CMatrix, row: usize, col: usize, rows: usize, cols: usize) -> CMatrix {
    m.as_ref().submatrix(row, col, rows, cols).to_owned()
}

/// `[X | Y]`.
pub fn hstack(x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    if x.nrows() != y.nrows() {
        return Err(shape_mismatch(x, y));
    }
    let k = x.ncols();
    Ok(Mat::from_fn(x.nrows(), k + y.ncols(), |i, j| {
        if j < k {
            x[(i, j)]
        } else {
            y[(i, j - k)]
        }
    }))
}

/// `[X; Y]`.
pub fn vstack(x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    if x.ncols() != y.ncols() {
        return Err(shape_mismatch(x, y));
    }
    let k = x.nrows();
    Ok(Mat::from_fn(k + y.nrows(), x.ncols(), |i, j| {
        if i < k {
            x[(i, j)]
        } else {
            y[(i - k, j)]
        }
    }))
}

/// Reverses the order of rows and columns (`J M J`).
pub fn flip(m: &CMatrix) -> CMatrix {
    let (r, c) = (m.nrows(), m.ncols());
    Mat::from_fn(r, c, |i, j| m[(r - 1 - i, c - 1 - j)])
}

pub(crate) fn shape_mismatch(x: &CMatrix, y: &CMatrix) -> Error {
    Error::ShapeMismatch {
        left: format!("{}x{}", x.nrows(), x.ncols()),
        right: format!("{}x{}", y.nrows(), y.ncols()),
    }
}

pub fn matmul(x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    if x.ncols() != y.nrows() {
        return Err(shape_mismatch(x, y));
    }
    Ok(x * y)
}

/// Frobenius norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm_l2()
}

/// Matrix with i.i.d. complex normal entries of the given variance,
/// `(x + iy)·√(variance/2)` with `x, y` standard normal.
pub fn complex_gaussian(rows: usize, cols: usize, variance: f64, rng: &RngStream) -> CMatrix {
    let mut gen = rng.generator();
    let s = (variance / 2.0).sqrt();
    let mut out = Mat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let x: f64 = StandardNormal.sample(&mut gen);
            let y: f64 = StandardNormal.sample(&mut gen);
            out[(i, j)] = c64::new(s * x, s * y);
        }
    }
    out
}

/// Ginibre matrix: i.i.d. entries with complex variance `1/n`.
pub fn ginibre(n: usize, rng: &RngStream) -> CMatrix {
    complex_gaussian(n, n, 1.0 / n as f64, rng)
}

/// Haar-distributed unitary matrix: the Q factor of a complex Gaussian
/// matrix with the phases of `diag(R)` pushed into Q.
pub fn haar_unitary(n: usize, rng: &RngStream) -> CMatrix {
    let g = complex_gaussian(n, n, 1.0, rng);
    let (mut q, r) = qr_full(&g);
    for j in 0..n {
        let d = r[(j, j)];
        let a = d.norm();
        let phase = if a == 0.0 { c64::new(1.0, 0.0) } else { d / a };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Householder QR with a full square `Q`; `R` has exact zeros below its diagonal.
pub fn qr_full(m: &CMatrix) -> (CMatrix, CMatrix) {
    let qr = m.qr();
    let q = qr.compute_Q();
    let raw = qr.R();
    let (rows, cols) = (m.nrows(), m.ncols());
    let r = Mat::from_fn(rows, cols, |i, j| {
        if i <= j && i < raw.nrows() {
            raw[(i, j)]
        } else {
            c64::new(0.0, 0.0)
        }
    });
    (q, r)
}

/// `M = Q L` with `L` lower triangular, via QR of the flipped matrix.
pub fn ql_full(m: &CMatrix) -> (CMatrix, CMatrix) {
    let (q, r) = qr_full(&flip(m));
    (flip(&q), flip(&r))
}

/// `M = R Q` with `R` upper triangular, via QL of `Mᴴ`.
pub fn rq_full(m: &CMatrix) -> (CMatrix, CMatrix) {
    let (q, l) = ql_full(&adjoint(m));
    (adjoint(&l), adjoint(&q))
}

/// Singular values in nonincreasing order.
pub fn svd_values(m: &CMatrix) -> Result<Vec<f64>> {
    let mut s = m.singular_values().map_err(|_| Error::NoConvergence("svd"))?;
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    Ok(s)
}

pub fn smallest_sv(m: &CMatrix) -> Result<f64> {
    Ok(svd_values(m)?.last().copied().unwrap_or(0.0))
}

pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    Ok(svd_values(m)?[0])
}

/// Largest and smallest singular values.
pub fn extreme_svs(m: &CMatrix) -> Result<(f64, f64)> {
    let s = svd_values(m)?;
    Ok((s[0], *s.last().unwrap_or(&0.0)))
}

/// 2-norm condition number.
pub fn condition_number(m: &CMatrix) -> Result<f64> {
    let (hi, lo) = extreme_svs(m)?;
    Ok(if lo == 0.0 { f64::INFINITY } else { hi / lo })
}

/// Solves `M X = RHS` by partial-pivoting LU.
///
/// Fails with [`Error::SingularMatrix`] when `σₙ(M) ≤ n·u·‖M‖₂`.
pub fn solve(m: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    if m.nrows() != m.ncols() || m.nrows() != rhs.nrows() {
        return Err(shape_mismatch(m, rhs));
    }
    let (hi, lo) = extreme_svs(m)?;
    let threshold = m.nrows() as f64 * UNIT_ROUNDOFF * hi;
    if lo <= threshold {
        return Err(Error::SingularMatrix { sigma_min: lo, threshold });
    }
    Ok(solve_unchecked(m, rhs))
}

pub(crate) fn solve_unchecked(m: &CMatrix, rhs: &CMatrix) -> CMatrix {
    use faer::linalg::solvers::Solve;
    m.partial_piv_lu().solve(rhs)
}

/// Solves `X M = RHS`.
pub fn solve_right(m: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    Ok(adjoint(&solve(&adjoint(m), &adjoint(rhs))?))
}

/// Eigenvalues of a square matrix.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<c64>> {
    m.eigenvalues().map_err(|_| Error::NoConvergence("eigenvalues"))
}

/// Eigenvalues and unit-norm right eigenvectors of a square matrix.
pub fn eigen(m: &CMatrix) -> Result<(Vec<c64>, CMatrix)> {
    let e = m.eigen().map_err(|_| Error::NoConvergence("eigen"))?;
    let values: Vec<c64> = e.S().column_vector().iter().copied().collect();
    let mut v = e.U().to_owned();
    normalize_columns(&mut v);
    Ok((values, v))
}

/// Generalized eigen-decomposition by QZ: `(α, β)` pairs and unit right eigenvectors.
///
/// Runs faer's unblocked QZ sweep at every size; its blocked sweep
/// (0.24.4) indexes out of bounds on random pencils of order ≳ 150.
pub fn generalized_eigen(a: &CMatrix, b: &CMatrix) -> Result<(Vec<c64>, Vec<c64>, CMatrix)> {
    use faer::dyn_stack::{MemBuffer, MemStack};
    use faer::linalg::evd::ComputeEigenvectors;
    use faer::linalg::gevd::{gevd_cplx, gevd_scratch, GevdParams};
    use faer::diag::Diag;
    use faer::{Par, Spec};

    if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
        return Err(shape_mismatch(a, b));
    }
    let n = a.nrows();
    let mut params: Spec<GevdParams, c64> = Default::default();
    params.schur.blocking_threshold = usize::MAX;
    let par = Par::Seq;
    let mut u = Mat::zeros(n, n);
    let mut s_a = Diag::zeros(n);
    let mut s_b = Diag::zeros(n);
    let mut a = a.clone();
    let mut b = b.clone();
    let scratch = gevd_scratch::<c64>(n, ComputeEigenvectors::No, ComputeEigenvectors::Yes, par, params);
    gevd_cplx(
        a.as_mut(),
        b.as_mut(),
        s_a.as_mut(),
        s_b.as_mut(),
        None,
        Some(u.as_mut()),
        par,
        MemStack::new(&mut MemBuffer::new(scratch)),
        params,
    )
    .map_err(|_| Error::NoConvergence("generalized eigen"))?;
    let alpha: Vec<c64> = s_a.column_vector().iter().copied().collect();
    let beta: Vec<c64> = s_b.column_vector().iter().copied().collect();
    normalize_columns(&mut u);
    Ok((alpha, beta, u))
}

pub fn normalize_columns(m: &mut CMatrix) {
    for j in 0..m.ncols() {
        let norm = (0..m.nrows()).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..m.nrows() {
                m[(i, j)] /= norm;
            }
        }
    }
}

/// Orthonormal basis for the column space of a full-column-rank matrix.
pub fn orthonormal_basis(m: &CMatrix) -> CMatrix {
    m.qr().compute_thin_Q()
}

/// Sine of the largest principal angle between the column spaces of two
/// full-column-rank matrices with the same number of columns.
pub fn subspace_distance(x: &CMatrix, y: &CMatrix) -> Result<f64> {
    if x.nrows() != y.nrows() || x.ncols() != y.ncols() {
        return Err(shape_mismatch(x, y));
    }
    let qx = orthonormal_basis(x);
    let qy = orthonormal_basis(y);
    let proj = &qy - &qx * (qx.adjoint() * &qy);
    Ok(spectral_norm(&proj)?.min(1.0))
}

/// Threshold below which `σ_min(B)/‖B‖₂` makes the reference oracle fall
/// back to `A⁻¹B`.
pub const ORACLE_B_RCOND: f64 = 1e-8;

/// Eigenvalues `μ` of `A⁻¹B` with `|μ| ≤ ORACLE_INFINITY_RTOL·‖A⁻¹B‖₂` are
/// reported at infinity.
pub const ORACLE_INFINITY_RTOL: f64 = 1e-8;

/// Reference generalized eigenvalues for verification.
///
/// Uses `eig(B⁻¹A)` when `B` is well conditioned, otherwise inverts
/// `eig(A⁻¹B)`. When both are numerically singular it falls back to QZ,
/// whose output is not authoritative for such pencils.
pub fn ref_eig(p: &Pencil) -> Result<Vec<Eigenvalue>> {
    let (nb, sb) = extreme_svs(&p.b)?;
    if sb > ORACLE_B_RCOND * nb {
        let x = solve_unchecked(&p.b, &p.a);
        return Ok(eigenvalues(&x)?.into_iter().map(Eigenvalue::Finite).collect());
    }
    match solve(&p.a, &p.b) {
        Ok(y) => {
            let ny = spectral_norm(&y)?;
            Ok(eigenvalues(&y)?
                .into_iter()
                .map(|mu| {
                    if mu.norm() <= ORACLE_INFINITY_RTOL * ny {
                        Eigenvalue::Infinite
                    } else {
                        Eigenvalue::Finite(c64::new(1.0, 0.0) / mu)
                    }
                })
                .collect())
        }
        Err(Error::SingularMatrix { .. }) => {
            let (alpha, beta, _) = generalized_eigen(&p.a, &p.b)?;
            Ok(alpha
                .into_iter()
                .zip(beta)
                .map(|(a, b)| {
                    if b.norm() <= ORACLE_INFINITY_RTOL * a.norm() {
                        Eigenvalue::Infinite
                    } else {
                        Eigenvalue::Finite(a / b)
                    }
                })
                .collect())
        }
        Err(e) => Err(e),
    }
}

/// Reference eigenvalues with unit-norm right eigenvectors; requires a
/// well-conditioned `B`.
pub fn ref_eig_vectors(p: &Pencil) -> Result<(Vec<c64>, CMatrix)> {
    let (nb, sb) = extreme_svs(&p.b)?;
    if sb <= ORACLE_B_RCOND * nb {
        return Err(Error::OracleUnavailable("B is numerically singular"));
    }
    eigen(&solve_unchecked(&p.b, &p.a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    fn unitarity_defect(q: &CMatrix) -> f64 {
        spectral_norm(&(q.adjoint() * q - identity(q.ncols()))).unwrap()
    }

    #[test]
    fn ginibre_scalar_moments() {
        let rng = RngStream::new(7);
        let draws = 100_000;
        let g = complex_gaussian(draws, 1, 1.0, &rng);
        let mean = (0..draws).map(|i| g[(i, 0)]).fold(c(0.0, 0.0), |a, b| a + b) / draws as f64;
        let second = (0..draws).map(|i| g[(i, 0)].norm_sqr()).sum::<f64>() / draws as f64;
        // standard errors: 1/sqrt(2N) per component of the mean, 1/sqrt(N) for E|g|^2
        assert!(mean.re.abs() < 3.0 / (2.0 * draws as f64).sqrt());
        assert!(mean.im.abs() < 3.0 / (2.0 * draws as f64).sqrt());
        assert!((second - 1.0).abs() < 3.0 / (draws as f64).sqrt());
    }

    #[test]
    fn ginibre_one_by_one_uses_unit_variance() {
        let rng = RngStream::new(3);
        let mut acc = 0.0;
        let draws = 20_000;
        for i in 0..draws {
            acc += ginibre(1, &rng.child(&format!("{i}")))[(0, 0)].norm_sqr();
        }
        assert!((acc / draws as f64 - 1.0).abs() < 3.0 / (draws as f64).sqrt());
    }

    #[test]
    fn ginibre_norm_tail() {
        let rng = RngStream::new(11);
        let bound = 2.0 * 2.0f64.sqrt() + 1.0;
        let trials = 1000;
        let hits = (0..trials)
            .filter(|i| spectral_norm(&ginibre(50, &rng.child(&format!("{i}")))).unwrap() <= bound)
            .count();
        assert!(hits * 100 >= 99 * trials, "{hits}");
    }

    #[test]
    fn ginibre_is_deterministic() {
        let rng = RngStream::new(42).child("G1");
        let a = ginibre(6, &rng);
        let b = ginibre(6, &rng);
        assert_eq!(a, b);
        let other = ginibre(6, &RngStream::new(42).child("G2"));
        assert_ne!(a, other);
    }

    #[test]
    fn qr_examples() {
        let (q, r) = qr_full(&identity(3));
        assert!(frobenius(&(&q * &r - identity(3))) < 1e-14);
        assert!(unitarity_defect(&q) < 1e-14);

        let m = complex_gaussian(6, 3, 1.0, &RngStream::new(1));
        let (q, r) = qr_full(&m);
        assert_eq!((q.nrows(), q.ncols(), r.nrows(), r.ncols()), (6, 6, 6, 3));
        let nm = spectral_norm(&m).unwrap();
        assert!(unitarity_defect(&q) <= 1e-12);
        assert!(spectral_norm(&(&q * &r - &m)).unwrap() <= 1e-12 * nm);
        for j in 0..3 {
            for i in j + 1..6 {
                assert_eq!(r[(i, j)], c(0.0, 0.0));
            }
        }

        let mut dup = complex_gaussian(4, 3, 1.0, &RngStream::new(2));
        for i in 0..4 {
            dup[(i, 1)] = dup[(i, 0)];
        }
        let (_, r) = qr_full(&dup);
        assert!(r[(1, 1)].norm() <= 1e-12 * spectral_norm(&dup).unwrap());
    }

    #[test]
    fn ql_and_rq_examples() {
        let (q, l) = ql_full(&identity(3));
        assert!(frobenius(&(&q * &l - identity(3))) < 1e-14);
        let (r, q) = rq_full(&identity(3));
        assert!(frobenius(&(&r * &q - identity(3))) < 1e-14);

        let m = complex_gaussian(5, 5, 1.0, &RngStream::new(5));
        let nm = spectral_norm(&m).unwrap();
        let (q, l) = ql_full(&m);
        assert!(spectral_norm(&(&q * &l - &m)).unwrap() <= 1e-12 * nm);
        assert!(unitarity_defect(&q) <= 1e-12);
        let (r, q2) = rq_full(&m);
        assert!(spectral_norm(&(&r * &q2 - &m)).unwrap() <= 1e-12 * nm);
        assert!(unitarity_defect(&q2) <= 1e-12);
        for i in 0..5 {
            for j in 0..5 {
                if j > i {
                    assert_eq!(l[(i, j)], c(0.0, 0.0));
                }
                if j < i {
                    assert_eq!(r[(i, j)], c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn ql_matches_flip_identity() {
        let m = complex_gaussian(6, 6, 1.0, &RngStream::new(9));
        let (q, l) = ql_full(&m);
        let (q2, r2) = qr_full(&flip(&m));
        let (qf, lf) = (flip(&q2), flip(&r2));
        // the two factorizations agree up to unit-modulus column scalings
        for j in 0..6 {
            let phase = (0..6)
                .map(|i| qf[(i, j)].conj() * q[(i, j)])
                .fold(c(0.0, 0.0), |a, b| a + b);
            assert!((phase.norm() - 1.0).abs() < 1e-12);
            for i in 0..6 {
                assert!((qf[(i, j)] * phase - q[(i, j)]).norm() < 1e-12);
                assert!((lf[(j, i)] * phase.conj() - l[(j, i)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn svd_examples() {
        let s = svd_values(&diag_real(&[0.5, 3.0, 1.0])).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14 && (s[2] - 0.5).abs() < 1e-14);

        let rng = RngStream::new(4);
        let m = complex_gaussian(7, 7, 1.0, &rng.child("m"));
        let e = complex_gaussian(7, 7, 1.0, &rng.child("e"));
        let e = scale(&e, c(1e-6 / spectral_norm(&e).unwrap(), 0.0));
        let s1 = svd_values(&m).unwrap();
        let s2 = svd_values(&(&m + &e)).unwrap();
        for (a, b) in s1.iter().zip(&s2) {
            assert!((a - b).abs() <= 1e-6 + 1e-12);
        }

        let u = haar_unitary(4, &rng.child("u"));
        for v in svd_values(&u).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn norms_and_solve() {
        assert!((spectral_norm(&diag_real(&[2.0, -5.0])).unwrap() - 5.0).abs() < 1e-14);
        let singular = diag_real(&[1.0, 0.0]);
        assert!(matches!(
            solve(&singular, &identity(2)),
            Err(Error::SingularMatrix { .. })
        ));
        let m = complex_gaussian(5, 5, 1.0, &RngStream::new(8));
        let x = solve(&m, &identity(5)).unwrap();
        assert!(spectral_norm(&(&m * &x - identity(5))).unwrap() < 1e-12 * condition_number(&m).unwrap());
        assert!(matches!(matmul(&identity(2), &identity(3)), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn ref_eig_diagonal() {
        let p = Pencil::new(diag_real(&[1.0, 2.0, 3.0]), identity(3)).unwrap();
        let mut vals: Vec<f64> = ref_eig(&p).unwrap().iter().map(|e| e.finite().unwrap().re).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (v, want) in vals.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn ref_eig_reports_infinity_for_singular_b() {
        let p = Pencil::new(diag_real(&[1.0, 2.0]), diag_real(&[1.0, 0.0])).unwrap();
        let vals = ref_eig(&p).unwrap();
        assert_eq!(vals.iter().filter(|e| e.is_infinite()).count(), 1);
        let finite = vals.iter().find_map(|e| e.finite()).unwrap();
        assert!((finite - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn pencil_rejects_mismatched_shapes() {
        assert!(matches!(
            Pencil::new(identity(2), identity(3)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn subspace_distance_detects_rotation() {
        let x = Mat::from_fn(3, 1, |i, _| c(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let y = Mat::from_fn(3, 1, |i, _| c(if i == 0 { 2.0 } else { 0.0 }, 0.0));
        assert!(subspace_distance(&x, &y).unwrap() < 1e-15);
        let z = Mat::from_fn(3, 1, |i, _| c(if i == 1 { 1.0 } else { 0.0 }, 0.0));
        assert!((subspace_distance(&x, &z).unwrap() - 1.0).abs() < 1e-15);
    }
}
