//! Test pencils used by the experiments.

use alloc::vec::Vec;

use faer::c64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{complex_gaussian, diag, diag_real, identity, solve, CMatrix};
use crate::{Error, Pencil, Result, RngStream};

const RESAMPLE_LIMIT: usize = 16;

/// `−2 + 4j/(n−1)` for `j = 0..n`.
pub fn planted_spectrum(n: usize) -> Vec<f64> {
    (0..n).map(|j| -2.0 + 4.0 * j as f64 / (n - 1) as f64).collect()
}

/// `A = XΛY⁻¹`, `B = XY⁻¹` with `Λ` the planted real spectrum and `X`, `Y`
/// unit-variance complex Gaussian, normalized. Returns the pencil before
/// normalization as well.
pub fn planted_raw(n: usize, rng: &RngStream) -> Result<Pencil> {
    if n < 2 {
        return Err(Error::InvalidParameter("planted recipe needs n >= 2".into()));
    }
    let lambda = diag_real(&planted_spectrum(n));
    for attempt in 0..RESAMPLE_LIMIT {
        let draw = rng.child(&alloc::format!("draw{attempt}"));
        let x = complex_gaussian(n, n, 1.0, &draw.child("X"));
        let y = complex_gaussian(n, n, 1.0, &draw.child("Y"));
        // B = X Y⁻¹ and A = X Λ Y⁻¹ solved from the right.
        let yt = y.adjoint().to_owned();
        let b = match solve(&yt, &x.adjoint().to_owned()) {
            Ok(m) => m.adjoint().to_owned(),
            Err(Error::SingularMatrix { .. }) => continue,
            Err(e) => return Err(e),
        };
        let a = solve(&yt, &(&x * &lambda).adjoint().to_owned())?.adjoint().to_owned();
        return Pencil::new(a, b);
    }
    Err(Error::SingularMatrix { sigma_min: 0.0, threshold: 0.0 })
}

pub fn planted(n: usize, rng: &RngStream) -> Result<Pencil> {
    Ok(planted_raw(n, rng)?.normalized()?.0)
}

/// `(J_n(0), I)`, normalized: a single nilpotent Jordan block.
pub fn jordan(n: usize) -> Result<Pencil> {
    if n < 2 {
        return Err(Error::InvalidParameter("jordan recipe needs n >= 2".into()));
    }
    let a = CMatrix::from_fn(n, n, |i, j| c64::new(if j == i + 1 { 1.0 } else { 0.0 }, 0.0));
    Ok(Pencil::new(a, identity(n))?.normalized()?.0)
}

/// Random Gaussian `A`, `B` with `B` deflated by its smallest singular
/// triplet, `B ← B − σₙ·uₙvₙᴴ`, then normalized.
pub fn singular_b(n: usize, rng: &RngStream) -> Result<Pencil> {
    if n < 2 {
        return Err(Error::InvalidParameter("singular_b recipe needs n >= 2".into()));
    }
    let a = complex_gaussian(n, n, 1.0, &rng.child("A"));
    let b = complex_gaussian(n, n, 1.0, &rng.child("B"));
    let svd = b.svd().map_err(|_| Error::NoConvergence("svd"))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let k = n - 1;
    let sigma = s[k];
    let correction = CMatrix::from_fn(n, n, |i, j| u[(i, k)] * v[(j, k)].conj() * sigma);
    Pencil::new(a, &b - &correction)?.normalized().map(|(p, _)| p)
}

/// The 4×4 singular pencil with one finite eigenvalue at 1, normalized.
pub fn singular_pencil() -> Pencil {
    let a = [[2.0, -1.0, -5.0, -1.0], [6.0, -2.0, -11.0, -2.0], [5.0, 0.0, -2.0, 0.0], [3.0, 1.0, 3.0, 1.0]];
    let b = [[1.0, -1.0, -4.0, -2.0], [2.0, -3.0, -12.0, -6.0], [-1.0, -3.0, -11.0, -6.0], [-2.0, -2.0, -7.0, -4.0]];
    let to_mat = |m: [[f64; 4]; 4]| CMatrix::from_fn(4, 4, |i, j| c64::new(m[i][j], 0.0));
    let p = Pencil { a: to_mat(a), b: to_mat(b) };
    p.normalized().expect("fixed pencil has a finite SVD").0
}

/// A diagonalizable pencil `A = XΛY`, `B = XY` with `k` eigenvalues of
/// modulus in `[1.5, 3]` and `n − k` of modulus in `[1/3, 2/3]`, together
/// with its exact deflating subspaces for the outside eigenvalues.
#[derive(Clone, Debug)]
pub struct Separated {
    pub pencil: Pencil,
    pub outside: Vec<c64>,
    pub inside: Vec<c64>,
    /// `Y⁻¹` restricted to the outside eigenvalues: right deflating subspace.
    pub right: CMatrix,
    /// `X` restricted to the outside eigenvalues: left deflating subspace.
    pub left: CMatrix,
}

pub fn separated(n: usize, k: usize, rng: &RngStream) -> Result<Separated> {
    if k > n || n == 0 {
        return Err(Error::InvalidK { k, n });
    }
    let u = rng.child("spectrum").uniforms(2 * n);
    let values: Vec<c64> = (0..n)
        .map(|i| {
            let (lo, hi) = if i < k { (1.5, 3.0) } else { (1.0 / 3.0, 2.0 / 3.0) };
            let r = lo + (hi - lo) * u[2 * i];
            let t = 2.0 * core::f64::consts::PI * u[2 * i + 1];
            c64::new(r * t.cos(), r * t.sin())
        })
        .collect();
    let x = &identity(n) + crate::linalg::scale(&complex_gaussian(n, n, 1.0 / n as f64, &rng.child("X")), c64::new(0.5, 0.0));
    let y = &identity(n) + crate::linalg::scale(&complex_gaussian(n, n, 1.0 / n as f64, &rng.child("Y")), c64::new(0.5, 0.0));
    let yinv = solve(&y, &identity(n))?;
    let pencil = Pencil::new(&x * diag(&values) * &y, &x * &y)?;
    Ok(Separated {
        pencil,
        outside: values[..k].to_vec(),
        inside: values[k..].to_vec(),
        right: crate::linalg::columns(&yinv, 0, k),
        left: crate::linalg::columns(&x, 0, k),
    })
}

/// `(diag(values), I)`.
pub fn diagonal(values: &[c64]) -> Result<Pencil> {
    Pencil::new(diag(values), identity(values.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{extreme_svs, ref_eig, spectral_norm};

    #[test]
    fn planted_oracle_spectrum() {
        let p = planted_raw(12, &RngStream::new(1)).unwrap();
        let mut got: Vec<c64> = ref_eig(&p).unwrap().into_iter().map(|e| e.finite().unwrap()).collect();
        got.sort_by(|x, y| x.re.total_cmp(&y.re));
        for (z, want) in got.iter().zip(planted_spectrum(12)) {
            assert!((z - c64::new(want, 0.0)).norm() < 1e-8, "{z} vs {want}");
        }
        let q = planted(12, &RngStream::new(1)).unwrap();
        let na = spectral_norm(&q.a).unwrap();
        let nb = spectral_norm(&q.b).unwrap();
        assert!((na.max(nb) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_b_is_singular() {
        let p = singular_b(20, &RngStream::new(2)).unwrap();
        let (hi, lo) = extreme_svs(&p.b).unwrap();
        assert!(lo <= 1e-14 * hi);
    }

    #[test]
    fn singular_pencil_norms() {
        let p = singular_pencil();
        assert!((spectral_norm(&p.a).unwrap() - 0.6940).abs() < 1e-3);
        assert!((spectral_norm(&p.b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separated_subspaces_are_deflating() {
        let s = separated(8, 3, &RngStream::new(4)).unwrap();
        let ar = &s.pencil.a * &s.right;
        let br = &s.pencil.b * &s.right;
        let stacked = crate::linalg::hstack(&ar, &br).unwrap();
        let sv = crate::linalg::svd_values(&stacked).unwrap();
        assert!(sv[3] < 1e-12 * sv[0]);
        assert!(crate::linalg::subspace_distance(&ar, &s.left).unwrap() < 1e-10);
        assert!(s.outside.iter().all(|z| z.norm() >= 1.5) && s.inside.iter().all(|z| z.norm() <= 2.0 / 3.0));
    }

    #[test]
    fn jordan_shape() {
        let p = jordan(5).unwrap();
        assert_eq!(p.a[(0, 1)], c64::new(1.0, 0.0));
        assert_eq!(p.a[(1, 0)], c64::new(0.0, 0.0));
        assert_eq!(p.b, identity(5));
    }
}
