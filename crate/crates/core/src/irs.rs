//! Implicit repeated squaring and the Möbius maps feeding it.

use faer::c64;

use crate::grid::Orientation;
use crate::linalg::{adjoint, block, shape_mismatch, solve, vstack, CMatrix};
use crate::{Pencil, Result};

/// `(A_p, B_p)` with `A_p⁻¹B_p = (A⁻¹B)^(2^p)`.
#[derive(Clone, Debug)]
pub struct IrsOutput {
    pub ap: CMatrix,
    pub bp: CMatrix,
    pub steps: usize,
}

/// Runs `p` squaring steps without forming any inverse.
///
/// Each step factors the stacked `2n × n` matrix `[B_j; −A_j] = QR` and sets
/// `A_{j+1} = Q₁₂ᴴA_j`, `B_{j+1} = Q₂₂ᴴB_j`, where `Q₁₂ = Q[0..n, n..2n]` and
/// `Q₂₂ = Q[n..2n, n..2n]`.
pub fn irs(a: &CMatrix, b: &CMatrix, p: usize) -> Result<IrsOutput> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(shape_mismatch(a, b));
    }
    let mut aj = a.clone();
    let mut bj = b.clone();
    for _ in 0..p {
        let stacked = vstack(&bj, &(-&aj))?;
        let tail = trailing_q_columns(&stacked);
        let q12 = block(&tail, 0, 0, n, n);
        let q22 = block(&tail, n, 0, n, n);
        aj = q12.adjoint() * &aj;
        bj = q22.adjoint() * &bj;
    }
    Ok(IrsOutput { ap: aj, bp: bj, steps: p })
}

/// Last `2n − n` columns of the full `Q` of a `2n × n` matrix, applied from
/// the Householder reflectors without forming `Q`.
fn trailing_q_columns(m: &CMatrix) -> CMatrix {
    use faer::dyn_stack::{MemBuffer, MemStack};
    use faer::linalg::householder::{
        apply_block_householder_sequence_on_the_left_in_place_scratch,
        apply_block_householder_sequence_on_the_left_in_place_with_conj,
    };
    use faer::Conj;

    let (rows, cols) = (m.nrows(), m.ncols());
    let qr = m.qr();
    let width = rows - cols;
    let mut out = CMatrix::from_fn(rows, width, |i, j| {
        if i == cols + j {
            c64::new(1.0, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    let par = faer::get_global_parallelism();
    let scratch = apply_block_householder_sequence_on_the_left_in_place_scratch::<c64>(rows, qr.Q_coeff().nrows(), width);
    apply_block_householder_sequence_on_the_left_in_place_with_conj(
        qr.Q_basis(),
        qr.Q_coeff(),
        Conj::No,
        out.as_mut(),
        par,
        MemStack::new(&mut MemBuffer::new(scratch)),
    );
    out
}

/// `(A_p + B_p)⁻¹A_p`, which approximates the spectral projector onto the
/// right deflating subspace of the eigenvalues outside the unit circle.
pub fn right_projector_approx(out: &IrsOutput) -> Result<CMatrix> {
    solve(&(&out.ap + &out.bp), &out.ap)
}

/// `𝒜_pᴴ(𝒜_p + ℬ_p)⁻ᴴ` for the output of [`irs`] on `(Aᴴ, Bᴴ)`: the left
/// counterpart of [`right_projector_approx`].
pub fn left_projector_approx(out_of_adjoint: &IrsOutput) -> Result<CMatrix> {
    Ok(adjoint(&right_projector_approx(out_of_adjoint)?))
}

fn shift_points(h: f64, orientation: Orientation) -> (c64, c64) {
    match orientation {
        Orientation::Vertical => (c64::new(h - 1.0, 0.0), c64::new(h + 1.0, 0.0)),
        Orientation::Horizontal => (c64::new(0.0, h - 1.0), c64::new(0.0, h + 1.0)),
    }
}

/// `(A − c₋B, A − c₊B)` with `c± = h ± 1` (times `i` for horizontal lines).
///
/// An eigenvalue `λ` maps to `(λ − c₋)/(λ − c₊)`, so the half-plane beyond the
/// line (`Re λ > h`, or `Im λ > h`) goes outside the unit circle.
pub fn mobius_right(p: &Pencil, h: f64, orientation: Orientation) -> Pencil {
    let (lo, hi) = shift_points(h, orientation);
    Pencil { a: p.shifted(lo), b: p.shifted(hi) }
}

/// `(A − c₊B, A − c₋B)`: the half-plane before the line goes outside the unit circle.
pub fn mobius_left(p: &Pencil, h: f64, orientation: Orientation) -> Pencil {
    let (lo, hi) = shift_points(h, orientation);
    Pencil { a: p.shifted(hi), b: p.shifted(lo) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, identity, ref_eig, spectral_norm, Eigenvalue};

    fn close(x: &CMatrix, y: &CMatrix, tol: f64) -> bool {
        spectral_norm(&(x - y)).unwrap() <= tol
    }

    #[test]
    fn identity_is_a_fixed_point() {
        let out = irs(&identity(4), &identity(4), 3).unwrap();
        assert_eq!(out.steps, 3);
        let prod = solve(&out.ap, &out.bp).unwrap();
        assert!(close(&prod, &identity(4), 1e-12));
    }

    #[test]
    fn squares_a_diagonal_pencil() {
        let out = irs(&identity(2), &diag_real(&[2.0, 0.5]), 2).unwrap();
        let prod = solve(&out.ap, &out.bp).unwrap();
        assert!(close(&prod, &diag_real(&[16.0, 1.0 / 16.0]), 1e-10));
    }

    #[test]
    fn trailing_columns_match_full_q() {
        let rng = crate::RngStream::new(4);
        let m = crate::linalg::complex_gaussian(10, 5, 1.0, &rng);
        let (q, _) = crate::linalg::qr_full(&m);
        let tail = trailing_q_columns(&m);
        assert!(close(&tail, &block(&q, 0, 5, 10, 5), 1e-12));
    }

    #[test]
    fn zero_steps_is_the_input() {
        let a = diag_real(&[1.0, 3.0]);
        let out = irs(&a, &identity(2), 0).unwrap();
        assert_eq!(out.ap, a);
    }

    #[test]
    fn projector_examples() {
        let out = irs(&diag_real(&[2.0, 0.5]), &identity(2), 5).unwrap();
        let proj = right_projector_approx(&out).unwrap();
        assert!(close(&proj, &diag_real(&[1.0, 0.0]), 1e-6));

        let outside = irs(&diag_real(&[3.0, -2.0, 4.0]), &identity(3), 6).unwrap();
        assert!(close(&right_projector_approx(&outside).unwrap(), &identity(3), 1e-6));
        let inside = irs(&diag_real(&[0.3, -0.2, 0.4]), &identity(3), 6).unwrap();
        assert!(close(&right_projector_approx(&inside).unwrap(), &diag_real(&[0.0; 3]), 1e-6));

        let p = Pencil::new(diag_real(&[2.0, 0.5]), identity(2)).unwrap().adjoint();
        let left = left_projector_approx(&irs(&p.a, &p.b, 5).unwrap()).unwrap();
        assert!(close(&left, &diag_real(&[1.0, 0.0]), 1e-6));
    }

    #[test]
    fn mobius_maps() {
        let p = Pencil::new(diag_real(&[0.0, 2.0]), identity(2)).unwrap();
        let m = mobius_right(&p, 1.0, Orientation::Vertical);
        let mut mags: alloc::vec::Vec<f64> = ref_eig(&m).unwrap().into_iter().map(Eigenvalue::magnitude).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(mags[0] < 1e-12);
        assert!(mags[1] > 1e12);

        let on_line = Pencil::new(diag_real(&[0.7]), identity(1)).unwrap();
        for orientation in [Orientation::Vertical, Orientation::Horizontal] {
            let h = 0.7;
            let q = if orientation == Orientation::Vertical {
                on_line.clone()
            } else {
                Pencil::new(crate::linalg::diag(&[c64::new(0.3, 0.7)]), identity(1)).unwrap()
            };
            let m = mobius_right(&q, h, orientation);
            let mu = m.a[(0, 0)] / m.b[(0, 0)];
            assert!((mu.norm() - 1.0).abs() < 1e-12);
        }

        let p = Pencil::new(diag_real(&[-0.5, 0.5]), identity(2)).unwrap();
        let right = mobius_right(&p, 0.0, Orientation::Vertical);
        let left = mobius_left(&p, 0.0, Orientation::Vertical);
        for i in 0..2 {
            let mr = (right.a[(i, i)] / right.b[(i, i)]).norm();
            let ml = (left.a[(i, i)] / left.b[(i, i)]).norm();
            assert!((mr * ml - 1.0).abs() < 1e-12);
            assert_eq!(mr > 1.0, i == 1);
        }

        let tilted = Pencil::new(crate::linalg::diag(&[c64::new(0.0, 2.0), c64::new(0.0, -1.0)]), identity(2)).unwrap();
        let m = mobius_right(&tilted, 0.5, Orientation::Horizontal);
        let mu0 = (m.a[(0, 0)] / m.b[(0, 0)]).norm();
        let mu1 = (m.a[(1, 1)] / m.b[(1, 1)]).norm();
        assert!(mu0 > 1.0 && mu1 < 1.0);
    }
}
