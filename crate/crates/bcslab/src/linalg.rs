//! Dense complex matrix helpers shared by operator verification and game
//! simulation. Everything here works on small matrices (dimension a few
//! hundred at most), so the routines favour clarity over blocking tricks.

use nalgebra::{DMatrix, DVector};
use num::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub fn czero() -> C64 {
    Complex::new(0.0, 0.0)
}

pub fn cone() -> C64 {
    Complex::new(1.0, 0.0)
}

pub fn cre(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest singular value, computed by power iteration on `m* m`.
///
/// The starting vector is a fixed quasi-random direction, so the result is
/// deterministic. Accuracy is far below the verification tolerances used by
/// callers (residuals here are either numerically zero or of order one).
pub fn operator_norm(m: &CMatrix) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let h = m.adjoint() * m;
    if h.iter().all(|c| c.norm_sqr() == 0.0) {
        return 0.0;
    }
    let mut v = DVector::from_iterator(
        n,
        (0..n).map(|k| {
            let a = (k as f64 * 0.754_877_666_246_692_7).fract() + 0.5;
            let b = (k as f64 * 0.569_840_290_998_053_2).fract() - 0.5;
            Complex::new(a, b)
        }),
    );
    let norm = v.norm();
    v /= cre(norm);
    let mut lambda = 0.0_f64;
    for _ in 0..500 {
        let w = &h * &v;
        let wn = w.norm();
        if wn <= f64::MIN_POSITIVE {
            // Start vector fell in the kernel; restart from the heaviest
            // column of h, which cannot also be annihilated unless h = 0.
            let (best, _) = (0..n)
                .map(|j| (j, h.column(j).norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            v = h.column(best).into_owned();
            let bn = v.norm();
            if bn <= f64::MIN_POSITIVE {
                return 0.0;
            }
            v /= cre(bn);
            continue;
        }
        v = w / cre(wn);
        if (wn - lambda).abs() <= 1e-14 * wn.max(1.0) {
            lambda = wn;
            break;
        }
        lambda = wn;
    }
    lambda.sqrt()
}

/// Frobenius inner-product trace of `a * b`, returned without forming the
/// full product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    let mut acc = czero();
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_norm_matches_known_values() {
        let id = identity(4);
        assert!((operator_norm(&id) - 1.0).abs() < 1e-12);

        let z = CMatrix::zeros(3, 3);
        assert_eq!(operator_norm(&z), 0.0);

        // diag(3, -2, 1) has operator norm 3
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![cre(3.0), cre(-2.0), cre(1.0)]));
        assert!((operator_norm(&d) - 3.0).abs() < 1e-10);

        // a rank-one 2x2 with singular value 5
        let m = CMatrix::from_row_slice(2, 2, &[cre(3.0), cre(4.0), czero(), czero()]);
        assert!((operator_norm(&m) - 5.0).abs() < 1e-10);
    }

    #[test]
    fn kron_shapes_and_values() {
        let x = CMatrix::from_row_slice(2, 2, &[czero(), cone(), cone(), czero()]);
        let z = CMatrix::from_row_slice(2, 2, &[cone(), czero(), czero(), -cone()]);
        let xz = kron(&x, &z);
        assert_eq!(xz.nrows(), 4);
        assert_eq!(xz[(0, 2)], cone());
        assert_eq!(xz[(1, 3)], -cone());
        assert_eq!(xz[(2, 0)], cone());
        assert_eq!(xz[(3, 1)], -cone());
    }
}
