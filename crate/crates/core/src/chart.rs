//! Exponential coordinates of the first kind.
//!
//! For a simply connected nilpotent group the exponential map is a global
//! diffeomorphism, so points are identified with Lie algebra elements and
//! the product is the Baker-Campbell-Hausdorff series, which terminates:
//! through class 4 only the terms below are nonzero.
//!
//! The left-invariant frame extending the basis at the identity has
//! coordinate matrix `M(x) = psi(ad_x)` with `psi(t) = t / (1 - e^{-t})`
//! expanded as `I + ad_x/2 + ad_x^2/12`; the cubic coefficient vanishes and
//! `ad_x^4 = 0` in class at most 4 kills the rest.

use crate::algebra::NilpotentAlgebra;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;

fn scaled<T: Scalar>(v: &[T], s: f64) -> Vec<T> {
    v.iter().map(|x| T::from_f64(s) * x.clone()).collect()
}

fn add_into<T: Scalar>(acc: &mut [T], v: &[T]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a = a.clone() + b.clone();
    }
}

/// Group product in exponential coordinates: the BCH series truncated at
/// the algebra's declared class bound.
pub fn group_multiply<T: Scalar>(alg: &NilpotentAlgebra, x: &[T], y: &[T]) -> Vec<T> {
    let n = alg.dim();
    debug_assert_eq!(x.len(), n);
    debug_assert_eq!(y.len(), n);
    let mut z: Vec<T> = x.to_vec();
    add_into(&mut z, y);
    if alg.class_bound() >= 2 {
        let xy = alg.bracket(x, y);
        add_into(&mut z, &scaled(&xy, 0.5));
        if alg.class_bound() >= 3 {
            let xxy = alg.bracket(x, &xy);
            let yyx = alg.bracket(y, &alg.bracket(y, x));
            add_into(&mut z, &scaled(&xxy, 1.0 / 12.0));
            add_into(&mut z, &scaled(&yyx, 1.0 / 12.0));
            if alg.class_bound() >= 4 {
                let yxxy = alg.bracket(y, &xxy);
                add_into(&mut z, &scaled(&yxxy, -1.0 / 24.0));
            }
        }
    }
    z
}

pub fn group_inverse<T: Scalar>(x: &[T]) -> Vec<T> {
    x.iter().map(|v| -v.clone()).collect()
}

/// Coordinate matrix of the left-invariant frame at `x`: column `j` holds
/// the components of the frame field extending `e_j`.
pub fn frame_matrix<T: Scalar>(alg: &NilpotentAlgebra, x: &[T]) -> Mat<T> {
    let n = alg.dim();
    let ad = alg.ad_matrix(x);
    let ad2 = ad.matmul(&ad);
    let mut m = Mat::<T>::identity(n);
    m = m.add(&ad.scale(T::from_f64(0.5)));
    m = m.add(&ad2.scale(T::from_f64(1.0 / 12.0)));
    m
}

/// Components of the Riemannian part in coordinates: with `W = M(x)^{-1}`,
/// `a(x) = Wᵀ A W` pulls the identity inner product through the frame.
pub fn metric_in_coordinates<T: Scalar>(
    alg: &NilpotentAlgebra,
    a_identity: &Mat<f64>,
    x: &[T],
) -> Result<Mat<T>> {
    let w = frame_inverse(alg, x)?;
    let a: Mat<T> = Mat::lift(a_identity);
    Ok(w.transpose().matmul(&a).matmul(&w))
}

/// Coordinate components at `x` of the left-invariant field with value
/// `v_e` at the identity.
pub fn vector_in_coordinates<T: Scalar>(alg: &NilpotentAlgebra, v_e: &[f64], x: &[T]) -> Vec<T> {
    let v: Vec<T> = v_e.iter().map(|&c| T::from_f64(c)).collect();
    frame_matrix(alg, x).matvec(&v)
}

/// Coordinate components of the drift one-form `b(x) = M(x)^{-T} (A X_e)`.
pub fn one_form_in_coordinates<T: Scalar>(
    alg: &NilpotentAlgebra,
    b_e: &[f64],
    x: &[T],
) -> Result<Vec<T>> {
    let w = frame_inverse(alg, x)?;
    let b: Vec<T> = b_e.iter().map(|&c| T::from_f64(c)).collect();
    Ok(w.transpose().matvec(&b))
}

pub fn frame_inverse<T: Scalar>(alg: &NilpotentAlgebra, x: &[T]) -> Result<Mat<T>> {
    frame_matrix(alg, x).inverse().ok_or(Error::SingularMatrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::linalg::norm;
    use crate::scalar::Jet;

    fn assert_vec_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn heisenberg_product_matches_hand_computation() {
        // exp(e1) exp(e2) = exp(e1 + e2 + [e1,e2]/2).
        let h3 = catalog::heisenberg3();
        let z = group_multiply(&h3, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]);
        assert_vec_close(&z, &[1.0, 1.0, 0.5], 1e-15);
    }

    #[test]
    fn group_axioms_hold_numerically() {
        let f4 = catalog::filiform4();
        let x = [0.3, -0.7, 0.2, 0.9];
        let y = [-0.5, 0.4, 1.1, -0.2];
        let z = [0.8, 0.1, -0.6, 0.4];

        let xi = group_inverse(&x);
        let id = group_multiply(&f4, &x, &xi);
        assert_vec_close(&id, &[0.0; 4], 1e-12);

        let lhs = group_multiply(&f4, &group_multiply(&f4, &x, &y), &z);
        let rhs = group_multiply(&f4, &x, &group_multiply(&f4, &y, &z));
        assert_vec_close(&lhs, &rhs, 1e-12);
    }

    #[test]
    fn class_four_associativity_needs_the_quartic_term() {
        // Filiform of dimension 5 has class 4; associativity fails at the
        // 1e-12 level if the degree-4 BCH term is dropped, so this guards
        // the full series.
        let f5 = crate::algebra::NilpotentAlgebra::new(
            5,
            4,
            &[(1, 2, 3, 1.0), (1, 3, 4, 1.0), (1, 4, 5, 1.0)],
        )
        .unwrap();
        assert!(f5.validate().ok());
        let x = [0.4, -0.3, 0.7, 0.1, -0.8];
        let y = [-0.2, 0.9, 0.3, -0.5, 0.6];
        let z = [0.7, 0.2, -0.4, 0.8, 0.1];
        let lhs = group_multiply(&f5, &group_multiply(&f5, &x, &y), &z);
        let rhs = group_multiply(&f5, &x, &group_multiply(&f5, &y, &z));
        assert_vec_close(&lhs, &rhs, 1e-12);
    }

    #[test]
    fn frame_matrix_heisenberg_golden_value() {
        // At x = e1 the frame column over e2 is e2 + e3/2: ad_x e2 = e3
        // and the quadratic term vanishes.
        let h3 = catalog::heisenberg3();
        let m = frame_matrix(&h3, &[1.0, 0.0, 0.0]);
        assert_vec_close(&m.column(1), &[0.0, 1.0, 0.5], 1e-15);
        assert_vec_close(&m.column(0), &[1.0, 0.0, 0.0], 1e-15);
        assert_vec_close(&m.column(2), &[0.0, 0.0, 1.0], 1e-15);
    }

    #[test]
    fn heisenberg_metric_in_coordinates_golden_value() {
        // With A = I, at x = e1: a_22 = 1 + 1/4 from the shear in the
        // frame inverse.
        let h3 = catalog::heisenberg3();
        let a = metric_in_coordinates(&h3, &Mat::identity(3), &[1.0, 0.0, 0.0]).unwrap();
        assert!((a[(1, 1)] - 1.25).abs() < 1e-14);
        assert!((a[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((a[(1, 2)] - (-0.5)).abs() < 1e-14);
    }

    #[test]
    fn frame_is_derivative_of_left_translation() {
        // The frame field at x is d/dt of x * exp(t e_j); differentiate the
        // group product with a jet in t and compare columns.
        let f4 = catalog::filiform4();
        let x = [0.4, -0.2, 0.7, 0.3];
        let m = frame_matrix(&f4, &x);
        for j in 0..4 {
            let xt: Vec<Jet<f64>> = x.iter().map(|&c| Jet::constant(c)).collect();
            let mut ej: Vec<Jet<f64>> = vec![Jet::constant(0.0); 4];
            ej[j] = Jet::seeded(0.0, 1, 0);
            let prod = group_multiply(&f4, &xt, &ej);
            for i in 0..4 {
                assert!(
                    (prod[i].grad(0) - m[(i, j)]).abs() < 1e-13,
                    "frame column {j} disagrees with the translation derivative"
                );
            }
        }
    }

    #[test]
    fn left_invariance_of_the_coordinate_metric() {
        // Pulling a(x) back through the frame must reproduce A at every
        // point: M(x)ᵀ a(x) M(x) = A.
        let h5 = catalog::heisenberg5();
        let mut a_id = Mat::<f64>::identity(5);
        a_id[(0, 0)] = 2.0;
        a_id[(0, 1)] = 0.3;
        a_id[(1, 0)] = 0.3;
        for x in [
            [0.5, -0.3, 0.8, 0.2, -0.6],
            [1.5, 2.0, -1.0, 0.4, 0.9],
        ] {
            let a = metric_in_coordinates(&h5, &a_id, &x).unwrap();
            let m = frame_matrix(&h5, &x);
            let pulled = m.transpose().matmul(&a).matmul(&m);
            assert!(pulled.sub(&a_id).max_abs() < 1e-10);
        }
    }

    #[test]
    fn left_invariant_vector_norm_is_constant() {
        let f4 = catalog::filiform4();
        let a_id = Mat::<f64>::identity(4);
        let v_e = [0.3, -0.9, 0.4, 0.7];
        let at_origin = norm(&v_e);
        for x in [[0.0; 4], [0.7, -0.4, 0.2, 1.1], [-2.0, 1.0, 0.5, -0.3]] {
            let v = vector_in_coordinates(&f4, &v_e, &x);
            let a = metric_in_coordinates(&f4, &a_id, &x).unwrap();
            let q = a.matvec(&v);
            let sq: f64 = v.iter().zip(&q).map(|(p, r)| p * r).sum();
            assert!((sq.sqrt() - at_origin).abs() < 1e-10);
        }
    }

    #[test]
    fn one_form_pairs_invariantly_with_the_frame() {
        // b(x) applied to the frame column over e_j equals (A X_e)_j
        // everywhere.
        let h3 = catalog::heisenberg3();
        let b_e = [0.0, 0.0, 0.2];
        let x = [0.9, -1.3, 0.4];
        let b = one_form_in_coordinates(&h3, &b_e, &x).unwrap();
        let m = frame_matrix(&h3, &x);
        for j in 0..3 {
            let pair: f64 = b.iter().zip(&m.column(j)).map(|(p, q)| p * q).sum();
            assert!((pair - b_e[j]).abs() < 1e-13);
        }
    }
}
