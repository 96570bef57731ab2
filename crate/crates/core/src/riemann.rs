//! Riemannian geometry of a left-invariant metric, computed algebraically
//! at the identity through the Koszul formula. When the drift vanishes the
//! Finsler pipeline must reduce to these values, which makes this module
//! the reference the curvature code is tested against.

use crate::algebra::NilpotentAlgebra;
use crate::chart;
use crate::error::{Error, Result};
use crate::linalg::{check_spd, Mat};
use crate::scalar::Jet;

/// Connection table on left-invariant fields: `nabla[i][j]` holds the
/// coefficients of the covariant derivative of `e_j` along `e_i`.
#[derive(Clone, Debug)]
pub struct LeviCivita {
    pub nabla: Vec<Vec<Vec<f64>>>,
}

impl LeviCivita {
    /// Covariant derivative of a constant-coefficient (left-invariant)
    /// field `w` along `u`, both given at the identity.
    pub fn derive(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        let n = u.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if w[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += u[i] * w[j] * self.nabla[i][j][k];
                }
            }
        }
        out
    }
}

/// Solve the Koszul identity on the basis:
/// `2 A(nabla_i e_j, e_k) = A([e_i,e_j], e_k) - A([e_j,e_k], e_i) + A([e_k,e_i], e_j)`.
/// Derivative terms drop out because all fields are left-invariant.
pub fn levi_civita(alg: &NilpotentAlgebra, a: &Mat<f64>) -> Result<LeviCivita> {
    let n = alg.dim();
    if a.rows != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.rows,
        });
    }
    check_spd(a, 1e-12)?;
    let e = Mat::<f64>::identity(n);
    let ip = |u: &[f64], v: &[f64]| -> f64 { crate::linalg::dot(u, &a.matvec(&v.to_vec())) };
    let mut nabla = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut rhs = vec![0.0; n];
            for k in 0..n {
                let t1 = ip(&alg.bracket(&e.column(i), &e.column(j)), &e.column(k));
                let t2 = ip(&alg.bracket(&e.column(j), &e.column(k)), &e.column(i));
                let t3 = ip(&alg.bracket(&e.column(k), &e.column(i)), &e.column(j));
                rhs[k] = 0.5 * (t1 - t2 + t3);
            }
            nabla[i][j] = a.solve_vec(&rhs).ok_or(Error::SingularMatrix)?;
        }
    }
    Ok(LeviCivita { nabla })
}

/// Curvature `R(u,v)w = nabla_u nabla_v w - nabla_v nabla_u w - nabla_{[u,v]} w`
/// on left-invariant fields.
pub fn curvature_frame(
    table: &LeviCivita,
    alg: &NilpotentAlgebra,
    u: &[f64],
    v: &[f64],
    w: &[f64],
) -> Vec<f64> {
    let nvw = table.derive(v, w);
    let nuw = table.derive(u, w);
    let t1 = table.derive(u, &nvw);
    let t2 = table.derive(v, &nuw);
    let t3 = table.derive(&alg.bracket(u, v), w);
    t1.iter()
        .zip(&t2)
        .zip(&t3)
        .map(|((a, b), c)| a - b - c)
        .collect()
}

/// Sectional curvature of the plane spanned by `u` and `v`.
pub fn sectional_curvature(
    alg: &NilpotentAlgebra,
    a: &Mat<f64>,
    u: &[f64],
    v: &[f64],
) -> Result<f64> {
    let table = levi_civita(alg, a)?;
    let ip = |p: &[f64], q: &[f64]| crate::linalg::dot(p, &a.matvec(&q.to_vec()));
    let denom = ip(u, u) * ip(v, v) - ip(u, v) * ip(u, v);
    if denom <= 1e-14 * ip(u, u) * ip(v, v) {
        return Err(Error::DegenerateFlag);
    }
    let ruvv = curvature_frame(&table, alg, u, v, v);
    Ok(ip(&ruvv, u) / denom)
}

/// Ricci form at the identity: `ric(u, v) = tr(w -> R(w, u) v)`, realized
/// as a sum over an A-orthonormal basis.
pub fn ricci(alg: &NilpotentAlgebra, a: &Mat<f64>) -> Result<Mat<f64>> {
    let n = alg.dim();
    let table = levi_civita(alg, a)?;
    let basis = orthonormal_basis(a);
    let e = Mat::<f64>::identity(n);
    let ip = |p: &[f64], q: &[f64]| crate::linalg::dot(p, &a.matvec(&q.to_vec()));
    let mut ric = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                let b = basis.column(k);
                let r = curvature_frame(&table, alg, &b, &e.column(i), &e.column(j));
                acc += ip(&r, &b);
            }
            ric[(i, j)] = acc;
        }
    }
    Ok(ric.symmetrized())
}

/// Scalar curvature: trace of the Ricci endomorphism `A^{-1} ric`.
pub fn scalar_curvature(alg: &NilpotentAlgebra, a: &Mat<f64>) -> Result<f64> {
    let ric = ricci(alg, a)?;
    let endo = a.solve(&ric).ok_or(Error::SingularMatrix)?;
    Ok((0..alg.dim()).map(|i| endo[(i, i)]).sum())
}

/// A-orthonormal basis via Gram-Schmidt on the standard basis.
fn orthonormal_basis(a: &Mat<f64>) -> Mat<f64> {
    let n = a.rows;
    let ip = |p: &[f64], q: &[f64]| crate::linalg::dot(p, &a.matvec(&q.to_vec()));
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = vec![0.0; n];
        v[j] = 1.0;
        for b in &cols {
            let c = ip(&v, b);
            for i in 0..n {
                v[i] -= c * b[i];
            }
        }
        let s = ip(&v, &v).sqrt();
        for x in &mut v {
            *x /= s;
        }
        cols.push(v);
    }
    Mat::from_fn(n, n, |i, j| cols[j][i])
}

/// Whether the left-invariant field with identity value `x` is Killing:
/// `ad_x` must be skew-adjoint for `A`. Returns the worst violation of
/// `A([x,u], v) + A(u, [x,v]) = 0` over basis pairs alongside the verdict.
pub fn is_killing_left_invariant(
    alg: &NilpotentAlgebra,
    a: &Mat<f64>,
    x: &[f64],
) -> (bool, f64) {
    let ad = alg.ad_matrix(x);
    // A ad_x + ad_xᵀ A sums the two pairings.
    let s = a.matmul(&ad).add(&ad.transpose().matmul(a));
    let residual = s.max_abs();
    (residual <= 1e-10, residual)
}

/// Coordinate Christoffel symbols of the left-invariant metric at `x`,
/// obtained by pushing the connection table through the frame:
/// with `W = M^{-1}`, `Gamma(x)^._{ij} = M (d_i W e_j + W e_i ⨂ W e_j : nabla)`.
/// Independent of the Finsler code path; used as its zero-drift oracle.
pub fn coordinate_christoffel(
    alg: &NilpotentAlgebra,
    a: &Mat<f64>,
    x: &[f64],
) -> Result<Vec<Vec<Vec<f64>>>> {
    let n = alg.dim();
    let table = levi_civita(alg, a)?;
    let m = chart::frame_matrix(alg, x);
    let w = chart::frame_inverse(alg, x)?;
    // dW along each coordinate direction from a jet pass: W' = -W M' W.
    let xj: Vec<Jet<f64>> = (0..n).map(|i| Jet::seeded(x[i], n, i)).collect();
    let mj = chart::frame_matrix(alg, &xj);
    let mut dw = Vec::with_capacity(n);
    for dir in 0..n {
        let dm = Mat::from_fn(n, n, |r, c| mj[(r, c)].grad(dir));
        dw.push(w.matmul(&dm).matmul(&w).scale(-1.0));
    }
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            // Frame coefficients of nabla_{d_i} d_j, then push forward.
            let mut coeff = dw[i].column(j);
            let (wi, wj) = (w.column(i), w.column(j));
            for a_idx in 0..n {
                for b_idx in 0..n {
                    let f = wi[a_idx] * wj[b_idx];
                    if f == 0.0 {
                        continue;
                    }
                    for c in 0..n {
                        coeff[c] += f * table.nabla[a_idx][b_idx][c];
                    }
                }
            }
            let pushed = m.matvec(&coeff);
            for k in 0..n {
                gamma[k][i][j] = pushed[k];
            }
        }
    }
    Ok(gamma)
}

/// Ricci form of the coordinate metric at `x`; the frame pullback of the
/// identity Ricci form, `W^T ric W`.
pub fn coordinate_ricci(alg: &NilpotentAlgebra, a: &Mat<f64>, x: &[f64]) -> Result<Mat<f64>> {
    let ric = ricci(alg, a)?;
    let w = chart::frame_inverse(alg, x)?;
    Ok(w.transpose().matmul(&ric).matmul(&w))
}

/// Riemann operator `u ↦ R(u, y)y` in chart coordinates at `(x, y)`:
/// columns are `M · R_frame(W e_k, W y, W y)`.
pub fn coordinate_riemann_operator(
    alg: &NilpotentAlgebra,
    a: &Mat<f64>,
    x: &[f64],
    y: &[f64],
) -> Result<Mat<f64>> {
    let n = alg.dim();
    let table = levi_civita(alg, a)?;
    let m = chart::frame_matrix(alg, x);
    let w = chart::frame_inverse(alg, x)?;
    let y_frame = w.matvec(&y.to_vec());
    let mut out = Mat::zeros(n, n);
    for k in 0..n {
        let u_frame = w.column(k);
        let r_frame = curvature_frame(&table, alg, &u_frame, &y_frame, &y_frame);
        let pushed = m.matvec(&r_frame);
        for i in 0..n {
            out[(i, k)] = pushed[i];
        }
    }
    Ok(out)
}

/// Sectional curvature of the coordinate plane spanned by `y` and `u` at
/// `x`; frame invariance makes it the identity sectional curvature of the
/// pulled-back plane.
pub fn coordinate_sectional(
    alg: &NilpotentAlgebra,
    a: &Mat<f64>,
    x: &[f64],
    y: &[f64],
    u: &[f64],
) -> Result<f64> {
    let w = chart::frame_inverse(alg, x)?;
    sectional_curvature(alg, a, &w.matvec(&y.to_vec()), &w.matvec(&u.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn h3_table() -> (NilpotentAlgebra, Mat<f64>, LeviCivita) {
        let alg = catalog::heisenberg3();
        let a = Mat::<f64>::identity(3);
        let t = levi_civita(&alg, &a).unwrap();
        (alg, a, t)
    }

    #[test]
    fn heisenberg_connection_table_golden_values() {
        let (_, _, t) = h3_table();
        assert_eq!(t.nabla[0][1], vec![0.0, 0.0, 0.5]);
        assert_eq!(t.nabla[0][2], vec![0.0, -0.5, 0.0]);
        assert_eq!(t.nabla[1][2], vec![0.5, 0.0, 0.0]);
        assert_eq!(t.nabla[0][0], vec![0.0, 0.0, 0.0]);
        assert_eq!(t.nabla[2][2], vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn connection_is_torsion_free_and_metric() {
        let f4 = catalog::filiform4();
        let mut a = Mat::<f64>::identity(4);
        a[(0, 0)] = 2.0;
        a[(2, 3)] = 0.25;
        a[(3, 2)] = 0.25;
        let t = levi_civita(&f4, &a).unwrap();
        let n = 4;
        let e = Mat::<f64>::identity(n);
        let ip = |p: &[f64], q: &[f64]| crate::linalg::dot(p, &a.matvec(&q.to_vec()));
        for i in 0..n {
            for j in 0..n {
                // Torsion: nabla_i e_j - nabla_j e_i = [e_i, e_j].
                let br = f4.bracket(&e.column(i), &e.column(j));
                for k in 0..n {
                    let tors = t.nabla[i][j][k] - t.nabla[j][i][k] - br[k];
                    assert!(tors.abs() < 1e-12);
                }
                // Metric: A(nabla_k e_i, e_j) + A(e_i, nabla_k e_j) = 0,
                // since A(e_i, e_j) is constant on the group.
                for k in 0..n {
                    let s = ip(&t.nabla[k][i], &e.column(j)) + ip(&e.column(i), &t.nabla[k][j]);
                    assert!(s.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn heisenberg_sectional_curvatures() {
        let (alg, a, _) = h3_table();
        let e = Mat::<f64>::identity(3);
        let k12 = sectional_curvature(&alg, &a, &e.column(0), &e.column(1)).unwrap();
        let k13 = sectional_curvature(&alg, &a, &e.column(0), &e.column(2)).unwrap();
        let k23 = sectional_curvature(&alg, &a, &e.column(1), &e.column(2)).unwrap();
        assert!((k12 - (-0.75)).abs() < 1e-13);
        assert!((k13 - 0.25).abs() < 1e-13);
        assert!((k23 - 0.25).abs() < 1e-13);
    }

    #[test]
    fn degenerate_plane_is_rejected() {
        let (alg, a, _) = h3_table();
        let u = [1.0, 2.0, 0.0];
        let v = [2.0, 4.0, 0.0];
        assert!(matches!(
            sectional_curvature(&alg, &a, &u, &v),
            Err(Error::DegenerateFlag)
        ));
    }

    #[test]
    fn heisenberg_ricci_and_scalar_curvature() {
        let (alg, a, _) = h3_table();
        let ric = ricci(&alg, &a).unwrap();
        let expect = [-0.5, -0.5, 0.5];
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { expect[i] } else { 0.0 };
                assert!((ric[(i, j)] - want).abs() < 1e-13);
            }
        }
        let sc = scalar_curvature(&alg, &a).unwrap();
        assert!((sc - (-0.5)).abs() < 1e-13);
    }

    #[test]
    fn abelian_metric_is_flat() {
        let alg = catalog::abelian(4);
        let mut a = Mat::<f64>::identity(4);
        a[(1, 1)] = 3.0;
        a[(0, 2)] = 0.4;
        a[(2, 0)] = 0.4;
        let ric = ricci(&alg, &a).unwrap();
        assert!(ric.max_abs() < 1e-14);
    }

    #[test]
    fn killing_criterion_separates_center_from_the_rest()  {
        let alg = catalog::heisenberg3();
        let a = Mat::<f64>::identity(3);
        let (ok, res) = is_killing_left_invariant(&alg, &a, &[0.0, 0.0, 0.2]);
        assert!(ok);
        assert!(res < 1e-15);
        let (ok, res) = is_killing_left_invariant(&alg, &a, &[0.2, 0.0, 0.0]);
        assert!(!ok);
        assert!((res - 0.2).abs() < 1e-15);
    }

    #[test]
    fn coordinate_christoffel_is_symmetric_and_flat_for_abelian() {
        let alg = catalog::abelian(3);
        let a = Mat::<f64>::identity(3);
        let g = coordinate_christoffel(&alg, &a, &[0.4, -0.2, 0.9]).unwrap();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert!(g[k][i][j].abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn coordinate_christoffel_matches_finite_differences_of_the_metric() {
        // Direct check of 2 a_ks Gamma^s_ij = d_i a_kj + d_j a_ki - d_k a_ij
        // with metric derivatives from central differences.
        let alg = catalog::filiform4();
        let a_id = Mat::<f64>::identity(4);
        let x = [0.3, -0.6, 0.2, 0.5];
        let gamma = coordinate_christoffel(&alg, &a_id, &x).unwrap();
        let n = 4;
        let h = 1e-5;
        let a_at = |x: &[f64]| chart::metric_in_coordinates(&alg, &a_id, x).unwrap();
        let mut da = Vec::new();
        for d in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[d] += h;
            xm[d] -= h;
            da.push(a_at(&xp).sub(&a_at(&xm)).scale(0.5 / h));
        }
        let a0 = a_at(&x);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut lhs = 0.0;
                    for s in 0..n {
                        lhs += 2.0 * a0[(k, s)] * gamma[s][i][j];
                    }
                    let rhs = da[i][(k, j)] + da[j][(k, i)] - da[k][(i, j)];
                    assert!((lhs - rhs).abs() < 1e-8, "k={k} i={i} j={j}");
                }
            }
        }
    }
}
