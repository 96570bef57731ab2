//! Randomized invariants: algebra antisymmetry, chart group laws and frame
//! consistency, fundamental-tensor properties, homogeneity degrees of the
//! curvature pipeline, and flow preservation laws.

use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nilsol::algebra::NilpotentAlgebra;
use nilsol::linalg::{min_eigenvalue, Mat};
use nilsol::randers::{RandersStructure, TangentSample};
use nilsol::{catalog, chart, curvature, flow, randers, riemann, soliton};

fn algebras() -> Vec<NilpotentAlgebra> {
    vec![
        catalog::abelian(3),
        catalog::heisenberg3(),
        catalog::heisenberg5(),
        catalog::filiform4(),
    ]
}

fn drifted_structures() -> Vec<RandersStructure> {
    vec![
        catalog::abelian3_killing(),
        catalog::heisenberg3_killing(),
        catalog::heisenberg5_killing(),
        catalog::filiform4_killing(),
    ]
}

fn slice(v: &[f64], n: usize) -> Vec<f64> {
    v[..n].to_vec()
}

fn vec5() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.8..0.8f64, 5)
}

proptest! {
    #[test]
    fn bracket_is_antisymmetric(u in vec5(), v in vec5()) {
        for alg in algebras() {
            let n = alg.dim();
            let (u, v) = (slice(&u, n), slice(&v, n));
            let uv = alg.bracket(&u, &v);
            let vu = alg.bracket(&v, &u);
            for i in 0..n {
                prop_assert!((uv[i] + vu[i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn group_inverse_cancels(x in vec5()) {
        for alg in algebras() {
            let n = alg.dim();
            let x = slice(&x, n);
            let inv = chart::group_inverse(&x);
            let prod = chart::group_multiply(&alg, &x, &inv);
            for c in prod {
                prop_assert!(c.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn group_multiplication_is_associative(x in vec5(), y in vec5(), z in vec5()) {
        for alg in algebras() {
            let n = alg.dim();
            let (x, y, z) = (slice(&x, n), slice(&y, n), slice(&z, n));
            let left = chart::group_multiply(&alg, &chart::group_multiply(&alg, &x, &y), &z);
            let right = chart::group_multiply(&alg, &x, &chart::group_multiply(&alg, &y, &z));
            for i in 0..n {
                prop_assert!((left[i] - right[i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn randers_norm_is_left_invariant(x in vec5(), y in vec5()) {
        for s in drifted_structures() {
            let n = s.dim();
            let (x, y_e) = (slice(&x, n), slice(&y, n));
            prop_assume!(nilsol::linalg::norm(&y_e) > 0.2);
            let at_identity = randers::norm_at(&s, &vec![0.0; n], &y_e).unwrap();
            let pushed = chart::frame_matrix(s.algebra(), &x).matvec(&y_e);
            let at_x = randers::norm_at(&s, &x, &pushed).unwrap();
            prop_assert!((at_identity - at_x).abs() <= 1e-10);
        }
    }

    #[test]
    fn fundamental_tensor_is_spd_symmetric_and_zero_homogeneous(
        x in vec5(),
        y in vec5(),
    ) {
        for s in drifted_structures() {
            let n = s.dim();
            let (x, y) = (slice(&x, n), slice(&y, n));
            prop_assume!(nilsol::linalg::norm(&y) > 0.2);
            let g = randers::fundamental_tensor(&s, &TangentSample::new(x.clone(), y.clone()).unwrap()).unwrap();
            prop_assert!(g.is_symmetric(1e-12));
            prop_assert!(min_eigenvalue(&g) > 0.0);
            for lambda in [0.5, 2.0, 10.0] {
                let ys: Vec<f64> = y.iter().map(|c| c * lambda).collect();
                let gs = randers::fundamental_tensor(&s, &TangentSample::new(x.clone(), ys).unwrap()).unwrap();
                prop_assert!(gs.sub(&g).max_abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn berwald_implies_douglas(drift in prop::collection::vec(-0.3..0.3f64, 5)) {
        for alg in algebras() {
            let n = alg.dim();
            let s = RandersStructure::new(alg.clone(), Mat::identity(n), slice(&drift, n));
            let s = match s {
                Ok(s) => s,
                Err(_) => continue,
            };
            let berwald = soliton::berwald_check(&s).unwrap();
            let douglas = soliton::douglas_check(&s);
            if berwald.is_berwald {
                prop_assert!(douglas.is_douglas);
            }
        }
    }
}

/// Frame columns are the derivatives of right multiplication at the identity;
/// checked against central differences of the group product.
#[test]
fn frame_matrix_matches_difference_quotients_of_multiplication() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for alg in algebras() {
        let n = alg.dim();
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| r.gen_range(-0.7..0.7)).collect();
            let m = chart::frame_matrix(&alg, &x);
            let h = 1e-5;
            for j in 0..n {
                let mut step = vec![0.0; n];
                step[j] = h;
                let up = chart::group_multiply(&alg, &x, &step);
                step[j] = -h;
                let dn = chart::group_multiply(&alg, &x, &step);
                for i in 0..n {
                    let fd = (up[i] - dn[i]) / (2.0 * h);
                    assert!(
                        (m[(i, j)] - fd).abs() <= 1e-7,
                        "frame entry ({i},{j}) vs quotient: {} vs {fd}",
                        m[(i, j)]
                    );
                }
            }
        }
    }
}

/// The coordinate fundamental tensor pulled back through the frame equals
/// the identity-direction tensor.
#[test]
fn fundamental_tensor_is_frame_invariant() {
    let mut r = ChaCha8Rng::seed_from_u64(13);
    for s in drifted_structures() {
        let n = s.dim();
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| r.gen_range(-0.7..0.7)).collect();
            let mut y_e: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
            if nilsol::linalg::norm(&y_e) < 0.3 {
                y_e[0] += 1.0;
            }
            let g_e = randers::fundamental_tensor(&s, &TangentSample::at_origin(y_e.clone()).unwrap()).unwrap();
            let m = chart::frame_matrix(s.algebra(), &x);
            let pushed = m.matvec(&y_e);
            let g_x = randers::fundamental_tensor(&s, &TangentSample::new(x, pushed).unwrap()).unwrap();
            let pulled = m.transpose().matmul(&g_x).matmul(&m);
            assert!(pulled.sub(&g_e).max_abs() <= 1e-8);
        }
    }
}

/// Homogeneity degrees in y of the curvature pipeline: F is 1, g is 0, the
/// Cartan tensor is -1, the spray is 2, the nonlinear connection is 1, the
/// Chern coefficients are 0, the Riemann operator is 2, the Ricci scalar 2.
#[test]
fn curvature_pipeline_has_the_stated_homogeneity_degrees() {
    let mut r = ChaCha8Rng::seed_from_u64(17);
    let max3 = |t: &Vec<Vec<Vec<f64>>>| -> f64 {
        t.iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    };
    for s in drifted_structures() {
        let n = s.dim();
        for _ in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| r.gen_range(-0.6..0.6)).collect();
            let mut y: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
            if nilsol::linalg::norm(&y) < 0.3 {
                y[0] += 1.0;
            }
            let base = TangentSample::new(x.clone(), y.clone()).unwrap();
            for lambda in [0.5f64, 3.0] {
                let ys: Vec<f64> = y.iter().map(|c| c * lambda).collect();
                let scaled = TangentSample::new(x.clone(), ys).unwrap();

                let f0 = randers::randers_norm(&s, &base).unwrap();
                let f1 = randers::randers_norm(&s, &scaled).unwrap();
                assert!((f1 - lambda * f0).abs() <= 1e-9 * f0.abs().max(1.0));

                let g0 = randers::fundamental_tensor(&s, &base).unwrap();
                let g1 = randers::fundamental_tensor(&s, &scaled).unwrap();
                assert!(g1.sub(&g0).max_abs() <= 1e-9);

                let c0 = randers::cartan_tensor(&s, &base).unwrap();
                let c1 = randers::cartan_tensor(&s, &scaled).unwrap();
                let mut worst = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            worst = worst.max((c1[i][j][k] - c0[i][j][k] / lambda).abs());
                        }
                    }
                }
                assert!(worst <= 1e-9 * (1.0 + max3(&c0)));

                let s0 = curvature::spray(&s, &base).unwrap();
                let s1 = curvature::spray(&s, &scaled).unwrap();
                for i in 0..n {
                    assert!((s1[i] - lambda * lambda * s0[i]).abs() <= 1e-8 * (1.0 + s0[i].abs()));
                }

                let n0 = curvature::nonlinear_connection(&s, &base).unwrap();
                let n1 = curvature::nonlinear_connection(&s, &scaled).unwrap();
                assert!(n1.sub(&n0.scale(lambda)).max_abs() <= 1e-8 * (1.0 + n0.max_abs()));

                let ch0 = curvature::chern_connection(&s, &base).unwrap();
                let ch1 = curvature::chern_connection(&s, &scaled).unwrap();
                let mut worst = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            worst = worst.max((ch1[i][j][k] - ch0[i][j][k]).abs());
                        }
                    }
                }
                assert!(worst <= 1e-8 * (1.0 + max3(&ch0)));

                let r0 = curvature::riemann_operator(&s, &base).unwrap();
                let r1 = curvature::riemann_operator(&s, &scaled).unwrap();
                assert!(
                    r1.sub(&r0.scale(lambda * lambda)).max_abs()
                        <= 1e-8 * (1.0 + r0.max_abs())
                );

                let ric0 = curvature::ricci_scalar(&s, &base).unwrap();
                let ric1 = curvature::ricci_scalar(&s, &scaled).unwrap();
                assert!((ric1 - lambda * lambda * ric0).abs() <= 1e-8 * (1.0 + ric0.abs()));
            }
        }
    }
}

/// Chern coefficients are symmetric in the lower pair.
#[test]
fn chern_connection_is_torsion_free() {
    let mut r = ChaCha8Rng::seed_from_u64(19);
    for s in drifted_structures() {
        let n = s.dim();
        for _ in 0..10 {
            let x: Vec<f64> = (0..n).map(|_| r.gen_range(-0.6..0.6)).collect();
            let mut y: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
            if nilsol::linalg::norm(&y) < 0.3 {
                y[0] += 1.0;
            }
            let ch = curvature::chern_connection(&s, &TangentSample::new(x, y).unwrap()).unwrap();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        assert!((ch[i][j][k] - ch[i][k][j]).abs() <= 1e-10);
                    }
                }
            }
        }
    }
}

/// The normalized right side differs from the unnormalized one by the
/// volume-preserving rescaling term (2 sc / n) A at t = 0.
#[test]
fn normalized_rhs_is_the_rescaled_unnormalized_rhs() {
    let mut r = ChaCha8Rng::seed_from_u64(23);
    for alg in algebras() {
        let n = alg.dim();
        for _ in 0..5 {
            let mut a = Mat::identity(n);
            for i in 0..n {
                a[(i, i)] = r.gen_range(0.5..2.0);
            }
            let off = r.gen_range(-0.2..0.2);
            a[(0, 1)] = off;
            a[(1, 0)] = off;
            let unnorm = flow::flow_rhs(&alg, &a, flow::FlowKind::Unnormalized).unwrap();
            let norm = flow::flow_rhs(&alg, &a, flow::FlowKind::Normalized).unwrap();
            let sc = riemann::scalar_curvature(&alg, &a).unwrap();
            let expected = unnorm.add(&a.scale(2.0 * sc / n as f64));
            assert!(norm.sub(&expected).max_abs() <= 1e-12);
        }
    }
}

/// Integrated trajectories stay symmetric positive definite at every stored
/// step, on the whole catalog.
#[test]
fn flow_preserves_positivity_along_the_catalog() {
    for alg in algebras() {
        let n = alg.dim();
        for kind in [flow::FlowKind::Unnormalized, flow::FlowKind::Normalized] {
            let traj = flow::integrate(
                &alg,
                &Mat::identity(n),
                kind,
                0.5,
                &flow::StepControl::default(),
            )
            .unwrap();
            assert!(!traj.blow_up);
            for m in &traj.metrics {
                assert!(m.is_symmetric(1e-12));
                assert!(min_eigenvalue(m) > 0.0);
            }
        }
    }
}

/// The Riemannian refit of the Heisenberg metric solves the algebraic
/// soliton equation to 1e-10.
#[test]
fn heisenberg_ricci_satisfies_the_algebraic_soliton_equation() {
    let fit = soliton::riemannian_soliton_refit(&catalog::heisenberg3(), &Mat::identity(3)).unwrap();
    assert!(fit.residual <= 1e-10);
}
