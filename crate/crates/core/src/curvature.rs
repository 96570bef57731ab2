//! Connection and curvature pipeline for a Randers structure: Christoffel
//! symbols, geodesic spray, nonlinear connection, Chern coefficients,
//! Riemann operator, flag curvature, Ricci scalar, Akbar-Zadeh tensor and
//! the (1,1) Ricci operator.
//!
//! Everything is built from jet evaluations of the spray. The Riemann
//! operator uses the spray-curvature formula
//! `R^i_k = 2 G^i_{x^k} - y^j G^i_{x^j y^k} + 2 G^j G^i_{y^j y^k} - G^i_{y^j} G^j_{y^k}`,
//! which needs only derivatives of `G` and reduces to the Riemannian
//! curvature when the drift vanishes; the zero-drift tests pin the
//! conventions against the Koszul-formula oracle.

use crate::error::{Error, Result};
use crate::linalg::{lstsq_min_norm, Mat};
use crate::randers::{RandersStructure, SampleJet, TangentSample};
use crate::scalar::{Dual, Jet, Scalar};

/// x-seeded and y-seeded jets of combined width 2n: directions `0..n`
/// displace the base point, `n..2n` displace the tangent vector.
fn seeded_phase_space<S: Scalar>(n: usize, y: &[S]) -> (Vec<Jet<S>>, Vec<Jet<S>>) {
    let xi = (0..n).map(|i| Jet::seeded(S::zero(), 2 * n, i)).collect();
    let yj = y
        .iter()
        .enumerate()
        .map(|(i, v)| Jet::seeded(v.clone(), 2 * n, n + i))
        .collect();
    (xi, yj)
}

/// Riemann operator at generic scalar tangent data, from one jet pass
/// through the spray.
fn riemann_operator_from<S: Scalar>(jet: &SampleJet, y: &[S]) -> Result<Mat<S>> {
    let n = jet.dim();
    let (xi, yj) = seeded_phase_space(n, y);
    let g = jet.spray(&xi, &yj)?;
    Ok(Mat::from_fn(n, n, |i, k| {
        let mut acc = S::from_f64(2.0) * g[i].grad(k);
        for j in 0..n {
            acc = acc - y[j].clone() * g[i].hess(j, n + k)
                + S::from_f64(2.0) * g[j].v.clone() * g[i].hess(n + j, n + k)
                - g[i].grad(n + j) * g[j].grad(n + k);
        }
        acc
    }))
}

fn ricci_scalar_from<S: Scalar>(jet: &SampleJet, y: &[S]) -> Result<S> {
    let r = riemann_operator_from(jet, y)?;
    let mut tr = S::zero();
    for i in 0..jet.dim() {
        tr = tr + r[(i, i)].clone();
    }
    Ok(tr)
}

/// Metric x-derivatives at the sample: `(g, dg/dx^k for each k)`.
fn metric_with_x_derivatives(jet: &SampleJet, y: &[f64]) -> (Mat<f64>, Vec<Mat<f64>>) {
    let n = jet.dim();
    let xi: Vec<Jet<f64>> = (0..n).map(|i| Jet::seeded(0.0, n, i)).collect();
    let yj: Vec<Jet<f64>> = y.iter().map(|&v| Jet::constant(v)).collect();
    let gj = jet.fundamental(&xi, &yj);
    let g = Mat::from_fn(n, n, |i, j| gj[(i, j)].v);
    let dg = (0..n)
        .map(|k| Mat::from_fn(n, n, |i, j| gj[(i, j)].grad(k)))
        .collect();
    (g, dg)
}

/// Cartan coefficients with lowered indices at the sample, from the
/// y-gradient of the fundamental tensor.
fn cartan_lowered(jet: &SampleJet, y: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let n = jet.dim();
    let xi: Vec<Jet<f64>> = vec![Jet::constant(0.0); n];
    let yj: Vec<Jet<f64>> = y
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::seeded(v, n, i))
        .collect();
    let gj = jet.fundamental(&xi, &yj);
    let mut c = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                c[i][j][k] = 0.5 * gj[(i, j)].grad(k);
            }
        }
    }
    c
}

fn gamma_from(jet: &SampleJet, y: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    let n = jet.dim();
    let (g, dg) = metric_with_x_derivatives(jet, y);
    let ginv = g.inverse().ok_or(Error::SingularMatrix)?;
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for s in 0..n {
                    acc += ginv[(i, s)]
                        * (dg[k][(s, j)] - dg[s][(j, k)] + dg[j][(k, s)]);
                }
                gamma[i][j][k] = 0.5 * acc;
            }
        }
    }
    Ok(gamma)
}

fn nonlinear_from(
    jet: &SampleJet,
    y: &[f64],
    gamma: &[Vec<Vec<f64>>],
) -> Result<Mat<f64>> {
    let n = jet.dim();
    let (g, _) = metric_with_x_derivatives(jet, y);
    let ginv = g.inverse().ok_or(Error::SingularMatrix)?;
    let c = cartan_lowered(jet, y);
    // gamma contracted twice with y.
    let mut gyy = vec![0.0; n];
    for m in 0..n {
        for r in 0..n {
            for s in 0..n {
                gyy[m] += gamma[m][r][s] * y[r] * y[s];
            }
        }
    }
    Ok(Mat::from_fn(n, n, |i, j| {
        let mut acc = 0.0;
        for k in 0..n {
            acc += gamma[i][j][k] * y[k];
        }
        for s in 0..n {
            for m in 0..n {
                acc -= ginv[(i, s)] * c[s][j][m] * gyy[m];
            }
        }
        acc
    }))
}

/// Formal Christoffel symbols of the second kind,
/// `γ^i_{jk} = ½ g^{is}(∂g_sj/∂x^k − ∂g_jk/∂x^s + ∂g_ks/∂x^j)`.
pub fn christoffel_gamma(
    s: &RandersStructure,
    sample: &TangentSample,
) -> Result<Vec<Vec<Vec<f64>>>> {
    sample.check_dim(s)?;
    let jet = SampleJet::build(s, &sample.x)?;
    gamma_from(&jet, &sample.y)
}

/// Geodesic spray coefficients `G^i`.
pub fn spray(s: &RandersStructure, sample: &TangentSample) -> Result<Vec<f64>> {
    sample.check_dim(s)?;
    let jet = SampleJet::build(s, &sample.x)?;
    let xi = vec![0.0; s.dim()];
    jet.spray(&xi, &sample.y)
}

/// Nonlinear connection `N^i_j = γ^i_{jk} y^k − C^i_{jk} γ^k_{rs} y^r y^s`.
pub fn nonlinear_connection(s: &RandersStructure, sample: &TangentSample) -> Result<Mat<f64>> {
    sample.check_dim(s)?;
    let jet = SampleJet::build(s, &sample.x)?;
    let gamma = gamma_from(&jet, &sample.y)?;
    nonlinear_from(&jet, &sample.y, &gamma)
}

/// Chern connection coefficients via horizontal derivatives
/// `δ/δx^j = ∂/∂x^j − N^l_j ∂/∂y^l`.
pub fn chern_connection(
    s: &RandersStructure,
    sample: &TangentSample,
) -> Result<Vec<Vec<Vec<f64>>>> {
    sample.check_dim(s)?;
    let jet = SampleJet::build(s, &sample.x)?;
    let n = s.dim();
    let y = &sample.y;
    let gamma = gamma_from(&jet, y)?;
    let nc = nonlinear_from(&jet, y, &gamma)?;
    let (g, dg) = metric_with_x_derivatives(&jet, y);
    let ginv = g.inverse().ok_or(Error::SingularMatrix)?;
    let c = cartan_lowered(&jet, y);
    // delta[k][(s,j)] = horizontal x^k-derivative of g_sj; the y-term is
    // 2 C_sjl N^l_k.
    let hder = |k: usize, sidx: usize, j: usize| -> f64 {
        let mut acc = dg[k][(sidx, j)];
        for l in 0..n {
            acc -= 2.0 * c[sidx][j][l] * nc[(l, k)];
        }
        acc
    };
    let mut chern = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for sx in 0..n {
                    acc += ginv[(i, sx)] * (hder(k, sx, j) + hder(j, sx, k) - hder(sx, j, k));
                }
                chern[i][j][k] = 0.5 * acc;
            }
        }
    }
    Ok(chern)
}

/// Riemann operator `R_(x,y)` acting on tangent vectors.
pub fn riemann_operator(s: &RandersStructure, sample: &TangentSample) -> Result<Mat<f64>> {
    sample.check_dim(s)?;
    let jet = SampleJet::build(s, &sample.x)?;
    riemann_operator_from(&jet, &sample.y)
}

/// Flag curvature of the flag with pole `y` and transverse edge `u`:
/// `K = g(R u, u) / (g(y,y) g(u,u) − g(y,u)²)`.
pub fn flag_curvature(s: &RandersStructure, sample: &TangentSample, u: &[f64]) -> Result<f64> {
    sample.check_dim(s)?;
    if u.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: u.len(),
        });
    }
    let jet = SampleJet::build(s, &sample.x)?;
    let xi = vec![0.0; s.dim()];
    let g = jet.fundamental(&xi, &sample.y);
    let r = riemann_operator_from(&jet, &sample.y)?;
    let ip = |p: &[f64], q: &[f64]| crate::linalg::dot(p, &g.matvec(&q.to_vec()));
    let (yy, uu, yu) = (ip(&sample.y, &sample.y), ip(u, u), ip(&sample.y, u));
    let denom = yy * uu - yu * yu;
    if denom <= 1e-14 * yy * uu {
        return Err(Error::DegenerateFlag);
    }
    let ru = r.matvec(&u.to_vec());
    Ok(ip(&ru, u) / denom)
}

/// Ricci scalar as the trace of the Riemann operator.
pub fn ricci_scalar(s: &RandersStructure, sample: &TangentSample) -> Result<f64> {
    sample.check_dim(s)?;
    let jet = SampleJet::build(s, &sample.x)?;
    ricci_scalar_from(&jet, &sample.y)
}

/// Ricci scalar as `F² Σ K(flag_i)` over a g-orthonormal completion of the
/// pole `y/F`; cross-oracle for the trace form. Gram-Schmidt pivots on the
/// largest remaining g-norm, with the pole handled first.
pub fn ricci_scalar_flag_sum(s: &RandersStructure, sample: &TangentSample) -> Result<f64> {
    sample.check_dim(s)?;
    let n = s.dim();
    let jet = SampleJet::build(s, &sample.x)?;
    let xi = vec![0.0; n];
    let g = jet.fundamental(&xi, &sample.y);
    let r = riemann_operator_from(&jet, &sample.y)?;
    let ip = |p: &[f64], q: &[f64]| crate::linalg::dot(p, &g.matvec(&q.to_vec()));
    let f2 = ip(&sample.y, &sample.y);
    // g(y, y) = F² makes y/F the unit pole.
    let f = f2.sqrt();
    let pole: Vec<f64> = sample.y.iter().map(|v| v / f).collect();
    let mut basis = vec![pole];
    let mut cands: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    while basis.len() < n {
        // Orthogonalize every remaining candidate, keep the longest.
        let mut best: Option<(usize, Vec<f64>, f64)> = None;
        for (idx, cand) in cands.iter().enumerate() {
            let mut v = cand.clone();
            for b in &basis {
                let c = ip(&v, b);
                for i in 0..n {
                    v[i] -= c * b[i];
                }
            }
            let len = ip(&v, &v);
            if best.as_ref().is_none_or(|(_, _, l)| len > *l) {
                best = Some((idx, v, len));
            }
        }
        let (idx, v, len) = best.expect("candidate set cannot be empty");
        let s = len.sqrt();
        basis.push(v.into_iter().map(|x| x / s).collect());
        cands.remove(idx);
    }
    let mut acc = 0.0;
    for u in &basis[1..] {
        // Unit u orthogonal to the pole: the flag denominator is F².
        let ru = r.matvec(&u.to_vec());
        let k = ip(&ru, u) / f2;
        acc += k;
    }
    Ok(f2 * acc)
}

/// Akbar-Zadeh Ricci tensor, half the y-Hessian of the Ricci scalar. Each
/// entry comes from one nested-dual evaluation; symmetry of mixed partials
/// lets the loop run over ordered pairs only.
pub fn akbar_zadeh(s: &RandersStructure, sample: &TangentSample) -> Result<Mat<f64>> {
    sample.check_dim(s)?;
    let jet = SampleJet::build(s, &sample.x)?;
    akbar_zadeh_from(&jet, &sample.y)
}

pub(crate) fn akbar_zadeh_from(jet: &SampleJet, y: &[f64]) -> Result<Mat<f64>> {
    let n = jet.dim();
    let mut ric_f = Mat::zeros(n, n);
    for p in 0..n {
        for q in p..n {
            let yh: Vec<Dual<Dual<f64>>> = (0..n)
                .map(|i| Dual {
                    v: Dual {
                        v: y[i],
                        d: if i == q { 1.0 } else { 0.0 },
                    },
                    d: Dual {
                        v: if i == p { 1.0 } else { 0.0 },
                        d: 0.0,
                    },
                })
                .collect();
            let r = ricci_scalar_from(jet, &yh)?;
            let val = 0.5 * r.d.d;
            ric_f[(p, q)] = val;
            ric_f[(q, p)] = val;
        }
    }
    Ok(ric_f)
}

/// The (1,1) Ricci operator `g_{(x,y)}^{-1} ric_F`.
pub fn ricci_operator(s: &RandersStructure, sample: &TangentSample) -> Result<Mat<f64>> {
    sample.check_dim(s)?;
    let jet = SampleJet::build(s, &sample.x)?;
    let xi = vec![0.0; s.dim()];
    let g = jet.fundamental(&xi, &sample.y);
    let ric_f = akbar_zadeh_from(&jet, &sample.y)?;
    g.solve(&ric_f).ok_or(Error::SingularMatrix)
}

/// Outcome of the least-squares quadraticity test on `Ric(x, ·)`.
#[derive(Clone, Debug)]
pub struct RicciQuadratic {
    pub quadratic: bool,
    /// Largest fit residual relative to the magnitude of the data.
    pub deviation: f64,
    /// Fitted quadratic form; the minimum-norm representative, unique only
    /// when the direction set is rich enough (`rank_deficient` false).
    pub quadform: Mat<f64>,
    /// True when the directions fail to pin all quadratic coefficients,
    /// e.g. because they lie on a lower-dimensional curve.
    pub rank_deficient: bool,
}

/// Fits the Ricci scalar at base point `x` by a quadratic form in `y` over
/// the given directions; quadratic iff the relative deviation stays within
/// 1e-6. Needs an overdetermined system: at least n(n+1)/2 + 5 directions.
pub fn ricci_quadratic_check(
    s: &RandersStructure,
    x: &[f64],
    directions: &[Vec<f64>],
) -> Result<RicciQuadratic> {
    let n = s.dim();
    let unknowns = n * (n + 1) / 2;
    if directions.len() < unknowns + 5 {
        return Err(Error::TooFewSamples {
            needed: unknowns + 5,
            got: directions.len(),
        });
    }
    let jet = SampleJet::build(s, x)?;
    let mut rows = Vec::with_capacity(directions.len());
    let mut vals = Vec::with_capacity(directions.len());
    for y in directions {
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        if crate::linalg::norm(y) == 0.0 {
            return Err(Error::ZeroTangent);
        }
        let mut row = Vec::with_capacity(unknowns);
        for p in 0..n {
            for q in p..n {
                let w = if p == q { 1.0 } else { 2.0 };
                row.push(w * y[p] * y[q]);
            }
        }
        rows.push(row);
        vals.push(ricci_scalar_from(&jet, y)?);
    }
    let a = Mat::from_rows(rows);
    let fit = lstsq_min_norm(&a, &vals, 1e-9);
    let predicted = a.matvec(&fit.x);
    let scale = vals.iter().fold(1e-12f64, |m, v| m.max(v.abs()));
    let deviation = predicted
        .iter()
        .zip(&vals)
        .fold(0.0f64, |m, (p, v)| m.max((p - v).abs()))
        / scale;
    let mut quadform = Mat::zeros(n, n);
    let mut idx = 0;
    for p in 0..n {
        for q in p..n {
            quadform[(p, q)] = fit.x[idx];
            quadform[(q, p)] = fit.x[idx];
            idx += 1;
        }
    }
    Ok(RicciQuadratic {
        quadratic: deviation <= 1e-6,
        deviation,
        quadform,
        rank_deficient: fit.rank_deficient,
    })
}
