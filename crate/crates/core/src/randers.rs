//! Left-invariant Randers metrics `F = sqrt(a(y, y)) + b(y)` determined by
//! an inner product `A` and a drift vector `X` at the identity, with
//! `b = A X` and admissibility `|X|_A < 1`.
//!
//! Derivatives in `y` of the fundamental tensor come from closed forms and
//! jets. Derivatives in `x` route through a per-sample quadratic Taylor
//! model of `(a(x), b(x))`: curvature needs at most two base-point
//! derivatives, so the model is exact where it is ever evaluated, and it
//! keeps the jet arithmetic shallow enough to stay fast.

use crate::algebra::NilpotentAlgebra;
use crate::chart;
use crate::error::{Error, Result};
use crate::linalg::{check_spd, Mat};
use crate::riemann;
use crate::scalar::{tri_index, Jet, Scalar};

#[derive(Clone, Debug)]
pub struct RandersStructure {
    alg: NilpotentAlgebra,
    a_identity: Mat<f64>,
    drift: Vec<f64>,
    /// `A X`, the defining one-form at the identity.
    b_identity: Vec<f64>,
    drift_norm: f64,
}

impl RandersStructure {
    /// Validates the algebra (antisymmetry, Jacobi, nilpotency within the
    /// declared class bound), requires `A` symmetric positive definite and
    /// the drift strictly admissible: `|X|_A < 1` with margin 1e-12.
    pub fn new(alg: NilpotentAlgebra, a_identity: Mat<f64>, drift: Vec<f64>) -> Result<Self> {
        let n = alg.dim();
        if a_identity.rows != n || a_identity.cols != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a_identity.rows,
            });
        }
        if drift.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: drift.len(),
            });
        }
        let v = alg.validate();
        if !v.ok() {
            return Err(Error::InvalidAlgebra(if v.antisymmetry_max > 1e-12 {
                format!("antisymmetry violated by {:.3e}", v.antisymmetry_max)
            } else if v.jacobi_max > 1e-12 {
                let (i, j, k) = v.jacobi_witness.unwrap_or((0, 0, 0));
                format!("jacobi violation at ({i},{j},{k}): residual {:.3e}", v.jacobi_max)
            } else if !v.nilpotent {
                "algebra is not nilpotent".into()
            } else {
                format!(
                    "nilpotency class {} exceeds declared bound {}",
                    v.class.unwrap_or(0),
                    alg.class_bound()
                )
            }));
        }
        check_spd(&a_identity, 1e-12)?;
        let b_identity = a_identity.matvec(&drift);
        let drift_norm = crate::linalg::dot(&drift, &b_identity).sqrt();
        if drift_norm >= 1.0 - 1e-12 {
            return Err(Error::Inadmissible { norm: drift_norm });
        }
        Ok(RandersStructure {
            alg,
            a_identity,
            drift,
            b_identity,
            drift_norm,
        })
    }

    pub fn algebra(&self) -> &NilpotentAlgebra {
        &self.alg
    }

    pub fn dim(&self) -> usize {
        self.alg.dim()
    }

    pub fn metric_identity(&self) -> &Mat<f64> {
        &self.a_identity
    }

    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    pub fn one_form_identity(&self) -> &[f64] {
        &self.b_identity
    }

    pub fn drift_norm(&self) -> f64 {
        self.drift_norm
    }

    pub fn is_riemannian(&self) -> bool {
        self.drift.iter().all(|&x| x == 0.0)
    }

    /// Left-invariance makes the drift Killing exactly when `ad_X` is
    /// skew-adjoint for `A`.
    pub fn killing_residual(&self) -> f64 {
        riemann::is_killing_left_invariant(&self.alg, &self.a_identity, &self.drift).1
    }

    pub fn is_killing(&self) -> bool {
        riemann::is_killing_left_invariant(&self.alg, &self.a_identity, &self.drift).0
    }

    /// Gate for the soliton and flow pipelines, which assume a Killing
    /// drift; `force` turns the refusal into a bypass.
    pub fn require_killing(&self, force: bool) -> Result<()> {
        let (ok, residual) = (self.is_killing(), self.killing_residual());
        if ok || force {
            Ok(())
        } else {
            Err(Error::NotKilling { residual })
        }
    }
}

/// Base point and nonzero tangent vector in exponential coordinates.
#[derive(Clone, Debug)]
pub struct TangentSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if crate::linalg::norm(&y) == 0.0 {
            return Err(Error::ZeroTangent);
        }
        Ok(TangentSample { x, y })
    }

    /// Tangent vector at the origin.
    pub fn at_origin(y: Vec<f64>) -> Result<Self> {
        let x = vec![0.0; y.len()];
        TangentSample::new(x, y)
    }

    pub(crate) fn check_dim(&self, s: &RandersStructure) -> Result<()> {
        if self.x.len() != s.dim() {
            return Err(Error::DimensionMismatch {
                expected: s.dim(),
                found: self.x.len(),
            });
        }
        Ok(())
    }
}

/// `alpha = sqrt(yᵀ a y)` and `beta = bᵀ y` from coordinate data.
pub(crate) fn alpha_beta<T: Scalar>(a: &Mat<T>, b: &[T], y: &[T]) -> (T, T) {
    let ay = a.matvec(&y.to_vec());
    let mut q = T::zero();
    let mut beta = T::zero();
    for i in 0..y.len() {
        q = q + y[i].clone() * ay[i].clone();
        beta = beta + b[i].clone() * y[i].clone();
    }
    (q.sqrt(), beta)
}

/// Closed form of the fundamental tensor from coordinate data:
/// `g = (F/alpha)(a - l⨂l) + (l + b)⨂(l + b)` with `l = a y / alpha`.
pub(crate) fn fundamental_from<T: Scalar>(a: &Mat<T>, b: &[T], y: &[T]) -> Mat<T> {
    let n = y.len();
    let (alpha, beta) = alpha_beta(a, b, y);
    let f = alpha.clone() + beta;
    let ratio = f / alpha.clone();
    let ay = a.matvec(&y.to_vec());
    let l: Vec<T> = ay.iter().map(|v| v.clone() / alpha.clone()).collect();
    Mat::from_fn(n, n, |i, j| {
        let lb_i = l[i].clone() + b[i].clone();
        let lb_j = l[j].clone() + b[j].clone();
        ratio.clone() * (a[(i, j)].clone() - l[i].clone() * l[j].clone()) + lb_i * lb_j
    })
}

/// Randers norm at arbitrary scalar arguments through the full chart.
pub fn norm_at<T: Scalar>(s: &RandersStructure, x: &[T], y: &[T]) -> Result<T> {
    let a = chart::metric_in_coordinates(s.algebra(), s.metric_identity(), x)?;
    let b = chart::one_form_in_coordinates(s.algebra(), s.one_form_identity(), x)?;
    let (alpha, beta) = alpha_beta(&a, &b, y);
    Ok(alpha + beta)
}

pub fn randers_norm(s: &RandersStructure, sample: &TangentSample) -> Result<f64> {
    sample.check_dim(s)?;
    norm_at(s, &sample.x, &sample.y)
}

/// Fundamental tensor at arbitrary scalar arguments through the full chart.
pub fn fundamental_tensor_at<T: Scalar>(
    s: &RandersStructure,
    x: &[T],
    y: &[T],
) -> Result<Mat<T>> {
    let a = chart::metric_in_coordinates(s.algebra(), s.metric_identity(), x)?;
    let b = chart::one_form_in_coordinates(s.algebra(), s.one_form_identity(), x)?;
    Ok(fundamental_from(&a, &b, y))
}

pub fn fundamental_tensor(s: &RandersStructure, sample: &TangentSample) -> Result<Mat<f64>> {
    sample.check_dim(s)?;
    Ok(fundamental_tensor_at(s, &sample.x, &sample.y)?.symmetrized())
}

/// Fundamental tensor by its definition, half the y-Hessian of `F²`,
/// differentiated with jets through the full chart. Slower than the closed
/// form; kept as the independent cross-check path.
pub fn fundamental_tensor_via_hessian(
    s: &RandersStructure,
    sample: &TangentSample,
) -> Result<Mat<f64>> {
    sample.check_dim(s)?;
    let n = s.dim();
    let x: Vec<Jet<f64>> = sample.x.iter().map(|&c| Jet::constant(c)).collect();
    let y: Vec<Jet<f64>> = sample
        .y
        .iter()
        .enumerate()
        .map(|(i, &c)| Jet::seeded(c, n, i))
        .collect();
    let f = norm_at(s, &x, &y)?;
    let f2 = f.clone() * f;
    Ok(Mat::from_fn(n, n, |i, j| 0.5 * f2.hess(i, j)))
}

/// Cartan tensor `C_ijk = (1/4) [F²]_{y^i y^j y^k}`, computed as half the
/// y-derivative of the closed-form fundamental tensor.
pub fn cartan_tensor(s: &RandersStructure, sample: &TangentSample) -> Result<Vec<Vec<Vec<f64>>>> {
    sample.check_dim(s)?;
    let n = s.dim();
    let x: Vec<Jet<f64>> = sample.x.iter().map(|&c| Jet::constant(c)).collect();
    let y: Vec<Jet<f64>> = sample
        .y
        .iter()
        .enumerate()
        .map(|(i, &c)| Jet::seeded(c, n, i))
        .collect();
    let g = fundamental_tensor_at(s, &x, &y)?;
    let mut c = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                c[i][j][k] = 0.5 * g[(i, j)].grad(k);
            }
        }
    }
    // Full symmetrization cleans roundoff; the tensor is symmetric by
    // construction.
    let mut sym = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                sym[i][j][k] = (c[i][j][k] + c[j][k][i] + c[k][i][j] + c[i][k][j]
                    + c[j][i][k]
                    + c[k][j][i])
                    / 6.0;
            }
        }
    }
    Ok(sym)
}

/// Quadratic Taylor model of the coordinate data `(a, b)` around a base
/// point. Exact through second x-derivatives, which is all any curvature
/// quantity consumes; evaluations happen at zero displacement with jet or
/// dual perturbations layered on top.
pub(crate) struct SampleJet {
    n: usize,
    a0: Mat<f64>,
    da: Vec<Mat<f64>>,
    /// Packed second derivatives, `tri_index(n, m, p)`.
    d2a: Vec<Mat<f64>>,
    b0: Vec<f64>,
    db: Vec<Vec<f64>>,
    d2b: Vec<Vec<f64>>,
}

impl SampleJet {
    pub(crate) fn build(s: &RandersStructure, x0: &[f64]) -> Result<SampleJet> {
        let n = s.dim();
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x0.len(),
            });
        }
        let xj: Vec<Jet<f64>> = x0.iter().enumerate().map(|(i, &c)| Jet::seeded(c, n, i)).collect();
        let aj = chart::metric_in_coordinates(s.algebra(), s.metric_identity(), &xj)?;
        let bj = chart::one_form_in_coordinates(s.algebra(), s.one_form_identity(), &xj)?;
        let a0 = Mat::from_fn(n, n, |i, j| aj[(i, j)].v);
        let da = (0..n)
            .map(|m| Mat::from_fn(n, n, |i, j| aj[(i, j)].grad(m)))
            .collect();
        let mut d2a = Vec::with_capacity(n * (n + 1) / 2);
        for m in 0..n {
            for p in m..n {
                d2a.push(Mat::from_fn(n, n, |i, j| aj[(i, j)].hess(m, p)));
            }
        }
        let b0 = bj.iter().map(|x| x.v).collect();
        let db = (0..n)
            .map(|m| bj.iter().map(|x| x.grad(m)).collect())
            .collect();
        let mut d2b = Vec::with_capacity(n * (n + 1) / 2);
        for m in 0..n {
            for p in m..n {
                d2b.push(bj.iter().map(|x| x.hess(m, p)).collect());
            }
        }
        Ok(SampleJet {
            n,
            a0,
            da,
            d2a,
            b0,
            db,
            d2b,
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    /// Metric of the model at displacement `xi` from the base point.
    pub(crate) fn a_at<T: Scalar>(&self, xi: &[T]) -> Mat<T> {
        let n = self.n;
        Mat::from_fn(n, n, |i, j| {
            let mut acc = T::from_f64(self.a0[(i, j)]);
            for m in 0..n {
                let d = self.da[m][(i, j)];
                if d != 0.0 {
                    acc = acc + T::from_f64(d) * xi[m].clone();
                }
            }
            for m in 0..n {
                for p in m..n {
                    let d = self.d2a[tri_index(n, m, p)][(i, j)];
                    if d != 0.0 {
                        let w = if m == p { 0.5 } else { 1.0 };
                        acc = acc + T::from_f64(w * d) * xi[m].clone() * xi[p].clone();
                    }
                }
            }
            acc
        })
    }

    /// x-derivative of the model metric in direction `m` at displacement `xi`.
    fn da_at<T: Scalar>(&self, m: usize, xi: &[T]) -> Mat<T> {
        let n = self.n;
        Mat::from_fn(n, n, |i, j| {
            let mut acc = T::from_f64(self.da[m][(i, j)]);
            for p in 0..n {
                let d = self.d2a[tri_index(n, m, p)][(i, j)];
                if d != 0.0 {
                    acc = acc + T::from_f64(d) * xi[p].clone();
                }
            }
            acc
        })
    }

    pub(crate) fn b_at<T: Scalar>(&self, xi: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = T::from_f64(self.b0[i]);
                for m in 0..n {
                    let d = self.db[m][i];
                    if d != 0.0 {
                        acc = acc + T::from_f64(d) * xi[m].clone();
                    }
                }
                for m in 0..n {
                    for p in m..n {
                        let d = self.d2b[tri_index(n, m, p)][i];
                        if d != 0.0 {
                            let w = if m == p { 0.5 } else { 1.0 };
                            acc = acc + T::from_f64(w * d) * xi[m].clone() * xi[p].clone();
                        }
                    }
                }
                acc
            })
            .collect()
    }

    fn db_at<T: Scalar>(&self, m: usize, xi: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = T::from_f64(self.db[m][i]);
                for p in 0..n {
                    let d = self.d2b[tri_index(n, m, p)][i];
                    if d != 0.0 {
                        acc = acc + T::from_f64(d) * xi[p].clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub(crate) fn fundamental<T: Scalar>(&self, xi: &[T], y: &[T]) -> Mat<T> {
        fundamental_from(&self.a_at(xi), &self.b_at(xi), y)
    }

    /// Base-point partials `[F²]_{x^m} = F Q_m / alpha + 2 F P_m` with
    /// `Q_m = yᵀ (d_m a) y` and `P_m = (d_m b)ᵀ y`.
    pub(crate) fn f2_x<T: Scalar>(&self, xi: &[T], y: &[T]) -> Vec<T> {
        let n = self.n;
        let (alpha, beta) = alpha_beta(&self.a_at(xi), &self.b_at(xi), y);
        let f = alpha.clone() + beta;
        (0..n)
            .map(|m| {
                let am = self.da_at(m, xi);
                let bm = self.db_at(m, xi);
                let amy = am.matvec(&y.to_vec());
                let mut q = T::zero();
                let mut p = T::zero();
                for i in 0..n {
                    q = q + y[i].clone() * amy[i].clone();
                    p = p + bm[i].clone() * y[i].clone();
                }
                f.clone() * q / alpha.clone() + T::from_f64(2.0) * f.clone() * p
            })
            .collect()
    }

    /// Mixed partials `[F²]_{x^m y^l}`, returned as the matrix `[m][l]`:
    /// the y-gradient of each base-point partial, written out by hand.
    pub(crate) fn f2_xy<T: Scalar>(&self, xi: &[T], y: &[T]) -> Mat<T> {
        let n = self.n;
        let a = self.a_at(xi);
        let b = self.b_at(xi);
        let (alpha, beta) = alpha_beta(&a, &b, y);
        let f = alpha.clone() + beta;
        let ay = a.matvec(&y.to_vec());
        let l: Vec<T> = ay.iter().map(|v| v.clone() / alpha.clone()).collect();
        Mat::from_fn(n, n, |m, li| {
            let am = self.da_at(m, xi);
            let bm = self.db_at(m, xi);
            let amy = am.matvec(&y.to_vec());
            let mut q = T::zero();
            let mut p = T::zero();
            for i in 0..n {
                q = q + y[i].clone() * amy[i].clone();
                p = p + bm[i].clone() * y[i].clone();
            }
            let lb = l[li].clone() + b[li].clone();
            lb.clone() * q.clone() / alpha.clone()
                + T::from_f64(2.0) * f.clone() * amy[li].clone() / alpha.clone()
                - f.clone() * q * l[li].clone() / (alpha.clone() * alpha.clone())
                + T::from_f64(2.0) * lb * p
                + T::from_f64(2.0) * f.clone() * bm[li].clone()
        })
    }

    /// Geodesic spray coefficients
    /// `G^i = (1/4) g^{il} ([F²]_{x^m y^l} y^m - [F²]_{x^l})`.
    pub(crate) fn spray<T: Scalar>(&self, xi: &[T], y: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        let g = self.fundamental(xi, y);
        let f2x = self.f2_x(xi, y);
        let f2xy = self.f2_xy(xi, y);
        let rhs: Vec<T> = (0..n)
            .map(|l| {
                let mut acc = -f2x[l].clone();
                for m in 0..n {
                    acc = acc + f2xy[(m, l)].clone() * y[m].clone();
                }
                acc
            })
            .collect();
        let sol = g.solve_vec(&rhs).ok_or(Error::SingularMatrix)?;
        Ok(sol.into_iter().map(|v| T::from_f64(0.25) * v).collect())
    }
}
