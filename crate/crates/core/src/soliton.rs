//! Structural criteria for the drift field (Killing, Douglas, Berwald),
//! Lie derivatives along complete lifts, the Finslerian Ricci-soliton
//! residual, and the semialgebraic soliton fit over the derivation algebra.

use crate::algebra::NilpotentAlgebra;
use crate::chart;
use crate::curvature::akbar_zadeh_from;
use crate::error::{Error, Result};
use crate::linalg::{lstsq_min_norm, Mat};
use crate::randers::{fundamental_tensor_at, RandersStructure, SampleJet, TangentSample};
use crate::riemann;
use crate::scalar::{Dual, Jet, Scalar};

/// Douglas criterion: the defining one-form must annihilate the derived
/// algebra, `A X ⊥ [n, n]`.
#[derive(Clone, Debug)]
pub struct DouglasReport {
    pub is_douglas: bool,
    /// Largest pairing of `A X` with a bracket of basis vectors.
    pub max_violation: f64,
    /// One-based basis pair attaining the maximum; absent in dimension 1.
    pub witness: Option<(usize, usize)>,
}

pub fn douglas_check(s: &RandersStructure) -> DouglasReport {
    let n = s.dim();
    let b = s.one_form_identity();
    let e = Mat::<f64>::identity(n);
    let mut max_violation = 0.0f64;
    let mut witness = None;
    for i in 0..n {
        for j in i + 1..n {
            let br = s.algebra().bracket(&e.column(i), &e.column(j));
            let v = crate::linalg::dot(b, &br).abs();
            if witness.is_none() || v > max_violation {
                max_violation = v;
                witness = Some((i + 1, j + 1));
            }
        }
    }
    DouglasReport {
        is_douglas: max_violation <= 1e-10,
        max_violation,
        witness,
    }
}

/// Berwald criterion: the drift must be parallel, `∇X = 0` for the
/// Levi-Civita connection of `A`.
#[derive(Clone, Debug)]
pub struct BerwaldReport {
    pub is_berwald: bool,
    /// Largest A-norm of a covariant derivative of X along a basis field.
    pub residual: f64,
}

pub fn berwald_check(s: &RandersStructure) -> Result<BerwaldReport> {
    let n = s.dim();
    let a = s.metric_identity();
    let table = riemann::levi_civita(s.algebra(), a)?;
    let e = Mat::<f64>::identity(n);
    let mut residual = 0.0f64;
    for i in 0..n {
        let d = table.derive(&e.column(i), s.drift());
        let norm_a = crate::linalg::dot(&d, &a.matvec(&d)).sqrt();
        residual = residual.max(norm_a);
    }
    Ok(BerwaldReport {
        is_berwald: residual <= 1e-10,
        residual,
    })
}

/// Flow-based Killing verification: differentiates the pullback of the
/// coordinate metric along the flow of the left-invariant field with
/// identity value `x_field`. The flow of a left-invariant field is right
/// translation, `x ↦ x · exp(t X)`, realized through the group product
/// with a dual time variable; the check passes when the worst derivative
/// entry over the sample points stays within 1e-6.
pub fn killing_flow_check(
    s: &RandersStructure,
    x_field: &[f64],
    samples: &[Vec<f64>],
) -> Result<(bool, f64)> {
    let n = s.dim();
    if x_field.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x_field.len(),
        });
    }
    let mut worst = 0.0f64;
    for x in samples {
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        // Jets in the base point carry the pullback Jacobian; the dual
        // layer underneath carries d/dt.
        let xt: Vec<Jet<Dual<f64>>> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::seeded(Dual::constant(v), n, i))
            .collect();
        let tx: Vec<Jet<Dual<f64>>> = x_field
            .iter()
            .map(|&v| Jet::constant(Dual::new(0.0, v)))
            .collect();
        let z = chart::group_multiply(s.algebra(), &xt, &tx);
        let az = chart::metric_in_coordinates(s.algebra(), s.metric_identity(), &z)?;
        for u in 0..n {
            for w in 0..n {
                let mut acc: Dual<f64> = Dual::constant(0.0);
                for i in 0..n {
                    for j in 0..n {
                        acc = acc + z[i].grad(u) * az[(i, j)].v * z[j].grad(w);
                    }
                }
                worst = worst.max(acc.d.abs());
            }
        }
    }
    Ok((worst <= 1e-6, worst))
}

/// A coordinate vector field, smooth enough to flow for one dual-number
/// time step.
#[derive(Clone, Debug)]
pub enum VectorField {
    /// Left-invariant extension of a value at the identity.
    LeftInvariant(Vec<f64>),
    /// Linear field `x ↦ B x`.
    Linear(Mat<f64>),
    /// Per-component polynomial in the coordinates.
    Polynomial(Vec<Vec<PolyTerm>>),
}

#[derive(Clone, Debug)]
pub struct PolyTerm {
    pub coeff: f64,
    /// One exponent per coordinate.
    pub powers: Vec<u32>,
}

impl VectorField {
    pub fn eval<T: Scalar>(&self, alg: &NilpotentAlgebra, x: &[T]) -> Vec<T> {
        match self {
            VectorField::LeftInvariant(v_e) => chart::vector_in_coordinates(alg, v_e, x),
            VectorField::Linear(b) => Mat::<T>::lift(b).matvec(&x.to_vec()),
            VectorField::Polynomial(comps) => comps
                .iter()
                .map(|terms| {
                    let mut acc = T::zero();
                    for t in terms {
                        let mut m = T::from_f64(t.coeff);
                        for (i, &p) in t.powers.iter().enumerate() {
                            for _ in 0..p {
                                m = m * x[i].clone();
                            }
                        }
                        acc = acc + m;
                    }
                    acc
                })
                .collect(),
        }
    }

    /// Jacobian `∂V^i/∂x^j` at `x`.
    fn jacobian(&self, alg: &NilpotentAlgebra, x: &[f64]) -> Mat<f64> {
        let n = x.len();
        let xj: Vec<Jet<f64>> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::seeded(v, n, i))
            .collect();
        let vj = self.eval(alg, &xj);
        Mat::from_fn(n, n, |i, j| vj[i].grad(j))
    }
}

/// Lie derivative of the fundamental tensor along the complete lift of `V`:
/// `(L_{V^c} g)(u, v) = d/dt|₀ g_(φ_t x, dφ_t y)(dφ_t u, dφ_t v)`,
/// realized with a single dual-time Euler step `φ_t(x) = x + t V(x)`,
/// which is exact to first order and therefore exact for the derivative.
pub fn lie_derivative_fundamental(
    s: &RandersStructure,
    v: &VectorField,
    sample: &TangentSample,
) -> Result<Mat<f64>> {
    sample.check_dim(s)?;
    let n = s.dim();
    let vx = v.eval::<f64>(s.algebra(), &sample.x);
    let dv = v.jacobian(s.algebra(), &sample.x);
    let x_t: Vec<Dual<f64>> = (0..n).map(|i| Dual::new(sample.x[i], vx[i])).collect();
    // dφ_t = I + t DV.
    let j: Mat<Dual<f64>> = Mat::from_fn(n, n, |r, c| {
        Dual::new(if r == c { 1.0 } else { 0.0 }, dv[(r, c)])
    });
    let y_t = j.matvec(&sample.y.iter().map(|&c| Dual::constant(c)).collect::<Vec<_>>());
    let g_t = fundamental_tensor_at(s, &x_t, &y_t)?;
    let p = j.transpose().matmul(&g_t).matmul(&j);
    Ok(Mat::from_fn(n, n, |r, c| p[(r, c)].d).symmetrized())
}

/// RMS over samples of the Frobenius defect of the soliton equation
/// `ric_F = c g + L_{V^c} g`.
pub fn soliton_residual(
    s: &RandersStructure,
    v: &VectorField,
    c: f64,
    samples: &[TangentSample],
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut sumsq = 0.0;
    for sample in samples {
        let ric_f = crate::curvature::akbar_zadeh(s, sample)?;
        let g = crate::randers::fundamental_tensor(s, sample)?;
        let l = lie_derivative_fundamental(s, v, sample)?;
        let defect = ric_f.sub(&g.scale(c)).sub(&l);
        let r = defect.frobenius_norm();
        sumsq += r * r;
    }
    Ok((sumsq / samples.len() as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Shrinking,
    Steady,
    Expanding,
}

impl Classification {
    /// Sign of c with threshold 1e-8.
    fn from_c(c: f64) -> Self {
        if c > 1e-8 {
            Classification::Shrinking
        } else if c < -1e-8 {
            Classification::Expanding
        } else {
            Classification::Steady
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Shrinking => "shrinking",
            Classification::Steady => "steady",
            Classification::Expanding => "expanding",
        }
    }
}

/// Least-squares solution of the semialgebraic soliton equation.
#[derive(Clone, Debug)]
pub struct SolitonFit {
    pub c: f64,
    /// Minimum-norm representative in the span of the derivation basis.
    pub d: Mat<f64>,
    /// RMS over samples of the per-sample Frobenius defect.
    pub residual: f64,
    pub classification: Classification,
    /// Rank deficiency of the normal equations. Antisymmetric-within-Der
    /// directions drop out of the symmetrized equation, so this is common
    /// and benign; the minimum-norm convention keeps the output unique.
    pub degenerate: bool,
    /// Leibniz defect of the returned D; near zero by construction.
    pub derivation_residual: f64,
    pub per_sample_residuals: Vec<f64>,
}

impl SolitonFit {
    /// Symmetric part of D in the metric sense, `½(D + g⁻¹Dᵀg)`.
    pub fn symmetric_part(&self, g: &Mat<f64>) -> Result<Mat<f64>> {
        let dt = g
            .solve(&self.d.transpose().matmul(g))
            .ok_or(Error::SingularMatrix)?;
        Ok(self.d.add(&dt).scale(0.5))
    }
}

/// Assembled equations of the soliton fit for one metric `g`: the column
/// blocks `½(D_α + g⁻¹D_αᵀg)` plus the identity column for `c`.
fn fit_columns(generators: &[Mat<f64>], g: &Mat<f64>) -> Result<Vec<Mat<f64>>> {
    generators
        .iter()
        .map(|d| {
            let dt = g
                .solve(&d.transpose().matmul(g))
                .ok_or(Error::SingularMatrix)?;
            Ok(d.add(&dt).scale(0.5))
        })
        .collect()
}

fn stack_equations(
    rows: &mut Vec<Vec<f64>>,
    rhs: &mut Vec<f64>,
    ric_op: &Mat<f64>,
    cols: &[Mat<f64>],
) {
    let n = ric_op.rows;
    for r in 0..n {
        for c in 0..n {
            let mut row = Vec::with_capacity(1 + cols.len());
            row.push(if r == c { 1.0 } else { 0.0 });
            for col in cols {
                row.push(col[(r, c)]);
            }
            rows.push(row);
            rhs.push(ric_op[(r, c)]);
        }
    }
}

/// Fit `Ric_op(e, y_s) = c·Id + ½(D + g_s⁻¹ Dᵀ g_s)` over all sampled
/// directions at the identity, with one `(c, D)` for the whole set and
/// `D` confined to the derivation algebra. Minimum-norm least squares;
/// rank deficiency is reported, not fatal.
pub fn semialgebraic_fit(s: &RandersStructure, directions: &[Vec<f64>]) -> Result<SolitonFit> {
    let n = s.dim();
    if directions.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: directions.len(),
        });
    }
    let basis = s.algebra().derivation_basis();
    let jet = SampleJet::build(s, &vec![0.0; n])?;
    let xi = vec![0.0; n];
    let mut rows = Vec::with_capacity(directions.len() * n * n);
    let mut rhs = Vec::with_capacity(directions.len() * n * n);
    let mut per_sample: Vec<(Mat<f64>, Mat<f64>)> = Vec::with_capacity(directions.len());
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
        let g = jet.fundamental(&xi, y);
        let ric_f = akbar_zadeh_from(&jet, y)?;
        let ric_op = g.solve(&ric_f).ok_or(Error::SingularMatrix)?;
        let cols = fit_columns(&basis.generators, &g)?;
        stack_equations(&mut rows, &mut rhs, &ric_op, &cols);
        per_sample.push((g, ric_op));
    }
    let a = Mat::from_rows(rows);
    let sol = lstsq_min_norm(&a, &rhs, 1e-9);
    let c = sol.x[0];
    let d = basis.combine(&sol.x[1..]);
    let mut per_sample_residuals = Vec::with_capacity(per_sample.len());
    let mut sumsq = 0.0;
    for (g, ric_op) in &per_sample {
        let dt = g
            .solve(&d.transpose().matmul(g))
            .ok_or(Error::SingularMatrix)?;
        let model = Mat::<f64>::identity(n)
            .scale(c)
            .add(&d.add(&dt).scale(0.5));
        let r = ric_op.sub(&model).frobenius_norm();
        per_sample_residuals.push(r);
        sumsq += r * r;
    }
    let residual = (sumsq / per_sample.len() as f64).sqrt();
    Ok(SolitonFit {
        c,
        derivation_residual: s.algebra().derivation_residual(&d),
        d,
        residual,
        classification: Classification::from_c(c),
        degenerate: sol.rank_deficient,
        per_sample_residuals,
    })
}

/// Riemannian specialization of the fit for a single inner product:
/// `A⁻¹ ric = c·Id + ½(D + A⁻¹DᵀA)`. Shared by the flow self-similarity
/// check, which refits along a trajectory.
pub fn riemannian_soliton_refit(alg: &NilpotentAlgebra, a: &Mat<f64>) -> Result<SolitonFit> {
    let n = alg.dim();
    let basis = alg.derivation_basis();
    let ric = riemann::ricci(alg, a)?;
    let ric_op = a.solve(&ric).ok_or(Error::SingularMatrix)?;
    let cols = fit_columns(&basis.generators, a)?;
    let mut rows = Vec::with_capacity(n * n);
    let mut rhs = Vec::with_capacity(n * n);
    stack_equations(&mut rows, &mut rhs, &ric_op, &cols);
    let design = Mat::from_rows(rows);
    let sol = lstsq_min_norm(&design, &rhs, 1e-9);
    let c = sol.x[0];
    let d = basis.combine(&sol.x[1..]);
    let dt = a
        .solve(&d.transpose().matmul(a))
        .ok_or(Error::SingularMatrix)?;
    let model = Mat::<f64>::identity(n).scale(c).add(&d.add(&dt).scale(0.5));
    let residual = ric_op.sub(&model).frobenius_norm();
    Ok(SolitonFit {
        c,
        derivation_residual: alg.derivation_residual(&d),
        d,
        residual,
        classification: Classification::from_c(c),
        degenerate: sol.rank_deficient,
        per_sample_residuals: vec![residual],
    })
}

/// Deterministic low-discrepancy directions on the unit A-sphere: a
/// Kronecker lattice pushed through the inverse normal CDF and normalized
/// in the A-norm. Same `(count, seed, A)` always yields the same set.
pub fn sample_directions(a: &Mat<f64>, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = a.rows;
    // Irrational stride per coordinate from the generalized golden ratio,
    // the positive root of x^{n+1} = x + 1.
    let mut phi = 1.5f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (n as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=n as i32).map(|i| (1.0 / phi).powi(i)).collect();
    let offsets: Vec<f64> = (0..n)
        .map(|i| {
            let h = splitmix64(seed ^ (0x9e3779b97f4a7c15u64.wrapping_mul(i as u64 + 1)));
            (h >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect();
    (0..count)
        .map(|k| {
            let mut z: Vec<f64> = (0..n)
                .map(|i| {
                    let u = (offsets[i] + (k as f64 + 1.0) * alphas[i]).fract();
                    inverse_normal_cdf(u.clamp(1e-12, 1.0 - 1e-12))
                })
                .collect();
            let norm_a = crate::linalg::dot(&z, &a.matvec(&z)).sqrt();
            // The Gaussian map cannot produce an exact zero after the
            // clamp, but guard the division anyway.
            if norm_a < 1e-12 {
                z[0] = 1.0;
                return z;
            }
            z.iter().map(|v| v / norm_a).collect()
        })
        .collect()
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Rational approximation to the standard normal quantile (Acklam), one
/// Halley refinement step; absolute error far below the discrepancies the
/// sampler cares about.
fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    let x = if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -((((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0))
    };
    // Halley step against the cdf expressed through erfc.
    let e = 0.5 * erfc_scalar(-x / std::f64::consts::SQRT_2) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// erfc to near machine precision: Taylor series of erf below 2.5, the
/// Laplace continued fraction in the tail. Accuracy here fixes the
/// accuracy of the refined quantile.
fn erfc_scalar(x: f64) -> f64 {
    let z = x.abs();
    let v = if z < 2.5 {
        let mut term = z;
        let mut sum = z;
        let mut n = 1.0f64;
        while term.abs() > 1e-18 * sum.abs().max(1.0) && n < 200.0 {
            term *= -z * z / n;
            sum += term / (2.0 * n + 1.0);
            n += 1.0;
        }
        1.0 - sum * 2.0 / std::f64::consts::PI.sqrt()
    } else {
        let mut f = 0.0;
        for k in (1..=60).rev() {
            f = (k as f64 / 2.0) / (z + f);
        }
        (-z * z).exp() / std::f64::consts::PI.sqrt() / (z + f)
    };
    if x >= 0.0 {
        v
    } else {
        2.0 - v
    }
}
