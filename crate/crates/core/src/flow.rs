//! Ricci flow of the left-invariant metric: right-hand sides, adaptive
//! fourth-order integration with step doubling, trajectory export, and the
//! self-similarity and flow-compatibility diagnostics.

use serde::Serialize;

use crate::algebra::NilpotentAlgebra;
use crate::curvature::akbar_zadeh_from;
use crate::error::{Error, Result};
use crate::linalg::{check_spd, min_eigenvalue, Mat};
use crate::randers::{RandersStructure, SampleJet};
use crate::riemann;
use crate::soliton::{riemannian_soliton_refit, SolitonFit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    /// dA/dt = -2 ric(A).
    Unnormalized,
    /// dA/dt = -2 ric(A) + (2 sc / n) A; volume preserving.
    Normalized,
}

impl FlowKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlowKind::Unnormalized => "unnormalized",
            FlowKind::Normalized => "normalized",
        }
    }
}

pub fn flow_rhs(alg: &NilpotentAlgebra, a: &Mat<f64>, kind: FlowKind) -> Result<Mat<f64>> {
    let ric = riemann::ricci(alg, a)?;
    match kind {
        FlowKind::Unnormalized => Ok(ric.scale(-2.0)),
        FlowKind::Normalized => {
            let endo = a.solve(&ric).ok_or(Error::SingularMatrix)?;
            let sc: f64 = (0..alg.dim()).map(|i| endo[(i, i)]).sum();
            Ok(ric
                .scale(-2.0)
                .add(&a.scale(2.0 * sc / alg.dim() as f64)))
        }
    }
}

/// Step-size policy. On error-estimate violation (or loss of positivity
/// during a stage) the step is halved; once it falls below `min_step` the
/// trajectory is flagged as blown up and integration stops.
#[derive(Clone, Copy, Debug)]
pub struct StepControl {
    pub max_step: f64,
    pub error_tol: f64,
    pub min_step: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            max_step: 0.01,
            error_tol: 1e-9,
            min_step: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlowTrajectory {
    pub kind: FlowKind,
    pub times: Vec<f64>,
    pub metrics: Vec<Mat<f64>>,
    pub blow_up: bool,
}

#[derive(Serialize)]
struct TrajectoryJson<'a> {
    kind: &'a str,
    blow_up: bool,
    times: &'a [f64],
    /// Row-wise upper triangles of A(t), matching the CSV layout.
    metrics_upper: Vec<Vec<f64>>,
}

impl FlowTrajectory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn final_metric(&self) -> &Mat<f64> {
        self.metrics.last().unwrap()
    }

    fn upper(m: &Mat<f64>) -> Vec<f64> {
        let mut out = Vec::with_capacity(m.rows * (m.rows + 1) / 2);
        for i in 0..m.rows {
            for j in i..m.cols {
                out.push(m[(i, j)]);
            }
        }
        out
    }

    /// CSV rows `t, a_1_1, a_1_2, ..., a_n_n` over the upper triangle.
    pub fn to_csv(&self) -> String {
        let n = self.metrics[0].rows;
        let mut s = String::from("t");
        for i in 1..=n {
            for j in i..=n {
                s.push_str(&format!(",a_{i}_{j}"));
            }
        }
        s.push('\n');
        for (t, m) in self.times.iter().zip(&self.metrics) {
            s.push_str(&format!("{t}"));
            for v in Self::upper(m) {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let doc = TrajectoryJson {
            kind: self.kind.as_str(),
            blow_up: self.blow_up,
            times: &self.times,
            metrics_upper: self.metrics.iter().map(Self::upper).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("trajectory serialization cannot fail")
    }
}

fn rk4_step(alg: &NilpotentAlgebra, a: &Mat<f64>, kind: FlowKind, h: f64) -> Result<Mat<f64>> {
    let k1 = flow_rhs(alg, a, kind)?;
    let k2 = flow_rhs(alg, &a.add(&k1.scale(h / 2.0)), kind)?;
    let k3 = flow_rhs(alg, &a.add(&k2.scale(h / 2.0)), kind)?;
    let k4 = flow_rhs(alg, &a.add(&k3.scale(h)), kind)?;
    Ok(a.add(
        &k1.add(&k2.scale(2.0))
            .add(&k3.scale(2.0))
            .add(&k4)
            .scale(h / 6.0),
    ))
}

/// One full step against two half steps; the scaled difference estimates
/// the local truncation error of the half-step result.
fn step_doubled(
    alg: &NilpotentAlgebra,
    a: &Mat<f64>,
    kind: FlowKind,
    h: f64,
) -> Result<(Mat<f64>, f64)> {
    let full = rk4_step(alg, a, kind, h)?;
    let mid = rk4_step(alg, a, kind, h / 2.0)?;
    let fine = rk4_step(alg, &mid, kind, h / 2.0)?;
    let err = fine.sub(&full).frobenius_norm() / 15.0;
    Ok((fine, err))
}

pub fn integrate(
    alg: &NilpotentAlgebra,
    a0: &Mat<f64>,
    kind: FlowKind,
    t_end: f64,
    ctrl: &StepControl,
) -> Result<FlowTrajectory> {
    if !(t_end > 0.0) {
        return Err(Error::Numerical("flow horizon must be positive".into()));
    }
    if ctrl.max_step <= 0.0 || ctrl.min_step <= 0.0 || ctrl.error_tol <= 0.0 {
        return Err(Error::Numerical("step control bounds must be positive".into()));
    }
    check_spd(a0, 1e-12)?;
    let mut a = a0.symmetrized();
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut metrics = vec![a.clone()];
    let mut h = ctrl.max_step.min(t_end);
    let mut blow_up = false;
    while t < t_end - 1e-14 {
        let hc = h.min(t_end - t);
        let step = match step_doubled(alg, &a, kind, hc) {
            Ok(pair) => Some(pair),
            // Positivity lost inside a stage: treat as a rejected step.
            Err(Error::NotPositiveDefinite { .. }) => None,
            Err(e) => return Err(e),
        };
        let accepted = step.filter(|(fine, err)| {
            *err <= ctrl.error_tol && min_eigenvalue(fine) >= 1e-10
        });
        match accepted {
            Some((fine, err)) => {
                t += hc;
                a = fine.symmetrized();
                times.push(t);
                metrics.push(a.clone());
                if err < ctrl.error_tol / 64.0 {
                    h = (h * 2.0).min(ctrl.max_step);
                }
            }
            None => {
                h = hc * 0.5;
                if h < ctrl.min_step {
                    blow_up = true;
                    break;
                }
            }
        }
    }
    Ok(FlowTrajectory {
        kind,
        times,
        metrics,
        blow_up,
    })
}

/// Defect of the algebraic soliton form for a fixed `(c, D)` at metric `a`:
/// `‖A⁻¹ric - c·Id - ½(D + A⁻¹DᵀA)‖_F`.
fn soliton_form_deviation(
    alg: &NilpotentAlgebra,
    a: &Mat<f64>,
    c: f64,
    d: &Mat<f64>,
) -> Result<f64> {
    let ric = riemann::ricci(alg, a)?;
    let ric_op = a.solve(&ric).ok_or(Error::SingularMatrix)?;
    let dt = a
        .solve(&d.transpose().matmul(a))
        .ok_or(Error::SingularMatrix)?;
    let model = Mat::<f64>::identity(alg.dim())
        .scale(c)
        .add(&d.add(&dt).scale(0.5));
    Ok(ric_op.sub(&model).frobenius_norm())
}

#[derive(Clone, Debug)]
pub struct SelfSimilarityPoint {
    pub t: f64,
    /// Residual of a fresh soliton fit at A(t); small whenever the flow
    /// stays inside the soliton family.
    pub refit_residual: f64,
    pub refit_c: f64,
    /// Deviation from the form with the input `(c, D)` held fixed; grows
    /// along genuine trajectories as the soliton constants rescale, and is
    /// the sensitive detector for perturbed initial data at t = 0.
    pub fixed_residual: f64,
}

#[derive(Clone, Debug)]
pub struct SelfSimilarity {
    pub points: Vec<SelfSimilarityPoint>,
    pub max_refit_residual: f64,
    pub max_fixed_residual: f64,
}

/// Track the algebraic soliton form along the unnormalized flow from `a0`.
pub fn self_similarity_check(
    alg: &NilpotentAlgebra,
    a0: &Mat<f64>,
    fit: &SolitonFit,
    t_grid: &[f64],
    ctrl: &StepControl,
) -> Result<SelfSimilarity> {
    if t_grid.is_empty() {
        return Err(Error::Numerical("self-similarity grid is empty".into()));
    }
    if t_grid[0] < 0.0 {
        return Err(Error::Numerical("self-similarity grid starts before 0".into()));
    }
    check_spd(a0, 1e-12)?;
    let mut a = a0.symmetrized();
    let mut t_prev = 0.0;
    let mut points = Vec::with_capacity(t_grid.len());
    for &tg in t_grid {
        if tg < t_prev - 1e-14 {
            return Err(Error::Numerical("self-similarity grid must be ascending".into()));
        }
        if tg > t_prev + 1e-14 {
            let traj = integrate(alg, &a, FlowKind::Unnormalized, tg - t_prev, ctrl)?;
            if traj.blow_up {
                return Err(Error::Numerical(format!("flow blow-up before t = {tg}")));
            }
            a = traj.final_metric().clone();
            t_prev = tg;
        }
        let refit = riemannian_soliton_refit(alg, &a)?;
        let fixed_residual = soliton_form_deviation(alg, &a, fit.c, &fit.d)?;
        points.push(SelfSimilarityPoint {
            t: tg,
            refit_residual: refit.residual,
            refit_c: refit.c,
            fixed_residual,
        });
    }
    let max_refit_residual = points.iter().map(|p| p.refit_residual).fold(0.0, f64::max);
    let max_fixed_residual = points.iter().map(|p| p.fixed_residual).fold(0.0, f64::max);
    Ok(SelfSimilarity {
        points,
        max_refit_residual,
        max_fixed_residual,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct FlowCompatibility {
    /// RMS of `‖½ g⁻¹ defect‖_F`; algebraically identical to the soliton
    /// fit residual evaluated at the same directions.
    pub residual: f64,
    /// RMS of the raw bilinear defect
    /// `‖τ'(0) g - (gD + Dᵀg) + 2 ric_F‖_F` with `τ'(0) = -2c`.
    pub defect_two_form: f64,
}

/// Instantaneous compatibility of the fitted soliton data with the Finsler
/// flow equation `∂g/∂t = -2 ric_F` under the self-similar ansatz.
pub fn finsler_flow_residual(
    s: &RandersStructure,
    fit: &SolitonFit,
    directions: &[Vec<f64>],
) -> Result<FlowCompatibility> {
    let n = s.dim();
    if directions.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let jet = SampleJet::build(s, &vec![0.0; n])?;
    let xi = vec![0.0; n];
    let tau0 = -2.0 * fit.c;
    let mut sum_norm = 0.0;
    let mut sum_raw = 0.0;
    for y in directions {
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        let g = jet.fundamental(&xi, y);
        let ric_f = akbar_zadeh_from(&jet, y)?;
        let sym2 = g.matmul(&fit.d).add(&fit.d.transpose().matmul(&g));
        let defect = g.scale(tau0).sub(&sym2).add(&ric_f.scale(2.0));
        let raw = defect.frobenius_norm();
        let normalized = g
            .solve(&defect)
            .ok_or(Error::SingularMatrix)?
            .scale(0.5)
            .frobenius_norm();
        sum_raw += raw * raw;
        sum_norm += normalized * normalized;
    }
    let m = directions.len() as f64;
    Ok(FlowCompatibility {
        residual: (sum_norm / m).sqrt(),
        defect_two_form: (sum_raw / m).sqrt(),
    })
}
