//! Deterministic JSON reports behind the CLI and FFI surfaces. Field order
//! is fixed by struct declaration order; floats print as shortest
//! round-trip decimals, so identical inputs yield byte-identical output.
//! Wall-clock timing is opt-in because it would break that guarantee.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::curvature;
use crate::error::{Error, Result};
use crate::flow::{self, FlowKind, StepControl};
use crate::linalg::{min_eigenvalue, sym_eigen, Mat};
use crate::model::{self, ModelFile};
use crate::randers::{self, RandersStructure, TangentSample};
use crate::soliton;

pub const SCHEMA_VERSION: u32 = 1;

pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub samples: usize,
    pub seed: u64,
    /// Base point for curvature sampling; origin when absent.
    pub at: Option<Vec<f64>>,
    pub t_end: f64,
    pub normalized: bool,
    pub force: bool,
    pub timing: bool,
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            samples: 32,
            seed: 0,
            at: None,
            t_end: 1.0,
            normalized: false,
            force: false,
            timing: false,
            threads: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub schema_version: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub input_path: String,
    pub input_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualCheck {
    pub pass: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckBody {
    pub dim: usize,
    pub nilpotency_class: usize,
    pub class_bound: usize,
    pub lower_central_series: Vec<usize>,
    pub antisymmetry: ResidualCheck,
    pub jacobi: ResidualCheck,
    pub metric_min_eigenvalue: f64,
    pub drift_norm: f64,
    pub admissible: bool,
    pub riemannian: bool,
    pub killing: ResidualCheck,
    pub douglas: DouglasEntry,
    pub berwald: ResidualCheck,
    pub derivation_dimension: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DouglasEntry {
    pub pass: bool,
    pub max_violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub meta: Meta,
    pub check: CheckBody,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureSample {
    pub y: Vec<f64>,
    pub norm: f64,
    pub fundamental: Vec<Vec<f64>>,
    pub fundamental_min_eigenvalue: f64,
    pub cartan_max_abs: f64,
    pub spray: Vec<f64>,
    pub ricci_scalar: f64,
    pub ric_f_eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureBody {
    pub at: Vec<f64>,
    pub direction_count: usize,
    pub samples: Vec<CurvatureSample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReport {
    pub meta: Meta,
    pub curvature: CurvatureBody,
}

#[derive(Clone, Debug, Serialize)]
pub struct KillingEntry {
    pub pass: bool,
    pub residual: f64,
    pub forced: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualSummary {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitEntry {
    pub c: f64,
    pub classification: &'static str,
    pub degenerate: bool,
    pub residual: f64,
    pub derivation_residual: f64,
    pub d: Vec<Vec<f64>>,
    /// `½(D + A⁻¹DᵀA)` at the identity inner product.
    pub sym_d: Vec<Vec<f64>>,
    pub per_sample_residual: ResidualSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowCompatibilityEntry {
    pub residual: f64,
    pub defect_two_form: f64,
    pub matches_fit_residual: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolitonBody {
    pub killing: KillingEntry,
    pub fit: FitEntry,
    pub flow_compatibility: FlowCompatibilityEntry,
    /// Sign conventions for the scaling constant differ across
    /// normalizations; the classification reported here follows the sign
    /// of the fitted c (positive = shrinking).
    pub convention_note: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolitonReport {
    pub meta: Meta,
    pub soliton: SolitonBody,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfSimilarityEntry {
    pub grid: Vec<f64>,
    pub max_refit_residual: f64,
    pub max_fixed_residual: f64,
    pub refit_c: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowBody {
    pub kind: &'static str,
    pub t_end: f64,
    pub steps: usize,
    pub blow_up: bool,
    pub reached_time: f64,
    pub det_initial: f64,
    pub det_final: f64,
    pub det_drift_max: f64,
    pub min_eigenvalue_final: f64,
    pub final_metric: Vec<Vec<f64>>,
    pub self_similarity: SelfSimilarityEntry,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowReport {
    pub meta: Meta,
    pub flow: FlowBody,
}

#[derive(Clone, Debug, Serialize)]
pub struct FullReport {
    pub meta: Meta,
    pub check: CheckBody,
    pub curvature: CurvatureBody,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soliton: Option<SolitonBody>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soliton_skipped: Option<String>,
    pub flow: FlowBody,
}

pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    s.push('\n');
    s
}

fn load(path: &Path) -> Result<(ModelFile, RandersStructure, String)> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let sha = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>();
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::Model(format!("model file is not valid UTF-8: {e}")))?;
    let m = model::parse_model(&text)?;
    let s = m.to_structure()?;
    Ok((m, s, sha))
}

fn meta_for(command: &str, path: &Path, sha: String, opts: &RunOptions, sampled: bool) -> Meta {
    Meta {
        schema_version: SCHEMA_VERSION,
        tool: "nilsol",
        tool_version: tool_version(),
        command: command.to_string(),
        input_path: path.display().to_string(),
        input_sha256: sha,
        samples: sampled.then_some(opts.samples),
        seed: sampled.then_some(opts.seed),
        timing_ms: None,
    }
}

fn matrix_rows(m: &Mat<f64>) -> Vec<Vec<f64>> {
    (0..m.rows)
        .map(|i| (0..m.cols).map(|j| m[(i, j)]).collect())
        .collect()
}

fn residual_summary(values: &[f64]) -> ResidualSummary {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ResidualSummary {
        min: v[0],
        median: v[v.len() / 2],
        max: v[v.len() - 1],
    }
}

/// Ordered parallel map over samples; chunk-per-thread with results placed
/// by index, so the output is independent of the thread count.
pub(crate) fn parallel_map<T, U, F>(items: &[T], threads: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let threads = threads.max(1).min(items.len().max(1));
    if threads == 1 {
        return items.iter().map(f).collect();
    }
    let mut slots: Vec<Option<U>> = (0..items.len()).map(|_| None).collect();
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|scope| {
        for (item_chunk, slot_chunk) in items.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            let f = &f;
            scope.spawn(move || {
                for (it, slot) in item_chunk.iter().zip(slot_chunk.iter_mut()) {
                    *slot = Some(f(it));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("slot filled")).collect()
}

fn check_body(s: &RandersStructure) -> Result<CheckBody> {
    let v = s.algebra().validate();
    let douglas = soliton::douglas_check(s);
    let berwald = soliton::berwald_check(s)?;
    Ok(CheckBody {
        dim: s.dim(),
        nilpotency_class: v.class.unwrap_or(0),
        class_bound: s.algebra().class_bound(),
        lower_central_series: v.series_dims.clone(),
        antisymmetry: ResidualCheck {
            pass: v.antisymmetry_max <= 1e-12,
            residual: v.antisymmetry_max,
        },
        jacobi: ResidualCheck {
            pass: v.jacobi_max <= 1e-12,
            residual: v.jacobi_max,
        },
        metric_min_eigenvalue: min_eigenvalue(s.metric_identity()),
        drift_norm: s.drift_norm(),
        admissible: s.drift_norm() < 1.0,
        riemannian: s.is_riemannian(),
        killing: ResidualCheck {
            pass: s.is_killing(),
            residual: s.killing_residual(),
        },
        douglas: DouglasEntry {
            pass: douglas.is_douglas,
            max_violation: douglas.max_violation,
            witness: douglas.witness,
        },
        berwald: ResidualCheck {
            pass: berwald.is_berwald,
            residual: berwald.residual,
        },
        derivation_dimension: s.algebra().derivation_basis().dim(),
    })
}

pub fn run_check(path: &Path, opts: &RunOptions) -> Result<CheckReport> {
    let started = Instant::now();
    let (_, s, sha) = load(path)?;
    let check = check_body(&s)?;
    let mut meta = meta_for("check", path, sha, opts, false);
    if opts.timing {
        meta.timing_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    Ok(CheckReport { meta, check })
}

fn curvature_body(s: &RandersStructure, opts: &RunOptions) -> Result<CurvatureBody> {
    let n = s.dim();
    let at = match &opts.at {
        Some(x) if x.len() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.len(),
            })
        }
        Some(x) => x.clone(),
        None => vec![0.0; n],
    };
    let dirs = soliton::sample_directions(s.metric_identity(), opts.samples, opts.seed);
    let samples = parallel_map(&dirs, opts.threads, |y| -> Result<CurvatureSample> {
        let sample = TangentSample::new(at.clone(), y.clone())?;
        let g = randers::fundamental_tensor(s, &sample)?;
        let cartan = randers::cartan_tensor(s, &sample)?;
        let cartan_max_abs = cartan
            .iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let ric_f = curvature::akbar_zadeh(s, &sample)?;
        Ok(CurvatureSample {
            y: y.clone(),
            norm: randers::randers_norm(s, &sample)?,
            fundamental: matrix_rows(&g),
            fundamental_min_eigenvalue: min_eigenvalue(&g),
            cartan_max_abs,
            spray: curvature::spray(s, &sample)?,
            ricci_scalar: curvature::ricci_scalar(s, &sample)?,
            ric_f_eigenvalues: sym_eigen(&ric_f).0,
        })
    });
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(CurvatureBody {
        at,
        direction_count: dirs.len(),
        samples,
    })
}

pub fn run_curvature(path: &Path, opts: &RunOptions) -> Result<CurvatureReport> {
    let started = Instant::now();
    let (_, s, sha) = load(path)?;
    let curvature = curvature_body(&s, opts)?;
    let mut meta = meta_for("curvature", path, sha, opts, true);
    if opts.timing {
        meta.timing_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    Ok(CurvatureReport { meta, curvature })
}

fn soliton_body(s: &RandersStructure, opts: &RunOptions) -> Result<SolitonBody> {
    s.require_killing(opts.force)?;
    let dirs = soliton::sample_directions(s.metric_identity(), opts.samples, opts.seed);
    let fit = soliton::semialgebraic_fit(s, &dirs)?;
    let compat = flow::finsler_flow_residual(s, &fit, &dirs)?;
    let sym_d = fit.symmetric_part(s.metric_identity())?;
    Ok(SolitonBody {
        killing: KillingEntry {
            pass: s.is_killing(),
            residual: s.killing_residual(),
            forced: opts.force,
        },
        flow_compatibility: FlowCompatibilityEntry {
            residual: compat.residual,
            defect_two_form: compat.defect_two_form,
            matches_fit_residual: (compat.residual - fit.residual).abs() <= 1e-8,
        },
        fit: FitEntry {
            c: fit.c,
            classification: fit.classification.as_str(),
            degenerate: fit.degenerate,
            residual: fit.residual,
            derivation_residual: fit.derivation_residual,
            d: matrix_rows(&fit.d),
            sym_d: matrix_rows(&sym_d),
            per_sample_residual: residual_summary(&fit.per_sample_residuals),
        },
        convention_note:
            "classification follows the sign of the fitted c (positive = shrinking); \
             flow normalizations that rescale time can flip the sign of the scaling constant",
    })
}

pub fn run_soliton(path: &Path, opts: &RunOptions) -> Result<SolitonReport> {
    let started = Instant::now();
    let (_, s, sha) = load(path)?;
    let soliton = soliton_body(&s, opts)?;
    let mut meta = meta_for("soliton", path, sha, opts, true);
    if opts.timing {
        meta.timing_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    Ok(SolitonReport { meta, soliton })
}

fn flow_body(s: &RandersStructure, opts: &RunOptions) -> Result<FlowBody> {
    let kind = if opts.normalized {
        FlowKind::Normalized
    } else {
        FlowKind::Unnormalized
    };
    let ctrl = StepControl::default();
    let a0 = s.metric_identity();
    let traj = flow::integrate(s.algebra(), a0, kind, opts.t_end, &ctrl)?;
    let det0 = a0.det();
    let det_drift_max = traj
        .metrics
        .iter()
        .map(|m| (m.det() - det0).abs())
        .fold(0.0, f64::max);
    let grid: Vec<f64> = (0..5).map(|i| opts.t_end * i as f64 / 4.0).collect();
    let fit0 = soliton::riemannian_soliton_refit(s.algebra(), a0)?;
    let ss = flow::self_similarity_check(s.algebra(), a0, &fit0, &grid, &ctrl)?;
    Ok(FlowBody {
        kind: kind.as_str(),
        t_end: opts.t_end,
        steps: traj.times.len() - 1,
        blow_up: traj.blow_up,
        reached_time: traj.final_time(),
        det_initial: det0,
        det_final: traj.final_metric().det(),
        det_drift_max,
        min_eigenvalue_final: min_eigenvalue(traj.final_metric()),
        final_metric: matrix_rows(traj.final_metric()),
        self_similarity: SelfSimilarityEntry {
            grid,
            max_refit_residual: ss.max_refit_residual,
            max_fixed_residual: ss.max_fixed_residual,
            refit_c: ss.points.iter().map(|p| p.refit_c).collect(),
        },
    })
}

pub fn run_flow(path: &Path, opts: &RunOptions) -> Result<FlowReport> {
    let started = Instant::now();
    let (_, s, sha) = load(path)?;
    let flow = flow_body(&s, opts)?;
    let mut meta = meta_for("flow", path, sha, opts, false);
    if opts.timing {
        meta.timing_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    Ok(FlowReport { meta, flow })
}

pub fn run_full(path: &Path, opts: &RunOptions) -> Result<FullReport> {
    let started = Instant::now();
    let (_, s, sha) = load(path)?;
    let check = check_body(&s)?;
    let curvature = curvature_body(&s, opts)?;
    let (soliton, soliton_skipped) = match soliton_body(&s, opts) {
        Ok(b) => (Some(b), None),
        Err(Error::NotKilling { residual }) => (
            None,
            Some(format!(
                "drift is not Killing (residual {residual:.3e}); rerun with force to include the soliton section"
            )),
        ),
        Err(e) => return Err(e),
    };
    let flow = flow_body(&s, opts)?;
    let mut meta = meta_for("report", path, sha, opts, true);
    if opts.timing {
        meta.timing_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    Ok(FullReport {
        meta,
        check,
        curvature,
        soliton,
        soliton_skipped,
        flow,
    })
}
