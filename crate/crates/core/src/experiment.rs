//! Growth runs, per-step benchmarks, cross-validation and equivalence checks
//! built on the solvers.
//!
//! Every experiment shares one set of hidden-node parameters and one node
//! order across algorithms, so differences between them come from the update
//! rule alone.

use std::collections::BTreeMap;
use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{normalize_features, Dataset, Task};
use crate::error::{ElmError, Result};
use crate::evaluation::{classification_metrics, kfold_split, mse, GrowthTrace, MeanVar, TraceRecord};
use crate::linalg::{axpy, Matrix};
use crate::model::{predict, ElmParams};
use crate::solvers::{AlgorithmKind, SolverState};

/// Activation rows of the first `nodes` hidden nodes over the columns of `x`.
pub fn hidden_rows(params: &ElmParams, x: &Matrix, nodes: usize) -> Result<Vec<Vec<f64>>> {
    if nodes > params.nodes() {
        return Err(ElmError::domain(format!(
            "{nodes} nodes requested from a {}-node layer",
            params.nodes()
        )));
    }
    (0..nodes).map(|i| params.node_row(i, x)).collect()
}

/// `‖(W_a − W_b)·H‖_F` with `H` given by its first `W.cols()` rows.
fn output_distance(wa: &Matrix, wb: &Matrix, rows: &[Vec<f64>]) -> Result<f64> {
    if wa.shape() != wb.shape() {
        return Err(ElmError::shape("output error", wa.shape(), wb.shape()));
    }
    let k = rows.first().map_or(0, Vec::len);
    let mut total = 0.0;
    let mut z = vec![0.0; k];
    for m in 0..wa.rows() {
        z.iter_mut().for_each(|v| *v = 0.0);
        for (i, row) in rows.iter().take(wa.cols()).enumerate() {
            axpy(wa.get(m, i) - wb.get(m, i), row, &mut z);
        }
        total += z.iter().map(|v| v * v).sum::<f64>();
    }
    Ok(total.sqrt())
}

fn weight_distance(wa: &Matrix, wb: &Matrix) -> f64 {
    wa.as_slice()
        .iter()
        .zip(wb.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Node schedule and regularization of a growth run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub start: usize,
    pub end: usize,
    pub k0sq: f64,
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.start == 0 {
            return Err(ElmError::domain("start must be at least 1"));
        }
        if self.end < self.start {
            return Err(ElmError::domain(format!("end {} is below start {}", self.end, self.start)));
        }
        if !(self.k0sq > 0.0 && self.k0sq.is_finite()) {
            return Err(ElmError::domain(format!("k0sq must be positive and finite, got {}", self.k0sq)));
        }
        Ok(())
    }
}

/// Result of growing one algorithm.
#[derive(Clone, Debug)]
pub struct GrowthRun {
    pub kind: AlgorithmKind,
    pub trace: GrowthTrace,
    /// Weights after the last successful step.
    pub weights: Matrix,
}

fn start_state(kind: AlgorithmKind, rows: &[Vec<f64>], y: &Matrix, k0sq: f64) -> Result<SolverState> {
    if rows.len() == 1 {
        SolverState::init(kind, &rows[0], y, k0sq)
    } else {
        SolverState::warm_start(kind, &Matrix::from_rows(rows)?, y, k0sq)
    }
}

/// Grows every algorithm in `kinds` from `start` to `end` nodes alongside the
/// direct solve, recording weight and output errors against it at every
/// node count.
///
/// A solver failure ends that algorithm's trace and is stored in
/// `trace.failure`; the others continue. Timing covers `add_node` only.
pub fn grow_lockstep(
    rows: &[Vec<f64>],
    y: &Matrix,
    kinds: &[AlgorithmKind],
    schedule: Schedule,
) -> Result<Vec<GrowthRun>> {
    schedule.validate()?;
    if rows.len() < schedule.end {
        return Err(ElmError::domain(format!("{} hidden rows for end = {}", rows.len(), schedule.end)));
    }
    let Schedule { start, end, k0sq } = schedule;

    let mut reference = start_state(AlgorithmKind::Baseline, &rows[..start], y, k0sq)?;
    let mut states: Vec<Option<SolverState>> = Vec::with_capacity(kinds.len());
    let mut runs: Vec<GrowthRun> = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let mut trace = GrowthTrace::new();
        let state = match start_state(kind, &rows[..start], y, k0sq) {
            Ok(s) => Some(s),
            Err(e) => {
                trace.failure = Some(format!("l={start}: {e}"));
                None
            }
        };
        runs.push(GrowthRun {
            kind,
            trace,
            weights: state.as_ref().map_or_else(|| Matrix::zeros(0, 0), |s| s.weights().clone()),
        });
        states.push(state);
    }

    let record = |run: &mut GrowthRun, state: &SolverState, reference: &SolverState, flops: u64, ns: u64| -> Result<()> {
        let l = state.nodes();
        let weight_error = weight_distance(state.weights(), reference.weights());
        let output_error = output_distance(state.weights(), reference.weights(), &rows[..l])?;
        run.weights = state.weights().clone();
        run.trace.push(TraceRecord {
            l,
            weight_error,
            output_error,
            flops,
            elapsed_ns: ns,
        })
    };

    for (run, state) in runs.iter_mut().zip(&states) {
        if let Some(s) = state {
            record(run, s, &reference, 0, 0)?;
        }
    }

    for row in &rows[start..end] {
        let l = reference.nodes() + 1;
        if let Err(e) = reference.add_node(row) {
            for (run, state) in runs.iter_mut().zip(states.iter_mut()) {
                if state.take().is_some() {
                    run.trace.failure = Some(format!("l={l}: reference solve failed: {e}"));
                }
            }
            break;
        }
        for (run, slot) in runs.iter_mut().zip(states.iter_mut()) {
            let Some(state) = slot else { continue };
            let t0 = Instant::now();
            let outcome = state.add_node(row);
            let ns = t0.elapsed().as_nanos() as u64;
            match outcome {
                Ok(step) => record(run, state, &reference, step.total_flops(), ns)?,
                Err(e) => {
                    run.trace.failure = Some(format!("l={l}: {e}"));
                    *slot = None;
                }
            }
        }
    }
    Ok(runs)
}

/// Timing and flop counts of one node addition at a fixed layer size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub algorithm: AlgorithmKind,
    /// Node count before the timed step.
    pub nodes: usize,
    pub samples: usize,
    pub outputs: usize,
    pub repeats: usize,
    pub mean_ns: f64,
    pub min_ns: u64,
    /// Flops of products involving the sample dimension.
    pub sample_flops: u64,
    pub node_flops: u64,
    pub total_flops: u64,
    /// Leading-order cost model, where one exists.
    pub model_flops: Option<f64>,
    /// `sample_flops / model_flops`.
    pub model_ratio: Option<f64>,
}

/// Times the addition of node `l + 1` to an `l`-node state, `repeats` times
/// per algorithm. Repeats are interleaved across algorithms; each one starts
/// from a fresh copy of the warm-started state.
pub fn bench_step(
    rows: &[Vec<f64>],
    y: &Matrix,
    kinds: &[AlgorithmKind],
    l: usize,
    k0sq: f64,
    repeats: usize,
) -> Result<Vec<BenchEntry>> {
    if repeats == 0 {
        return Err(ElmError::domain("repeats must be at least 1"));
    }
    if l == 0 || rows.len() <= l {
        return Err(ElmError::domain(format!("benchmark at l = {l} needs {} hidden rows", l + 1)));
    }
    let next = &rows[l];
    let bases: Vec<SolverState> = kinds
        .iter()
        .map(|&kind| start_state(kind, &rows[..l], y, k0sq))
        .collect::<Result<_>>()?;

    let mut steps = Vec::with_capacity(kinds.len());
    for base in &bases {
        // Warm-up step, also the source of the flop counts.
        steps.push(base.clone().add_node(next)?);
    }
    let mut times: Vec<Vec<u64>> = vec![Vec::with_capacity(repeats); kinds.len()];
    for _ in 0..repeats {
        for (base, t) in bases.iter().zip(times.iter_mut()) {
            let mut state = base.clone();
            let t0 = Instant::now();
            let step = state.add_node(black_box(next));
            t.push(t0.elapsed().as_nanos() as u64);
            black_box((step?, state));
        }
    }

    let (k, m) = (y.cols(), y.rows());
    Ok(kinds
        .iter()
        .zip(steps.iter().zip(&times))
        .map(|(&kind, (step, t))| {
            let model = kind.model_flops(l, k, m);
            BenchEntry {
                algorithm: kind,
                nodes: l,
                samples: k,
                outputs: m,
                repeats,
                mean_ns: t.iter().sum::<u64>() as f64 / t.len() as f64,
                min_ns: *t.iter().min().expect("repeats ≥ 1"),
                sample_flops: step.sample_flops,
                node_flops: step.node_flops,
                total_flops: step.total_flops(),
                model_flops: model,
                model_ratio: model.map(|f| step.sample_flops as f64 / f),
            }
        })
        .collect())
}

/// Test metrics of one algorithm on one fold.
pub type Metrics = BTreeMap<String, f64>;

fn test_metrics(task: Task, z: &Matrix, y: &Matrix) -> Result<Metrics> {
    let mut out = Metrics::new();
    match task {
        Task::Regression => {
            out.insert("mse".into(), mse(z, y)?);
        }
        Task::Classification => {
            let r = classification_metrics(z, y)?;
            out.insert("acc".into(), r.acc);
            out.insert("sn".into(), r.sn);
            out.insert("pe".into(), r.pe);
            out.insert("mcc".into(), r.mcc);
        }
    }
    Ok(out)
}

/// Cross-validation settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvSettings {
    pub folds: usize,
    pub seed: u64,
    pub schedule: Schedule,
    /// Rescale features to `[−1, 1]` using each training fold's ranges.
    pub normalize: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmEval {
    pub algorithm: AlgorithmKind,
    pub folds: Vec<Metrics>,
    pub summary: BTreeMap<String, MeanVar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// k-fold cross-validation of every algorithm grown to `schedule.end` nodes.
pub fn cross_validate(
    ds: &Dataset,
    params: &ElmParams,
    kinds: &[AlgorithmKind],
    cv: CvSettings,
) -> Result<Vec<AlgorithmEval>> {
    cv.schedule.validate()?;
    let splits = kfold_split(ds.samples(), cv.folds, cv.seed)?;
    let mut per_alg: Vec<AlgorithmEval> = kinds
        .iter()
        .map(|&algorithm| AlgorithmEval {
            algorithm,
            folds: Vec::new(),
            summary: BTreeMap::new(),
            failure: None,
        })
        .collect();

    for (f, fold) in splits.iter().enumerate() {
        let (mut train, mut test) = (ds.subset(&fold.train), ds.subset(&fold.test));
        if cv.normalize {
            let (scaled, scaling) = normalize_features(&train)?;
            test.x = scaling.apply(&test.x)?;
            train = scaled;
        }
        let rows = hidden_rows(params, &train.x, cv.schedule.end)?;
        let test_rows = Matrix::from_rows(&hidden_rows(params, &test.x, cv.schedule.end)?)?;
        let runs = grow_lockstep(&rows, &train.y, kinds, cv.schedule)?;
        for (eval, run) in per_alg.iter_mut().zip(runs) {
            if eval.failure.is_some() {
                continue;
            }
            if let Some(msg) = run.trace.failure {
                eval.failure = Some(format!("fold {f}: {msg}"));
                continue;
            }
            let z = predict(&run.weights, &test_rows)?;
            eval.folds.push(test_metrics(ds.task, &z, &test.y)?);
        }
    }

    for eval in &mut per_alg {
        if eval.failure.is_some() {
            continue;
        }
        let names: Vec<String> = eval.folds.first().map(|m| m.keys().cloned().collect()).unwrap_or_default();
        for name in names {
            let values: Vec<f64> = eval.folds.iter().map(|m| m[&name]).collect();
            eval.summary.insert(name, MeanVar::of(&values));
        }
    }
    Ok(per_alg)
}

/// Error bound applied to the steps with `l ≤ up_to`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub tolerance: f64,
    pub up_to: usize,
}

/// Default bounds: 1e-8 through 100 nodes for the stable recursions and
/// 1e-4 through 500 nodes for the explicit-inverse one.
pub fn default_threshold(kind: AlgorithmKind) -> Option<Threshold> {
    match kind {
        AlgorithmKind::Baseline => None,
        AlgorithmKind::Alg2 => Some(Threshold {
            tolerance: 1e-4,
            up_to: 500,
        }),
        _ => Some(Threshold {
            tolerance: 1e-8,
            up_to: 100,
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareEntry {
    pub algorithm: AlgorithmKind,
    pub threshold: Option<Threshold>,
    pub max_weight_error: f64,
    pub max_output_error: f64,
    /// Node count of the largest weight error.
    pub worst_step: Option<usize>,
    pub passed: bool,
    /// First violation or solver failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Checks each trace against its threshold (`override_tolerance` replaces
/// every tolerance). A trace without a threshold is reported and passes.
pub fn compare_runs(runs: &[GrowthRun], override_tolerance: Option<f64>) -> Vec<CompareEntry> {
    runs.iter()
        .map(|run| {
            let threshold = default_threshold(run.kind).map(|t| Threshold {
                tolerance: override_tolerance.unwrap_or(t.tolerance),
                ..t
            });
            let worst_step = run
                .trace
                .records
                .iter()
                .max_by(|a, b| a.weight_error.total_cmp(&b.weight_error))
                .map(|r| r.l);
            let mut failure = run.trace.failure.clone();
            if let (None, Some(t)) = (&failure, threshold) {
                failure = run
                    .trace
                    .records
                    .iter()
                    .filter(|r| r.l <= t.up_to)
                    .find(|r| !(r.weight_error <= t.tolerance && r.output_error <= t.tolerance))
                    .map(|r| {
                        format!(
                            "{} at l={}: weight error {:e}, output error {:e} exceed {:e}",
                            run.kind, r.l, r.weight_error, r.output_error, t.tolerance
                        )
                    });
            }
            CompareEntry {
                algorithm: run.kind,
                threshold,
                max_weight_error: run.trace.max_weight_error(),
                max_output_error: run.trace.max_output_error(),
                worst_step,
                passed: failure.is_none(),
                failure,
            }
        })
        .collect()
}
