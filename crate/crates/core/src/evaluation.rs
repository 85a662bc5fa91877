//! Error measures, classification metrics and fold splitting.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ElmError, Result};
use crate::linalg::{frobenius_distance, Matrix};

/// One row of a growth trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub l: usize,
    pub weight_error: f64,
    pub output_error: f64,
    pub flops: u64,
    pub elapsed_ns: u64,
}

/// Per-step errors against the reference solve during a growth run.
///
/// A run that stops on a solver failure keeps the records up to the failing
/// step and the diagnostic in `failure`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GrowthTrace {
    pub records: Vec<TraceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl GrowthTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; `l` must follow the previous record by exactly one.
    pub fn push(&mut self, record: TraceRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.l != last.l + 1 {
                return Err(ElmError::domain(format!(
                    "trace records must be consecutive: {} after {}",
                    record.l, last.l
                )));
            }
        }
        if !(record.weight_error >= 0.0 && record.output_error >= 0.0) {
            return Err(ElmError::domain("trace errors must be non-negative"));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn at(&self, l: usize) -> Option<&TraceRecord> {
        let first = self.records.first()?.l;
        self.records.get(l.checked_sub(first)?)
    }

    pub fn max_weight_error(&self) -> f64 {
        self.records.iter().map(|r| r.weight_error).fold(0.0, f64::max)
    }

    pub fn max_output_error(&self) -> f64 {
        self.records.iter().map(|r| r.output_error).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        if self.records.is_empty() {
            w.write_record(["l", "weight_error", "output_error", "flops", "elapsed_ns"])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut trace = GrowthTrace::new();
        for rec in csv::Reader::from_reader(input).deserialize() {
            trace.push(rec?)?;
        }
        Ok(trace)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Binary confusion counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        ratio((self.tp + self.tn) as f64, self.total() as f64)
    }

    pub fn sensitivity(&self) -> f64 {
        ratio(self.tp as f64, (self.tp + self.fn_) as f64)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp as f64, (self.tp + self.fp) as f64)
    }

    pub fn mcc(&self) -> f64 {
        let (tp, tn, fp, fn_) = (self.tp as f64, self.tn as f64, self.fp as f64, self.fn_ as f64);
        let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
        ratio(tp * tn - fp * fn_, den)
    }
}

/// `num/den`, with `0/0` (or any zero denominator) read as 0.
fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// ACC, SN, PE and MCC with the underlying counts.
///
/// For more than two classes `confusion` sums the one-vs-rest counts, `acc`
/// is the plain fraction of correct labels and SN/PE/MCC are macro averages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub acc: f64,
    pub sn: f64,
    pub pe: f64,
    pub mcc: f64,
    pub confusion: Confusion,
}

impl ClassificationReport {
    pub fn from_confusion(c: Confusion) -> Self {
        ClassificationReport {
            acc: c.accuracy(),
            sn: c.sensitivity(),
            pe: c.precision(),
            mcc: c.mcc(),
            confusion: c,
        }
    }
}

/// `‖Z − Y‖_F² / (M·K)`.
pub fn mse(z: &Matrix, y: &Matrix) -> Result<f64> {
    if z.shape() != y.shape() {
        return Err(ElmError::shape("mse", z.shape(), y.shape()));
    }
    if z.as_slice().is_empty() {
        return Err(ElmError::domain("mse of an empty matrix"));
    }
    let sq: f64 = z.as_slice().iter().zip(y.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sq / z.as_slice().len() as f64)
}

/// Label of each column. A single row is read by sign, with positive values
/// as class 0; otherwise the first maximal row wins.
fn labels(z: &Matrix) -> Vec<usize> {
    (0..z.cols())
        .map(|k| {
            if z.rows() == 1 {
                usize::from(z.get(0, k) <= 0.0)
            } else {
                let mut best = 0;
                for m in 1..z.rows() {
                    if z.get(m, k) > z.get(best, k) {
                        best = m;
                    }
                }
                best
            }
        })
        .collect()
}

fn one_vs_rest(pred: &[usize], truth: &[usize], class: usize) -> Confusion {
    let mut c = Confusion::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (p == class, t == class) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

/// Classification metrics of outputs `Z` against targets `Y`.
///
/// One output row is sign-coded with positive outputs as the positive class.
/// Two rows are one-hot with row 0 as the positive class. More rows are
/// one-hot and averaged over classes.
pub fn classification_metrics(z: &Matrix, y: &Matrix) -> Result<ClassificationReport> {
    if z.shape() != y.shape() {
        return Err(ElmError::shape("classification_metrics", z.shape(), y.shape()));
    }
    if z.cols() == 0 || z.rows() == 0 {
        return Err(ElmError::domain("classification metrics need at least one sample"));
    }
    let pred = labels(z);
    let truth = labels(y);
    if z.rows() <= 2 {
        return Ok(ClassificationReport::from_confusion(one_vs_rest(&pred, &truth, 0)));
    }

    let classes = z.rows();
    let mut total = Confusion::default();
    let (mut sn, mut pe, mut mcc) = (0.0, 0.0, 0.0);
    for class in 0..classes {
        let c = one_vs_rest(&pred, &truth, class);
        sn += c.sensitivity();
        pe += c.precision();
        mcc += c.mcc();
        total.tp += c.tp;
        total.tn += c.tn;
        total.fp += c.fp;
        total.fn_ += c.fn_;
    }
    let correct = pred.iter().zip(&truth).filter(|(p, t)| p == t).count();
    let n = classes as f64;
    Ok(ClassificationReport {
        acc: correct as f64 / pred.len() as f64,
        sn: sn / n,
        pe: pe / n,
        mcc: mcc / n,
        confusion: total,
    })
}

/// `(‖W_alg − W_base‖_F, ‖Z_alg − Z_base‖_F)`.
pub fn weight_output_errors(
    w_alg: &Matrix,
    w_base: &Matrix,
    z_alg: &Matrix,
    z_base: &Matrix,
) -> Result<(f64, f64)> {
    Ok((frobenius_distance(w_alg, w_base)?, frobenius_distance(z_alg, z_base)?))
}

/// One cross-validation fold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded `folds`-way split of `0..k`.
///
/// The indices are shuffled once and cut into consecutive test blocks; the
/// first `k % folds` blocks carry one extra index. Train sets are sorted.
pub fn kfold_split(k: usize, folds: usize, seed: u64) -> Result<Vec<Fold>> {
    if folds < 2 {
        return Err(ElmError::domain(format!("need at least 2 folds, got {folds}")));
    }
    if folds > k {
        return Err(ElmError::domain(format!("{folds} folds for {k} samples")));
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let (base, extra) = (k / folds, k % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        let mut test = order[start..start + size].to_vec();
        test.sort_unstable();
        let mut train: Vec<usize> = order[..start].iter().chain(&order[start + size..]).copied().collect();
        train.sort_unstable();
        out.push(Fold { train, test });
        start += size;
    }
    Ok(out)
}

/// Mean and population variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanVar {
    pub mean: f64,
    pub variance: f64,
}

impl MeanVar {
    pub fn of(values: &[f64]) -> MeanVar {
        if values.is_empty() {
            return MeanVar { mean: f64::NAN, variance: f64::NAN };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MeanVar { mean, variance }
    }
}
