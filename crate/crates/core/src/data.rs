//! Datasets: CSV ingestion and export, feature scaling and synthetic data.
//!
//! Samples are columns: `X` is N×K and `Y` is M×K, while files hold one
//! sample per row with the targets in the last columns.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ElmError, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

impl FromStr for Task {
    type Err = ElmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regression" | "reg" => Ok(Task::Regression),
            "classification" | "class" | "cls" => Ok(Task::Classification),
            other => Err(ElmError::domain(format!("unknown task `{other}`"))),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Regression => "regression",
            Task::Classification => "classification",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Matrix,
    pub task: Task,
    pub feature_names: Option<Vec<String>>,
    /// Generating process for synthetic data, source path for loaded data.
    pub description: Option<String>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Matrix, task: Task) -> Result<Self> {
        if x.cols() != y.cols() {
            return Err(ElmError::shape("dataset", x.shape(), y.shape()));
        }
        if x.cols() == 0 || x.rows() == 0 || y.rows() == 0 {
            return Err(ElmError::domain("dataset needs at least one sample, feature and target"));
        }
        Ok(Dataset {
            x,
            y,
            task,
            feature_names: None,
            description: None,
        })
    }

    pub fn samples(&self) -> usize {
        self.x.cols()
    }

    pub fn features(&self) -> usize {
        self.x.rows()
    }

    pub fn outputs(&self) -> usize {
        self.y.rows()
    }

    /// The samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_columns(indices),
            y: self.y.select_columns(indices),
            task: self.task,
            feature_names: self.feature_names.clone(),
            description: self.description.clone(),
        }
    }
}

fn parse_error(line: u64, column: Option<usize>, message: impl Into<String>) -> ElmError {
    ElmError::Parse {
        line: line as usize,
        column,
        message: message.into(),
    }
}

/// Reads a comma-separated file with one sample per row and the targets in
/// the last `target_columns` columns.
///
/// Classification files carry one label column; labels are one-hot encoded
/// with classes numbered by first appearance. Line and column numbers in
/// errors are 1-based.
pub fn load_csv(path: &Path, target_columns: usize, task: Task, has_header: bool) -> Result<Dataset> {
    let file = std::fs::File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    let mut ds = read_csv(file, target_columns, task, has_header)?;
    ds.description = Some(path.display().to_string());
    Ok(ds)
}

/// `load_csv` over any reader.
pub fn read_csv<R: std::io::Read>(input: R, target_columns: usize, task: Task, has_header: bool) -> Result<Dataset> {
    if target_columns == 0 {
        return Err(ElmError::domain("need at least one target column"));
    }
    if task == Task::Classification && target_columns != 1 {
        return Err(ElmError::domain("classification files carry a single label column"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let header: Option<Vec<String>> = if has_header {
        Some(reader.headers()?.iter().map(str::to_owned).collect())
    } else {
        None
    };

    let mut width = None;
    let mut features: Vec<Vec<f64>> = Vec::new();
    let mut targets: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_error(line, None, format!("expected {w} fields, found {}", record.len())));
        }
        if w <= target_columns {
            return Err(parse_error(
                line,
                None,
                format!("{w} fields leave no feature columns besides {target_columns} targets"),
            ));
        }
        let mut values = Vec::with_capacity(w);
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_error(line, Some(j + 1), format!("not a number: `{cell}`")))?;
            if !v.is_finite() {
                return Err(parse_error(line, Some(j + 1), format!("non-finite value `{cell}`")));
            }
            values.push(v);
        }
        targets.push(values.split_off(w - target_columns));
        features.push(values);
    }
    let Some(width) = width else {
        return Err(ElmError::domain("empty data file"));
    };
    if let Some(h) = &header {
        if h.len() != width {
            return Err(parse_error(1, None, format!("header has {} fields, rows have {width}", h.len())));
        }
    }

    let k = features.len();
    let x = Matrix::from_fn(width - target_columns, k, |i, j| features[j][i]);
    let y = match task {
        Task::Regression => Matrix::from_fn(target_columns, k, |i, j| targets[j][i]),
        Task::Classification => {
            let labels: Vec<f64> = targets.iter().map(|t| t[0]).collect();
            let mut classes: Vec<f64> = Vec::new();
            for &l in &labels {
                if !classes.contains(&l) {
                    classes.push(l);
                }
            }
            Matrix::from_fn(classes.len(), k, |c, j| f64::from(labels[j] == classes[c]))
        }
    };
    let mut ds = Dataset::new(x, y, task)?;
    ds.feature_names = header.map(|mut h| {
        h.truncate(width - target_columns);
        h
    });
    Ok(ds)
}

/// Writes one sample per row, features first. Classification targets are
/// written as a single class-index column; a dataset whose classes are
/// numbered by first appearance, as `load_csv` numbers them, reloads to the
/// same one-hot matrix.
pub fn write_csv(ds: &Dataset, path: &Path, header: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if header {
        let mut names: Vec<String> = match &ds.feature_names {
            Some(n) => n.clone(),
            None => (0..ds.features()).map(|i| format!("x{i}")).collect(),
        };
        match ds.task {
            Task::Regression => names.extend((0..ds.outputs()).map(|i| format!("y{i}"))),
            Task::Classification => names.push("label".into()),
        }
        w.write_record(&names)?;
    }
    for k in 0..ds.samples() {
        let mut row: Vec<String> = ds.x.column(k).iter().map(f64::to_string).collect();
        match ds.task {
            Task::Regression => row.extend(ds.y.column(k).iter().map(f64::to_string)),
            Task::Classification => {
                let col = ds.y.column(k);
                let class = col.iter().position(|&v| v == 1.0).ok_or_else(|| {
                    ElmError::domain(format!("sample {k} has no one-hot class label"))
                })?;
                row.push(class.to_string());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-feature affine map of `[min, max]` onto `[−1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    pub ranges: Vec<(f64, f64)>,
}

impl FeatureScaling {
    pub fn fit(x: &Matrix) -> FeatureScaling {
        let ranges = (0..x.rows())
            .map(|i| {
                x.row(i)
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
            })
            .collect();
        FeatureScaling { ranges }
    }

    /// Maps every feature row; constant features become 0.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.rows() != self.ranges.len() {
            return Err(ElmError::shape("feature scaling", x.shape(), (self.ranges.len(), x.cols())));
        }
        Ok(Matrix::from_fn(x.rows(), x.cols(), |i, k| {
            let (lo, hi) = self.ranges[i];
            if hi > lo {
                2.0 * ((x.get(i, k) - lo) / (hi - lo)) - 1.0
            } else {
                0.0
            }
        }))
    }
}

/// Rescales every feature of `ds` to `[−1, 1]` and returns the map for reuse
/// on held-out data.
pub fn normalize_features(ds: &Dataset) -> Result<(Dataset, FeatureScaling)> {
    let scaling = FeatureScaling::fit(&ds.x);
    let mut out = ds.clone();
    out.x = scaling.apply(&ds.x)?;
    Ok((out, scaling))
}

/// Synthetic generators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthKind {
    /// Regression: each target is a sum of sines of random projections of
    /// the inputs.
    SineMixture,
    /// Regression: `Y = C·X` plus Gaussian noise of standard deviation `noise`.
    LinearNoisy { noise: f64 },
    /// Binary classification: two Gaussian clouds with unit-separated means.
    TwoGaussians,
}

impl FromStr for SynthKind {
    type Err = ElmError;

    /// `sine`, `linear`, `linear:<noise>` or `gaussians`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let (name, arg) = match lower.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (lower.as_str(), None),
        };
        match (name, arg) {
            ("sine" | "sine-mixture", None) => Ok(SynthKind::SineMixture),
            ("gaussians" | "two-gaussians", None) => Ok(SynthKind::TwoGaussians),
            ("linear" | "linear-noisy", None) => Ok(SynthKind::LinearNoisy { noise: 0.0 }),
            ("linear" | "linear-noisy", Some(a)) => {
                let noise: f64 = a.parse().map_err(|_| ElmError::domain(format!("bad noise level `{a}`")))?;
                if !(noise >= 0.0 && noise.is_finite()) {
                    return Err(ElmError::domain(format!("noise level must be non-negative, got {noise}")));
                }
                Ok(SynthKind::LinearNoisy { noise })
            }
            _ => Err(ElmError::domain(format!("unknown synthetic dataset `{s}`"))),
        }
    }
}

impl SynthKind {
    pub fn task(&self) -> Task {
        match self {
            SynthKind::TwoGaussians => Task::Classification,
            _ => Task::Regression,
        }
    }
}

/// Seeded synthetic dataset with K samples, N features and M targets.
///
/// Inputs are uniform on `[−1, 1]` except for `TwoGaussians`, whose classes
/// are drawn with equal probability; it needs `M = 2`.
pub fn synth_dataset(kind: SynthKind, k: usize, n: usize, m: usize, seed: u64) -> Result<Dataset> {
    if k == 0 || n == 0 || m == 0 {
        return Err(ElmError::domain(format!("synthetic dataset needs K, N, M ≥ 1, got {k}, {n}, {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform = |rng: &mut ChaCha8Rng, rows: usize, cols: usize| {
        let data = (0..rows * cols).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Matrix::from_vec(rows, cols, data)
    };

    let (x, y, description) = match kind {
        SynthKind::SineMixture => {
            let x = uniform(&mut rng, n, k)?;
            let proj = uniform(&mut rng, m, n)?;
            let phase = uniform(&mut rng, m, 1)?;
            let y = Matrix::from_fn(m, k, |i, j| {
                let s: f64 = (0..n).map(|f| proj.get(i, f) * x.get(f, j)).sum();
                (3.0 * s + phase.get(i, 0)).sin() + 0.5 * (5.0 * s).sin()
            });
            (x, y, format!("sine mixture: y_i = sin(3 a_i·x + b_i) + 0.5 sin(5 a_i·x), seed {seed}"))
        }
        SynthKind::LinearNoisy { noise } => {
            if !(noise >= 0.0 && noise.is_finite()) {
                return Err(ElmError::domain(format!("noise level must be non-negative, got {noise}")));
            }
            let x = uniform(&mut rng, n, k)?;
            let c = uniform(&mut rng, m, n)?;
            let normal = Normal::new(0.0, noise).map_err(|e| ElmError::domain(e.to_string()))?;
            let y = Matrix::from_fn(m, k, |i, j| {
                (0..n).map(|f| c.get(i, f) * x.get(f, j)).sum::<f64>() + normal.sample(&mut rng)
            });
            (x, y, format!("linear: y = C x + N(0, {noise}²), C uniform on [-1, 1], seed {seed}"))
        }
        SynthKind::TwoGaussians => {
            if m != 2 {
                return Err(ElmError::domain(format!("two-gaussians data has 2 outputs, got M = {m}")));
            }
            // Means at ±mu with ‖mu‖ = 1 and per-coordinate spread 0.4.
            let dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let mu: Vec<f64> = dir.iter().map(|v| v / len).collect();
            let spread = Normal::new(0.0, 0.4).expect("valid spread");
            let mut x = Matrix::zeros(n, k);
            let mut y = Matrix::zeros(2, k);
            for j in 0..k {
                let class = usize::from(rng.random_bool(0.5));
                let sign = if class == 0 { 1.0 } else { -1.0 };
                for f in 0..n {
                    x.set(f, j, sign * mu[f] + spread.sample(&mut rng));
                }
                y.set(class, j, 1.0);
            }
            (x, y, format!("two gaussians: means ±mu, |mu| = 1, sd 0.4, seed {seed}"))
        }
    };
    let mut ds = Dataset::new(x, y, kind.task())?;
    ds.description = Some(description);
    Ok(ds)
}
