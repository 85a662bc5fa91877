//! Command-line front end: argument parsing, run configuration and the
//! `grow`, `bench`, `eval` and `compare` commands with their report files.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::data::{load_csv, normalize_features, synth_dataset, Dataset, SynthKind, Task};
use crate::error::{ElmError, Result};
use crate::evaluation::GrowthTrace;
use crate::experiment::{
    bench_step, compare_runs, cross_validate, grow_lockstep, hidden_rows, AlgorithmEval, BenchEntry, CompareEntry,
    CvSettings, GrowthRun, Schedule,
};
use crate::model::{init_random_params, ActivationKind, ElmParams};
use crate::solvers::{AlgorithmKind, DEFAULT_K0SQ};

#[derive(Debug, Parser)]
#[command(name = "ifelm", version, about = "Incremental extreme learning machine training without matrix inversion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grow each algorithm node by node and trace its error against the direct solve.
    Grow(RunArgs),
    /// Time one node addition per algorithm and count its flops.
    Bench(RunArgs),
    /// Cross-validate each algorithm at the final node count.
    Eval(RunArgs),
    /// Check every algorithm against its error threshold; exits nonzero on failure.
    Compare(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// CSV file with one sample per row and targets in the last columns.
    #[arg(long, conflicts_with = "synth")]
    pub data: Option<PathBuf>,
    /// Synthetic data: sine, linear[:noise] or gaussians.
    #[arg(long)]
    pub synth: Option<SynthKind>,
    /// Number of target columns in the CSV file.
    #[arg(long, default_value_t = 1)]
    pub targets: usize,
    /// Task of the CSV data.
    #[arg(long, default_value = "regression")]
    pub task: Task,
    /// The CSV file starts with a header row.
    #[arg(long)]
    pub header: bool,
    /// Synthetic sample count K.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Synthetic feature count N.
    #[arg(long, default_value_t = 8)]
    pub features: usize,
    /// Synthetic output count M [default: 2 for gaussians, 3 otherwise].
    #[arg(long)]
    pub outputs: Option<usize>,
    #[arg(long, default_value = "gaussian")]
    pub kernel: ActivationKind,
    #[arg(long, default_value_t = DEFAULT_K0SQ, allow_hyphen_values = true)]
    pub k0sq: f64,
    /// Initial node count.
    #[arg(long, default_value_t = 1)]
    pub start: usize,
    /// Final node count; `bench` times the step from `end` to `end + 1`.
    #[arg(long, default_value_t = 100)]
    pub end: usize,
    /// Comma-separated algorithms: baseline, existing, alg1, alg2, alg3.
    #[arg(long = "alg", value_delimiter = ',')]
    pub algorithms: Vec<AlgorithmKind>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 100)]
    pub repeats: usize,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Replace every `compare` tolerance.
    #[arg(long, allow_hyphen_values = true)]
    pub tolerance: Option<f64>,
    /// Keep features unscaled instead of mapping them to [-1, 1].
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        targets: usize,
        task: Task,
        header: bool,
    },
    Synth {
        kind: SynthKind,
        samples: usize,
        features: usize,
        outputs: usize,
    },
}

/// Validated settings shared by every command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub data: DataSource,
    pub kernel: ActivationKind,
    pub k0sq: f64,
    pub start: usize,
    pub end: usize,
    pub algorithms: Vec<AlgorithmKind>,
    pub seed: u64,
    pub folds: usize,
    pub repeats: usize,
    pub normalize: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip)]
    pub out: PathBuf,
}

impl TryFrom<RunArgs> for RunConfig {
    type Error = ElmError;

    fn try_from(a: RunArgs) -> Result<Self> {
        let data = match (a.data, a.synth) {
            (Some(path), _) => DataSource::Csv {
                path,
                targets: a.targets,
                task: a.task,
                header: a.header,
            },
            (None, synth) => {
                let kind = synth.unwrap_or(SynthKind::SineMixture);
                let default_outputs = if kind == SynthKind::TwoGaussians { 2 } else { 3 };
                DataSource::Synth {
                    kind,
                    samples: a.samples,
                    features: a.features,
                    outputs: a.outputs.unwrap_or(default_outputs),
                }
            }
        };
        let mut algorithms = a.algorithms;
        if algorithms.is_empty() {
            algorithms = AlgorithmKind::ALL.to_vec();
        }
        let mut seen = BTreeSet::new();
        algorithms.retain(|k| seen.insert(k.name()));
        let config = RunConfig {
            data,
            kernel: a.kernel,
            k0sq: a.k0sq,
            start: a.start,
            end: a.end,
            algorithms,
            seed: a.seed,
            folds: a.folds,
            repeats: a.repeats,
            normalize: !a.no_normalize,
            tolerance: a.tolerance,
            out: a.out,
        };
        config.validate()?;
        Ok(config)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.schedule().validate()?;
        if self.folds < 2 {
            return Err(ElmError::domain(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.repeats == 0 {
            return Err(ElmError::domain("repeats must be at least 1"));
        }
        if let Some(t) = self.tolerance {
            if !(t >= 0.0) {
                return Err(ElmError::domain(format!("tolerance must be non-negative, got {t}")));
            }
        }
        Ok(())
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            start: self.start,
            end: self.end,
            k0sq: self.k0sq,
        }
    }

    /// The dataset, rescaled to `[−1, 1]` unless normalization is off.
    pub fn dataset(&self) -> Result<Dataset> {
        self.raw_dataset().and_then(|ds| {
            if self.normalize {
                Ok(normalize_features(&ds)?.0)
            } else {
                Ok(ds)
            }
        })
    }

    fn raw_dataset(&self) -> Result<Dataset> {
        match &self.data {
            DataSource::Csv {
                path,
                targets,
                task,
                header,
            } => load_csv(path, *targets, *task, *header),
            DataSource::Synth {
                kind,
                samples,
                features,
                outputs,
            } => synth_dataset(*kind, *samples, *features, *outputs, self.seed),
        }
    }

    /// Hidden layer of `nodes` nodes. Its seed is one past the data seed.
    pub fn params(&self, inputs: usize, nodes: usize) -> Result<ElmParams> {
        init_random_params(nodes, inputs, self.kernel, self.seed.wrapping_add(1))
    }

    fn out_file(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out)?;
        Ok(self.out.join(name))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct DatasetInfo {
    samples: usize,
    features: usize,
    outputs: usize,
    task: Task,
    #[serde(skip_serializing_if = "Option::is_none")]
    description: Option<String>,
}

impl From<&Dataset> for DatasetInfo {
    fn from(ds: &Dataset) -> Self {
        DatasetInfo {
            samples: ds.samples(),
            features: ds.features(),
            outputs: ds.outputs(),
            task: ds.task,
            description: ds.description.clone(),
        }
    }
}

/// Node counts reported in `summary.json`: 3, 100 and 500 where the
/// schedule reaches them, plus the final count.
pub fn checkpoints(start: usize, end: usize) -> Vec<usize> {
    let mut c: Vec<usize> = [3, 100, 500].into_iter().filter(|l| (start..=end).contains(l)).collect();
    if c.last() != Some(&end) {
        c.push(end);
    }
    c
}

#[derive(Serialize)]
struct CheckpointError {
    l: usize,
    weight_error: f64,
    output_error: f64,
}

#[derive(Serialize)]
struct GrowEntry {
    algorithm: AlgorithmKind,
    steps: usize,
    max_weight_error: f64,
    max_output_error: f64,
    total_flops: u64,
    checkpoints: Vec<CheckpointError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
}

#[derive(Serialize)]
struct GrowSummary<'a> {
    config: &'a RunConfig,
    dataset: DatasetInfo,
    algorithms: Vec<GrowEntry>,
}

#[derive(Serialize)]
struct TimingEntry {
    algorithm: AlgorithmKind,
    total_ns: u64,
    mean_step_ns: f64,
}

fn grow_runs(config: &RunConfig, ds: &Dataset) -> Result<Vec<GrowthRun>> {
    let params = config.params(ds.features(), config.end)?;
    let rows = hidden_rows(&params, &ds.x, config.end)?;
    grow_lockstep(&rows, &ds.y, &config.algorithms, config.schedule())
}

fn trace_summary(kind: AlgorithmKind, trace: &GrowthTrace, marks: &[usize]) -> GrowEntry {
    GrowEntry {
        algorithm: kind,
        steps: trace.len(),
        max_weight_error: trace.max_weight_error(),
        max_output_error: trace.max_output_error(),
        total_flops: trace.records.iter().map(|r| r.flops).sum(),
        checkpoints: marks
            .iter()
            .filter_map(|&l| trace.at(l))
            .map(|r| CheckpointError {
                l: r.l,
                weight_error: r.weight_error,
                output_error: r.output_error,
            })
            .collect(),
        failure: trace.failure.clone(),
    }
}

/// Writes `trace_<alg>.csv` per algorithm, `summary.json` (deterministic for
/// a given configuration) and `timing.json`.
pub fn cmd_grow(config: &RunConfig) -> Result<String> {
    let ds = config.dataset()?;
    let runs = grow_runs(config, &ds)?;
    let marks = checkpoints(config.start, config.end);

    let mut report = String::new();
    let mut entries = Vec::new();
    let mut timing = Vec::new();
    for run in &runs {
        run.trace.save_csv(&config.out_file(&format!("trace_{}.csv", run.kind))?)?;
        let entry = trace_summary(run.kind, &run.trace, &marks);
        let _ = writeln!(
            report,
            "{:<9} steps {:>4}  max weight error {:.3e}  max output error {:.3e}{}",
            run.kind.name(),
            entry.steps,
            entry.max_weight_error,
            entry.max_output_error,
            entry.failure.as_deref().map(|f| format!("  failed: {f}")).unwrap_or_default()
        );
        entries.push(entry);
        let total_ns: u64 = run.trace.records.iter().map(|r| r.elapsed_ns).sum();
        let steps = run.trace.len().saturating_sub(1).max(1);
        timing.push(TimingEntry {
            algorithm: run.kind,
            total_ns,
            mean_step_ns: total_ns as f64 / steps as f64,
        });
    }
    write_json(
        &config.out_file("summary.json")?,
        &GrowSummary {
            config,
            dataset: DatasetInfo::from(&ds),
            algorithms: entries,
        },
    )?;
    write_json(&config.out_file("timing.json")?, &timing)?;
    Ok(report)
}

#[derive(Serialize)]
struct BenchRow {
    #[serde(flatten)]
    entry: BenchEntry,
    /// `T_existing / T_alg` from mean times.
    speedup_vs_existing: Option<f64>,
    /// `flops_existing / flops_alg` from sample-dimension flops.
    flop_ratio_vs_existing: Option<f64>,
}

#[derive(Serialize)]
struct BenchReport<'a> {
    config: &'a RunConfig,
    dataset: DatasetInfo,
    algorithms: Vec<BenchRow>,
}

/// Times the step from `end` to `end + 1` nodes and writes `bench.json`.
pub fn cmd_bench(config: &RunConfig) -> Result<String> {
    let ds = config.dataset()?;
    let params = config.params(ds.features(), config.end + 1)?;
    let rows = hidden_rows(&params, &ds.x, config.end + 1)?;
    let entries = bench_step(&rows, &ds.y, &config.algorithms, config.end, config.k0sq, config.repeats)?;
    let existing = entries.iter().find(|e| e.algorithm == AlgorithmKind::ExistingIf).cloned();

    let mut report = String::new();
    let rows: Vec<BenchRow> = entries
        .into_iter()
        .map(|entry| {
            let speedup = existing.as_ref().map(|e| e.mean_ns / entry.mean_ns);
            let flop_ratio = existing.as_ref().map(|e| e.sample_flops as f64 / entry.sample_flops as f64);
            let _ = writeln!(
                report,
                "{:<9} mean {:>12.0} ns  min {:>10} ns  flops {:>12}{}",
                entry.algorithm.name(),
                entry.mean_ns,
                entry.min_ns,
                entry.total_flops,
                speedup.map(|s| format!("  speedup {s:.2}")).unwrap_or_default()
            );
            BenchRow {
                entry,
                speedup_vs_existing: speedup,
                flop_ratio_vs_existing: flop_ratio,
            }
        })
        .collect();
    write_json(
        &config.out_file("bench.json")?,
        &BenchReport {
            config,
            dataset: DatasetInfo::from(&ds),
            algorithms: rows,
        },
    )?;
    Ok(report)
}

#[derive(Serialize)]
struct EvalReport<'a> {
    config: &'a RunConfig,
    dataset: DatasetInfo,
    nodes: usize,
    algorithms: Vec<AlgorithmEval>,
}

/// Cross-validates every algorithm and writes `eval.json`. Features are
/// scaled with each training fold's ranges.
pub fn cmd_eval(config: &RunConfig) -> Result<String> {
    let ds = config.raw_dataset()?;
    let params = config.params(ds.features(), config.end)?;
    let cv = CvSettings {
        folds: config.folds,
        seed: config.seed,
        schedule: config.schedule(),
        normalize: config.normalize,
    };
    let evals = cross_validate(&ds, &params, &config.algorithms, cv)?;

    let mut report = String::new();
    for e in &evals {
        let _ = write!(report, "{:<9}", e.algorithm.name());
        for (name, s) in &e.summary {
            let _ = write!(report, "  {name} {:.6} ± {:.2e}", s.mean, s.variance);
        }
        if let Some(f) = &e.failure {
            let _ = write!(report, "  failed: {f}");
        }
        report.push('\n');
    }
    write_json(
        &config.out_file("eval.json")?,
        &EvalReport {
            config,
            dataset: DatasetInfo::from(&ds),
            nodes: config.end,
            algorithms: evals,
        },
    )?;
    Ok(report)
}

#[derive(Serialize)]
pub struct CompareReport {
    pub passed: bool,
    pub entries: Vec<CompareEntry>,
}

#[derive(Serialize)]
struct CompareFile<'a> {
    config: &'a RunConfig,
    dataset: DatasetInfo,
    #[serde(flatten)]
    report: &'a CompareReport,
}

/// Runs the algorithms in lockstep and writes `compare.json`.
pub fn cmd_compare(config: &RunConfig) -> Result<(CompareReport, String)> {
    let ds = config.dataset()?;
    let runs = grow_runs(config, &ds)?;
    let entries = compare_runs(&runs, config.tolerance);
    let report = CompareReport {
        passed: entries.iter().all(|e| e.passed),
        entries,
    };

    let mut text = String::new();
    for e in &report.entries {
        let bound = e
            .threshold
            .map(|t| format!("≤ {:.0e} through l={}", t.tolerance, t.up_to))
            .unwrap_or_else(|| "reference".into());
        let _ = writeln!(
            text,
            "{} {:<9} max weight error {:.3e}  max output error {:.3e}  ({bound})",
            if e.passed { "pass" } else { "FAIL" },
            e.algorithm.name(),
            e.max_weight_error,
            e.max_output_error
        );
    }
    write_json(
        &config.out_file("compare.json")?,
        &CompareFile {
            config,
            dataset: DatasetInfo::from(&ds),
            report: &report,
        },
    )?;
    Ok((report, text))
}

/// Runs a parsed command, returning the text to print and, for a failed
/// comparison, its first failure.
pub fn run(cli: Cli) -> Result<(String, Option<String>)> {
    match cli.command {
        Command::Grow(a) => Ok((cmd_grow(&a.try_into()?)?, None)),
        Command::Bench(a) => Ok((cmd_bench(&a.try_into()?)?, None)),
        Command::Eval(a) => Ok((cmd_eval(&a.try_into()?)?, None)),
        Command::Compare(a) => {
            let (report, text) = cmd_compare(&a.try_into()?)?;
            let failure = report
                .entries
                .iter()
                .find(|e| !e.passed)
                .map(|e| e.failure.clone().unwrap_or_else(|| format!("{} failed", e.algorithm)));
            Ok((text, failure))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(extra: &[&str]) -> RunArgs {
        let mut argv = vec!["ifelm", "grow"];
        argv.extend_from_slice(extra);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Grow(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn defaults() {
        let c = RunConfig::try_from(args(&[])).unwrap();
        assert_eq!(c.k0sq, 0.1);
        assert_eq!(c.folds, 5);
        assert_eq!((c.start, c.end), (1, 100));
        assert_eq!(c.algorithms, AlgorithmKind::ALL.to_vec());
        assert!(c.normalize);
        assert!(matches!(c.data, DataSource::Synth { outputs: 3, samples: 500, .. }));
        let c = RunConfig::try_from(args(&["--synth", "gaussians"])).unwrap();
        assert!(matches!(c.data, DataSource::Synth { outputs: 2, .. }));
    }

    #[test]
    fn parses_lists_and_names() {
        let c = RunConfig::try_from(args(&["--alg", "alg2,Alg1,alg2", "--kernel", "Gaussian"])).unwrap();
        assert_eq!(c.algorithms, vec![AlgorithmKind::Alg2, AlgorithmKind::Alg1]);
        assert_eq!(c.kernel, ActivationKind::Gaussian);
        assert!(Cli::try_parse_from(["ifelm", "grow", "--alg", "alg9"]).is_err());
        assert!(Cli::try_parse_from(["ifelm", "grow", "--data", "x.csv", "--synth", "sine"]).is_err());
    }

    #[test]
    fn rejects_invalid_config() {
        for bad in [
            &["--start", "0"][..],
            &["--start", "5", "--end", "4"],
            &["--k0sq", "0"],
            &["--k0sq", "-1"],
            &["--folds", "1"],
            &["--repeats", "0"],
            &["--tolerance", "-1"],
        ] {
            assert!(RunConfig::try_from(args(bad)).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn checkpoint_clipping() {
        assert_eq!(checkpoints(1, 500), vec![3, 100, 500]);
        assert_eq!(checkpoints(1, 100), vec![3, 100]);
        assert_eq!(checkpoints(5, 50), vec![50]);
        assert_eq!(checkpoints(2, 2), vec![2]);
        assert_eq!(checkpoints(1, 250), vec![3, 100, 250]);
    }
}
