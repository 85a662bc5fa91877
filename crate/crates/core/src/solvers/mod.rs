//! Incremental output-weight solvers.
//!
//! Every solver holds the running hidden matrix `H` (l×K), the targets `Y`
//! (M×K) and the ridge weights `W = Y·Hᵀ·(H·Hᵀ + k₀²I)⁻¹` (M×l). Adding a
//! hidden node appends one row `h̄` to `H` and updates `W` in place. The
//! solvers differ only in what they carry between steps:
//!
//! | kind       | carried state                         |
//! |------------|---------------------------------------|
//! | `Baseline` | Gram matrix `R`, re-solved every step |
//! | `Existing` | regularized pseudo-inverse `B` (K×l)  |
//! | `Alg1`     | `B`, with the cheaper bordered update |
//! | `Alg2`     | `Q = R⁻¹`                             |
//! | `Alg3`     | inverse LDLᵀ factors, `Q = L·D·Lᵀ`    |
//!
//! A failed step (breakdown of the Schur complement, non-finite values)
//! leaves the state exactly as it was.

mod direct;
mod inverse;
mod ldl;
mod pinv;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ElmError, Result};
use crate::linalg::{dot, gram, Cholesky, FlopCounter, Matrix};

pub use direct::solve_direct;
pub use ldl::{inverse_ldl_factorization, PackedUnitUpper};

/// Regularization used throughout the experiments.
pub const DEFAULT_K0SQ: f64 = 0.1;

/// Relative size below which a Schur-complement denominator counts as zero.
pub const BREAKDOWN_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgorithmKind {
    #[serde(rename = "baseline")]
    Baseline,
    #[serde(rename = "existing")]
    ExistingIf,
    #[serde(rename = "alg1")]
    Alg1,
    #[serde(rename = "alg2")]
    Alg2,
    #[serde(rename = "alg3")]
    Alg3,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 5] = [
        AlgorithmKind::Baseline,
        AlgorithmKind::ExistingIf,
        AlgorithmKind::Alg1,
        AlgorithmKind::Alg2,
        AlgorithmKind::Alg3,
    ];

    pub const INCREMENTAL: [AlgorithmKind; 4] = [
        AlgorithmKind::ExistingIf,
        AlgorithmKind::Alg1,
        AlgorithmKind::Alg2,
        AlgorithmKind::Alg3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Baseline => "baseline",
            AlgorithmKind::ExistingIf => "existing",
            AlgorithmKind::Alg1 => "alg1",
            AlgorithmKind::Alg2 => "alg2",
            AlgorithmKind::Alg3 => "alg3",
        }
    }

    /// Dominant per-step flops of the published cost model, for a step that
    /// grows an `l`-node network to `l + 1` nodes.
    pub fn model_flops(self, l: usize, k: usize, m: usize) -> Option<f64> {
        let (l, k, m) = (l as f64, k as f64, m as f64);
        match self {
            AlgorithmKind::Baseline => None,
            AlgorithmKind::ExistingIf => Some(16.0 * l * k + 2.0 * m * l * k),
            AlgorithmKind::Alg1 => Some(6.0 * l * k + 2.0 * m * k),
            AlgorithmKind::Alg2 | AlgorithmKind::Alg3 => Some(2.0 * l * k + 2.0 * m * k),
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = ElmError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "baseline" | "direct" => Ok(AlgorithmKind::Baseline),
            "existing" | "existingif" | "existing-if" => Ok(AlgorithmKind::ExistingIf),
            "alg1" => Ok(AlgorithmKind::Alg1),
            "alg2" => Ok(AlgorithmKind::Alg2),
            "alg3" => Ok(AlgorithmKind::Alg3),
            _ => Err(ElmError::domain(format!("unknown algorithm '{s}'"))),
        }
    }
}

/// Algorithm-specific state carried between steps.
#[derive(Clone, Debug)]
pub(crate) enum Aux {
    /// `R = H·Hᵀ + k₀²I` and `H·Yᵀ` (l×M), both bordered as rows arrive.
    Direct { gram: Matrix, hy: Matrix },
    /// `Bᵀ`, stored l×K so the new column of `B` is a pushed row.
    PseudoInverse { bt: Matrix },
    Inverse { q: Matrix },
    Ldl { l: PackedUnitUpper, d: Vec<f64> },
}

/// Scalars and vectors produced by one node addition.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StepScalars {
    /// Node count after the step.
    pub nodes: usize,
    pub tau: f64,
    pub p: Vec<f64>,
    /// New off-diagonal column of `Q` (Q-based solvers).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    /// New column of `L` above the diagonal (LDLᵀ solver).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_tilde: Option<Vec<f64>>,
    /// New column of `B` (pseudo-inverse solvers).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_bar: Option<Vec<f64>>,
    pub w_bar: Vec<f64>,
    /// Flops of products that involve the sample dimension K.
    pub sample_flops: u64,
    /// Flops of the remaining, K-independent products.
    pub node_flops: u64,
}

impl StepScalars {
    pub fn total_flops(&self) -> u64 {
        self.sample_flops + self.node_flops
    }
}

#[derive(Clone, Debug)]
pub struct SolverState {
    kind: AlgorithmKind,
    k0sq: f64,
    h: Matrix,
    y: Matrix,
    w: Matrix,
    aux: Aux,
    sample_flops: FlopCounter,
    node_flops: FlopCounter,
}

/// Common per-step quantities: `c = h̄ᵀh̄ + k₀²` and `p = H·h̄`.
pub(crate) struct Border {
    pub c: f64,
    pub p: Vec<f64>,
}

impl SolverState {
    /// One-node state from the closed-form scalars `r = h₁ᵀh₁ + k₀²`.
    pub fn init(kind: AlgorithmKind, h1: &[f64], y: &Matrix, k0sq: f64) -> Result<Self> {
        check_k0sq(k0sq)?;
        if h1.is_empty() {
            return Err(ElmError::shape("init_solver", (1, 0), y.shape()));
        }
        if y.cols() != h1.len() {
            return Err(ElmError::shape("init_solver", (1, h1.len()), y.shape()));
        }
        if kind == AlgorithmKind::Baseline {
            return SolverState::warm_start(kind, &Matrix::row_vector(h1)?, y, k0sq);
        }
        let mut sample_flops = FlopCounter::new();
        let r = dot(h1, h1) + k0sq;
        sample_flops.record(1, h1.len(), 1);
        let w_col: Vec<f64> = (0..y.rows()).map(|m| dot(y.row(m), h1) / r).collect();
        sample_flops.record(y.rows(), h1.len(), 1);
        let aux = match kind {
            AlgorithmKind::ExistingIf | AlgorithmKind::Alg1 => Aux::PseudoInverse {
                bt: Matrix::row_vector(&h1.iter().map(|v| v / r).collect::<Vec<_>>())?,
            },
            AlgorithmKind::Alg2 => Aux::Inverse {
                q: Matrix::from_vec(1, 1, vec![1.0 / r])?,
            },
            AlgorithmKind::Alg3 => Aux::Ldl {
                l: PackedUnitUpper::identity(1),
                d: vec![1.0 / r],
            },
            AlgorithmKind::Baseline => unreachable!(),
        };
        let state = SolverState {
            kind,
            k0sq,
            h: Matrix::row_vector(h1)?,
            y: y.clone(),
            w: Matrix::column_vector(&w_col)?,
            aux,
            sample_flops,
            node_flops: FlopCounter::new(),
        };
        if !state.w.is_finite() {
            return Err(ElmError::NonFinite("init_solver"));
        }
        Ok(state)
    }

    /// State for an existing `l₀`-node hidden matrix, built by direct factorization.
    pub fn warm_start(kind: AlgorithmKind, h: &Matrix, y: &Matrix, k0sq: f64) -> Result<Self> {
        check_k0sq(k0sq)?;
        if h.rows() == 0 || h.cols() == 0 {
            return Err(ElmError::shape("warm_start", h.shape(), y.shape()));
        }
        if h.cols() != y.cols() {
            return Err(ElmError::shape("warm_start", h.shape(), y.shape()));
        }
        if h.rows() == 1 && kind != AlgorithmKind::Baseline {
            return SolverState::init(kind, h.row(0), y, k0sq);
        }
        let r = gram(h, k0sq);
        let hy = direct::targets_product(h, y);
        let chol = Cholesky::new(&r)?;
        let w = chol.solve(&hy)?.transpose();
        let aux = match kind {
            AlgorithmKind::Baseline => Aux::Direct { gram: r, hy },
            AlgorithmKind::ExistingIf | AlgorithmKind::Alg1 => {
                let q = symmetric_inverse(&chol, h.rows())?;
                let bt = crate::linalg::gemm(&q, h, &mut FlopCounter::disabled())?;
                Aux::PseudoInverse { bt }
            }
            AlgorithmKind::Alg2 => Aux::Inverse {
                q: symmetric_inverse(&chol, h.rows())?,
            },
            AlgorithmKind::Alg3 => {
                let (l, d) = inverse_ldl_factorization(&r)?;
                Aux::Ldl { l, d }
            }
        };
        let mut state = SolverState {
            kind,
            k0sq,
            h: h.clone(),
            y: y.clone(),
            w,
            aux,
            sample_flops: FlopCounter::new(),
            node_flops: FlopCounter::new(),
        };
        if let Aux::PseudoInverse { bt } = &state.aux {
            // W = Y·B, the relation the pseudo-inverse solvers maintain.
            state.w = pinv::weights_from_pseudo_inverse(&state.y, bt, &mut FlopCounter::disabled());
        }
        Ok(state)
    }

    pub fn kind(&self) -> AlgorithmKind {
        self.kind
    }

    pub fn nodes(&self) -> usize {
        self.h.rows()
    }

    pub fn samples(&self) -> usize {
        self.h.cols()
    }

    pub fn outputs(&self) -> usize {
        self.y.rows()
    }

    pub fn k0sq(&self) -> f64 {
        self.k0sq
    }

    pub fn hidden(&self) -> &Matrix {
        &self.h
    }

    pub fn targets(&self) -> &Matrix {
        &self.y
    }

    /// Current output weights `W` (M×l).
    pub fn weights(&self) -> &Matrix {
        &self.w
    }

    /// Cumulative flops charged to products involving the sample dimension.
    pub fn sample_flops(&self) -> u64 {
        self.sample_flops.count()
    }

    pub fn node_flops(&self) -> u64 {
        self.node_flops.count()
    }

    /// Regularized pseudo-inverse `B` (K×l), for the solvers that carry it.
    pub fn pseudo_inverse(&self) -> Option<Matrix> {
        match &self.aux {
            Aux::PseudoInverse { bt } => Some(bt.transpose()),
            _ => None,
        }
    }

    /// `Q = (H·Hᵀ + k₀²I)⁻¹` as carried by the Q-based solver.
    pub fn inverse(&self) -> Option<&Matrix> {
        match &self.aux {
            Aux::Inverse { q } => Some(q),
            _ => None,
        }
    }

    /// Unit upper-triangular `L` and diagonal `D` with `L·D·Lᵀ = Q`.
    pub fn ldl_factors(&self) -> Option<(Matrix, &[f64])> {
        match &self.aux {
            Aux::Ldl { l, d } => Some((l.to_matrix(), d.as_slice())),
            _ => None,
        }
    }

    /// `R = H·Hᵀ + k₀²I` as carried by the baseline.
    pub fn gram(&self) -> Option<&Matrix> {
        match &self.aux {
            Aux::Direct { gram, .. } => Some(gram),
            _ => None,
        }
    }

    /// `p = H·h̄` for a candidate row.
    pub fn compute_p(&self, h_bar: &[f64]) -> Result<Vec<f64>> {
        self.check_row(h_bar)?;
        crate::linalg::matvec(&self.h, h_bar, &mut FlopCounter::disabled())
    }

    /// Appends one hidden node with activations `h_bar` over the K samples.
    pub fn add_node(&mut self, h_bar: &[f64]) -> Result<StepScalars> {
        self.check_row(h_bar)?;
        let before = (self.sample_flops.count(), self.node_flops.count());
        let mut step = match self.kind {
            AlgorithmKind::Baseline => self.add_node_baseline(h_bar)?,
            AlgorithmKind::ExistingIf => self.add_node_existing(h_bar)?,
            AlgorithmKind::Alg1 => self.add_node_alg1(h_bar)?,
            AlgorithmKind::Alg2 => self.add_node_alg2(h_bar)?,
            AlgorithmKind::Alg3 => self.add_node_alg3(h_bar)?,
        };
        step.sample_flops = self.sample_flops.count() - before.0;
        step.node_flops = self.node_flops.count() - before.1;
        Ok(step)
    }

    /// Q update with the original, unsimplified recursion. Kept as a reference
    /// for checking the simplified update; only valid for `Alg2` states.
    pub fn add_node_q_unsimplified(&mut self, h_bar: &[f64]) -> Result<StepScalars> {
        if self.kind != AlgorithmKind::Alg2 {
            return Err(ElmError::domain(format!(
                "unsimplified Q recursion needs an alg2 state, got {}",
                self.kind
            )));
        }
        self.check_row(h_bar)?;
        let before = (self.sample_flops.count(), self.node_flops.count());
        let mut step = self.add_node_q_reference(h_bar)?;
        step.sample_flops = self.sample_flops.count() - before.0;
        step.node_flops = self.node_flops.count() - before.1;
        Ok(step)
    }

    fn check_row(&self, h_bar: &[f64]) -> Result<()> {
        if h_bar.len() != self.samples() {
            return Err(ElmError::shape("add_node", self.h.shape(), (1, h_bar.len())));
        }
        if h_bar.iter().any(|v| !v.is_finite()) {
            return Err(ElmError::NonFinite("add_node"));
        }
        Ok(())
    }

    /// `c` and `p`, charged as sample-dimension products.
    pub(crate) fn border(&mut self, h_bar: &[f64]) -> Result<Border> {
        let c = dot(h_bar, h_bar) + self.k0sq;
        self.sample_flops.record(1, h_bar.len(), 1);
        let p = crate::linalg::matvec(&self.h, h_bar, &mut self.sample_flops)?;
        Ok(Border { c, p })
    }

    /// Turns the Schur-complement denominator into `τ`, or reports breakdown.
    pub(crate) fn schur_tau(&self, denominator: f64, c: f64) -> Result<f64> {
        let node = self.nodes() + 1;
        if !denominator.is_finite() {
            return Err(ElmError::NonFinite("schur complement"));
        }
        if denominator.abs() <= BREAKDOWN_THRESHOLD * c {
            return Err(ElmError::Breakdown {
                node,
                denominator,
                scale: c,
            });
        }
        let tau = 1.0 / denominator;
        if tau <= 0.0 {
            return Err(ElmError::DefinitenessLoss { node, tau });
        }
        Ok(tau)
    }

    /// JSON snapshot: kind, node count, k₀² and `W`; carried matrices under
    /// `debug` when requested.
    pub fn snapshot(&self, with_debug: bool) -> StateSnapshot {
        let debug = with_debug.then(|| match &self.aux {
            Aux::Direct { gram, .. } => serde_json::json!({ "R": gram }),
            Aux::PseudoInverse { bt } => serde_json::json!({ "B": bt.transpose() }),
            Aux::Inverse { q } => serde_json::json!({ "Q": q }),
            Aux::Ldl { l, d } => serde_json::json!({ "L": l.to_matrix(), "D": d }),
        });
        StateSnapshot {
            kind: self.kind,
            l: self.nodes(),
            k0sq: self.k0sq,
            w: self.w.clone(),
            debug,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub kind: AlgorithmKind,
    pub l: usize,
    pub k0sq: f64,
    #[serde(rename = "W")]
    pub w: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub debug: Option<serde_json::Value>,
}

/// Free-function form of [`SolverState::init`].
pub fn init_solver(kind: AlgorithmKind, h1: &[f64], y: &Matrix, k0sq: f64) -> Result<SolverState> {
    SolverState::init(kind, h1, y, k0sq)
}

pub fn current_weights(state: &SolverState) -> Matrix {
    state.weights().clone()
}

pub(crate) fn check_k0sq(k0sq: f64) -> Result<()> {
    if !(k0sq > 0.0) || !k0sq.is_finite() {
        return Err(ElmError::domain(format!(
            "regularization k0^2 must be positive and finite (got {k0sq})"
        )));
    }
    Ok(())
}

fn symmetric_inverse(chol: &Cholesky, n: usize) -> Result<Matrix> {
    let q = chol.solve(&Matrix::identity(n))?;
    Ok(Matrix::from_fn(n, n, |i, j| 0.5 * (q.get(i, j) + q.get(j, i))))
}

#[cfg(test)]
mod tests;
