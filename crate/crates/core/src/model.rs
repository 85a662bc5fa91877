//! The frozen random hidden layer: `H = f(A·X + 1ᵀ⊗d)` and `Z = W·H`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ElmError, Result};
use crate::linalg::{dot, gemm, FlopCounter, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Linear,
    Sigmoid,
    Gaussian,
    Sine,
    Triangular,
    Hardlim,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 6] = [
        ActivationKind::Linear,
        ActivationKind::Sigmoid,
        ActivationKind::Gaussian,
        ActivationKind::Sine,
        ActivationKind::Triangular,
        ActivationKind::Hardlim,
    ];

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            ActivationKind::Linear => x,
            ActivationKind::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            ActivationKind::Gaussian => (-x * x).exp(),
            ActivationKind::Sine => x.sin(),
            ActivationKind::Triangular => (1.0 - x.abs()).max(0.0),
            // ties go to 1
            ActivationKind::Hardlim => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Linear => "linear",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Gaussian => "gaussian",
            ActivationKind::Sine => "sine",
            ActivationKind::Triangular => "triangular",
            ActivationKind::Hardlim => "hardlim",
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = ElmError;

    fn from_str(s: &str) -> Result<Self> {
        ActivationKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ElmError::domain(format!("unknown activation kind '{s}'")))
    }
}

/// Random input weights `A` (l×N), biases `d` and the activation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElmParams {
    pub kind: ActivationKind,
    #[serde(rename = "A")]
    pub input_weights: Matrix,
    #[serde(rename = "d")]
    pub biases: Vec<f64>,
    /// Seed the parameters were drawn from, when they were drawn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ElmParams {
    pub fn new(kind: ActivationKind, input_weights: Matrix, biases: Vec<f64>) -> Result<Self> {
        if input_weights.rows() != biases.len() {
            return Err(ElmError::shape(
                "ElmParams::new",
                input_weights.shape(),
                (biases.len(), 1),
            ));
        }
        Ok(ElmParams {
            kind,
            input_weights,
            biases,
            seed: None,
        })
    }

    pub fn nodes(&self) -> usize {
        self.input_weights.rows()
    }

    pub fn inputs(&self) -> usize {
        self.input_weights.cols()
    }

    /// Parameters of the first `l` hidden nodes.
    pub fn truncated(&self, l: usize) -> ElmParams {
        let l = l.min(self.nodes());
        ElmParams {
            kind: self.kind,
            input_weights: self.input_weights.top_rows(l),
            biases: self.biases[..l].to_vec(),
            seed: self.seed,
        }
    }

    /// Hidden-layer outputs of node `i` over every column of `x`.
    pub fn node_row(&self, i: usize, x: &Matrix) -> Result<Vec<f64>> {
        hidden_row(self.input_weights.row(i), self.biases[i], self.kind, x)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: ElmParams = serde_json::from_str(s)?;
        if p.input_weights.rows() != p.biases.len() {
            return Err(ElmError::shape(
                "ElmParams::from_json",
                p.input_weights.shape(),
                (p.biases.len(), 1),
            ));
        }
        Ok(p)
    }
}

/// Draws `A` and `d` i.i.d. uniform on [−1, 1] from a ChaCha stream keyed by `seed`.
pub fn init_random_params(l: usize, n: usize, kind: ActivationKind, seed: u64) -> Result<ElmParams> {
    if l == 0 || n == 0 {
        return Err(ElmError::domain(format!(
            "hidden layer needs l >= 1 and N >= 1 (got l={l}, N={n})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(l * n);
    let mut biases = Vec::with_capacity(l);
    // Node-major draw order so node i's parameters do not depend on l.
    for _ in 0..l {
        for _ in 0..n {
            data.push(rng.random_range(-1.0..=1.0));
        }
        biases.push(rng.random_range(-1.0..=1.0));
    }
    let mut p = ElmParams::new(kind, Matrix::from_vec(l, n, data)?, biases)?;
    p.seed = Some(seed);
    Ok(p)
}

pub fn activate(kind: ActivationKind, m: &Matrix) -> Matrix {
    m.map(|x| kind.apply(x))
}

/// `H = f(A·X + 1ᵀ⊗d)`, shape l×K.
pub fn hidden_matrix(params: &ElmParams, x: &Matrix) -> Result<Matrix> {
    if x.rows() != params.inputs() {
        return Err(ElmError::shape("hidden_matrix", params.input_weights.shape(), x.shape()));
    }
    let mut h = Matrix::zeros(0, 0);
    for i in 0..params.nodes() {
        h.push_row(&params.node_row(i, x)?)?;
    }
    if params.nodes() == 0 {
        return Ok(Matrix::zeros(0, x.cols()));
    }
    Ok(h)
}

/// The row `f(āᵀX + d̄·1ᵀ)` appended to `H` for one new node.
pub fn hidden_row(a_bar: &[f64], d_bar: f64, kind: ActivationKind, x: &Matrix) -> Result<Vec<f64>> {
    if x.rows() != a_bar.len() {
        return Err(ElmError::shape("hidden_row", (1, a_bar.len()), x.shape()));
    }
    let mut row = vec![d_bar; x.cols()];
    for (n, &a) in a_bar.iter().enumerate() {
        if a != 0.0 {
            crate::linalg::axpy(a, x.row(n), &mut row);
        }
    }
    for v in &mut row {
        *v = kind.apply(*v);
    }
    Ok(row)
}

/// `Z = W·H`.
pub fn predict(w: &Matrix, h: &Matrix) -> Result<Matrix> {
    if w.cols() != h.rows() {
        return Err(ElmError::shape("predict", w.shape(), h.shape()));
    }
    gemm(w, h, &mut FlopCounter::disabled())
}

/// Column `k` of `H` evaluated one sample at a time.
pub fn hidden_column(params: &ElmParams, sample: &[f64]) -> Vec<f64> {
    (0..params.nodes())
        .map(|i| params.kind.apply(dot(params.input_weights.row(i), sample) + params.biases[i]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = init_random_params(3, 2, ActivationKind::Sigmoid, 7).unwrap();
        let b = init_random_params(3, 2, ActivationKind::Sigmoid, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.input_weights.as_slice().iter().chain(&a.biases).all(|v| v.abs() <= 1.0));
        let c = init_random_params(3, 2, ActivationKind::Sigmoid, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn init_sample_mean_near_zero() {
        let p = init_random_params(1000, 5, ActivationKind::Gaussian, 1).unwrap();
        let s = p.input_weights.as_slice();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!(mean.abs() <= 0.05, "mean {mean}");
    }

    #[test]
    fn init_rejects_empty_layer() {
        assert!(matches!(
            init_random_params(0, 2, ActivationKind::Linear, 1),
            Err(ElmError::Domain(_))
        ));
        assert!(init_random_params(2, 0, ActivationKind::Linear, 1).is_err());
    }

    #[test]
    fn growing_the_layer_keeps_existing_nodes() {
        let small = init_random_params(4, 3, ActivationKind::Sine, 11).unwrap();
        let big = init_random_params(9, 3, ActivationKind::Sine, 11).unwrap();
        assert_eq!(big.truncated(4), small);
    }

    #[test]
    fn activation_definitions() {
        let z = m(&[&[0.0]]);
        assert_eq!(activate(ActivationKind::Sigmoid, &z).get(0, 0), 0.5);
        assert_eq!(activate(ActivationKind::Gaussian, &z).get(0, 0), 1.0);
        assert_eq!(activate(ActivationKind::Triangular, &m(&[&[2.0]])).get(0, 0), 0.0);
        assert_eq!(
            activate(ActivationKind::Hardlim, &m(&[&[-0.1, 0.0, 0.1]])),
            m(&[&[0.0, 1.0, 1.0]])
        );
        assert_eq!(activate(ActivationKind::Sine, &z).get(0, 0), 0.0);
        assert_eq!(activate(ActivationKind::Linear, &m(&[&[-3.5]])).get(0, 0), -3.5);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ActivationKind::ALL {
            assert_eq!(k.name().parse::<ActivationKind>().unwrap(), k);
        }
        assert!("relu".parse::<ActivationKind>().is_err());
    }

    #[test]
    fn hidden_matrix_examples() {
        let x = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let id = ElmParams::new(ActivationKind::Linear, Matrix::identity(2), vec![0.0, 0.0]).unwrap();
        assert_eq!(hidden_matrix(&id, &x).unwrap(), x);

        let p = ElmParams::new(ActivationKind::Linear, m(&[&[1.0, 1.0]]), vec![1.0]).unwrap();
        assert_eq!(hidden_matrix(&p, &m(&[&[1.0], &[2.0]])).unwrap(), m(&[&[4.0]]));

        let zero = ElmParams::new(ActivationKind::Sigmoid, Matrix::zeros(2, 2), vec![0.0; 2]).unwrap();
        let h = hidden_matrix(&zero, &Matrix::from_fn(2, 3, |i, j| (i + j) as f64)).unwrap();
        assert!(h.as_slice().iter().all(|&v| v == 0.5));

        assert!(hidden_matrix(&p, &Matrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn hidden_row_examples() {
        let x = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(hidden_row(&[1.0, 0.0], 0.0, ActivationKind::Linear, &x).unwrap(), vec![1.0, 2.0]);
        let x3 = Matrix::zeros(2, 3);
        assert_eq!(hidden_row(&[0.0, 0.0], 5.0, ActivationKind::Linear, &x3).unwrap(), vec![5.0; 3]);
        assert_eq!(hidden_row(&[0.0, 0.0], 0.0, ActivationKind::Sine, &x).unwrap(), vec![0.0; 2]);
        assert!(hidden_row(&[1.0], 0.0, ActivationKind::Sine, &x).is_err());
    }

    #[test]
    fn predict_examples() {
        let h = m(&[&[1.0, 2.0], &[1.0, 0.0]]);
        assert_eq!(predict(&Matrix::identity(2), &h).unwrap(), h);
        assert_eq!(predict(&m(&[&[0.5]]), &m(&[&[1.0, 2.0]])).unwrap(), m(&[&[0.5, 1.0]]));
        let z = predict(&m(&[&[3.0 / 11.0, 15.0 / 11.0]]), &h).unwrap();
        assert!((z.get(0, 0) - 18.0 / 11.0).abs() < 1e-15);
        assert!((z.get(0, 1) - 6.0 / 11.0).abs() < 1e-15);
        assert!(predict(&Matrix::zeros(1, 3), &h).is_err());
    }

    #[test]
    fn params_json_round_trip() {
        let p = init_random_params(3, 2, ActivationKind::Triangular, 5).unwrap();
        let s = p.to_json().unwrap();
        assert!(s.contains("\"kind\": \"triangular\""));
        assert!(s.contains("\"shape\""));
        assert_eq!(ElmParams::from_json(&s).unwrap(), p);
        let bad = r#"{"kind":"linear","A":{"shape":[2,1],"data":[1,2]},"d":[0]}"#;
        assert!(ElmParams::from_json(bad).is_err());
    }

    proptest! {
        #[test]
        fn columns_match_per_sample_evaluation(seed in 0u64..1000, kind_idx in 0usize..6) {
            let kind = ActivationKind::ALL[kind_idx];
            let p = init_random_params(5, 3, kind, seed).unwrap();
            let x = Matrix::from_fn(3, 4, |i, j| ((i * 7 + j * 3 + seed as usize) % 11) as f64 / 5.0 - 1.0);
            let h = hidden_matrix(&p, &x).unwrap();
            for k in 0..x.cols() {
                let col = hidden_column(&p, &x.column(k));
                for (i, v) in col.iter().enumerate() {
                    prop_assert!((h.get(i, k) - v).abs() <= 1e-14);
                }
            }
        }

        #[test]
        fn appending_a_row_matches_a_wider_layer(seed in 0u64..1000, kind_idx in 0usize..6) {
            let kind = ActivationKind::ALL[kind_idx];
            let big = init_random_params(6, 3, kind, seed).unwrap();
            let x = Matrix::from_fn(3, 5, |i, j| ((i * 5 + j * 2) % 7) as f64 / 3.5 - 1.0);
            let mut h = hidden_matrix(&big.truncated(5), &x).unwrap();
            h.push_row(&big.node_row(5, &x).unwrap()).unwrap();
            let full = hidden_matrix(&big, &x).unwrap();
            prop_assert!(crate::linalg::frobenius_distance(&h, &full).unwrap() <= 1e-13);
        }

        #[test]
        fn hardlim_is_binary_and_saturates_when_reapplied(v in proptest::collection::vec(-5.0f64..5.0, 1..20)) {
            let x = Matrix::from_vec(1, v.len(), v.clone()).unwrap();
            let once = activate(ActivationKind::Hardlim, &x);
            for (o, xi) in once.as_slice().iter().zip(&v) {
                prop_assert_eq!(*o, if *xi >= 0.0 { 1.0 } else { 0.0 });
            }
            let twice = activate(ActivationKind::Hardlim, &once);
            prop_assert!(twice.as_slice().iter().all(|&t| t == 1.0));
        }
    }
}
