//! Solver carrying inverse LDLᵀ factors: `L·D·Lᵀ = Q = R⁻¹` with `L` unit
//! upper-triangular and `D` diagonal. Adding a node appends one column to
//! `L` and one entry to `D`; `Q` itself is never formed.

use super::{Aux, SolverState, StepScalars};
use crate::error::{ElmError, Result};
use crate::linalg::{axpy, dot, Matrix};

/// Unit upper-triangular matrix stored by columns, strict part only.
///
/// Column `j` holds the `j` entries above the diagonal, so appending a
/// column to the factor is a slice push.
#[derive(Clone, Debug, PartialEq)]
pub struct PackedUnitUpper {
    n: usize,
    data: Vec<f64>,
}

impl PackedUnitUpper {
    pub fn identity(n: usize) -> Self {
        PackedUnitUpper {
            n,
            data: vec![0.0; n * n.saturating_sub(1) / 2],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn column(&self, j: usize) -> &[f64] {
        let start = j * (j.saturating_sub(1)) / 2;
        &self.data[start..start + j]
    }

    /// Appends the column `[above; 1]`.
    pub fn push_column(&mut self, above: &[f64]) {
        assert_eq!(above.len(), self.n, "column must have one entry per existing row");
        self.data.extend_from_slice(above);
        self.n += 1;
    }

    /// `Lᵀ·x`.
    pub fn transpose_mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|j| x[j] + dot(self.column(j), &x[..j])).collect()
    }

    /// `L·x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for j in 1..self.n {
            axpy(x[j], self.column(j), &mut out[..j]);
        }
        out
    }

    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::identity(self.n);
        for j in 0..self.n {
            for (i, &v) in self.column(j).iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Flops of a product with this factor: `n(n−1)` for the strict part.
    fn product_flops(&self) -> u64 {
        (self.n * self.n.saturating_sub(1)) as u64
    }
}

/// One bordering step: given `p` (the new off-diagonal column of `R`) and `c`
/// (its new diagonal entry), returns `t̃ = −L·D·Lᵀ·p` and the denominator
/// `c − pᵀ·L·D·Lᵀ·p`, factored through `v = Lᵀp`.
fn border_factors(l: &PackedUnitUpper, d: &[f64], p: &[f64], c: f64) -> (Vec<f64>, f64) {
    let v = l.transpose_mul(p);
    let dv: Vec<f64> = v.iter().zip(d).map(|(a, b)| a * b).collect();
    let denominator = c - dot(&v, &dv);
    let t_tilde = l.mul(&dv).into_iter().map(|x| -x).collect();
    (t_tilde, denominator)
}

/// Inverse LDLᵀ factors of an SPD matrix `R`, computed column by column with
/// the same bordering the solver applies per node.
pub fn inverse_ldl_factorization(r: &Matrix) -> Result<(PackedUnitUpper, Vec<f64>)> {
    let n = r.rows();
    if r.cols() != n || n == 0 {
        return Err(ElmError::shape("inverse_ldl_factorization", r.shape(), r.shape()));
    }
    let r00 = r.get(0, 0);
    if !(r00 > 0.0) {
        return Err(ElmError::Singular { pivot: 0, value: r00 });
    }
    let mut l = PackedUnitUpper::identity(1);
    let mut d = vec![1.0 / r00];
    for j in 1..n {
        let p: Vec<f64> = (0..j).map(|i| r.get(i, j)).collect();
        let (t_tilde, denominator) = border_factors(&l, &d, &p, r.get(j, j));
        if !(denominator > 0.0) {
            return Err(ElmError::Singular {
                pivot: j,
                value: denominator,
            });
        }
        l.push_column(&t_tilde);
        d.push(1.0 / denominator);
    }
    Ok((l, d))
}

impl SolverState {
    /// ```text
    /// v = Lᵀp,  t̃ = −L·(D∘v),  τ = 1/(c − vᵀ(D∘v))
    /// L ← [L t̃; 0 1],  D ← diag(D, τ)
    /// w̄ = τ(Y·h̄ − W·p),  W̃ = W + w̄·t̃ᵀ
    /// ```
    pub(super) fn add_node_alg3(&mut self, h_bar: &[f64]) -> Result<StepScalars> {
        let border = self.border(h_bar)?;
        let Aux::Ldl { l, d } = &self.aux else {
            unreachable!("alg3 solver without LDL factors")
        };
        let n = l.dim();

        let (t_tilde, denominator) = border_factors(l, d, &border.p, border.c);
        let flops = 2 * l.product_flops() + 2 * n as u64;
        self.node_flops.add(flops);
        let tau = self.schur_tau(denominator, border.c)?;
        if t_tilde.iter().any(|v| !v.is_finite()) {
            return Err(ElmError::NonFinite("alg3 update"));
        }

        let (w, w_bar) = self.bordered_weights(h_bar, &border.p, tau, &t_tilde, 1.0)?;

        let Aux::Ldl { l, d } = &mut self.aux else {
            unreachable!()
        };
        l.push_column(&t_tilde);
        d.push(tau);
        self.w = w;
        self.h.push_row(h_bar)?;
        Ok(StepScalars {
            nodes: n + 1,
            tau,
            p: border.p,
            t_tilde: Some(t_tilde),
            w_bar,
            ..Default::default()
        })
    }
}
