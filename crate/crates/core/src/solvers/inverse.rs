//! Solver carrying `Q = (H·Hᵀ + k₀²I)⁻¹`, bordered one node at a time:
//!
//! ```text
//! Q⁽ˡ⁺¹⁾ = [ Q̃  t ]
//!          [ tᵀ τ ]
//! ```

use super::{Aux, SolverState, StepScalars};
use crate::error::{ElmError, Result};
use crate::linalg::{axpy, dot, matvec, Matrix};

/// Assembles the bordered inverse from `Q̃`, `t` and `τ`.
fn border_inverse(q_tilde: &Matrix, t: &[f64], tau: f64) -> Matrix {
    let l = q_tilde.rows();
    let mut q = Matrix::zeros(l + 1, l + 1);
    for i in 0..l {
        q.row_mut(i)[..l].copy_from_slice(q_tilde.row(i));
        q.set(i, l, t[i]);
        q.set(l, i, t[i]);
    }
    q.set(l, l, tau);
    q
}

impl SolverState {
    /// `w̄ = τ(Y·h̄ − W·p)` and `W̃ = W + (w̄/divisor)·sᵀ`, returning the grown
    /// `W` and `w̄`.
    pub(super) fn bordered_weights(
        &mut self,
        h_bar: &[f64],
        p: &[f64],
        tau: f64,
        s: &[f64],
        divisor: f64,
    ) -> Result<(Matrix, Vec<f64>)> {
        let yh: Vec<f64> = (0..self.y.rows()).map(|m| dot(self.y.row(m), h_bar)).collect();
        self.sample_flops.record(self.y.rows(), h_bar.len(), 1);
        let wp = matvec(&self.w, p, &mut self.node_flops)?;
        let w_bar: Vec<f64> = yh.iter().zip(&wp).map(|(a, b)| tau * (a - b)).collect();
        if w_bar.iter().any(|v| !v.is_finite()) {
            return Err(ElmError::NonFinite("output weight update"));
        }
        let mut w = self.w.clone();
        for (m, &wm) in w_bar.iter().enumerate() {
            axpy(wm / divisor, s, w.row_mut(m));
        }
        Ok((w.with_column(&w_bar)?, w_bar))
    }

    /// ```text
    /// τ = 1/(c − pᵀQp),  t = −τ·Q·p,  Q̃ = Q + t·tᵀ/τ
    /// w̄ = τ(Y·h̄ − W·p),  W̃ = W + (w̄/τ)·tᵀ
    /// ```
    pub(super) fn add_node_alg2(&mut self, h_bar: &[f64]) -> Result<StepScalars> {
        let border = self.border(h_bar)?;
        let Aux::Inverse { q } = &self.aux else {
            unreachable!("alg2 solver without inverse")
        };
        let l = q.rows();

        let qp = matvec(q, &border.p, &mut self.node_flops)?;
        let denominator = border.c - dot(&border.p, &qp);
        self.node_flops.record(1, l, 1);
        let tau = self.schur_tau(denominator, border.c)?;
        let t: Vec<f64> = qp.iter().map(|v| -tau * v).collect();

        // t·tᵀ/τ, written as (tᵢtⱼ)·δ so Q̃ stays exactly symmetric.
        let mut q_tilde = q.clone();
        for i in 0..l {
            let row = q_tilde.row_mut(i);
            for j in 0..l {
                row[j] += (t[i] * t[j]) * denominator;
            }
        }
        let q_next = border_inverse(&q_tilde, &t, tau);

        let (w, w_bar) = self.bordered_weights(h_bar, &border.p, tau, &t, tau)?;
        if !q_next.is_finite() {
            return Err(ElmError::NonFinite("alg2 update"));
        }

        self.aux = Aux::Inverse { q: q_next };
        self.w = w;
        self.h.push_row(h_bar)?;
        Ok(StepScalars {
            nodes: l + 1,
            tau,
            p: border.p,
            t: Some(t),
            w_bar,
            ..Default::default()
        })
    }

    /// The Q recursion before simplification:
    ///
    /// ```text
    /// Q̃ = Q + Q·p·pᵀ·Q / (c − pᵀQp)
    /// t = −Q̃·p / c
    /// τ = pᵀQ̃p / c² + 1/c
    /// ```
    ///
    /// Weights are updated from `t` and `τ` exactly as in `add_node_alg2`.
    pub(super) fn add_node_q_reference(&mut self, h_bar: &[f64]) -> Result<StepScalars> {
        let border = self.border(h_bar)?;
        let Aux::Inverse { q } = &self.aux else {
            unreachable!("reference Q recursion without inverse")
        };
        let l = q.rows();
        let c = border.c;

        let qp = matvec(q, &border.p, &mut self.node_flops)?;
        let denominator = c - dot(&border.p, &qp);
        self.node_flops.record(1, l, 1);
        // Same breakdown rule as the simplified recursion.
        self.schur_tau(denominator, c)?;

        let mut q_tilde = q.clone();
        for i in 0..l {
            let row = q_tilde.row_mut(i);
            for j in 0..l {
                row[j] += (qp[i] * qp[j]) / denominator;
            }
        }
        let qtp = matvec(&q_tilde, &border.p, &mut self.node_flops)?;
        let t: Vec<f64> = qtp.iter().map(|v| -v / c).collect();
        let tau = dot(&border.p, &qtp) / (c * c) + 1.0 / c;
        self.node_flops.record(1, l, 1);
        if !tau.is_finite() || tau <= 0.0 {
            return Err(ElmError::DefinitenessLoss { node: l + 1, tau });
        }
        let q_next = border_inverse(&q_tilde, &t, tau);

        let (w, w_bar) = self.bordered_weights(h_bar, &border.p, tau, &t, tau)?;
        if !q_next.is_finite() {
            return Err(ElmError::NonFinite("reference Q update"));
        }

        self.aux = Aux::Inverse { q: q_next };
        self.w = w;
        self.h.push_row(h_bar)?;
        Ok(StepScalars {
            nodes: l + 1,
            tau,
            p: border.p,
            t: Some(t),
            w_bar,
            ..Default::default()
        })
    }
}
