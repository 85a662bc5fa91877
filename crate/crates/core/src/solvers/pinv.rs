//! Solvers that carry the regularized pseudo-inverse `B = Hᵀ(H·Hᵀ + k₀²I)⁻¹`.
//!
//! `B` is stored transposed (l×K): column `i` of `B` is row `i` of the
//! buffer, so the matrix-vector products below walk contiguous memory and
//! growing `B` by a column is a row push.

use super::{Aux, SolverState, StepScalars};
use crate::error::Result;
use crate::linalg::{axpy, dot, matvec, matvec_t, FlopCounter, Matrix};

/// `W = Y·B` from the stored `Bᵀ`.
pub(crate) fn weights_from_pseudo_inverse(y: &Matrix, bt: &Matrix, flops: &mut FlopCounter) -> Matrix {
    flops.record(y.rows(), y.cols(), bt.rows());
    Matrix::from_fn(y.rows(), bt.rows(), |m, i| dot(y.row(m), bt.row(i)))
}

/// `(c·I − h̄h̄ᵀ)·B` with `h̄ᵀB` recomputed, returned transposed (l×K).
fn deflated(bt: &Matrix, h_bar: &[f64], c: f64, flops: &mut FlopCounter) -> Result<(Matrix, Vec<f64>)> {
    let u = matvec(bt, h_bar, flops)?;
    let mut g = bt.scaled(c);
    for (i, &ui) in u.iter().enumerate() {
        axpy(-ui, h_bar, g.row_mut(i));
    }
    Ok((g, u))
}

impl SolverState {
    /// The original inverse-free update, evaluated term by term as written:
    ///
    /// ```text
    /// B̃ = (cI − h̄h̄ᵀ)·B·(H h̄)(h̄ᵀB) / (c·(c − h̄ᵀB H h̄)) + (cI − h̄h̄ᵀ)·B / c
    /// b̄ = −B̃·(H h̄)/c + h̄/c
    /// W = Y·[B̃, b̄]
    /// ```
    ///
    /// with `c = h̄ᵀh̄ + k₀²`. No intermediate is shared between the two terms
    /// of `B̃` or with the `b̄` update, and `W` is recomputed in full.
    pub(super) fn add_node_existing(&mut self, h_bar: &[f64]) -> Result<StepScalars> {
        let k = h_bar.len();
        let c = dot(h_bar, h_bar) + self.k0sq;
        self.sample_flops.record(1, k, 1);
        let Aux::PseudoInverse { bt } = &self.aux else {
            unreachable!("existing solver without pseudo-inverse")
        };
        let l = bt.rows();

        // First term.
        let (g1, u1) = deflated(bt, h_bar, c, &mut self.sample_flops)?;
        let p1 = matvec(&self.h, h_bar, &mut self.sample_flops)?;
        let s = matvec_t(&g1, &p1, &mut self.sample_flops)?;
        drop(g1);
        let denominator = c - dot(&u1, &p1);
        self.node_flops.record(1, l, 1);
        let tau = self.schur_tau(denominator, c)?;
        let first_scale = 1.0 / (c * denominator);

        // Second term.
        let (g2, _) = deflated(bt, h_bar, c, &mut self.sample_flops)?;
        let mut b_tilde_t = g2.scaled(1.0 / c);
        for (i, &ui) in u1.iter().enumerate() {
            axpy(ui * first_scale, &s, b_tilde_t.row_mut(i));
        }

        // New column.
        let p3 = matvec(&self.h, h_bar, &mut self.sample_flops)?;
        let bp = matvec_t(&b_tilde_t, &p3, &mut self.sample_flops)?;
        let b_bar: Vec<f64> = h_bar.iter().zip(&bp).map(|(h, b)| (h - b) / c).collect();
        if b_bar.iter().any(|v| !v.is_finite()) || !b_tilde_t.is_finite() {
            return Err(crate::error::ElmError::NonFinite("existing update"));
        }
        b_tilde_t.push_row(&b_bar)?;

        let w = weights_from_pseudo_inverse(&self.y, &b_tilde_t, &mut self.sample_flops);
        let w_bar = w.column(l);

        self.h.push_row(h_bar)?;
        self.w = w;
        self.aux = Aux::PseudoInverse { bt: b_tilde_t };
        Ok(StepScalars {
            nodes: l + 1,
            tau,
            p: p1,
            b_bar: Some(b_bar),
            w_bar,
            ..Default::default()
        })
    }

    /// Bordered pseudo-inverse update:
    ///
    /// ```text
    /// u = h̄ᵀB,  τ = 1/(c − u·p),  b̄ = τ(h̄ − B·p),  B̃ = B − b̄·u
    /// w̄ = Y·b̄,  W̃ = W − w̄·u
    /// ```
    pub(super) fn add_node_alg1(&mut self, h_bar: &[f64]) -> Result<StepScalars> {
        let border = self.border(h_bar)?;
        let Aux::PseudoInverse { bt } = &self.aux else {
            unreachable!("alg1 solver without pseudo-inverse")
        };
        let l = bt.rows();

        let u = matvec(bt, h_bar, &mut self.sample_flops)?;
        let denominator = border.c - dot(&u, &border.p);
        self.node_flops.record(1, l, 1);
        let tau = self.schur_tau(denominator, border.c)?;

        let bp = matvec_t(bt, &border.p, &mut self.sample_flops)?;
        let b_bar: Vec<f64> = h_bar.iter().zip(&bp).map(|(h, b)| tau * (h - b)).collect();
        let w_bar: Vec<f64> = (0..self.y.rows()).map(|m| dot(self.y.row(m), &b_bar)).collect();
        self.sample_flops.record(self.y.rows(), h_bar.len(), 1);
        if b_bar.iter().chain(&w_bar).any(|v| !v.is_finite()) {
            return Err(crate::error::ElmError::NonFinite("alg1 update"));
        }

        // Commit.
        let Aux::PseudoInverse { bt } = &mut self.aux else {
            unreachable!()
        };
        for (i, &ui) in u.iter().enumerate() {
            axpy(-ui, &b_bar, bt.row_mut(i));
        }
        bt.push_row(&b_bar)?;
        let mut w = self.w.clone();
        for (m, &wm) in w_bar.iter().enumerate() {
            axpy(-wm, &u, w.row_mut(m));
        }
        self.w = w.with_column(&w_bar)?;
        self.h.push_row(h_bar)?;
        Ok(StepScalars {
            nodes: l + 1,
            tau,
            p: border.p,
            b_bar: Some(b_bar),
            w_bar,
            ..Default::default()
        })
    }
}
