//! Ridge solution by a fresh Cholesky solve of `R·Wᵀ = H·Yᵀ`.

use super::{check_k0sq, Aux, SolverState, StepScalars};
use crate::error::{ElmError, Result};
use crate::linalg::{dot, gram, Cholesky, Matrix};

/// `W = Y·Hᵀ·(H·Hᵀ + k₀²I)⁻¹`, via Cholesky rather than an explicit inverse.
pub fn solve_direct(h: &Matrix, y: &Matrix, k0sq: f64) -> Result<Matrix> {
    check_k0sq(k0sq)?;
    if h.cols() != y.cols() {
        return Err(ElmError::shape("solve_direct", h.shape(), y.shape()));
    }
    let r = gram(h, k0sq);
    let hy = targets_product(h, y);
    Ok(Cholesky::new(&r)?.solve(&hy)?.transpose())
}

/// `H·Yᵀ` (l×M), entry by entry with the same dot products the bordered
/// update uses.
pub(crate) fn targets_product(h: &Matrix, y: &Matrix) -> Matrix {
    Matrix::from_fn(h.rows(), y.rows(), |i, m| dot(h.row(i), y.row(m)))
}

impl SolverState {
    pub(super) fn add_node_baseline(&mut self, h_bar: &[f64]) -> Result<StepScalars> {
        let border = self.border(h_bar)?;
        let Aux::Direct { gram, hy } = &self.aux else {
            unreachable!("baseline state without Gram matrix")
        };
        let l = gram.rows();

        // Border R with p and c; every entry is the same dot product a
        // from-scratch Gram matrix would compute.
        let mut r = Matrix::zeros(l + 1, l + 1);
        for i in 0..l {
            r.row_mut(i)[..l].copy_from_slice(gram.row(i));
            r.set(i, l, border.p[i]);
            r.set(l, i, border.p[i]);
        }
        r.set(l, l, border.c);

        let mut hy_next = hy.clone();
        let yh: Vec<f64> = (0..self.y.rows()).map(|m| dot(h_bar, self.y.row(m))).collect();
        self.sample_flops.record(self.y.rows(), h_bar.len(), 1);
        hy_next.push_row(&yh)?;

        let chol = Cholesky::new(&r).map_err(|e| match e {
            ElmError::Singular { value, .. } if !(value > 0.0) => ElmError::DefinitenessLoss {
                node: l + 1,
                tau: if value == 0.0 { f64::INFINITY } else { 1.0 / value },
            },
            other => other,
        })?;
        let w = chol.solve(&hy_next)?.transpose();
        let g = chol.factor().get(l, l);
        let tau = 1.0 / (g * g);

        self.h.push_row(h_bar)?;
        self.w = w;
        self.aux = Aux::Direct {
            gram: r,
            hy: hy_next,
        };
        Ok(StepScalars {
            nodes: l + 1,
            tau,
            p: border.p,
            w_bar: self.w.column(l),
            ..Default::default()
        })
    }
}
