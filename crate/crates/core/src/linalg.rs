//! Dense row-major matrices and the handful of kernels the solvers need.
//!
//! Products that are shaped like a matrix multiply can be charged to a
//! [`FlopCounter`] at `2·a·b·c` flops for an `(a×b)·(b×c)` product. Rank-one
//! updates, scaling and sums are element-wise and never charged.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ElmError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(ElmError::shape("from_vec", (rows, cols), (data.len(), 1)));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ElmError::NonFinite("from_vec"));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(ElmError::shape("from_rows", (rows.len(), cols), (1, r.len())));
            }
            data.extend_from_slice(r);
        }
        Matrix::from_vec(rows.len(), cols, data)
    }

    pub fn column_vector(v: &[f64]) -> Result<Self> {
        Matrix::from_vec(v.len(), 1, v.to_vec())
    }

    pub fn row_vector(v: &[f64]) -> Result<Self> {
        Matrix::from_vec(1, v.len(), v.to_vec())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Appends a row. An empty `0×0` matrix adopts the row length.
    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if self.rows == 0 && self.cols == 0 {
            self.cols = row.len();
        }
        if row.len() != self.cols {
            return Err(ElmError::shape("push_row", self.shape(), (1, row.len())));
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    /// Returns a copy with one extra column appended on the right.
    pub fn with_column(&self, col: &[f64]) -> Result<Matrix> {
        if col.len() != self.rows {
            return Err(ElmError::shape("with_column", self.shape(), (col.len(), 1)));
        }
        let cols = self.cols + 1;
        let mut data = Vec::with_capacity(self.rows * cols);
        for (i, &c) in col.iter().enumerate() {
            data.extend_from_slice(self.row(i));
            data.push(c);
        }
        Ok(Matrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// Keeps the rows listed in `idx`, in that order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// Keeps the columns listed in `idx`, in that order.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    /// Leading `n` rows.
    pub fn top_rows(&self, n: usize) -> Matrix {
        let n = n.min(self.rows);
        Matrix {
            rows: n,
            cols: self.cols,
            data: self.data[..n * self.cols].to_vec(),
        }
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    fn zip_with(&self, other: &Matrix, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(ElmError::shape(op, self.shape(), other.shape()));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn ensure_finite(self, op: &'static str) -> Result<Matrix> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(ElmError::NonFinite(op))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    shape: [usize; 2],
    data: Vec<f64>,
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            shape: [self.rows, self.cols],
            data: self.data.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(d)?;
        Matrix::from_vec(repr.shape[0], repr.shape[1], repr.data).map_err(serde::de::Error::custom)
    }
}

/// Tally of gemm-shaped flops, `2·a·b·c` per `(a×b)·(b×c)` product.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopCounter {
    pub multiply_adds: u64,
    pub enabled: bool,
}

impl FlopCounter {
    pub fn new() -> Self {
        FlopCounter {
            multiply_adds: 0,
            enabled: true,
        }
    }

    pub fn disabled() -> Self {
        FlopCounter::default()
    }

    #[inline]
    pub fn record(&mut self, a: usize, b: usize, c: usize) {
        if self.enabled {
            self.multiply_adds += 2 * (a as u64) * (b as u64) * (c as u64);
        }
    }

    /// Charges a precomputed flop count, e.g. for a triangular product.
    #[inline]
    pub fn add(&mut self, flops: u64) {
        if self.enabled {
            self.multiply_adds += flops;
        }
    }

    pub fn count(&self) -> u64 {
        self.multiply_adds
    }
}

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = [0.0f64; 4];
    let xc = x.chunks_exact(4);
    let yc = y.chunks_exact(4);
    let (xr, yr) = (xc.remainder(), yc.remainder());
    for (a, b) in xc.zip(yc) {
        acc[0] += a[0] * b[0];
        acc[1] += a[1] * b[1];
        acc[2] += a[2] * b[2];
        acc[3] += a[3] * b[3];
    }
    let mut tail = 0.0;
    for (a, b) in xr.iter().zip(yr) {
        tail += a * b;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn gemm(a: &Matrix, b: &Matrix, counter: &mut FlopCounter) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(ElmError::shape("gemm", a.shape(), b.shape()));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let orow = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik != 0.0 {
                axpy(aik, b.row(k), orow);
            }
        }
    }
    counter.record(a.rows, a.cols, b.cols);
    out.ensure_finite("gemm")
}

/// `a·x` for a vector `x`.
pub fn matvec(a: &Matrix, x: &[f64], counter: &mut FlopCounter) -> Result<Vec<f64>> {
    if a.cols != x.len() {
        return Err(ElmError::shape("matvec", a.shape(), (x.len(), 1)));
    }
    counter.record(a.rows, a.cols, 1);
    Ok((0..a.rows).map(|i| dot(a.row(i), x)).collect())
}

/// `aᵀ·x` for a vector `x`, without forming the transpose.
pub fn matvec_t(a: &Matrix, x: &[f64], counter: &mut FlopCounter) -> Result<Vec<f64>> {
    if a.rows != x.len() {
        return Err(ElmError::shape("matvec_t", (a.cols, a.rows), (x.len(), 1)));
    }
    let mut out = vec![0.0; a.cols];
    for (i, &xi) in x.iter().enumerate() {
        if xi != 0.0 {
            axpy(xi, a.row(i), &mut out);
        }
    }
    counter.record(a.cols, a.rows, 1);
    Ok(out)
}

/// `H·Hᵀ + shift·I`, exploiting symmetry.
pub fn gram(h: &Matrix, shift: f64) -> Matrix {
    let n = h.rows;
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = dot(h.row(i), h.row(j));
            g.set(i, j, v);
            g.set(j, i, v);
        }
        g.data[i * n + i] += shift;
    }
    g
}

pub fn frobenius_distance(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(ElmError::shape("frobenius_distance", a.shape(), b.shape()));
    }
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Lower Cholesky factor `G` with `R = G·Gᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    factor: Matrix,
}

impl Cholesky {
    pub fn new(r: &Matrix) -> Result<Self> {
        let n = r.rows;
        if r.cols != n {
            return Err(ElmError::shape("cholesky", r.shape(), r.shape()));
        }
        let scale = r.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..i {
                if (r.get(i, j) - r.get(j, i)).abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                    return Err(ElmError::domain(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let mut g = Matrix::zeros(n, n);
        for j in 0..n {
            let gj = &g.data[j * n..j * n + j];
            let pivot = r.get(j, j) - dot(gj, gj);
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(ElmError::Singular { pivot: j, value: pivot });
            }
            let d = pivot.sqrt();
            g.data[j * n + j] = d;
            for i in j + 1..n {
                let s = r.get(i, j) - dot(&g.data[i * n..i * n + j], &g.data[j * n..j * n + j]);
                g.data[i * n + j] = s / d;
            }
        }
        Ok(Cholesky { factor: g })
    }

    pub fn factor(&self) -> &Matrix {
        &self.factor
    }

    /// Solves `R·X = M`.
    pub fn solve(&self, m: &Matrix) -> Result<Matrix> {
        let n = self.factor.rows;
        if m.rows != n {
            return Err(ElmError::shape("solve_spd", (n, n), m.shape()));
        }
        // Work column by column on the transpose so each right-hand side is contiguous.
        let mut xt = m.transpose();
        let g = &self.factor;
        for c in 0..m.cols {
            let x = xt.row_mut(c);
            for i in 0..n {
                let s = x[i] - dot(&g.row(i)[..i], &x[..i]);
                x[i] = s / g.get(i, i);
            }
            for i in (0..n).rev() {
                let mut s = x[i];
                for k in i + 1..n {
                    s -= g.get(k, i) * x[k];
                }
                x[i] = s / g.get(i, i);
            }
        }
        xt.transpose().ensure_finite("solve_spd")
    }
}

/// Solves `R·X = M` for symmetric positive definite `R` by Cholesky.
pub fn solve_spd(r: &Matrix, m: &Matrix) -> Result<Matrix> {
    Cholesky::new(r)?.solve(m)
}
