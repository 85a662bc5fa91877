use thiserror::Error;

pub type Result<T, E = ElmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ElmError {
    #[error("shape mismatch in {op}: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    Shape {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("matrix is not positive definite: pivot {pivot} = {value:e}")]
    Singular { pivot: usize, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// Schur-complement denominator collapsed while adding a node.
    #[error("numerical breakdown adding node {node}: denominator {denominator:e} (scale {scale:e})")]
    Breakdown {
        node: usize,
        denominator: f64,
        scale: f64,
    },

    #[error("loss of positive definiteness adding node {node}: tau = {tau:e}")]
    DefinitenessLoss { node: usize, tau: f64 },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("parse error at line {line}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        line: usize,
        column: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl ElmError {
    pub(crate) fn shape(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        ElmError::Shape {
            op,
            left_rows: left.0,
            left_cols: left.1,
            right_rows: right.0,
            right_cols: right.1,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        ElmError::Domain(msg.into())
    }
}
