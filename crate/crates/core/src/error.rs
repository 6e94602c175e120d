use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("signature ({p},{q}) is not even-dimensional with p+q >= 2")]
    OddDimension { p: usize, q: usize },
    #[error("{what}: neither commutes nor anticommutes (residuals {plus:.3e} / {minus:.3e})")]
    NotASign { what: String, plus: f64, minus: f64 },
    #[error("construction failure: {0}")]
    Construction(String),
    #[error("operator is not K-unitary (residual {0:.3e})")]
    NotKUnitary(f64),
    #[error("operator is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("no non-degenerate vector after {0} attempts")]
    RandomDegenerate(usize),
    #[error("point lies outside the chart domain (margin {margin})")]
    OutOfDomain { margin: f64 },
    #[error("metric is singular at the evaluation point")]
    SingularMetric,
    #[error("diagonal frame requested for a non-diagonal metric")]
    NonDiagonalUnsupported,
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("unknown metric family `{0}`")]
    UnknownFamily(String),
    #[error("constraint `{name}` violated (residual {value:.3e})")]
    ConstraintViolation { name: String, value: f64 },
}
