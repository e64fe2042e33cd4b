use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pair (A, B) is not stabilizable")]
    NotStabilizable,

    #[error("matrix is not Hurwitz (max real eigenvalue part {0:.3e})")]
    NotHurwitz(f64),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("no active behaviors")]
    EmptyActiveSet,

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("unsupported policy construct: {0}")]
    UnsupportedPolicy(&'static str),

    #[error("estimator did not converge after {iterations} iterations (objective {objective:.6e})")]
    NotConverged { iterations: usize, objective: f64 },
}

pub(crate) fn ensure_finite(value: f64, what: &'static str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
