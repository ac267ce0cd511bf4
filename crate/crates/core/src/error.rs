use thiserror::Error;

/// Errors raised by the toolkit.
///
/// `InvalidInput` covers violated preconditions, `Accuracy` covers
/// quadrature or lattice refinements that failed to converge. The CLI maps
/// the two classes onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("assumption (A) violated at eta = {eta:?}: block {block} has eigenvalue spread {spread:e}")]
    AssumptionViolated {
        eta: Vec<f64>,
        block: usize,
        spread: f64,
    },

    #[error("accuracy: {what} (coarse = {coarse:e}, fine = {fine:e})")]
    Accuracy {
        what: String,
        coarse: f64,
        fine: f64,
    },

    #[error("lattice too narrow: outer-shell share {share:.3} exceeds {limit:.3}")]
    WidenLattice { share: f64, limit: f64 },

    #[error("weight recipe infeasible for s = {s}: {violated}")]
    InfeasibleWeight { s: f64, violated: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors that signal numerical non-convergence rather than bad input.
    pub fn is_accuracy(&self) -> bool {
        matches!(self, Error::Accuracy { .. } | Error::WidenLattice { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
