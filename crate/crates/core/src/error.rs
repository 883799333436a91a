use thiserror::Error;

/// Errors produced by the analytical and sampling routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested performance target cannot be met by any admissible design.
    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),

    /// The closed loop is not mean-square stable at the requested operating point.
    #[error("closed loop is not mean-square stable")]
    Unstable,

    /// The beamforming solver stopped without meeting its optimality residuals.
    #[error("solver failure after {iterations} iterations: power slack {power_slack:e}, control-SINR slack {sinr_slack:e}")]
    SolverFailure {
        iterations: usize,
        power_slack: f64,
        sinr_slack: f64,
    },

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge: estimated error {achieved:e} exceeds tolerance {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// Channel geometry makes the requested quantity undefined.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn infeasible(msg: impl Into<String>) -> Error {
    Error::InfeasibleTarget(msg.into())
}
