use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("precision {got} bits is below the floor of {required} bits required by {rule}")]
    PrecisionTooLow {
        rule: &'static str,
        required: u32,
        got: u32,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no convergence after {iterations} iterations ({context})")]
    NoConvergence {
        iterations: usize,
        context: &'static str,
    },
    #[error("derivative vanishes during Newton iteration")]
    DerivativeVanishes,
    #[error("orbit does not close up after {period} steps (residual {residual:e})")]
    NotPeriodic { period: usize, residual: f64 },
    #[error("periodic orbit is parabolic: |1 - mu| = {0:e}")]
    ParabolicOrbit(f64),
    #[error("branch tie: both square roots are equidistant from the target")]
    BranchTie,
    #[error("degenerate solution: {0}")]
    DegenerateSolution(String),
    #[error("periodic orbit is not repelling: |mu| = {0}")]
    NotRepelling(f64),
    #[error("backward orbit stopped contracting at step {0}")]
    ContractionLost(usize),
    #[error("scaled tail has not converged: {0}")]
    NotConverged(String),
    #[error("zero input has no representative in the fundamental annulus")]
    ZeroInput,
    #[error("preimage tree needs {needed} nodes, cap is {cap}")]
    CapExceeded { needed: usize, cap: usize },
    #[error("state left the invariant domain: {0}")]
    OutOfDomain(String),
    #[error("branch continuation jumped at backward step {0}")]
    BranchJump(usize),
    #[error("surgery limit {estimate} disagrees with backward limit {backward} (distance {distance:e})")]
    InconsistentLimit {
        estimate: String,
        backward: String,
        distance: f64,
    },
    #[error("could not locate a repelling fixed point to seed inverse iteration")]
    NoRepellingSeed,
    #[error("no boundary cell found in the sampling window")]
    EmptyWindow,
    #[error("every point was filtered out of the rescaling window")]
    AllPointsFiltered,
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable variant name, printed by the CLI on failure.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonFinite(_) => "NonFinite",
            Error::PrecisionTooLow { .. } => "PrecisionTooLow",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DerivativeVanishes => "DerivativeVanishes",
            Error::NotPeriodic { .. } => "NotPeriodic",
            Error::ParabolicOrbit(_) => "ParabolicOrbit",
            Error::BranchTie => "BranchTie",
            Error::DegenerateSolution(_) => "DegenerateSolution",
            Error::NotRepelling(_) => "NotRepelling",
            Error::ContractionLost(_) => "ContractionLost",
            Error::NotConverged(_) => "NotConverged",
            Error::ZeroInput => "ZeroInput",
            Error::CapExceeded { .. } => "CapExceeded",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::BranchJump(_) => "BranchJump",
            Error::InconsistentLimit { .. } => "InconsistentLimit",
            Error::NoRepellingSeed => "NoRepellingSeed",
            Error::EmptyWindow => "EmptyWindow",
            Error::AllPointsFiltered => "AllPointsFiltered",
            Error::EmptyCloud => "EmptyCloud",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
