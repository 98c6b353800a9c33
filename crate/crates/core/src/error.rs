use thiserror::Error;

/// Errors raised by chain validation and the distributional computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transition matrix is not square or does not match labels: {0}")]
    DimensionMismatch(String),
    #[error("a chain needs at least two states, got {0}")]
    TooFewStates(usize),
    #[error("row {row} is not a probability vector: {detail}")]
    NotStochastic { row: usize, detail: String },
    #[error("chain is not irreducible: state {unreachable} cannot be reached from state 0 or cannot return")]
    NotIrreducible { unreachable: usize },
    #[error("chain is periodic with period {period}")]
    Periodic { period: usize },
    #[error("stationary linear system is singular")]
    SingularSystem,
    #[error("stationary residual {residual:e} exceeds tolerance")]
    StationaryResidual { residual: f64 },
    #[error("state index {index} out of range for {size} states")]
    InvalidState { index: usize, size: usize },
    #[error("unknown state label {0:?}")]
    UnknownLabel(String),
    #[error("invalid probability vector: {0}")]
    InvalidProbVector(String),
    #[error("restricted stationary law is degenerate: 1 - pi_j = {0:e}")]
    DegenerateMass(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),
    #[error("support exceeded the hard cap of {cap} points")]
    TruncationCap { cap: usize },
    #[error("compounding law has mass {0:e} at zero")]
    CompounderHasMassAtZero(f64),
    #[error("separation increased at t = {t}: {prev:e} -> {next:e}")]
    NonMonotoneSeparation { t: usize, prev: f64, next: f64 },
    #[error("return probability P^t(j,j) increased at t = {t}")]
    NotDecreasing { t: usize },
    #[error("return probability fell below pi_j at t = {t}")]
    NegativeSurvival { t: usize },
    #[error("hitting condition fails at t = {t}, y = {y} (gap {gap:e})")]
    ReturnConditionFails { t: usize, y: usize, gap: f64 },
    #[error("mean hitting time mismatch: direct {direct} vs return-probability sum {returns}")]
    MeanMismatch { direct: f64, returns: f64 },
    #[error("moment generating function cannot be certified at theta = {0}")]
    DivergentMgf(f64),
    #[error("greedy recursion did not terminate within {0} steps")]
    NonTermination(usize),
    #[error("greedy recursion produced a negative residual {value:e} at step {step}")]
    NegativeQ { step: usize, value: f64 },
    #[error("dual chain holding probability {0} is too close to 1")]
    DegenerateStay(f64),
    #[error("simulated path exceeded {0} steps")]
    PathCap(u64),
    #[error("no samples supplied")]
    EmptySample,
}

impl Error {
    /// True for failures of internal numerical cross-checks, as opposed to
    /// bad input.
    pub fn is_numeric_diagnostic(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem
                | Error::StationaryResidual { .. }
                | Error::DegenerateMass(_)
                | Error::TruncationCap { .. }
                | Error::NonMonotoneSeparation { .. }
                | Error::MeanMismatch { .. }
                | Error::DivergentMgf(_)
                | Error::NonTermination(_)
                | Error::NegativeQ { .. }
                | Error::DegenerateStay(_)
                | Error::PathCap(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
