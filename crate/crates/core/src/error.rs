use std::fmt;

use crate::market::Violation;

/// Errors surfaced by the solver library.
///
/// Invariant violations are deliberately loud: the phase loop checks its
/// monitored invariants every phase and aborts rather than continuing from
/// a state the analysis no longer covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverError {
    /// The instance failed one of the model assumptions.
    InvalidInstance(Violation),
    /// An exponent was outside the domain of a power approximation.
    ExponentOutOfRange(String),
    /// A rounding operation received an argument below one.
    ValueBelowOne(String),
    /// Prime sieve bound below two.
    SieveBoundTooSmall,
    /// A flow operation was given a warm start that is not feasible.
    InfeasibleWarmStart(String),
    /// A forest-specialized routine received a cyclic edge set.
    ForestCycle,
    /// The starting flow for a sold-set-preserving computation does not
    /// sell every good it is asked to preserve.
    StartMissesSoldGood(usize),
    /// The phase loop exceeded its hard cap.
    PhaseCapExceeded { phases: u64, cap: u64 },
    /// A monitored invariant failed during the phase loop.
    InvariantViolation(String),
    /// Rescaled flow exceeded a capacity during a price update.
    CapacityViolation(String),
    /// The extraction system did not have full rank.
    SingularSystem,
    /// The extraction system produced a nonpositive price.
    NonpositivePrice(usize),
    /// The assembled system did not have exactly n rows.
    RowCountMismatch { rows: usize, expected: usize },
    /// The extracted prices failed equilibrium verification.
    VerificationFailed(String),
    /// An oracle routine was asked to run above its size guard.
    SizeGuard { n: usize, max: usize },
    /// Malformed instance or price file.
    ParseError(String),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::InvalidInstance(v) => write!(f, "invalid instance: {v}"),
            SolverError::ExponentOutOfRange(s) => write!(f, "exponent out of range: {s}"),
            SolverError::ValueBelowOne(s) => write!(f, "value below one: {s}"),
            SolverError::SieveBoundTooSmall => write!(f, "sieve bound must be at least 2"),
            SolverError::InfeasibleWarmStart(s) => write!(f, "infeasible warm start: {s}"),
            SolverError::ForestCycle => write!(f, "edge set contains a cycle"),
            SolverError::StartMissesSoldGood(g) => {
                write!(f, "starting flow does not sell good {g}")
            }
            SolverError::PhaseCapExceeded { phases, cap } => {
                write!(f, "phase cap exceeded: {phases} phases, cap {cap}")
            }
            SolverError::InvariantViolation(s) => write!(f, "invariant violation: {s}"),
            SolverError::CapacityViolation(s) => write!(f, "capacity violation: {s}"),
            SolverError::SingularSystem => write!(f, "extraction system is singular"),
            SolverError::NonpositivePrice(i) => {
                write!(f, "extraction produced nonpositive price for good {i}")
            }
            SolverError::RowCountMismatch { rows, expected } => {
                write!(f, "extraction system has {rows} rows, expected {expected}")
            }
            SolverError::VerificationFailed(s) => write!(f, "verification failed: {s}"),
            SolverError::SizeGuard { n, max } => {
                write!(f, "instance size {n} exceeds oracle guard {max}")
            }
            SolverError::ParseError(s) => write!(f, "parse error: {s}"),
        }
    }
}

impl std::error::Error for SolverError {}

pub type SolverResult<T> = Result<T, SolverError>;
