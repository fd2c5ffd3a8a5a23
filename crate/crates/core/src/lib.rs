//! Exact equilibrium solver for linear exchange markets.
//!
//! The solver computes market clearing prices for a linear Arrow-Debreu
//! exchange economy (and for Fisher markets via reduction) with exact
//! rational arithmetic throughout. Prices are maintained as powers of
//! `1 + 1/L` with a symbolic infinitesimal component that removes
//! degeneracies, so every intermediate equality graph is a forest and the
//! flow subroutines can run in forest-specialized form. A terminal linear
//! system recovers the exact rational equilibrium, which is then verified
//! against the original utilities.

pub mod error;
pub mod exactnum;
pub mod extraction;
pub mod flow;
pub mod instance_io;
pub mod market;
pub mod oracle;
pub mod solver;

pub use error::{SolverError, SolverResult};
pub use exactnum::{PowValue, Rational, SolverConfig};
pub use extraction::{EquilibriumCertificate, LinearSystem};
pub use flow::{EqualityNetwork, FlowState};
pub use market::{CycleWitness, MarketInstance, PerturbedInstance, Violation};
pub use solver::{PhaseKind, PhaseTrace, PriceState, SolveOptions, TerminalState};
