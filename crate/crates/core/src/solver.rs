//! Placeholder.
pub struct PriceState;
pub struct PhaseTrace;
pub struct TerminalState;
pub struct SolveOptions;
pub enum PhaseKind {}
