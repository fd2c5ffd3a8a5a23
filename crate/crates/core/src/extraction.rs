//! Placeholder.
pub struct LinearSystem;
pub struct EquilibriumCertificate;
