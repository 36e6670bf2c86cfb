//! Exact-arithmetic kernel for desk-scale measure theory: semirings of sets,
//! measures, generated outer measures, product measures, and certificate-producing
//! checks of sigma-additivity and null-section facts.
//!
//! Everything is computed over arbitrary-precision rationals extended with a
//! single point at infinity. There is no floating point anywhere: every verdict
//! the library emits is a decidable exact comparison, and every certificate
//! carries enough exact values to be re-verified independently.

pub mod error;
pub mod exact;
pub mod gen;
pub mod jsonio;
pub mod limits;
pub mod outer;
pub mod product;
pub mod spaces;
pub mod suite;
pub mod theorem;

pub use error::Error;
pub use exact::ExtReal;
pub use limits::Limits;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
