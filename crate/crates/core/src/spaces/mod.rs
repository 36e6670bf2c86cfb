//! Set representations, semiring descriptors and validators, measures on
//! semirings, and the measure-space composite.

mod measure;
mod semiring;
mod set_expr;
mod space;

pub use measure::{check_finite_additivity, AdditivityReport, MeasureDesc};
pub use semiring::{SemiringDesc, SemiringViolation, ValidationReport};
pub use set_expr::{FiniteSet, Interval, IntervalUnion, SetExpr, Universe};
pub use space::MeasureSpace;

pub(crate) use set_expr::full_mask;
