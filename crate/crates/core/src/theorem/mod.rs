//! Executable forms of the product-measure results: finite-witness
//! extraction, sigma-additivity certification, and the null-section
//! equivalence in both directions.

mod certify;
mod null_section;
mod witness;

pub use certify::{certify_sigma_additivity, CertFailure, CertReport, CertStage};
pub use null_section::{
    null_section_converse, null_section_forward, product_outer, Direction, NullSectionContext,
    NullSectionVerdict, StepValue,
};
pub use witness::{
    extract_witness, subset_of_union, verify_witness, PointSelection, Witness,
};
