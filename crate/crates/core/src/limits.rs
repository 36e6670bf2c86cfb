//! Configurable resource bounds for the exhaustive and search-based checks.

/// Bounds that keep the exact searches desk-scale. Every exhaustive or
/// branching procedure in the crate consults these instead of hard-coding
/// magic numbers; `Default` gives the documented defaults.
#[derive(Debug, Clone)]
pub struct Limits {
    /// Largest admissible finite universe (power-set style operations stay
    /// tractable below this).
    pub max_finite_universe: u32,
    /// Largest universe for the exhaustive Caratheodory measurability test
    /// (2^n test sets).
    pub max_caratheodory_points: u32,
    /// Step budget for the cover-infimum search before it degrades to a
    /// certified upper bound.
    pub cover_search_steps: u64,
    /// Longest sample sublist checked for finite subadditivity.
    pub max_subadditivity_len: usize,
    /// Deepest truncation expanded from a parametric dyadic tail.
    pub max_tail_depth: u32,
    /// Denominator bound for randomly drawn rational cuts in generators.
    pub max_cut_denominator: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_finite_universe: 64,
            max_caratheodory_points: 12,
            cover_search_steps: 1 << 22,
            max_subadditivity_len: 3,
            max_tail_depth: 64,
            max_cut_denominator: 64,
        }
    }
}
