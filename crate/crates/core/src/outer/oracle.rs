//! Exhaustive all-covers reference for the cover infimum.
//!
//! Enumerates every subfamily of the generating family outright and takes
//! the cheapest one covering the target. Exponential in the family size and
//! deliberately naive: it shares no search logic with the production
//! branch-and-bound, which it exists to cross-check.

use crate::error::Error;
use crate::exact::ExtReal;
use crate::spaces::{FiniteSet, MeasureSpace, SetExpr};
use crate::Result;

/// Exact `mu*(target)` by brute force over all `2^|family|` subfamilies.
/// Only sensible for small explicit families; refuses beyond 20 members.
pub fn exhaustive_outer_measure(space: &MeasureSpace, target: &SetExpr) -> Result<ExtReal> {
    let family = space.semiring().members().ok_or_else(|| {
        Error::PreconditionFailed("exhaustive oracle needs an explicit family".into())
    })?;
    if family.len() > 20 {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive oracle refuses a family of {} members",
            family.len()
        )));
    }
    let masks: Vec<u64> = family
        .iter()
        .map(|s| s.as_finite().map(FiniteSet::to_mask))
        .collect::<Result<_>>()?;
    let values: Vec<ExtReal> = family
        .iter()
        .map(|s| space.measure().eval(s))
        .collect::<Result<_>>()?;
    let t = target.as_finite()?.to_mask();

    let mut best: Option<ExtReal> = None;
    for pick in 0u64..(1u64 << family.len()) {
        let mut union = 0u64;
        for (i, &m) in masks.iter().enumerate() {
            if pick & (1 << i) != 0 {
                union |= m;
            }
        }
        if t & !union != 0 {
            continue;
        }
        let sum: ExtReal = (0..masks.len())
            .filter(|i| pick & (1 << i) != 0)
            .map(|i| values[i].clone())
            .sum();
        best = match best {
            None => Some(sum),
            Some(b) if sum < b => Some(sum),
            keep => keep,
        };
    }
    Ok(best.unwrap_or(ExtReal::Infinity))
}
