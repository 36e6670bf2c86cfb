//! Semiring descriptors, the disjoint-difference decomposition, and the
//! axiom validator.
//!
//! A semiring here is a family containing the empty set, closed under
//! pairwise intersection, and whose set differences decompose into finite
//! disjoint unions of members. Explicit finite families are checked
//! exhaustively; the half-open interval family is a semiring by
//! construction and is treated symbolically.

use serde::Serialize;

use crate::error::Error;
use crate::spaces::set_expr::{full_mask, FiniteSet, SetExpr, Universe};
use crate::Result;

/// A family of sets claimed to satisfy the semiring axioms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemiringDesc {
    /// A finite explicit family over a finite universe, kept in construction
    /// order (decomposition search is deterministic in this order).
    Explicit { family: Vec<SetExpr> },
    /// All half-open rational intervals `[a, b)`, `a <= b`, over the line.
    IntervalSemiring,
}

impl SemiringDesc {
    /// Builds an explicit descriptor; members must be finite sets and
    /// pairwise distinct. Nothing else is validated here — invalid families
    /// must be representable so the validator can classify them.
    pub fn explicit(family: Vec<SetExpr>) -> Result<SemiringDesc> {
        let mut seen = std::collections::BTreeSet::new();
        for s in &family {
            s.as_finite()?;
            if !seen.insert(s.clone()) {
                return Err(Error::Parse(format!("duplicate family member {}", s)));
            }
        }
        Ok(SemiringDesc::Explicit { family })
    }

    /// The power set of a finite universe, in mask order (so the empty set
    /// comes first). Bounded to keep materialization sane.
    pub fn power_set(size: u32) -> Result<SemiringDesc> {
        if size > 16 {
            return Err(Error::BudgetExceeded(format!(
                "power set of a {}-point universe is too large to materialize",
                size
            )));
        }
        let family = (0u64..(1u64 << size))
            .map(|m| SetExpr::Finite(FiniteSet::from_mask(m)))
            .collect();
        Ok(SemiringDesc::Explicit { family })
    }

    pub fn members(&self) -> Option<&[SetExpr]> {
        match self {
            SemiringDesc::Explicit { family } => Some(family),
            SemiringDesc::IntervalSemiring => None,
        }
    }

    /// Membership in the family. For the interval semiring the members are
    /// the single intervals (including the empty one).
    pub fn contains(&self, s: &SetExpr) -> bool {
        match self {
            SemiringDesc::Explicit { family } => family.contains(s),
            SemiringDesc::IntervalSemiring => match s {
                SetExpr::Intervals(u) => u.intervals().len() <= 1,
                SetExpr::Finite(_) => false,
            },
        }
    }

    /// `a \ b` as a pairwise-disjoint list of family members.
    ///
    /// For the interval semiring this is the deterministic at-most-two-piece
    /// split. For explicit families it is a backtracking search over the
    /// family in construction order, returning the lexicographically first
    /// decomposition; failure signals the family is not a semiring.
    pub fn difference(&self, a: &SetExpr, b: &SetExpr) -> Result<Vec<SetExpr>> {
        match self {
            SemiringDesc::IntervalSemiring => {
                let ia = a.as_intervals()?;
                let ib = b.as_intervals()?;
                if ia.intervals().len() > 1 || ib.intervals().len() > 1 {
                    return Err(Error::PreconditionFailed(format!(
                        "{} or {} is not a member of the interval semiring",
                        a, b
                    )));
                }
                let diff = ia.difference(ib);
                Ok(diff
                    .intervals()
                    .iter()
                    .map(|iv| SetExpr::interval(iv.lo.clone(), iv.hi.clone()))
                    .collect())
            }
            SemiringDesc::Explicit { family } => {
                if !family.contains(a) || !family.contains(b) {
                    return Err(Error::PreconditionFailed(format!(
                        "{} or {} is not a member of the family",
                        a, b
                    )));
                }
                let masks: Vec<u64> = family
                    .iter()
                    .map(|s| s.as_finite().map(FiniteSet::to_mask))
                    .collect::<Result<_>>()?;
                let target = a.as_finite()?.to_mask() & !b.as_finite()?.to_mask();
                match tile_exactly(target, &masks) {
                    Some(indices) => Ok(indices
                        .into_iter()
                        .map(|i| family[i].clone())
                        .collect()),
                    None => Err(Error::NoDecomposition(format!(
                        "{} \\ {} has no disjoint decomposition in the family",
                        a, b
                    ))),
                }
            }
        }
    }

    /// Classifies an explicit family against the semiring, algebra, and
    /// sigma-algebra axioms. Violations are report content, not errors.
    /// The interval semiring validates axiomatically.
    pub fn validate(&self, universe: &Universe) -> Result<ValidationReport> {
        let family = match self {
            SemiringDesc::IntervalSemiring => {
                return Ok(ValidationReport {
                    is_semiring: true,
                    // complements of bounded intervals are not bounded
                    // interval unions, so the family is not an algebra
                    is_algebra: false,
                    is_sigma_algebra: false,
                    violations: Vec::new(),
                });
            }
            SemiringDesc::Explicit { family } => family,
        };
        let size = match universe {
            Universe::Finite { size } => *size,
            Universe::Interval => {
                return Err(Error::UniverseMismatch(
                    "explicit families live over finite universes".into(),
                ))
            }
        };
        for s in family {
            s.check_in(universe)?;
        }
        let masks: Vec<u64> = family
            .iter()
            .map(|s| s.as_finite().map(FiniteSet::to_mask))
            .collect::<Result<_>>()?;
        let full = full_mask(size);

        let mut violations = Vec::new();
        if !masks.contains(&0) {
            violations.push(SemiringViolation::MissingEmptySet);
        }
        for i in 0..masks.len() {
            for j in i..masks.len() {
                let inter = masks[i] & masks[j];
                if !masks.contains(&inter) {
                    violations.push(SemiringViolation::IntersectionNotInFamily {
                        a: i,
                        b: j,
                        intersection: SetExpr::Finite(FiniteSet::from_mask(inter)),
                    });
                }
            }
        }
        for i in 0..masks.len() {
            for j in 0..masks.len() {
                let target = masks[i] & !masks[j];
                if tile_exactly(target, &masks).is_none() {
                    violations.push(SemiringViolation::DifferenceNotDecomposable { a: i, b: j });
                }
            }
        }
        let is_semiring = violations.is_empty();

        // Algebra: nonempty family closed under finite intersection and
        // complementation (complement read as X \ A).
        let closed_under_intersection = (0..masks.len())
            .all(|i| (i..masks.len()).all(|j| masks.contains(&(masks[i] & masks[j]))));
        let closed_under_complement = masks.iter().all(|m| masks.contains(&(full & !m)));
        let is_algebra = !masks.is_empty() && closed_under_intersection && closed_under_complement;
        // On a finite universe countable unions collapse to finite ones, so
        // pairwise union closure decides the sigma-algebra flag.
        let closed_under_union = (0..masks.len())
            .all(|i| (i..masks.len()).all(|j| masks.contains(&(masks[i] | masks[j]))));
        let is_sigma_algebra = is_algebra && closed_under_union;

        Ok(ValidationReport {
            is_semiring,
            is_algebra,
            is_sigma_algebra,
            violations,
        })
    }
}

/// Finds a pairwise-disjoint exact tiling of `target` by family members,
/// searching the family in order and always covering the lowest uncovered
/// point next; the first solution found is lexicographically least in
/// family-index order. Empty members are never used.
fn tile_exactly(target: u64, masks: &[u64]) -> Option<Vec<usize>> {
    fn go(target: u64, masks: &[u64], chosen: &mut Vec<usize>) -> bool {
        if target == 0 {
            return true;
        }
        let low = target & target.wrapping_neg();
        for (i, &m) in masks.iter().enumerate() {
            if m != 0 && m & low != 0 && m & !target == 0 {
                chosen.push(i);
                if go(target & !m, masks, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    if go(target, masks, &mut chosen) {
        Some(chosen)
    } else {
        None
    }
}

/// Outcome of the axiom suite on a family.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub is_semiring: bool,
    pub is_algebra: bool,
    pub is_sigma_algebra: bool,
    pub violations: Vec<SemiringViolation>,
}

/// One axiom violation, with the offending pair as family indices.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SemiringViolation {
    MissingEmptySet,
    IntersectionNotInFamily {
        a: usize,
        b: usize,
        intersection: SetExpr,
    },
    DifferenceNotDecomposable {
        a: usize,
        b: usize,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn pts(v: &[u32]) -> SetExpr {
        SetExpr::points(v.to_vec())
    }

    #[test]
    fn interval_difference_examples() {
        let sr = SemiringDesc::IntervalSemiring;
        let a = SetExpr::interval(rat(0, 1), rat(3, 1));
        let b = SetExpr::interval(rat(1, 1), rat(2, 1));
        let d = sr.difference(&a, &b).unwrap();
        assert_eq!(
            d,
            vec![
                SetExpr::interval(rat(0, 1), rat(1, 1)),
                SetExpr::interval(rat(2, 1), rat(3, 1)),
            ]
        );
        assert!(sr.difference(&a, &a).unwrap().is_empty());
    }

    #[test]
    fn power_set_difference() {
        let sr = SemiringDesc::power_set(3).unwrap();
        let d = sr.difference(&pts(&[0, 1]), &pts(&[1, 2])).unwrap();
        assert_eq!(d, vec![pts(&[0])]);
    }

    #[test]
    fn power_set_is_sigma_algebra() {
        let u = Universe::finite(2).unwrap();
        let report = SemiringDesc::power_set(2).unwrap().validate(&u).unwrap();
        assert!(report.is_semiring);
        assert!(report.is_algebra);
        assert!(report.is_sigma_algebra);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn singletons_form_a_semiring_but_not_an_algebra() {
        let u = Universe::finite(2).unwrap();
        let sr = SemiringDesc::explicit(vec![pts(&[]), pts(&[0]), pts(&[1])]).unwrap();
        let report = sr.validate(&u).unwrap();
        assert!(report.is_semiring, "violations: {:?}", report.violations);
        // complement of the empty set is {0,1}, which is missing
        assert!(!report.is_algebra);
        assert!(!report.is_sigma_algebra);
    }

    #[test]
    fn missing_intersection_detected() {
        let u = Universe::finite(3).unwrap();
        let sr = SemiringDesc::explicit(vec![pts(&[]), pts(&[0, 1]), pts(&[1, 2])]).unwrap();
        let report = sr.validate(&u).unwrap();
        assert!(!report.is_semiring);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            SemiringViolation::IntersectionNotInFamily { intersection, .. }
                if *intersection == pts(&[1])
        )));
    }

    #[test]
    fn duplicate_members_rejected() {
        assert!(SemiringDesc::explicit(vec![pts(&[0]), pts(&[0])]).is_err());
    }

    #[test]
    fn decomposition_is_disjoint_and_exact() {
        // blocks of a partition plus the empty set form a semiring; check
        // the decomposition invariants on every ordered pair
        let family = vec![pts(&[]), pts(&[0, 1]), pts(&[2]), pts(&[3, 4])];
        let sr = SemiringDesc::explicit(family.clone()).unwrap();
        for a in &family {
            for b in &family {
                let pieces = sr.difference(a, b).unwrap();
                let mut seen = 0u64;
                for p in &pieces {
                    let m = p.as_finite().unwrap().to_mask();
                    assert_eq!(seen & m, 0, "pieces overlap");
                    assert!(family.contains(p));
                    seen |= m;
                }
                let expect =
                    a.as_finite().unwrap().to_mask() & !b.as_finite().unwrap().to_mask();
                assert_eq!(seen, expect, "union mismatch for {} \\ {}", a, b);
            }
        }
    }
}
