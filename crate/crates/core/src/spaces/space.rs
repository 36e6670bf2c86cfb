//! The measure-space composite: universe, semiring, set function, and an
//! optional sigma-finiteness witness, cross-validated at construction.

use crate::error::Error;
use crate::exact::ExtReal;
use crate::spaces::measure::MeasureDesc;
use crate::spaces::semiring::SemiringDesc;
use crate::spaces::set_expr::{SetExpr, Universe};
use crate::Result;

/// A triplet `(X, Sigma, mu)` plus an optional finite decomposition of `X`
/// into finite-measure members witnessing sigma-finiteness.
#[derive(Debug, Clone)]
pub struct MeasureSpace {
    universe: Universe,
    semiring: SemiringDesc,
    measure: MeasureDesc,
    sigma_finite_witness: Option<Vec<SetExpr>>,
}

impl MeasureSpace {
    /// Assembles and cross-validates a space. The set function is *not*
    /// checked for additivity (raw set functions are legal inputs); what is
    /// checked is structural fit: semiring over the right universe, measure
    /// over the right semiring, tabulations total over the family, and the
    /// witness (if given) covering the universe with finite-measure members.
    pub fn new(
        universe: Universe,
        semiring: SemiringDesc,
        measure: MeasureDesc,
        sigma_finite_witness: Option<Vec<SetExpr>>,
    ) -> Result<MeasureSpace> {
        match (&semiring, &universe) {
            (SemiringDesc::Explicit { family }, Universe::Finite { .. }) => {
                for s in family {
                    s.check_in(&universe)?;
                }
            }
            (SemiringDesc::IntervalSemiring, Universe::Interval) => {}
            _ => {
                return Err(Error::UniverseMismatch(
                    "semiring does not fit the universe".into(),
                ))
            }
        }
        match (&measure, &semiring) {
            (MeasureDesc::Tabulated(map), SemiringDesc::Explicit { family }) => {
                for s in family {
                    if !map.contains_key(s) {
                        return Err(Error::NotInDomain(format!(
                            "tabulated measure assigns no value to family member {}",
                            s
                        )));
                    }
                }
                for s in map.keys() {
                    if !family.contains(s) {
                        return Err(Error::NotInDomain(format!(
                            "tabulated measure assigns a value to {} outside the family",
                            s
                        )));
                    }
                }
            }
            (MeasureDesc::PointMass(weights), SemiringDesc::Explicit { family }) => {
                let size = match universe {
                    Universe::Finite { size } => size,
                    Universe::Interval => unreachable!("checked above"),
                };
                if let Some(&p) = weights.keys().find(|&&p| p >= size) {
                    return Err(Error::UniverseMismatch(format!(
                        "point-mass weight on {} outside universe of size {}",
                        p, size
                    )));
                }
                // point masses live on the power set
                let mut masks: Vec<u64> = family
                    .iter()
                    .map(|s| s.as_finite().map(crate::spaces::FiniteSet::to_mask))
                    .collect::<Result<_>>()?;
                masks.sort_unstable();
                let is_power_set = size <= 16
                    && masks.len() == (1usize << size)
                    && masks.iter().enumerate().all(|(i, &m)| m == i as u64);
                if !is_power_set {
                    return Err(Error::PreconditionFailed(
                        "point-mass measures require the power-set semiring".into(),
                    ));
                }
            }
            (MeasureDesc::Length, SemiringDesc::IntervalSemiring) => {}
            _ => {
                return Err(Error::PreconditionFailed(
                    "measure kind does not fit the semiring kind".into(),
                ))
            }
        }
        if let Some(pieces) = &sigma_finite_witness {
            let full = match universe.full_set() {
                Some(f) => f,
                None => {
                    return Err(Error::PreconditionFailed(
                        "a finite witness list cannot cover the rational line".into(),
                    ))
                }
            };
            let mut union = universe.empty_set();
            for piece in pieces {
                piece.check_in(&universe)?;
                let v = measure.eval(piece)?;
                if v.is_infinite() {
                    return Err(Error::PreconditionFailed(format!(
                        "witness piece {} has infinite measure",
                        piece
                    )));
                }
                union = union.union(piece)?;
            }
            if union != full {
                return Err(Error::PreconditionFailed(format!(
                    "witness pieces cover {} but the universe is {}",
                    union, full
                )));
            }
        }
        Ok(MeasureSpace {
            universe,
            semiring,
            measure,
            sigma_finite_witness,
        })
    }

    /// Finite universe with counting measure on the power set.
    pub fn counting(size: u32) -> Result<MeasureSpace> {
        MeasureSpace::new(
            Universe::finite(size)?,
            SemiringDesc::power_set(size)?,
            MeasureDesc::counting(size),
            None,
        )
    }

    /// Finite universe with arbitrary point weights on the power set.
    pub fn weighted(size: u32, weights: Vec<ExtReal>) -> Result<MeasureSpace> {
        MeasureSpace::new(
            Universe::finite(size)?,
            SemiringDesc::power_set(size)?,
            MeasureDesc::point_mass(weights.into_iter().enumerate().map(|(p, w)| (p as u32, w)).collect()),
            None,
        )
    }

    /// The rational line under Length.
    pub fn length_line() -> MeasureSpace {
        MeasureSpace {
            universe: Universe::Interval,
            semiring: SemiringDesc::IntervalSemiring,
            measure: MeasureDesc::Length,
            sigma_finite_witness: None,
        }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn semiring(&self) -> &SemiringDesc {
        &self.semiring
    }

    pub fn measure(&self) -> &MeasureDesc {
        &self.measure
    }

    pub fn sigma_finite_witness(&self) -> Option<&[SetExpr]> {
        self.sigma_finite_witness.as_deref()
    }

    /// Evaluates the set function on a domain member.
    pub fn eval(&self, a: &SetExpr) -> Result<ExtReal> {
        a.check_in(&self.universe)?;
        self.measure.eval(a)
    }

    /// A sigma-finite decomposition of the universe into finite-measure
    /// members: the explicit witness if present, else the trivial one-piece
    /// witness when the whole universe is a finite-measure member, else the
    /// finite-measure family members if they cover. `None` if the space is
    /// not certifiably sigma-finite.
    pub fn sigma_finite_pieces(&self) -> Option<Vec<SetExpr>> {
        if let Some(w) = &self.sigma_finite_witness {
            return Some(w.clone());
        }
        let full = self.universe.full_set()?;
        if let Ok(v) = self.eval(&full) {
            if v.is_finite() {
                return Some(vec![full]);
            }
        }
        let family = self.semiring.members()?;
        let mut union = self.universe.empty_set();
        let mut pieces = Vec::new();
        for s in family {
            if let Ok(v) = self.measure.eval(s) {
                if v.is_finite() {
                    union = union.union(s).ok()?;
                    pieces.push(s.clone());
                }
            }
        }
        if union == full {
            Some(pieces)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn counting_space_builds() {
        let s = MeasureSpace::counting(3).unwrap();
        assert_eq!(
            s.eval(&SetExpr::points(vec![0, 1, 2])).unwrap(),
            ExtReal::integer(3)
        );
    }

    #[test]
    fn tabulated_must_cover_family() {
        let u = Universe::finite(2).unwrap();
        let sr = SemiringDesc::explicit(vec![
            SetExpr::points(vec![]),
            SetExpr::points(vec![0, 1]),
        ])
        .unwrap();
        let mut map = BTreeMap::new();
        map.insert(SetExpr::points(vec![]), ExtReal::zero());
        let m = MeasureDesc::tabulated(map).unwrap();
        assert!(MeasureSpace::new(u, sr, m, None).is_err());
    }

    #[test]
    fn witness_validation() {
        // {0} has weight inf: a witness containing it is rejected
        let weights = vec![ExtReal::Infinity, ExtReal::one()];
        let err = MeasureSpace::new(
            Universe::finite(2).unwrap(),
            SemiringDesc::power_set(2).unwrap(),
            MeasureDesc::point_mass(
                weights.into_iter().enumerate().map(|(p, w)| (p as u32, w)).collect(),
            ),
            Some(vec![SetExpr::points(vec![0, 1])]),
        );
        assert!(err.is_err());

        // valid witness: two finite pieces covering the universe
        let ok = MeasureSpace::new(
            Universe::finite(2).unwrap(),
            SemiringDesc::power_set(2).unwrap(),
            MeasureDesc::counting(2),
            Some(vec![SetExpr::points(vec![0]), SetExpr::points(vec![1])]),
        );
        assert!(ok.is_ok());

        // incomplete cover rejected
        let err = MeasureSpace::new(
            Universe::finite(2).unwrap(),
            SemiringDesc::power_set(2).unwrap(),
            MeasureDesc::counting(2),
            Some(vec![SetExpr::points(vec![0])]),
        );
        assert!(err.is_err());
    }

    #[test]
    fn derived_sigma_finite_pieces() {
        let s = MeasureSpace::counting(3).unwrap();
        let pieces = s.sigma_finite_pieces().unwrap();
        assert_eq!(pieces, vec![SetExpr::points(vec![0, 1, 2])]);
        assert!(MeasureSpace::length_line().sigma_finite_pieces().is_none());
    }
}
