//! Set functions on semirings and the finite-additivity checker.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Error;
use crate::exact::ExtReal;
use crate::spaces::set_expr::SetExpr;
use crate::Result;

/// A set function `mu : family -> [0, inf]`.
///
/// Tabulated functions are deliberately *not* validated for additivity at
/// construction — they are raw set functions, and the negative instances the
/// certifiers must catch are exactly the non-additive ones. The only
/// structural invariant is `mu(empty) = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasureDesc {
    /// One assigned value per family member of an explicit semiring.
    Tabulated(BTreeMap<SetExpr, ExtReal>),
    /// Weights per point over a finite universe with the power-set family;
    /// a set's value is the sum of its members' weights. Missing points
    /// weigh zero.
    PointMass(BTreeMap<u32, ExtReal>),
    /// `lambda([a, b)) = b - a` on the interval semiring.
    Length,
}

impl MeasureDesc {
    pub fn tabulated(assignments: BTreeMap<SetExpr, ExtReal>) -> Result<MeasureDesc> {
        for (s, v) in &assignments {
            if s.is_empty() && !v.is_zero() {
                return Err(Error::PreconditionFailed(format!(
                    "mu(empty set) must be 0, got {}",
                    v
                )));
            }
        }
        Ok(MeasureDesc::Tabulated(assignments))
    }

    pub fn point_mass(weights: BTreeMap<u32, ExtReal>) -> MeasureDesc {
        MeasureDesc::PointMass(weights)
    }

    /// Counting measure on `size` points.
    pub fn counting(size: u32) -> MeasureDesc {
        MeasureDesc::PointMass((0..size).map(|p| (p, ExtReal::one())).collect())
    }

    /// Evaluates the set function on `a`.
    pub fn eval(&self, a: &SetExpr) -> Result<ExtReal> {
        match self {
            MeasureDesc::Tabulated(map) => map
                .get(a)
                .cloned()
                .ok_or_else(|| Error::NotInDomain(format!("{} is not assigned a value", a))),
            MeasureDesc::PointMass(weights) => {
                let s = a.as_finite()?;
                Ok(s.members()
                    .iter()
                    .filter_map(|p| weights.get(p))
                    .sum())
            }
            MeasureDesc::Length => {
                let u = a.as_intervals()?;
                ExtReal::from_rational(u.total_length())
            }
        }
    }
}

/// Exact two-sided record of one finite-additivity check.
#[derive(Debug, Clone, Serialize)]
pub struct AdditivityReport {
    pub pass: bool,
    /// `mu(whole)`.
    pub lhs: ExtReal,
    /// `sum of mu(part)`.
    pub rhs: ExtReal,
    pub parts: usize,
}

/// Checks `mu(whole) = sum mu(part_i)` for a disjoint decomposition.
///
/// The decomposition itself is a precondition and is verified exactly:
/// overlapping parts or a union mismatch fail with `PreconditionFailed`
/// rather than producing a misleading verdict.
pub fn check_finite_additivity(
    m: &MeasureDesc,
    whole: &SetExpr,
    parts: &[SetExpr],
) -> Result<AdditivityReport> {
    for (i, a) in parts.iter().enumerate() {
        for b in parts.iter().skip(i + 1) {
            if !a.is_disjoint_from(b)? {
                return Err(Error::PreconditionFailed(format!(
                    "parts {} and {} overlap",
                    a, b
                )));
            }
        }
    }
    let mut union = match whole {
        SetExpr::Finite(_) => SetExpr::points(vec![]),
        SetExpr::Intervals(_) => SetExpr::intervals(vec![]),
    };
    for p in parts {
        union = union.union(p)?;
    }
    if &union != whole {
        return Err(Error::PreconditionFailed(format!(
            "parts union to {} but the whole is {}",
            union, whole
        )));
    }
    let lhs = m.eval(whole)?;
    let rhs: ExtReal = parts.iter().map(|p| m.eval(p)).collect::<Result<Vec<_>>>()?.iter().sum();
    Ok(AdditivityReport {
        pass: lhs == rhs,
        lhs,
        rhs,
        parts: parts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn length_eval() {
        let a = SetExpr::interval(rat(2, 3), rat(3, 2));
        assert_eq!(MeasureDesc::Length.eval(&a).unwrap(), ExtReal::ratio(5, 6));
        let empty = SetExpr::intervals(vec![]);
        assert_eq!(MeasureDesc::Length.eval(&empty).unwrap(), ExtReal::zero());
    }

    #[test]
    fn point_mass_eval() {
        let m = MeasureDesc::counting(3);
        assert_eq!(
            m.eval(&SetExpr::points(vec![0, 2])).unwrap(),
            ExtReal::integer(2)
        );
        assert_eq!(m.eval(&SetExpr::points(vec![])).unwrap(), ExtReal::zero());
    }

    #[test]
    fn tabulated_domain_errors() {
        let mut map = BTreeMap::new();
        map.insert(SetExpr::points(vec![]), ExtReal::zero());
        map.insert(SetExpr::points(vec![0]), ExtReal::one());
        let m = MeasureDesc::tabulated(map).unwrap();
        assert!(matches!(
            m.eval(&SetExpr::points(vec![1])),
            Err(Error::NotInDomain(_))
        ));
    }

    #[test]
    fn tabulated_empty_must_be_null() {
        let mut map = BTreeMap::new();
        map.insert(SetExpr::points(vec![]), ExtReal::one());
        assert!(MeasureDesc::tabulated(map).is_err());
    }

    #[test]
    fn additivity_pass_and_fail() {
        // Length: [0,1) = [0,1/2) + [1/2,1)
        let whole = SetExpr::interval(rat(0, 1), rat(1, 1));
        let parts = vec![
            SetExpr::interval(rat(0, 1), rat(1, 2)),
            SetExpr::interval(rat(1, 2), rat(1, 1)),
        ];
        let rep = check_finite_additivity(&MeasureDesc::Length, &whole, &parts).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.lhs, ExtReal::one());

        // counting measure on {0,1,2} split into singletons
        let m = MeasureDesc::counting(3);
        let rep = check_finite_additivity(
            &m,
            &SetExpr::points(vec![0, 1, 2]),
            &[
                SetExpr::points(vec![0]),
                SetExpr::points(vec![1]),
                SetExpr::points(vec![2]),
            ],
        )
        .unwrap();
        assert!(rep.pass);
        assert_eq!(rep.rhs, ExtReal::integer(3));

        // corrupted tabulation: mu({0,1}) = 3 but the singletons carry 1 each
        let mut map = BTreeMap::new();
        map.insert(SetExpr::points(vec![]), ExtReal::zero());
        map.insert(SetExpr::points(vec![0]), ExtReal::one());
        map.insert(SetExpr::points(vec![1]), ExtReal::one());
        map.insert(SetExpr::points(vec![0, 1]), ExtReal::integer(3));
        let bad = MeasureDesc::tabulated(map).unwrap();
        let rep = check_finite_additivity(
            &bad,
            &SetExpr::points(vec![0, 1]),
            &[SetExpr::points(vec![0]), SetExpr::points(vec![1])],
        )
        .unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.lhs, ExtReal::integer(3));
        assert_eq!(rep.rhs, ExtReal::integer(2));
    }

    #[test]
    fn additivity_preconditions() {
        let m = MeasureDesc::counting(3);
        // overlap
        assert!(check_finite_additivity(
            &m,
            &SetExpr::points(vec![0, 1]),
            &[SetExpr::points(vec![0, 1]), SetExpr::points(vec![1])],
        )
        .is_err());
        // union mismatch
        assert!(check_finite_additivity(
            &m,
            &SetExpr::points(vec![0, 1, 2]),
            &[SetExpr::points(vec![0])],
        )
        .is_err());
    }
}
