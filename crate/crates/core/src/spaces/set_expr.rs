//! Ground universes and canonical set representations.
//!
//! Two universes are supported: finite labeled point sets (one exhaustively
//! checkable world) and the rational line under half-open intervals (a
//! genuinely infinite world where covers are nontrivial). Sets over the
//! former are sorted point lists, over the latter canonical unions of
//! half-open intervals `[a, b)`.

use std::fmt;

use num::rational::BigRational;
use num::Zero;
use serde::{Serialize, Serializer};

use crate::error::Error;
use crate::exact::format_rational;
use crate::limits::Limits;
use crate::Result;

/// The ground set `X` a space lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Universe {
    /// Points labeled `0..size-1`.
    #[serde(rename = "finite")]
    Finite { size: u32 },
    /// The rational line carrying half-open intervals.
    #[serde(rename = "interval")]
    Interval,
}

impl Universe {
    /// A finite universe of `size` labeled points, bounded by `Limits` so
    /// power-set style operations stay tractable.
    pub fn finite(size: u32) -> Result<Universe> {
        Universe::finite_with(size, &Limits::default())
    }

    pub fn finite_with(size: u32, limits: &Limits) -> Result<Universe> {
        if size == 0 {
            return Err(Error::Parse("finite universe must be nonempty".into()));
        }
        if size > limits.max_finite_universe {
            return Err(Error::BudgetExceeded(format!(
                "finite universe of size {} exceeds the bound {}",
                size, limits.max_finite_universe
            )));
        }
        Ok(Universe::Finite { size })
    }

    pub fn interval() -> Universe {
        Universe::Interval
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Universe::Finite { .. })
    }

    /// The empty set in this universe's representation.
    pub fn empty_set(&self) -> SetExpr {
        match self {
            Universe::Finite { .. } => SetExpr::Finite(FiniteSet::empty()),
            Universe::Interval => SetExpr::Intervals(IntervalUnion::empty()),
        }
    }

    /// The whole universe as a set; only finite universes have one.
    pub fn full_set(&self) -> Option<SetExpr> {
        match self {
            Universe::Finite { size } => Some(SetExpr::Finite(FiniteSet::from_mask(
                full_mask(*size),
            ))),
            Universe::Interval => None,
        }
    }
}

pub(crate) fn full_mask(size: u32) -> u64 {
    if size >= 64 {
        u64::MAX
    } else {
        (1u64 << size) - 1
    }
}

/// A half-open interval `[lo, hi)` with rational endpoints and `lo < hi`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn len(&self) -> BigRational {
        &self.hi - &self.lo
    }
}

/// A sorted duplicate-free set of point labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FiniteSet {
    members: Vec<u32>,
}

impl FiniteSet {
    pub fn empty() -> Self {
        FiniteSet::default()
    }

    pub fn new(mut members: Vec<u32>) -> Self {
        members.sort_unstable();
        members.dedup();
        FiniteSet { members }
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, p: u32) -> bool {
        self.members.binary_search(&p).is_ok()
    }

    /// Bitmask form; requires all members `< 64`, which the universe bound
    /// guarantees.
    pub fn to_mask(&self) -> u64 {
        self.members.iter().fold(0u64, |m, &p| m | (1u64 << p))
    }

    pub fn from_mask(mask: u64) -> Self {
        FiniteSet {
            members: (0..64).filter(|b| mask & (1u64 << b) != 0).collect(),
        }
    }
}

/// A canonical finite union of half-open intervals: pairwise disjoint,
/// non-adjacent, sorted by left endpoint. Degenerate `[a, a)` inputs
/// normalize away.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion::default()
    }

    /// Canonicalizes an arbitrary list of endpoint pairs: drops empty
    /// intervals, sorts, and merges overlapping or adjacent ones.
    pub fn new(pairs: Vec<(BigRational, BigRational)>) -> Self {
        let mut ivs: Vec<Interval> = pairs
            .into_iter()
            .filter(|(lo, hi)| lo < hi)
            .map(|(lo, hi)| Interval { lo, hi })
            .collect();
        ivs.sort();
        let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        IntervalUnion { intervals: out }
    }

    pub fn single(lo: BigRational, hi: BigRational) -> Self {
        IntervalUnion::new(vec![(lo, hi)])
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.intervals.iter().any(|iv| &iv.lo <= x && x < &iv.hi)
    }

    /// Total length of the canonical form.
    pub fn total_length(&self) -> BigRational {
        self.intervals
            .iter()
            .fold(BigRational::zero(), |acc, iv| acc + iv.len())
    }

    pub fn intersect(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut pairs = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                let lo = if a.lo >= b.lo { a.lo.clone() } else { b.lo.clone() };
                let hi = if a.hi <= b.hi { a.hi.clone() } else { b.hi.clone() };
                if lo < hi {
                    pairs.push((lo, hi));
                }
            }
        }
        IntervalUnion::new(pairs)
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut pairs: Vec<(BigRational, BigRational)> = self
            .intervals
            .iter()
            .chain(other.intervals.iter())
            .map(|iv| (iv.lo.clone(), iv.hi.clone()))
            .collect();
        IntervalUnion::new(std::mem::take(&mut pairs))
    }

    pub fn difference(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut pairs = Vec::new();
        for a in &self.intervals {
            let mut lo = a.lo.clone();
            for b in &other.intervals {
                if b.hi <= lo {
                    continue;
                }
                if b.lo >= a.hi {
                    break;
                }
                if b.lo > lo {
                    pairs.push((lo.clone(), b.lo.clone()));
                }
                if b.hi > lo {
                    lo = b.hi.clone();
                }
                if lo >= a.hi {
                    break;
                }
            }
            if lo < a.hi {
                pairs.push((lo, a.hi.clone()));
            }
        }
        IntervalUnion::new(pairs)
    }
}

/// A set in one of the supported universes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SetExpr {
    Finite(FiniteSet),
    Intervals(IntervalUnion),
}

impl SetExpr {
    pub fn points(members: Vec<u32>) -> SetExpr {
        SetExpr::Finite(FiniteSet::new(members))
    }

    pub fn intervals(pairs: Vec<(BigRational, BigRational)>) -> SetExpr {
        SetExpr::Intervals(IntervalUnion::new(pairs))
    }

    pub fn interval(lo: BigRational, hi: BigRational) -> SetExpr {
        SetExpr::Intervals(IntervalUnion::single(lo, hi))
    }

    pub fn is_empty(&self) -> bool {
        match self {
            SetExpr::Finite(s) => s.is_empty(),
            SetExpr::Intervals(u) => u.is_empty(),
        }
    }

    pub fn as_finite(&self) -> Result<&FiniteSet> {
        match self {
            SetExpr::Finite(s) => Ok(s),
            SetExpr::Intervals(_) => Err(Error::UniverseMismatch(
                "expected a finite point set, found an interval union".into(),
            )),
        }
    }

    pub fn as_intervals(&self) -> Result<&IntervalUnion> {
        match self {
            SetExpr::Intervals(u) => Ok(u),
            SetExpr::Finite(_) => Err(Error::UniverseMismatch(
                "expected an interval union, found a finite point set".into(),
            )),
        }
    }

    /// Checks this set is representable in `universe` (variant and range).
    pub fn check_in(&self, universe: &Universe) -> Result<()> {
        match (self, universe) {
            (SetExpr::Finite(s), Universe::Finite { size }) => {
                if let Some(&p) = s.members().iter().find(|&&p| p >= *size) {
                    return Err(Error::UniverseMismatch(format!(
                        "point {} outside universe of size {}",
                        p, size
                    )));
                }
                Ok(())
            }
            (SetExpr::Intervals(_), Universe::Interval) => Ok(()),
            _ => Err(Error::UniverseMismatch(format!(
                "set {} does not live in universe {:?}",
                self, universe
            ))),
        }
    }

    /// Canonical intersection; errors if the operands live in different
    /// universes.
    pub fn intersect(&self, other: &SetExpr) -> Result<SetExpr> {
        match (self, other) {
            (SetExpr::Finite(a), SetExpr::Finite(b)) => Ok(SetExpr::Finite(FiniteSet::from_mask(
                a.to_mask() & b.to_mask(),
            ))),
            (SetExpr::Intervals(a), SetExpr::Intervals(b)) => {
                Ok(SetExpr::Intervals(a.intersect(b)))
            }
            _ => Err(Error::UniverseMismatch(
                "cannot intersect a finite set with an interval union".into(),
            )),
        }
    }

    pub fn union(&self, other: &SetExpr) -> Result<SetExpr> {
        match (self, other) {
            (SetExpr::Finite(a), SetExpr::Finite(b)) => Ok(SetExpr::Finite(FiniteSet::from_mask(
                a.to_mask() | b.to_mask(),
            ))),
            (SetExpr::Intervals(a), SetExpr::Intervals(b)) => Ok(SetExpr::Intervals(a.union(b))),
            _ => Err(Error::UniverseMismatch(
                "cannot union a finite set with an interval union".into(),
            )),
        }
    }

    pub fn difference(&self, other: &SetExpr) -> Result<SetExpr> {
        match (self, other) {
            (SetExpr::Finite(a), SetExpr::Finite(b)) => Ok(SetExpr::Finite(FiniteSet::from_mask(
                a.to_mask() & !b.to_mask(),
            ))),
            (SetExpr::Intervals(a), SetExpr::Intervals(b)) => {
                Ok(SetExpr::Intervals(a.difference(b)))
            }
            _ => Err(Error::UniverseMismatch(
                "cannot subtract an interval union from a finite set or vice versa".into(),
            )),
        }
    }

    pub fn is_subset_of(&self, other: &SetExpr) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    pub fn is_disjoint_from(&self, other: &SetExpr) -> Result<bool> {
        Ok(self.intersect(other)?.is_empty())
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetExpr::Finite(s) => {
                write!(f, "{{")?;
                for (i, p) in s.members().iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", p)?;
                }
                write!(f, "}}")
            }
            SetExpr::Intervals(u) => {
                if u.is_empty() {
                    return write!(f, "{{}}");
                }
                for (i, iv) in u.intervals().iter().enumerate() {
                    if i > 0 {
                        write!(f, " u ")?;
                    }
                    write!(f, "[{},{})", format_rational(&iv.lo), format_rational(&iv.hi))?;
                }
                Ok(())
            }
        }
    }
}

impl Serialize for SetExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        match self {
            SetExpr::Finite(s) => {
                let mut seq = serializer.serialize_seq(Some(s.len()))?;
                for p in s.members() {
                    seq.serialize_element(p)?;
                }
                seq.end()
            }
            SetExpr::Intervals(u) => {
                let mut seq = serializer.serialize_seq(Some(u.intervals().len()))?;
                for iv in u.intervals() {
                    seq.serialize_element(&[format_rational(&iv.lo), format_rational(&iv.hi)])?;
                }
                seq.end()
            }
        }
    }
}
