//! Finite-witness extraction: given a disjoint rectangle cover of a set
//! `D` whose superlevel set `D^{>r}` has outer mass exceeding `s`, produce a
//! finite index set `F` with `r*s` strictly below the partial sum of
//! rectangle measures, following the constructive steps of the underlying
//! proof: per-point greedy index selection, then canonical point selection
//! until the intersected bases exceed `s` in outer measure.

use num::rational::BigRational;
use serde::Serialize;

use crate::error::Error;
use crate::exact::ExtReal;
use crate::limits::Limits;
use crate::outer::{outer_measure_with, Exactness, OuterTable};
use crate::product::{set_contains, Axis, Point, ProductSet, RectFamily};
use crate::spaces::{MeasureSpace, SetExpr, Universe};
use crate::Result;

use crate::product::superlevel;

/// One selected point of `M` with its greedy index set `M_x`.
#[derive(Debug, Clone, Serialize)]
pub struct PointSelection {
    /// The point, rendered canonically.
    pub x: String,
    /// Ascending cover indices whose side measures sum strictly past `r`.
    pub m_x: Vec<usize>,
}

/// A self-certifying witness: `lhs = r*s < rhs = sum over F of
/// mu_X(B_n) * mu_Y(C_n)`, with the construction data that produced `F`.
/// The inequality is machine-checked at construction, never assumed.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub r: ExtReal,
    pub s: ExtReal,
    /// Sorted union of the per-point index sets.
    pub f_indices: Vec<usize>,
    pub per_point: Vec<PointSelection>,
    /// `r * s`.
    pub lhs: ExtReal,
    /// `sum over F of mu_X(B_n) * mu_Y(C_n)`.
    pub rhs: ExtReal,
}

/// Re-derives the witness inequality from the report data alone: recomputes
/// the right-hand side from `f_indices` against the cover and both measures,
/// recomputes `lhs = r*s`, and demands strictness. Shares no state with the
/// extractor.
pub fn verify_witness(
    witness: &Witness,
    space_x: &MeasureSpace,
    space_y: &MeasureSpace,
    cover: &RectFamily,
) -> Result<bool> {
    let mut rhs = ExtReal::zero();
    for &n in &witness.f_indices {
        let rect = cover.piece(n).ok_or_else(|| {
            Error::PreconditionFailed(format!("witness index {} outside the cover", n))
        })?;
        rhs = rhs.add(&space_x.eval(&rect.base)?.mul(&space_y.eval(&rect.side)?));
    }
    let lhs = witness.r.mul(&witness.s);
    Ok(lhs == witness.lhs && rhs == witness.rhs && lhs < rhs)
}

/// Exact check that every point of `d` lies under some cover rectangle.
/// Finite axes are enumerated outright; interval axes are decided on the
/// grid induced by all endpoint values, where membership is constant per
/// cell. Returns the first uncovered sample as a witness of failure.
pub fn subset_of_union(
    d: &ProductSet,
    cover: &RectFamily,
    x_universe: &Universe,
    y_universe: &Universe,
) -> Result<Option<(Point, Point)>> {
    let xs = axis_samples(d, cover, x_universe, AxisSel::Base)?;
    let ys = axis_samples(d, cover, y_universe, AxisSel::Side)?;
    let cover_contains = |x: &Point, y: &Point| -> Result<bool> {
        for rect in &cover.rects {
            if rect.contains(x, y)? {
                return Ok(true);
            }
        }
        if let Some(t) = &cover.tail {
            return t.full_rect().contains(x, y);
        }
        Ok(false)
    };
    for x in &xs {
        for y in &ys {
            if d.contains(x, y)? && !cover_contains(x, y)? {
                return Ok(Some((x.clone(), y.clone())));
            }
        }
    }
    Ok(None)
}

enum AxisSel {
    Base,
    Side,
}

fn axis_samples(
    d: &ProductSet,
    cover: &RectFamily,
    universe: &Universe,
    sel: AxisSel,
) -> Result<Vec<Point>> {
    match universe {
        Universe::Finite { size } => Ok((0..*size).map(Point::Finite).collect()),
        Universe::Interval => {
            let mut endpoints: Vec<BigRational> = Vec::new();
            let mut push_set = |s: &SetExpr| -> Result<()> {
                for iv in s.as_intervals()?.intervals() {
                    endpoints.push(iv.lo.clone());
                    endpoints.push(iv.hi.clone());
                }
                Ok(())
            };
            for fam in [&d.family, cover] {
                for rect in &fam.rects {
                    match sel {
                        AxisSel::Base => push_set(&rect.base)?,
                        AxisSel::Side => push_set(&rect.side)?,
                    }
                }
                if let Some(t) = &fam.tail {
                    let full = t.full_rect();
                    match sel {
                        AxisSel::Base => push_set(&full.base)?,
                        AxisSel::Side => push_set(&full.side)?,
                    }
                }
            }
            endpoints.sort();
            endpoints.dedup();
            let two = BigRational::from_integer(2.into());
            Ok(endpoints
                .windows(2)
                .map(|pair| Point::Rational((&pair[0] + &pair[1]) / &two))
                .collect())
        }
    }
}

/// Exact outer-measure evaluator for one space: table-backed on finite
/// universes, canonical length on the line, and never an upper bound.
pub(crate) struct ExactOuter<'a> {
    space: &'a MeasureSpace,
    table: Option<OuterTable>,
}

impl<'a> ExactOuter<'a> {
    pub fn new(space: &'a MeasureSpace, limits: &Limits) -> Result<Self> {
        let table = match space.universe() {
            Universe::Finite { .. } => Some(OuterTable::build(space, limits)?),
            Universe::Interval => None,
        };
        Ok(ExactOuter { space, table })
    }

    pub fn value(&self, a: &SetExpr, limits: &Limits) -> Result<ExtReal> {
        match &self.table {
            Some(t) => Ok(t.value(a)?.clone()),
            None => {
                let ov = outer_measure_with(self.space, a, limits)?;
                if ov.exactness != Exactness::Exact {
                    return Err(Error::BudgetExceeded(format!(
                        "mu*({}) not computable exactly within budget",
                        a
                    )));
                }
                Ok(ov.value)
            }
        }
    }

}

/// Runs the witness construction.
///
/// `r` is the section threshold defining `D^{>r}` (a Y-side quantity) and
/// `s` the mass threshold on `mu*_X(D^{>r})`. Preconditions — disjoint
/// cover, `D` inside the cover union, `mu*_X(D^{>r}) > s`, both thresholds
/// finite and positive — are verified, not trusted.
pub fn extract_witness(
    space_x: &MeasureSpace,
    space_y: &MeasureSpace,
    d: &ProductSet,
    cover: &RectFamily,
    r: &ExtReal,
    s: &ExtReal,
    limits: &Limits,
) -> Result<Witness> {
    for (name, v) in [("r", r), ("s", s)] {
        if !v.is_finite() || v.is_zero() {
            return Err(Error::PreconditionFailed(format!(
                "{} must be finite and strictly positive, got {}",
                name, v
            )));
        }
    }
    cover.check_in_semirings(space_x.semiring(), space_y.semiring())?;
    if let Some((x, y)) = subset_of_union(d, cover, space_x.universe(), space_y.universe())? {
        return Err(Error::PreconditionFailed(format!(
            "D is not covered: ({}, {}) lies in D but under no cover rectangle",
            x, y
        )));
    }

    let level = superlevel(d, space_x.universe(), space_y, r, limits)?;
    let outer_x = ExactOuter::new(space_x, limits)?;
    let level_mass = outer_x.value(&level, limits)?;
    if level_mass <= *s {
        return Err(Error::PreconditionFailed(format!(
            "mu*_X(D^(>r)) = {} does not exceed s = {}",
            level_mass, s
        )));
    }

    // candidate points of D^{>r}, in canonical ascending order, one per cell
    // of the partition the cover's bases induce (tail pieces included down
    // to the truncation depth)
    let candidates = witness_candidates(cover, space_x.universe(), &level, limits)?;

    let mut selected: Vec<PointSelection> = Vec::new();
    let mut union_bases: Option<SetExpr> = None;
    let mut reached = ExtReal::zero();
    for x in &candidates {
        let m_x = greedy_side_indices(cover, x, space_y, r, limits)?;
        let mut meet: Option<SetExpr> = None;
        for &n in &m_x {
            let rect = cover.piece(n).expect("greedy indices come from the cover");
            meet = Some(match meet {
                None => rect.base,
                Some(m) => m.intersect(&rect.base)?,
            });
        }
        let meet = meet.expect("m_x is nonempty by construction");
        let grown = match &union_bases {
            None => meet.clone(),
            Some(u) => u.union(&meet)?,
        };
        let grew = union_bases.as_ref() != Some(&grown);
        union_bases = Some(grown);
        selected.push(PointSelection {
            x: x.to_string(),
            m_x,
        });
        if grew {
            reached = outer_x.value(union_bases.as_ref().unwrap(), limits)?;
        }
        if reached > *s {
            break;
        }
    }
    if reached <= *s {
        let msg = format!(
            "selected points reach mu*_X = {} which never exceeds s = {}",
            reached, s
        );
        return Err(if cover.tail.is_some() {
            Error::BudgetExceeded(format!(
                "{} (tail truncated at depth {})",
                msg, limits.max_tail_depth
            ))
        } else {
            Error::PreconditionFailed(msg)
        });
    }

    let mut f_indices: Vec<usize> = selected
        .iter()
        .flat_map(|p| p.m_x.iter().copied())
        .collect();
    f_indices.sort_unstable();
    f_indices.dedup();

    let mut rhs = ExtReal::zero();
    for &n in &f_indices {
        let rect = cover.piece(n).expect("indices come from the cover");
        rhs = rhs.add(&space_x.eval(&rect.base)?.mul(&space_y.eval(&rect.side)?));
    }
    let lhs = r.mul(s);
    if lhs >= rhs {
        return Err(Error::PreconditionFailed(format!(
            "witness postcondition failed: r*s = {} is not below sum {} — \
             the set functions likely violate the measure axioms",
            lhs, rhs
        )));
    }
    Ok(Witness {
        r: r.clone(),
        s: s.clone(),
        f_indices,
        per_point: selected,
        lhs,
        rhs,
    })
}

/// Canonical candidate points of `within`: all its points for a finite
/// universe; one midpoint per cell of the endpoint partition of the cover's
/// bases (tail pieces expanded to the depth limit) for the line.
fn witness_candidates(
    cover: &RectFamily,
    x_universe: &Universe,
    within: &SetExpr,
    limits: &Limits,
) -> Result<Vec<Point>> {
    match x_universe {
        Universe::Finite { .. } => Ok(within
            .as_finite()?
            .members()
            .iter()
            .map(|&p| Point::Finite(p))
            .collect()),
        Universe::Interval => {
            let w = within.as_intervals()?;
            let mut endpoints: Vec<BigRational> = Vec::new();
            for rect in &cover.rects {
                for iv in rect.base.as_intervals()?.intervals() {
                    endpoints.push(iv.lo.clone());
                    endpoints.push(iv.hi.clone());
                }
            }
            if let Some(t) = &cover.tail {
                match t.axis {
                    Axis::X => {
                        for n in 0..=limits.max_tail_depth {
                            let (lo, hi) = t.piece_span(n);
                            endpoints.push(lo);
                            endpoints.push(hi);
                        }
                    }
                    Axis::Y => {
                        for iv in t.fixed.as_intervals()?.intervals() {
                            endpoints.push(iv.lo.clone());
                            endpoints.push(iv.hi.clone());
                        }
                    }
                }
            }
            for iv in w.intervals() {
                endpoints.push(iv.lo.clone());
                endpoints.push(iv.hi.clone());
            }
            endpoints.sort();
            endpoints.dedup();
            let two = BigRational::from_integer(2.into());
            let mut reps = Vec::new();
            for pair in endpoints.windows(2) {
                let mid = (&pair[0] + &pair[1]) / &two;
                if w.contains(&mid) {
                    reps.push(Point::Rational(mid));
                }
            }
            Ok(reps)
        }
    }
}

/// Greedy `M_x`: ascending cover indices whose bases contain `x`, cut off
/// as soon as the running sum of side measures strictly exceeds `r`.
fn greedy_side_indices(
    cover: &RectFamily,
    x: &Point,
    space_y: &MeasureSpace,
    r: &ExtReal,
    limits: &Limits,
) -> Result<Vec<usize>> {
    let mut sum = ExtReal::zero();
    let mut m_x = Vec::new();
    for (i, rect) in cover.rects.iter().enumerate() {
        if !set_contains(&rect.base, x)? {
            continue;
        }
        m_x.push(i);
        sum = sum.add(&space_y.eval(&rect.side)?);
        if sum > *r {
            return Ok(m_x);
        }
    }
    if let Some(t) = &cover.tail {
        let offset = cover.rects.len();
        match t.axis {
            Axis::X => {
                if let Point::Rational(xr) = x {
                    if let Some(n) = t.piece_index_of(xr, limits.max_tail_depth) {
                        m_x.push(offset + n as usize);
                        sum = sum.add(&space_y.eval(&t.fixed)?);
                        if sum > *r {
                            return Ok(m_x);
                        }
                    }
                }
            }
            Axis::Y => {
                if set_contains(&t.fixed, x)? {
                    for n in 0..=limits.max_tail_depth {
                        let (lo, hi) = t.piece_span(n);
                        m_x.push(offset + n as usize);
                        sum = sum.add(&space_y.eval(&SetExpr::interval(lo, hi))?);
                        if sum > *r {
                            return Ok(m_x);
                        }
                    }
                }
            }
        }
    }
    if cover.tail.is_some() {
        Err(Error::BudgetExceeded(format!(
            "side measures at x = {} sum to {} and never exceed r = {} \
             within tail depth {}",
            x, sum, r, limits.max_tail_depth
        )))
    } else {
        Err(Error::PreconditionFailed(format!(
            "side measures at x = {} sum to {} <= r = {}; \
             x should not lie in D^(>r) under a genuine measure",
            x, sum, r
        )))
    }
}
