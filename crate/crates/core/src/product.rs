//! Product semiring and product measure: rectangles, disjoint rectangle
//! families (with a parametric countable continuation), sections `D^x`, and
//! superlevel sets `D^{>r}`.

use num::rational::BigRational;
use num::One;
use serde::Serialize;

use crate::error::Error;
use crate::exact::{format_rational, ExtReal};
use crate::limits::Limits;
use crate::outer::{outer_measure_with, Exactness, OuterTable};
use crate::spaces::{MeasureDesc, MeasureSpace, SemiringDesc, SetExpr, Universe};
use crate::Result;

/// A point of a ground universe.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Point {
    Finite(u32),
    Rational(BigRational),
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Point::Finite(p) => write!(f, "{}", p),
            Point::Rational(r) => write!(f, "{}", format_rational(r)),
        }
    }
}

/// Membership of a point in a set of the same universe.
pub fn set_contains(s: &SetExpr, p: &Point) -> Result<bool> {
    match (s, p) {
        (SetExpr::Finite(set), Point::Finite(q)) => Ok(set.contains(*q)),
        (SetExpr::Intervals(u), Point::Rational(x)) => Ok(u.contains(x)),
        _ => Err(Error::UniverseMismatch(
            "point kind does not match set kind".into(),
        )),
    }
}

/// A rectangle `base x side` with `base` in the X semiring and `side` in the
/// Y semiring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rect {
    pub base: SetExpr,
    pub side: SetExpr,
}

impl Rect {
    pub fn new(base: SetExpr, side: SetExpr) -> Rect {
        Rect { base, side }
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty() || self.side.is_empty()
    }

    /// Product sets are disjoint iff the bases or the sides are.
    pub fn is_disjoint_from(&self, other: &Rect) -> Result<bool> {
        Ok(self.base.is_disjoint_from(&other.base)? || self.side.is_disjoint_from(&other.side)?)
    }

    pub fn contains(&self, x: &Point, y: &Point) -> Result<bool> {
        Ok(set_contains(&self.base, x)? && set_contains(&self.side, y)?)
    }
}

impl std::fmt::Display for Rect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} x {}", self.base, self.side)
    }
}

/// Which factor of a tail shrinks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// The parametric countable continuation of a rectangle family: a dyadic
/// staircase whose pieces halve a half-open span along one axis while the
/// other factor stays fixed. Piece `n` occupies
/// `[hi - (hi-lo)/2^n, hi - (hi-lo)/2^(n+1))` on the shrinking axis, so the
/// pieces are pairwise disjoint and their union is exactly `[lo, hi)`.
/// Partial sums have the closed form `(hi - lo) * (1 - 2^-N)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicTail {
    pub axis: Axis,
    /// Left endpoint of the shrinking span.
    pub lo: BigRational,
    /// Right endpoint of the shrinking span.
    pub hi: BigRational,
    /// The non-shrinking factor.
    pub fixed: SetExpr,
}

impl Serialize for DyadicTail {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("DyadicTail", 5)?;
        st.serialize_field("kind", "dyadic")?;
        st.serialize_field("axis", &self.axis)?;
        st.serialize_field("from", &format_rational(&self.lo))?;
        st.serialize_field("to", &format_rational(&self.hi))?;
        st.serialize_field("fixed", &self.fixed)?;
        st.end()
    }
}

impl DyadicTail {
    pub fn new(axis: Axis, lo: BigRational, hi: BigRational, fixed: SetExpr) -> Result<DyadicTail> {
        if lo >= hi {
            return Err(Error::PreconditionFailed(format!(
                "tail span [{}, {}) is empty",
                format_rational(&lo),
                format_rational(&hi)
            )));
        }
        if fixed.is_empty() {
            return Err(Error::PreconditionFailed(
                "tail fixed factor is empty".into(),
            ));
        }
        Ok(DyadicTail { axis, lo, hi, fixed })
    }

    fn pow2(n: u32) -> BigRational {
        BigRational::new(num::BigInt::one(), num::BigInt::from(1u64) << n)
    }

    /// The shrinking-axis interval of piece `n`.
    pub fn piece_span(&self, n: u32) -> (BigRational, BigRational) {
        let width = &self.hi - &self.lo;
        let lo_n = &self.hi - &width * Self::pow2(n);
        let hi_n = &self.hi - &width * Self::pow2(n + 1);
        (lo_n, hi_n)
    }

    pub fn piece(&self, n: u32) -> Rect {
        let (lo, hi) = self.piece_span(n);
        let span = SetExpr::interval(lo, hi);
        match self.axis {
            Axis::X => Rect::new(span, self.fixed.clone()),
            Axis::Y => Rect::new(self.fixed.clone(), span),
        }
    }

    /// The union of all pieces: the full span times the fixed factor.
    pub fn full_rect(&self) -> Rect {
        let span = SetExpr::interval(self.lo.clone(), self.hi.clone());
        match self.axis {
            Axis::X => Rect::new(span, self.fixed.clone()),
            Axis::Y => Rect::new(self.fixed.clone(), span),
        }
    }

    /// Closed-form length of the union of pieces `0..depth` along the
    /// shrinking axis: `(hi - lo) * (1 - 2^-depth)`.
    pub fn partial_span_length(&self, depth: u32) -> BigRational {
        let width = &self.hi - &self.lo;
        &width - &width * Self::pow2(depth)
    }

    /// Index of the piece whose span contains `x`, searched no deeper than
    /// `max_depth` (points ever closer to `hi` land in ever later pieces).
    pub fn piece_index_of(&self, x: &BigRational, max_depth: u32) -> Option<u32> {
        if x < &self.lo || x >= &self.hi {
            return None;
        }
        for n in 0..=max_depth {
            let (lo_n, hi_n) = self.piece_span(n);
            if &lo_n <= x && x < &hi_n {
                return Some(n);
            }
        }
        None
    }
}

/// An indexed family of rectangles, pairwise disjoint as product sets, with
/// an optional dyadic tail continuing the family countably. Finite rects
/// take indices `0..rects.len()`, tail piece `n` takes `rects.len() + n`.
#[derive(Debug, Clone, Serialize)]
pub struct RectFamily {
    pub rects: Vec<Rect>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<DyadicTail>,
}

impl RectFamily {
    /// Validates pairwise disjointness exactly (tail pieces are disjoint by
    /// construction; the tail is checked against each finite rect through
    /// its full span rectangle).
    pub fn new(rects: Vec<Rect>, tail: Option<DyadicTail>) -> Result<RectFamily> {
        for (i, a) in rects.iter().enumerate() {
            for (j, b) in rects.iter().enumerate().skip(i + 1) {
                if a.is_empty() || b.is_empty() {
                    continue;
                }
                if !a.is_disjoint_from(b)? {
                    return Err(Error::PreconditionFailed(format!(
                        "rectangles {} and {} (indices {}, {}) are not disjoint",
                        a, b, i, j
                    )));
                }
            }
        }
        if let Some(t) = &tail {
            let full = t.full_rect();
            for (i, r) in rects.iter().enumerate() {
                if r.is_empty() {
                    continue;
                }
                if !r.is_disjoint_from(&full)? {
                    return Err(Error::PreconditionFailed(format!(
                        "rectangle {} (index {}) meets the tail span {}",
                        r, i, full
                    )));
                }
            }
        }
        Ok(RectFamily { rects, tail })
    }

    pub fn finite_len(&self) -> usize {
        self.rects.len()
    }

    /// The rectangle at a family index; tail pieces are materialized on
    /// demand. `None` if the index is past a tailless family.
    pub fn piece(&self, index: usize) -> Option<Rect> {
        if index < self.rects.len() {
            return Some(self.rects[index].clone());
        }
        let tail = self.tail.as_ref()?;
        Some(tail.piece((index - self.rects.len()) as u32))
    }

    pub fn is_infinite(&self) -> bool {
        self.tail.is_some()
    }

    /// Checks every finite rectangle is a genuine product-semiring member:
    /// base in the X family, side in the Y family. Required of covers (the
    /// hypothesis objects); arbitrary product sets are exempt.
    pub fn check_in_semirings(&self, srx: &SemiringDesc, sry: &SemiringDesc) -> Result<()> {
        for (i, r) in self.rects.iter().enumerate() {
            if !srx.contains(&r.base) {
                return Err(Error::PreconditionFailed(format!(
                    "cover rectangle {} (index {}): base is not an X-semiring member",
                    r, i
                )));
            }
            if !sry.contains(&r.side) {
                return Err(Error::PreconditionFailed(format!(
                    "cover rectangle {} (index {}): side is not a Y-semiring member",
                    r, i
                )));
            }
        }
        Ok(())
    }
}

/// The union of a rectangle family, as a subset of `X x Y` with decidable
/// membership.
#[derive(Debug, Clone, Serialize)]
pub struct ProductSet {
    pub family: RectFamily,
}

impl ProductSet {
    pub fn new(family: RectFamily) -> ProductSet {
        ProductSet { family }
    }

    pub fn contains(&self, x: &Point, y: &Point) -> Result<bool> {
        for r in &self.family.rects {
            if r.contains(x, y)? {
                return Ok(true);
            }
        }
        if let Some(t) = &self.family.tail {
            return t.full_rect().contains(x, y);
        }
        Ok(false)
    }
}

/// `(mu_X x mu_Y)(base x side) = mu_X(base) * mu_Y(side)` under the
/// `0 * inf = 0` convention.
pub fn product_measure(mx: &MeasureDesc, my: &MeasureDesc, r: &Rect) -> Result<ExtReal> {
    Ok(mx.eval(&r.base)?.mul(&my.eval(&r.side)?))
}

/// Rewrites an arbitrary rectangle list into a pairwise-disjoint family with
/// the same union, by iterated rectangle subtraction
/// `(A x B) \ (A' x B') = (A \ A') x B  [+]  (A and A') x (B \ B')`,
/// expanding each set difference through the semiring decomposition.
/// Already-disjoint rectangles pass through unchanged, in order.
pub fn rect_disjointify(
    rects: Vec<Rect>,
    srx: &SemiringDesc,
    sry: &SemiringDesc,
) -> Result<RectFamily> {
    let mut out: Vec<Rect> = Vec::new();
    for rect in rects {
        if rect.is_empty() {
            continue;
        }
        let mut fragments = vec![rect];
        for existing in out.clone() {
            let mut next = Vec::new();
            for frag in fragments {
                next.extend(subtract_rect(&frag, &existing, srx, sry)?);
            }
            fragments = next;
        }
        out.extend(fragments);
    }
    RectFamily::new(out, None)
}

fn subtract_rect(
    frag: &Rect,
    other: &Rect,
    srx: &SemiringDesc,
    sry: &SemiringDesc,
) -> Result<Vec<Rect>> {
    if frag.is_disjoint_from(other)? {
        return Ok(vec![frag.clone()]);
    }
    let mut pieces = Vec::new();
    for base_piece in srx.difference(&frag.base, &other.base)? {
        let r = Rect::new(base_piece, frag.side.clone());
        if !r.is_empty() {
            pieces.push(r);
        }
    }
    let base_common = frag.base.intersect(&other.base)?;
    if !base_common.is_empty() {
        for side_piece in sry.difference(&frag.side, &other.side)? {
            let r = Rect::new(base_common.clone(), side_piece);
            if !r.is_empty() {
                pieces.push(r);
            }
        }
    }
    Ok(pieces)
}

/// The section `D^x = { y : (x, y) in D }`, canonical in Y's representation.
pub fn section(d: &ProductSet, x: &Point, y_universe: &Universe) -> Result<SetExpr> {
    let mut acc = y_universe.empty_set();
    for r in &d.family.rects {
        if set_contains(&r.base, x)? {
            acc = acc.union(&r.side)?;
        }
    }
    if let Some(t) = &d.family.tail {
        let full = t.full_rect();
        if set_contains(&full.base, x)? {
            acc = acc.union(&full.side)?;
        }
    }
    Ok(acc)
}

/// Label of the grid point `(x, y)` in the flattened product universe.
pub fn pair_index(x: u32, y: u32, ny: u32) -> u32 {
    x * ny + y
}

/// The point set of `base x side` in the flattened product universe.
pub fn rect_point_mask(base: &SetExpr, side: &SetExpr, ny: u32) -> Result<u64> {
    let mut mask = 0u64;
    for &x in base.as_finite()?.members() {
        for &y in side.as_finite()?.members() {
            mask |= 1u64 << pair_index(x, y, ny);
        }
    }
    Ok(mask)
}

/// The point set of a product set in the flattened product universe.
pub fn product_point_mask(d: &ProductSet, ny: u32) -> Result<u64> {
    let mut mask = 0u64;
    for r in &d.family.rects {
        mask |= rect_point_mask(&r.base, &r.side, ny)?;
    }
    if d.family.tail.is_some() {
        return Err(Error::UniverseMismatch(
            "tails live over the interval line, not a finite product universe".into(),
        ));
    }
    Ok(mask)
}

/// Materializes the product of two finite spaces: the universe is the point
/// grid under `(x, y) -> x * ny + y`, the semiring is every rectangle
/// `A x B` drawn from the factor families, and the set function tabulates
/// the product measure. This is the concrete space whose generated outer
/// measure is `(mu_X x mu_Y)*`.
pub fn finite_product_space(
    space_x: &MeasureSpace,
    space_y: &MeasureSpace,
) -> Result<MeasureSpace> {
    let (nx, ny) = match (space_x.universe(), space_y.universe()) {
        (Universe::Finite { size: nx }, Universe::Finite { size: ny }) => (*nx, *ny),
        _ => {
            return Err(Error::UniverseMismatch(
                "both factors must be finite to materialize the product space".into(),
            ))
        }
    };
    let fx = space_x.semiring().members().ok_or_else(|| {
        Error::UniverseMismatch("finite universe with non-explicit semiring".into())
    })?;
    let fy = space_y.semiring().members().ok_or_else(|| {
        Error::UniverseMismatch("finite universe with non-explicit semiring".into())
    })?;
    let universe = Universe::finite(nx.checked_mul(ny).ok_or_else(|| {
        Error::BudgetExceeded("product universe size overflows".into())
    })?)?;
    let mut family = Vec::new();
    let mut assignments = std::collections::BTreeMap::new();
    for a in fx {
        for b in fy {
            let rect = Rect::new(a.clone(), b.clone());
            let value = product_measure(space_x.measure(), space_y.measure(), &rect)?;
            let set = SetExpr::Finite(crate::spaces::FiniteSet::from_mask(rect_point_mask(
                a, b, ny,
            )?));
            match assignments.get(&set) {
                // distinct rectangles share a point set only when one factor
                // is empty, and then both products are zero
                Some(existing) if *existing != value => {
                    return Err(Error::PreconditionFailed(format!(
                        "rectangles with equal point set {} carry different product values {} and {}",
                        set, existing, value
                    )));
                }
                Some(_) => {}
                None => {
                    family.push(set.clone());
                    assignments.insert(set, value);
                }
            }
        }
    }
    MeasureSpace::new(
        universe,
        SemiringDesc::explicit(family)?,
        MeasureDesc::tabulated(assignments)?,
        None,
    )
}

/// The superlevel set `D^{>r} = { x : mu*_Y(D^x) > r }`, exact and strict.
///
/// Over a finite X universe the points are enumerated outright. Over the
/// interval line the section map is constant on the partition induced by
/// the family's base endpoints, so one representative per cell decides the
/// whole cell.
pub fn superlevel(
    d: &ProductSet,
    x_universe: &Universe,
    space_y: &MeasureSpace,
    r: &ExtReal,
    limits: &Limits,
) -> Result<SetExpr> {
    if !r.is_finite() || r.is_zero() {
        return Err(Error::PreconditionFailed(format!(
            "superlevel threshold must be finite and strictly positive, got {}",
            r
        )));
    }
    let y_table = match space_y.universe() {
        Universe::Finite { .. } => Some(OuterTable::build(space_y, limits)?),
        Universe::Interval => None,
    };
    let section_outer = |sec: &SetExpr| -> Result<ExtReal> {
        match &y_table {
            Some(t) => Ok(t.value(sec)?.clone()),
            None => {
                let ov = outer_measure_with(space_y, sec, limits)?;
                debug_assert_eq!(ov.exactness, Exactness::Exact);
                Ok(ov.value)
            }
        }
    };
    match x_universe {
        Universe::Finite { size } => {
            let mut points = Vec::new();
            for p in 0..*size {
                let sec = section(d, &Point::Finite(p), space_y.universe())?;
                if section_outer(&sec)? > *r {
                    points.push(p);
                }
            }
            Ok(SetExpr::points(points))
        }
        Universe::Interval => {
            let mut endpoints: Vec<BigRational> = Vec::new();
            for rect in &d.family.rects {
                for iv in rect.base.as_intervals()?.intervals() {
                    endpoints.push(iv.lo.clone());
                    endpoints.push(iv.hi.clone());
                }
            }
            if let Some(t) = &d.family.tail {
                let full = t.full_rect();
                for iv in full.base.as_intervals()?.intervals() {
                    endpoints.push(iv.lo.clone());
                    endpoints.push(iv.hi.clone());
                }
            }
            endpoints.sort();
            endpoints.dedup();
            let mut cells = Vec::new();
            for pair in endpoints.windows(2) {
                let (lo, hi) = (&pair[0], &pair[1]);
                let mid = (lo + hi) / BigRational::from_integer(2.into());
                let sec = section(d, &Point::Rational(mid), space_y.universe())?;
                if section_outer(&sec)? > *r {
                    cells.push((lo.clone(), hi.clone()));
                }
            }
            Ok(SetExpr::intervals(cells))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn pts(v: &[u32]) -> SetExpr {
        SetExpr::points(v.to_vec())
    }

    fn iv(a: (i64, i64), b: (i64, i64)) -> SetExpr {
        SetExpr::interval(rat(a.0, a.1), rat(b.0, b.1))
    }

    #[test]
    fn product_measure_examples() {
        // Length x Length on [0,1/2) x [0,1/3)
        let r = Rect::new(iv((0, 1), (1, 2)), iv((0, 1), (1, 3)));
        assert_eq!(
            product_measure(&MeasureDesc::Length, &MeasureDesc::Length, &r).unwrap(),
            ExtReal::ratio(1, 6)
        );
        // counting x counting on {0,1} x {0,1,2}
        let r = Rect::new(pts(&[0, 1]), pts(&[0, 1, 2]));
        assert_eq!(
            product_measure(&MeasureDesc::counting(2), &MeasureDesc::counting(3), &r).unwrap(),
            ExtReal::integer(6)
        );
        // zero times infinity is zero
        let mx = MeasureDesc::point_mass([(0, ExtReal::zero())].into());
        let my = MeasureDesc::point_mass([(0, ExtReal::Infinity)].into());
        let r = Rect::new(pts(&[0]), pts(&[0]));
        assert_eq!(product_measure(&mx, &my, &r).unwrap(), ExtReal::zero());
    }

    #[test]
    fn disjointify_identity_on_disjoint_input() {
        let sr = SemiringDesc::IntervalSemiring;
        let input = vec![
            Rect::new(iv((0, 1), (1, 1)), iv((0, 1), (1, 1))),
            Rect::new(iv((1, 1), (2, 1)), iv((0, 1), (1, 1))),
        ];
        let fam = rect_disjointify(input.clone(), &sr, &sr).unwrap();
        assert_eq!(fam.rects, input);
    }

    #[test]
    fn disjointify_overlapping_squares() {
        // [0,2)^2 and [1,3)^2: union has Length^2 measure 4 + 4 - 1 = 7
        let sr = SemiringDesc::IntervalSemiring;
        let input = vec![
            Rect::new(iv((0, 1), (2, 1)), iv((0, 1), (2, 1))),
            Rect::new(iv((1, 1), (3, 1)), iv((1, 1), (3, 1))),
        ];
        let fam = rect_disjointify(input, &sr, &sr).unwrap();
        assert_eq!(fam.rects.len(), 3);
        let total: ExtReal = fam
            .rects
            .iter()
            .map(|r| product_measure(&MeasureDesc::Length, &MeasureDesc::Length, r).unwrap())
            .sum();
        assert_eq!(total, ExtReal::integer(7));
    }

    #[test]
    fn disjointify_power_set_rects() {
        let sr = SemiringDesc::power_set(3).unwrap();
        let input = vec![
            Rect::new(pts(&[0, 1]), pts(&[0])),
            Rect::new(pts(&[1, 2]), pts(&[0])),
        ];
        let fam = rect_disjointify(input, &sr, &sr).unwrap();
        assert_eq!(
            fam.rects,
            vec![
                Rect::new(pts(&[0, 1]), pts(&[0])),
                Rect::new(pts(&[2]), pts(&[0])),
            ]
        );
    }

    #[test]
    fn disjointify_preserves_membership() {
        let sr = SemiringDesc::IntervalSemiring;
        let input = vec![
            Rect::new(iv((0, 1), (2, 1)), iv((0, 1), (2, 1))),
            Rect::new(iv((1, 1), (3, 1)), iv((1, 1), (3, 1))),
            Rect::new(iv((-1, 1), (1, 2)), iv((0, 1), (3, 1))),
        ];
        let before = ProductSet::new(RectFamily {
            rects: input.clone(),
            tail: None,
        });
        let after = ProductSet::new(rect_disjointify(input, &sr, &sr).unwrap());
        // deterministic grid sweep over quarter-integer sample points
        for xi in -8..16 {
            for yi in -8..16 {
                let x = Point::Rational(rat(xi, 4));
                let y = Point::Rational(rat(yi, 4));
                assert_eq!(
                    before.contains(&x, &y).unwrap(),
                    after.contains(&x, &y).unwrap(),
                    "at ({}, {})",
                    x,
                    y
                );
            }
        }
    }

    #[test]
    fn section_examples() {
        // D = B x C: section is C inside B, empty outside
        let d = ProductSet::new(
            RectFamily::new(vec![Rect::new(pts(&[0, 1]), pts(&[2]))], None).unwrap(),
        );
        let yu = Universe::finite(3).unwrap();
        assert_eq!(section(&d, &Point::Finite(0), &yu).unwrap(), pts(&[2]));
        assert_eq!(section(&d, &Point::Finite(2), &yu).unwrap(), pts(&[]));

        // empty family
        let empty = ProductSet::new(RectFamily::new(vec![], None).unwrap());
        assert_eq!(section(&empty, &Point::Finite(0), &yu).unwrap(), pts(&[]));

        // {0}x{0} + {0}x{2}: section at 0 is {0,2}
        let d = ProductSet::new(
            RectFamily::new(
                vec![
                    Rect::new(pts(&[0]), pts(&[0])),
                    Rect::new(pts(&[0]), pts(&[2])),
                ],
                None,
            )
            .unwrap(),
        );
        assert_eq!(section(&d, &Point::Finite(0), &yu).unwrap(), pts(&[0, 2]));
    }

    #[test]
    fn section_commutes_with_union_exhaustive() {
        let yu = Universe::finite(2).unwrap();
        // all pairs of single-rect families over a 2x2 grid
        let sets: Vec<SetExpr> = (0u64..4)
            .map(|m| SetExpr::Finite(crate::spaces::FiniteSet::from_mask(m)))
            .collect();
        for b1 in &sets {
            for s1 in &sets {
                for b2 in &sets {
                    for s2 in &sets {
                        let r1 = Rect::new(b1.clone(), s1.clone());
                        let r2 = Rect::new(b2.clone(), s2.clone());
                        let joint = match RectFamily::new(vec![r1.clone(), r2.clone()], None) {
                            Ok(f) => ProductSet::new(f),
                            Err(_) => continue, // overlapping pair: not a disjoint family
                        };
                        let d1 = ProductSet::new(RectFamily::new(vec![r1], None).unwrap());
                        let d2 = ProductSet::new(RectFamily::new(vec![r2], None).unwrap());
                        for p in 0..2 {
                            let x = Point::Finite(p);
                            let lhs = section(&joint, &x, &yu).unwrap();
                            let rhs = section(&d1, &x, &yu)
                                .unwrap()
                                .union(&section(&d2, &x, &yu).unwrap())
                                .unwrap();
                            assert_eq!(lhs, rhs);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn superlevel_examples() {
        let limits = Limits::default();
        // D = B x C over Length: r below mu(C) selects B, r at mu(C) selects nothing
        let d = ProductSet::new(
            RectFamily::new(
                vec![Rect::new(iv((0, 1), (1, 1)), iv((0, 1), (1, 1)))],
                None,
            )
            .unwrap(),
        );
        let line = MeasureSpace::length_line();
        let b = iv((0, 1), (1, 1));
        assert_eq!(
            superlevel(&d, &Universe::Interval, &line, &ExtReal::ratio(1, 2), &limits).unwrap(),
            b
        );
        assert_eq!(
            superlevel(&d, &Universe::Interval, &line, &ExtReal::one(), &limits).unwrap(),
            SetExpr::intervals(vec![])
        );

        // counting spaces, D the full square, r = 2: every section measures 3
        let y = MeasureSpace::counting(3).unwrap();
        let d = ProductSet::new(
            RectFamily::new(vec![Rect::new(pts(&[0, 1, 2]), pts(&[0, 1, 2]))], None).unwrap(),
        );
        let xu = Universe::finite(3).unwrap();
        assert_eq!(
            superlevel(&d, &xu, &y, &ExtReal::integer(2), &limits).unwrap(),
            pts(&[0, 1, 2])
        );
    }

    #[test]
    fn superlevel_antitone() {
        let limits = Limits::default();
        let line = MeasureSpace::length_line();
        let d = ProductSet::new(
            RectFamily::new(
                vec![
                    Rect::new(iv((0, 1), (1, 2)), iv((0, 1), (1, 1))),
                    Rect::new(iv((1, 2), (1, 1)), iv((0, 1), (1, 4))),
                ],
                None,
            )
            .unwrap(),
        );
        let thresholds = [
            ExtReal::ratio(1, 8),
            ExtReal::ratio(1, 4),
            ExtReal::ratio(1, 2),
            ExtReal::one(),
        ];
        let mut prev: Option<SetExpr> = None;
        for r in &thresholds {
            let level = superlevel(&d, &Universe::Interval, &line, r, &limits).unwrap();
            if let Some(p) = prev {
                assert!(level.is_subset_of(&p).unwrap());
            }
            prev = Some(level);
        }
    }

    #[test]
    fn dyadic_tail_geometry() {
        let t = DyadicTail::new(Axis::X, rat(0, 1), rat(1, 1), iv((0, 1), (1, 1))).unwrap();
        let (lo, hi) = t.piece_span(0);
        assert_eq!((lo, hi), (rat(0, 1), rat(1, 2)));
        let (lo, hi) = t.piece_span(1);
        assert_eq!((lo, hi), (rat(1, 2), rat(3, 4)));
        assert_eq!(t.partial_span_length(3), rat(7, 8));
        // pieces tile the span: piece n ends where piece n+1 starts
        for n in 0..8 {
            assert_eq!(t.piece_span(n).1, t.piece_span(n + 1).0);
        }
    }

    #[test]
    fn tail_disjointness_enforced() {
        let t = DyadicTail::new(Axis::X, rat(0, 1), rat(1, 1), iv((0, 1), (1, 1))).unwrap();
        // a rect inside the span overlaps the tail
        let overlapping = Rect::new(iv((0, 1), (1, 4)), iv((0, 1), (1, 2)));
        assert!(RectFamily::new(vec![overlapping], Some(t.clone())).is_err());
        // a rect past the span is fine
        let apart = Rect::new(iv((2, 1), (3, 1)), iv((0, 1), (1, 2)));
        assert!(RectFamily::new(vec![apart], Some(t)).is_ok());
    }
}
