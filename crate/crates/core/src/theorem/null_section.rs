//! Null-section equivalence: a product-null set has almost-all null
//! sections (forward), and a measurable set with almost-all null sections is
//! product-null given sigma-finite factors (converse). Both directions are
//! run as exact verdicts whose every step is recorded.

use num::rational::BigRational;
use num::Signed;
use serde::Serialize;

use crate::error::Error;
use crate::exact::ExtReal;
use crate::limits::Limits;
use crate::outer::OuterTable;
use crate::product::{
    finite_product_space, product_measure, product_point_mask, rect_disjointify,
    rect_point_mask, section, superlevel, Point, ProductSet,
};
use crate::spaces::{full_mask, FiniteSet, MeasureSpace, SetExpr, Universe};
use crate::theorem::witness::ExactOuter;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Converse,
}

/// One exact equality checked along the way.
#[derive(Debug, Clone, Serialize)]
pub struct StepValue {
    pub label: String,
    pub lhs: ExtReal,
    pub rhs: ExtReal,
    pub pass: bool,
}

impl StepValue {
    fn eq(label: impl Into<String>, lhs: ExtReal, rhs: ExtReal) -> StepValue {
        let pass = lhs == rhs;
        StepValue {
            label: label.into(),
            lhs,
            rhs,
            pass,
        }
    }
}

/// The verdict: whether the direction holds, the explicit exceptional set
/// standing in for the almost-all quantifier, its outer mass, and every
/// intermediate exact value.
#[derive(Debug, Clone, Serialize)]
pub struct NullSectionVerdict {
    pub direction: Direction,
    pub holds: bool,
    /// `{ x : mu*_Y(D^x) > 0 }`.
    pub exceptional_set: SetExpr,
    pub exceptional_outer: ExtReal,
    pub steps: Vec<StepValue>,
}

/// Exact `(mu_X x mu_Y)*(D)`: cover search over the materialized product
/// space when both factors are finite; the disjointified total area over
/// the line (where the self-cover achieves the rectangle-cover infimum).
pub fn product_outer(
    space_x: &MeasureSpace,
    space_y: &MeasureSpace,
    d: &ProductSet,
    limits: &Limits,
) -> Result<ExtReal> {
    match (space_x.universe(), space_y.universe()) {
        (Universe::Finite { .. }, Universe::Finite { .. }) => {
            let ctx = NullSectionContext::new(space_x, space_y, limits)?;
            Ok(ctx.product_outer(d)?.clone())
        }
        (Universe::Interval, Universe::Interval) => {
            let mut rects = d.family.rects.clone();
            if let Some(t) = &d.family.tail {
                rects.push(t.full_rect());
            }
            let disjoint = rect_disjointify(rects, space_x.semiring(), space_y.semiring())?;
            let mut total = ExtReal::zero();
            for r in &disjoint.rects {
                total = total.add(&product_measure(space_x.measure(), space_y.measure(), r)?);
            }
            Ok(total)
        }
        _ => Err(Error::PreconditionFailed(
            "(mu_X x mu_Y)* is computable exactly only for finite-finite or \
             interval-interval factor pairs"
                .into(),
        )),
    }
}

/// Forward direction over arbitrary supported factor pairs.
pub fn null_section_forward(
    space_x: &MeasureSpace,
    space_y: &MeasureSpace,
    d: &ProductSet,
    limits: &Limits,
) -> Result<NullSectionVerdict> {
    if space_x.universe().is_finite() && space_y.universe().is_finite() {
        return NullSectionContext::new(space_x, space_y, limits)?.forward(d);
    }
    let product_mass = product_outer(space_x, space_y, d, limits)?;
    if !product_mass.is_zero() {
        return Err(Error::PreconditionFailed(format!(
            "(mu_X x mu_Y)*(D) = {} is not zero",
            product_mass
        )));
    }
    let mut steps = vec![StepValue::eq(
        "(mu_X x mu_Y)*(D)",
        product_mass,
        ExtReal::zero(),
    )];
    let depth = stabilization_depth(interval_section_values(space_y, d)?);
    let mut exceptional = space_x.universe().empty_set();
    for k in 1..=depth {
        let threshold = ExtReal::ratio(1, k);
        let level = superlevel(d, space_x.universe(), space_y, &threshold, limits)?;
        exceptional = exceptional.union(&level)?;
    }
    let outer_x = ExactOuter::new(space_x, limits)?;
    let exceptional_outer = outer_x.value(&exceptional, limits)?;
    steps.push(StepValue::eq(
        format!("mu*_X(union over k <= {} of D^(>1/k))", depth),
        exceptional_outer.clone(),
        ExtReal::zero(),
    ));
    let holds = exceptional_outer.is_zero();
    Ok(NullSectionVerdict {
        direction: Direction::Forward,
        holds,
        exceptional_set: exceptional,
        exceptional_outer,
        steps,
    })
}

/// Converse direction; finite universes only.
pub fn null_section_converse(
    space_x: &MeasureSpace,
    space_y: &MeasureSpace,
    d: &ProductSet,
    limits: &Limits,
) -> Result<NullSectionVerdict> {
    NullSectionContext::new(space_x, space_y, limits)?.converse(d)
}

/// Distinct attainable section lengths of `d` over the line: sections are
/// constant per cell of the base-endpoint partition, so finitely many.
fn interval_section_values(space_y: &MeasureSpace, d: &ProductSet) -> Result<Vec<ExtReal>> {
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
    let two = BigRational::from_integer(2.into());
    let mut values = Vec::new();
    for pair in endpoints.windows(2) {
        let mid = Point::Rational((&pair[0] + &pair[1]) / &two);
        let sec = section(d, &mid, space_y.universe())?;
        values.push(ExtReal::from_rational(sec.as_intervals()?.total_length())?);
    }
    Ok(values)
}

/// Smallest `k` with `1/k` strictly below every positive value in the pool,
/// so the union of superlevel sets over thresholds `1/1 .. 1/k` has
/// stabilized.
fn stabilization_depth(candidates: Vec<ExtReal>) -> u64 {
    let v_min = candidates.into_iter().filter(|v| !v.is_zero()).min();
    match v_min {
        None => 1,
        Some(ExtReal::Infinity) => 1,
        Some(ExtReal::Finite(v)) => {
            debug_assert!(v.is_positive());
            // smallest k with 1/k < v, i.e. k > 1/v
            let inv = v.recip();
            let k = inv.floor().to_integer() + 1;
            u64::try_from(k).unwrap_or(u64::MAX).max(1)
        }
    }
}

/// Prebuilt outer tables for one finite-by-finite factor pair, so that a
/// sweep over many candidate sets `D` pays the cover searches once.
pub struct NullSectionContext<'a> {
    space_x: &'a MeasureSpace,
    space_y: &'a MeasureSpace,
    nx: u32,
    ny: u32,
    table_x: OuterTable,
    table_y: OuterTable,
    /// The materialized product space's table; indexed by point masks under
    /// `(x, y) -> x * ny + y`.
    ptable: OuterTable,
}

impl<'a> NullSectionContext<'a> {
    pub fn new(
        space_x: &'a MeasureSpace,
        space_y: &'a MeasureSpace,
        limits: &Limits,
    ) -> Result<Self> {
        let (nx, ny) = match (space_x.universe(), space_y.universe()) {
            (Universe::Finite { size: nx }, Universe::Finite { size: ny }) => (*nx, *ny),
            _ => {
                return Err(Error::PreconditionFailed(
                    "null-section contexts need finite universes on both factors".into(),
                ))
            }
        };
        let pspace = finite_product_space(space_x, space_y)?;
        Ok(NullSectionContext {
            space_x,
            space_y,
            nx,
            ny,
            table_x: OuterTable::build(space_x, limits)?,
            table_y: OuterTable::build(space_y, limits)?,
            ptable: OuterTable::build(&pspace, limits)?,
        })
    }

    pub fn product_outer(&self, d: &ProductSet) -> Result<&ExtReal> {
        Ok(self.ptable.value_of_mask(product_point_mask(d, self.ny)?))
    }

    /// Section `D^x` as a Y-point mask.
    fn section_mask(&self, d: &ProductSet, x: u32) -> Result<u64> {
        let sec = section(d, &Point::Finite(x), self.space_y.universe())?;
        Ok(sec.as_finite()?.to_mask())
    }

    pub fn forward(&self, d: &ProductSet) -> Result<NullSectionVerdict> {
        let product_mass = self.product_outer(d)?.clone();
        if !product_mass.is_zero() {
            return Err(Error::PreconditionFailed(format!(
                "(mu_X x mu_Y)*(D) = {} is not zero",
                product_mass
            )));
        }
        let mut steps = vec![StepValue::eq(
            "(mu_X x mu_Y)*(D)",
            product_mass,
            ExtReal::zero(),
        )];

        let section_values: Vec<ExtReal> = (0..self.nx)
            .map(|x| Ok(self.table_y.value_of_mask(self.section_mask(d, x)?).clone()))
            .collect::<Result<_>>()?;
        // threshold where 1/k drops below every positive attainable value
        let depth = stabilization_depth(self.table_y.attained_values());
        let mut exceptional_mask = 0u64;
        for k in 1..=depth {
            let threshold = ExtReal::ratio(1, k);
            for (x, v) in section_values.iter().enumerate() {
                if *v > threshold {
                    exceptional_mask |= 1u64 << x;
                }
            }
        }
        let exceptional_set = SetExpr::Finite(FiniteSet::from_mask(exceptional_mask));
        let exceptional_outer = self.table_x.value_of_mask(exceptional_mask).clone();
        steps.push(StepValue::eq(
            format!("mu*_X(union over k <= {} of D^(>1/k))", depth),
            exceptional_outer.clone(),
            ExtReal::zero(),
        ));
        let holds = exceptional_outer.is_zero();
        Ok(NullSectionVerdict {
            direction: Direction::Forward,
            holds,
            exceptional_set,
            exceptional_outer,
            steps,
        })
    }

    /// The converse, after the proof's reduction to finite measures: for
    /// each pair of sigma-finite witness pieces `(X_i, Y_j)` verify, inside
    /// the rectangle `X_i x Y_j`, that the complement's sections are
    /// almost-all full, that the complement carries the full product mass,
    /// and that the Caratheodory split with test set `X_i x Y_j` forces the
    /// piece of `D` there to be null; subadditivity over the pieces then
    /// gives `(mu_X x mu_Y)*(D) = 0`, which is also read off exactly.
    pub fn converse(&self, d: &ProductSet) -> Result<NullSectionVerdict> {
        let d_mask = product_point_mask(d, self.ny)?;

        // precondition: Caratheodory measurability of D in the product space
        if let Some((e, total, inside, outside)) = self.caratheodory_violation(d_mask) {
            return Err(Error::PreconditionFailed(format!(
                "D is not (mu_X x mu_Y)*-measurable: test set E = {} splits as {} != {} + {}",
                SetExpr::Finite(FiniteSet::from_mask(e)),
                total,
                inside,
                outside
            )));
        }

        // precondition: sigma-finiteness of both factors
        let pieces_x = self.space_x.sigma_finite_pieces().ok_or_else(|| {
            Error::PreconditionFailed("the X factor is not certifiably sigma-finite".into())
        })?;
        let pieces_y = self.space_y.sigma_finite_pieces().ok_or_else(|| {
            Error::PreconditionFailed("the Y factor is not certifiably sigma-finite".into())
        })?;

        // precondition: sections null almost everywhere
        let mut exceptional_mask = 0u64;
        for x in 0..self.nx {
            if !self.table_y.value_of_mask(self.section_mask(d, x)?).is_zero() {
                exceptional_mask |= 1u64 << x;
            }
        }
        let exceptional_set = SetExpr::Finite(FiniteSet::from_mask(exceptional_mask));
        let exceptional_outer = self.table_x.value_of_mask(exceptional_mask).clone();
        if !exceptional_outer.is_zero() {
            return Err(Error::PreconditionFailed(format!(
                "sections are not almost-all null: mu*_X({}) = {}",
                exceptional_set, exceptional_outer
            )));
        }

        let mut steps = Vec::new();
        let mut all_pass = true;
        for xi in &pieces_x {
            for yj in &pieces_y {
                let m_xi = self.space_x.eval(xi)?;
                let m_yj = self.space_y.eval(yj)?;
                let rect_mask = rect_point_mask(xi, yj, self.ny)?;
                let complement_mask = rect_mask & !d_mask;
                let yj_mask = yj.as_finite()?.to_mask();

                // sections of the complement are full over almost all of X_i
                let mut g_mask = 0u64;
                for &x in xi.as_finite()?.members() {
                    let residue = yj_mask & !self.section_mask(d, x)?;
                    if self.table_y.value_of_mask(residue) == self.table_y.value_of_mask(yj_mask)
                    {
                        g_mask |= 1u64 << x;
                    }
                }
                let step = StepValue::eq(
                    format!(
                        "mu*_X({{x in {} : mu*_Y({} minus D^x) = mu*_Y({})}}) = mu*_X({})",
                        xi, yj, yj, xi
                    ),
                    self.table_x.value_of_mask(g_mask).clone(),
                    self.table_x.value(xi)?.clone(),
                );
                all_pass &= step.pass;
                steps.push(step);

                // the complement carries the full product mass of the piece
                let step = StepValue::eq(
                    format!("(mu_X x mu_Y)*(({} x {}) minus D)", xi, yj),
                    self.ptable.value_of_mask(complement_mask).clone(),
                    m_xi.mul(&m_yj),
                );
                all_pass &= step.pass;
                steps.push(step);

                // Caratheodory split with test set X_i x Y_j
                let split = self
                    .ptable
                    .value_of_mask(rect_mask & d_mask)
                    .add(self.ptable.value_of_mask(complement_mask));
                let step = StepValue::eq(
                    format!("mu*({} x {}) = mu*(piece of D) + mu*(complement)", xi, yj),
                    self.ptable.value_of_mask(rect_mask).clone(),
                    split,
                );
                all_pass &= step.pass;
                steps.push(step);

                // hence the piece of D is null
                let step = StepValue::eq(
                    format!("(mu_X x mu_Y)*(D and ({} x {}))", xi, yj),
                    self.ptable.value_of_mask(rect_mask & d_mask).clone(),
                    ExtReal::zero(),
                );
                all_pass &= step.pass;
                steps.push(step);
            }
        }

        // subadditivity over the piece grid gives the conclusion; read it off
        let step = StepValue::eq(
            "(mu_X x mu_Y)*(D)",
            self.ptable.value_of_mask(d_mask).clone(),
            ExtReal::zero(),
        );
        all_pass &= step.pass;
        steps.push(step);

        Ok(NullSectionVerdict {
            direction: Direction::Converse,
            holds: all_pass,
            exceptional_set,
            exceptional_outer,
            steps,
        })
    }

    /// First test set violating the Caratheodory split, if any, with all
    /// three exact values.
    pub fn caratheodory_violation(
        &self,
        d_mask: u64,
    ) -> Option<(u64, ExtReal, ExtReal, ExtReal)> {
        let full = full_mask(self.nx * self.ny);
        for e in 0..=full {
            let total = self.ptable.value_of_mask(e);
            let inside = self.ptable.value_of_mask(e & d_mask);
            let outside = self.ptable.value_of_mask(e & !d_mask & full);
            if *total != inside.add(outside) {
                return Some((e, total.clone(), inside.clone(), outside.clone()));
            }
        }
        None
    }

    /// Whether the converse's own preconditions hold for `d`, reported as
    /// (measurable, sections almost-all null).
    pub fn converse_preconditions(&self, d: &ProductSet) -> Result<(bool, bool)> {
        let d_mask = product_point_mask(d, self.ny)?;
        let measurable = self.caratheodory_violation(d_mask).is_none();
        let mut exceptional_mask = 0u64;
        for x in 0..self.nx {
            if !self.table_y.value_of_mask(self.section_mask(d, x)?).is_zero() {
                exceptional_mask |= 1u64 << x;
            }
        }
        let null_sections = self.table_x.value_of_mask(exceptional_mask).is_zero();
        Ok((measurable, null_sections))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::{Rect, RectFamily};

    fn pts(v: &[u32]) -> SetExpr {
        SetExpr::points(v.to_vec())
    }

    fn null_point_space() -> MeasureSpace {
        // X = {0, 1} with weights 0 and 1
        MeasureSpace::weighted(2, vec![ExtReal::zero(), ExtReal::one()]).unwrap()
    }

    #[test]
    fn forward_null_slice() {
        // D = {0} x Y where the point 0 weighs nothing
        let limits = Limits::default();
        let x = null_point_space();
        let y = MeasureSpace::counting(2).unwrap();
        let d = ProductSet::new(
            RectFamily::new(vec![Rect::new(pts(&[0]), pts(&[0, 1]))], None).unwrap(),
        );
        let verdict = null_section_forward(&x, &y, &d, &limits).unwrap();
        assert!(verdict.holds);
        assert_eq!(verdict.exceptional_set, pts(&[0]));
        assert_eq!(verdict.exceptional_outer, ExtReal::zero());
    }

    #[test]
    fn forward_empty_d() {
        let limits = Limits::default();
        let x = MeasureSpace::counting(2).unwrap();
        let y = MeasureSpace::counting(2).unwrap();
        let d = ProductSet::new(RectFamily::new(vec![], None).unwrap());
        let verdict = null_section_forward(&x, &y, &d, &limits).unwrap();
        assert!(verdict.holds);
        assert!(verdict.exceptional_set.is_empty());
    }

    #[test]
    fn forward_positive_mass_rejected() {
        let limits = Limits::default();
        let x = MeasureSpace::counting(2).unwrap();
        let y = MeasureSpace::counting(2).unwrap();
        let d = ProductSet::new(
            RectFamily::new(vec![Rect::new(pts(&[0]), pts(&[0]))], None).unwrap(),
        );
        let err = null_section_forward(&x, &y, &d, &limits).unwrap_err();
        assert!(matches!(err, Error::PreconditionFailed(_)));
    }

    #[test]
    fn forward_interval_null_lines() {
        // D = a zero-width rectangle family over the line: [0,1) x [2,2) is
        // empty after normalization, so use a degenerate-measure slice
        // instead: [0,0+width) with width 0 is gone; take D empty
        let limits = Limits::default();
        let line = MeasureSpace::length_line();
        let d = ProductSet::new(RectFamily::new(vec![], None).unwrap());
        let verdict = null_section_forward(&line, &line, &d, &limits).unwrap();
        assert!(verdict.holds);
    }

    #[test]
    fn converse_null_slice() {
        let limits = Limits::default();
        let x = null_point_space();
        let y = MeasureSpace::counting(2).unwrap();
        let d = ProductSet::new(
            RectFamily::new(vec![Rect::new(pts(&[0]), pts(&[0, 1]))], None).unwrap(),
        );
        let verdict = null_section_converse(&x, &y, &d, &limits).unwrap();
        assert!(verdict.holds, "steps: {:?}", verdict.steps);
        assert_eq!(verdict.exceptional_outer, ExtReal::zero());
    }

    #[test]
    fn converse_empty_d() {
        let limits = Limits::default();
        let x = MeasureSpace::counting(2).unwrap();
        let y = MeasureSpace::counting(2).unwrap();
        let d = ProductSet::new(RectFamily::new(vec![], None).unwrap());
        let verdict = null_section_converse(&x, &y, &d, &limits).unwrap();
        assert!(verdict.holds);
    }

    #[test]
    fn converse_rejects_non_measurable() {
        // coarse X factor: semiring {empty, {0,1}} with mu = 1 over two
        // points; Y a single counting point. D = {0} x {0} fails the
        // Caratheodory split at E = X x Y, and the verdict must refuse with
        // that test set attached.
        use crate::spaces::{MeasureDesc, SemiringDesc};
        use std::collections::BTreeMap;
        let limits = Limits::default();
        let mut map = BTreeMap::new();
        map.insert(pts(&[]), ExtReal::zero());
        map.insert(pts(&[0, 1]), ExtReal::one());
        let x = MeasureSpace::new(
            Universe::finite(2).unwrap(),
            SemiringDesc::explicit(vec![pts(&[]), pts(&[0, 1])]).unwrap(),
            MeasureDesc::tabulated(map).unwrap(),
            Some(vec![pts(&[0, 1])]),
        )
        .unwrap();
        let y = MeasureSpace::counting(1).unwrap();
        let d = ProductSet::new(
            RectFamily::new(vec![Rect::new(pts(&[0]), pts(&[0]))], None).unwrap(),
        );
        let err = null_section_converse(&x, &y, &d, &limits).unwrap_err();
        match err {
            Error::PreconditionFailed(msg) => {
                assert!(msg.contains("not (mu_X x mu_Y)*-measurable"), "{}", msg)
            }
            other => panic!("expected PreconditionFailed, got {}", other),
        }
    }
}
