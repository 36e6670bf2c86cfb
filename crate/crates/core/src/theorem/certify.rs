//! Sigma-additivity certification for product measures.
//!
//! A certificate for `sum over n of mu_X(B_n) * mu_Y(C_n) = mu_X(B) * mu_Y(C)`
//! at level `t` has two halves: every truncation of the sum stays at or
//! below the product (finite additivity side), and some finite index set
//! `F` pushes the sum strictly past `t` (obtained through the witness
//! extractor, with thresholds picked by a deterministic midpoint rule).
//! Ranging `t` below the product certifies equality in the supremum sense.

use serde::Serialize;

use crate::error::Error;
use crate::exact::ExtReal;
use crate::limits::Limits;
use crate::product::{product_measure, ProductSet, Rect, RectFamily};
use crate::spaces::MeasureSpace;
use crate::theorem::witness::{extract_witness, subset_of_union, Witness};
use crate::Result;

/// A successful certification: both halves plus the exact values they used.
#[derive(Debug, Clone, Serialize)]
pub struct CertReport {
    pub t: ExtReal,
    /// `mu_X(B) * mu_Y(C)`.
    pub product: ExtReal,
    /// Mass threshold below `mu_X(B)` picked by the midpoint rule.
    pub r: ExtReal,
    /// Section threshold below `mu_Y(C)` picked by the midpoint rule.
    pub s: ExtReal,
    /// Partial sums over the finite rectangles, one per truncation.
    pub prefix_sums: Vec<ExtReal>,
    /// Total over the finite rectangles when the family has no tail.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_sum: Option<ExtReal>,
    /// Whether the finite total equals the product exactly.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_sum_equals_product: Option<bool>,
    /// Closed-form supremum of the truncated sums when a tail is present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_supremum: Option<ExtReal>,
    pub witness: Witness,
}

/// The negative path: the exact truncation or extraction step that refutes
/// (or fails to support) additivity, carried inside
/// [`Error::CertificationFailed`] so the failure is re-checkable.
#[derive(Debug, Clone, Serialize)]
pub struct CertFailure {
    pub stage: CertStage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_truncation: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partial_sum: Option<ExtReal>,
    pub product: ExtReal,
    pub t: ExtReal,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertStage {
    UpperHalf,
    LowerHalf,
}

impl std::fmt::Display for CertFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.detail)
    }
}

/// Runs both halves of the certificate for `whole = B x C` decomposed into
/// `parts`, at level `t < mu_X(B) * mu_Y(C)`.
pub fn certify_sigma_additivity(
    space_x: &MeasureSpace,
    space_y: &MeasureSpace,
    whole: &Rect,
    parts: &RectFamily,
    t: &ExtReal,
    limits: &Limits,
) -> Result<CertReport> {
    // structural preconditions: parts tile the whole exactly
    for (i, part) in parts.rects.iter().enumerate() {
        if part.is_empty() {
            continue;
        }
        if !part.base.is_subset_of(&whole.base)? || !part.side.is_subset_of(&whole.side)? {
            return Err(Error::PreconditionFailed(format!(
                "part {} (index {}) is not inside the whole {}",
                part, i, whole
            )));
        }
    }
    if let Some(tail) = &parts.tail {
        let full = tail.full_rect();
        if !full.base.is_subset_of(&whole.base)? || !full.side.is_subset_of(&whole.side)? {
            return Err(Error::PreconditionFailed(format!(
                "tail span {} is not inside the whole {}",
                full, whole
            )));
        }
    }
    let whole_as_set = ProductSet::new(RectFamily::new(vec![whole.clone()], None)?);
    whole_as_set
        .family
        .check_in_semirings(space_x.semiring(), space_y.semiring())?;
    if let Some((x, y)) =
        subset_of_union(&whole_as_set, parts, space_x.universe(), space_y.universe())?
    {
        return Err(Error::PreconditionFailed(format!(
            "parts do not cover the whole: ({}, {}) is uncovered",
            x, y
        )));
    }

    let product = product_measure(space_x.measure(), space_y.measure(), whole)?;
    if *t >= product {
        return Err(Error::PreconditionFailed(format!(
            "t = {} is not strictly below the product {}",
            t, product
        )));
    }

    // upper half: partial sums never exceed the product
    let mut prefix_sums = Vec::with_capacity(parts.rects.len());
    let mut running = ExtReal::zero();
    for (k, part) in parts.rects.iter().enumerate() {
        running = running.add(&product_measure(space_x.measure(), space_y.measure(), part)?);
        prefix_sums.push(running.clone());
        if running > product {
            let detail = format!(
                "truncation {} sums to {} which exceeds the product {}",
                k + 1,
                running,
                product
            );
            return Err(Error::CertificationFailed(Box::new(CertFailure {
                stage: CertStage::UpperHalf,
                failing_truncation: Some(k + 1),
                partial_sum: Some(running),
                product,
                t: t.clone(),
                detail,
            })));
        }
    }
    let (full_sum, full_sum_equals_product, tail_supremum) = match &parts.tail {
        None => {
            let eq = running == product;
            (Some(running.clone()), Some(eq), None)
        }
        Some(tail) => {
            // the truncated sums increase to finite total + tail span mass,
            // so one closed-form comparison bounds every truncation
            let sup = running.add(&product_measure(
                space_x.measure(),
                space_y.measure(),
                &tail.full_rect(),
            )?);
            if sup > product {
                let detail = format!(
                    "truncated sums approach {} which exceeds the product {}",
                    sup, product
                );
                return Err(Error::CertificationFailed(Box::new(CertFailure {
                    stage: CertStage::UpperHalf,
                    failing_truncation: None,
                    partial_sum: Some(sup),
                    product,
                    t: t.clone(),
                    detail,
                })));
            }
            (None, None, Some(sup))
        }
    };

    // lower half: midpoint thresholds, then the witness extractor.
    // r bounds the base mass from below mu_X(B); s bounds the section value
    // from below mu_Y(C). The extractor's section threshold is s and its
    // mass threshold is r.
    let m_b = space_x.eval(&whole.base)?;
    let m_c = space_y.eval(&whole.side)?;
    let r = midpoint_below(t, &m_c, &m_b).ok_or_else(|| {
        Error::PreconditionFailed(format!(
            "cannot place r between t/mu_Y(C) and mu_X(B) = {}",
            m_b
        ))
    })?;
    let s = midpoint_below(t, &r, &m_c).ok_or_else(|| {
        Error::PreconditionFailed(format!(
            "cannot place s between t/r and mu_Y(C) = {}",
            m_c
        ))
    })?;
    debug_assert!(r.mul(&s) > *t);

    let witness = extract_witness(space_x, space_y, &whole_as_set, parts, &s, &r, limits)
        .map_err(|e| match e {
            Error::PreconditionFailed(detail) => Error::CertificationFailed(Box::new(CertFailure {
                stage: CertStage::LowerHalf,
                failing_truncation: None,
                partial_sum: None,
                product: product.clone(),
                t: t.clone(),
                detail,
            })),
            other => other,
        })?;
    if *t >= witness.rhs {
        return Err(Error::CertificationFailed(Box::new(CertFailure {
            stage: CertStage::LowerHalf,
            failing_truncation: None,
            partial_sum: Some(witness.rhs.clone()),
            product,
            t: t.clone(),
            detail: format!(
                "witness sum {} does not exceed t = {}",
                witness.rhs, t
            ),
        })));
    }

    Ok(CertReport {
        t: t.clone(),
        product,
        r,
        s,
        prefix_sums,
        full_sum,
        full_sum_equals_product,
        tail_supremum,
        witness,
    })
}

/// The deterministic threshold rule: a rational strictly between `t / denom`
/// and `cap` (midpoint when `cap` is finite, `t/denom + 1` when `cap` is
/// infinite), strictly positive. `None` when no such value exists.
fn midpoint_below(t: &ExtReal, denom: &ExtReal, cap: &ExtReal) -> Option<ExtReal> {
    let floor = t.checked_div(denom)?;
    if floor >= *cap {
        return None;
    }
    let half = ExtReal::ratio(1, 2);
    let candidate = match cap {
        ExtReal::Finite(_) => floor.add(cap).mul(&half),
        ExtReal::Infinity => floor.add(&ExtReal::one()),
    };
    if candidate.is_zero() || candidate >= *cap || !candidate.is_finite() {
        return None;
    }
    Some(candidate)
}
