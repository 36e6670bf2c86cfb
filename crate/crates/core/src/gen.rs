//! Seeded instance generators and corruptors: guillotine partitions,
//! dyadic staircases, random explicit families, random weighted spaces,
//! witness-extraction instances, and measure corruptors for negative tests.
//! Identical seeds give identical output, always.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::{BigInt, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exact::ExtReal;
use crate::limits::Limits;
use crate::outer::OuterTable;
use crate::product::{section, superlevel, Axis, DyadicTail, Point, ProductSet, Rect, RectFamily};
use crate::spaces::{FiniteSet, MeasureDesc, MeasureSpace, SemiringDesc, SetExpr, Universe};
use crate::Result;

/// What to generate, as named on the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    GuillotinePartition,
    RandomFiniteSpace,
    DyadicStaircase,
    CorruptedMeasure,
    RandomRectFamily,
}

impl std::str::FromStr for GenKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<GenKind> {
        Ok(match s {
            "guillotine_partition" => GenKind::GuillotinePartition,
            "random_finite_space" => GenKind::RandomFiniteSpace,
            "dyadic_staircase" => GenKind::DyadicStaircase,
            "corrupted_measure" => GenKind::CorruptedMeasure,
            "random_rect_family" => GenKind::RandomRectFamily,
            other => {
                return Err(Error::Parse(format!(
                    "unknown generator kind {:?}; expected guillotine_partition, \
                     random_finite_space, dyadic_staircase, corrupted_measure, \
                     or random_rect_family",
                    other
                )))
            }
        })
    }
}

/// A fully deterministic generation request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pieces: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub universe: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitude: Option<ExtReal>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn rat_u64(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A random rational strictly inside (0, 1) with bounded denominator.
fn random_fraction(rng: &mut ChaCha8Rng, max_den: u64) -> BigRational {
    let den = rng.gen_range(2..=max_den.max(2));
    let num = rng.gen_range(1..den);
    rat_u64(num, den)
}

/// A small random weight; zeros included when `allow_zero` (null sections
/// need them).
fn random_weight(rng: &mut ChaCha8Rng, allow_zero: bool) -> ExtReal {
    let num = if allow_zero {
        rng.gen_range(0..=6u64)
    } else {
        rng.gen_range(1..=6u64)
    };
    let den = rng.gen_range(1..=4u64);
    ExtReal::Finite(rat_u64(num, den))
}

/// Recursive axis-aligned splitting of `whole` at random rational cuts into
/// exactly `pieces` disjoint rectangles whose union is `whole`. Works over
/// interval factors (random relative cuts with bounded denominators) and
/// finite factors (cuts between sorted point labels).
pub fn gen_guillotine(
    seed: u64,
    pieces: u32,
    whole: &Rect,
    limits: &Limits,
) -> Result<RectFamily> {
    if pieces == 0 {
        return Err(Error::PreconditionFailed("pieces must be >= 1".into()));
    }
    if whole.is_empty() {
        return Err(Error::PreconditionFailed(
            "the whole rectangle is empty".into(),
        ));
    }
    let mut rng = rng_for(seed, 0x67494c4c);
    let mut rects = vec![whole.clone()];
    let mut stall = 0u32;
    while (rects.len() as u32) < pieces {
        let idx = rng.gen_range(0..rects.len());
        let vertical = rng.gen_bool(0.5);
        match split_rect(&mut rng, &rects[idx], vertical, limits)? {
            Some((a, b)) => {
                rects[idx] = a;
                rects.insert(idx + 1, b);
                stall = 0;
            }
            None => {
                // factor too thin to split along that axis
                stall += 1;
                if stall > 64 {
                    return Err(Error::BudgetExceeded(format!(
                        "cannot split {} into {} pieces",
                        whole, pieces
                    )));
                }
            }
        }
    }
    RectFamily::new(rects, None)
}

fn split_rect(
    rng: &mut ChaCha8Rng,
    rect: &Rect,
    vertical: bool,
    limits: &Limits,
) -> Result<Option<(Rect, Rect)>> {
    let factor = if vertical { &rect.base } else { &rect.side };
    let halves = match factor {
        SetExpr::Intervals(u) => {
            let ivs = u.intervals();
            if ivs.len() != 1 {
                return Err(Error::PreconditionFailed(
                    "guillotine factors must be single intervals".into(),
                ));
            }
            let (lo, hi) = (&ivs[0].lo, &ivs[0].hi);
            let cut = lo + (hi - lo) * random_fraction(rng, limits.max_cut_denominator);
            Some((
                SetExpr::interval(lo.clone(), cut.clone()),
                SetExpr::interval(cut, hi.clone()),
            ))
        }
        SetExpr::Finite(s) => {
            if s.len() < 2 {
                None
            } else {
                let at = rng.gen_range(1..s.len());
                Some((
                    SetExpr::points(s.members()[..at].to_vec()),
                    SetExpr::points(s.members()[at..].to_vec()),
                ))
            }
        }
    };
    Ok(halves.map(|(first, second)| {
        if vertical {
            (
                Rect::new(first, rect.side.clone()),
                Rect::new(second, rect.side.clone()),
            )
        } else {
            (
                Rect::new(rect.base.clone(), first),
                Rect::new(rect.base.clone(), second),
            )
        }
    }))
}

/// The canonical countable partition of `whole`: a dyadic staircase along a
/// seeded axis.
pub fn gen_staircase(seed: u64, whole: &Rect) -> Result<RectFamily> {
    let mut rng = rng_for(seed, 0x53544152);
    let axis = if rng.gen_bool(0.5) { Axis::X } else { Axis::Y };
    let (span_set, fixed) = match axis {
        Axis::X => (&whole.base, whole.side.clone()),
        Axis::Y => (&whole.side, whole.base.clone()),
    };
    let ivs = span_set.as_intervals()?.intervals();
    if ivs.len() != 1 {
        return Err(Error::PreconditionFailed(
            "staircase spans must be single intervals".into(),
        ));
    }
    let tail = DyadicTail::new(axis, ivs[0].lo.clone(), ivs[0].hi.clone(), fixed)?;
    RectFamily::new(vec![], Some(tail))
}

/// A random explicit family over a small finite universe, drawn from a mix
/// of constructions that are semirings by design (power sets, partition
/// blocks, block unions, label segments) and random mutations of those
/// (member dropped, junk member added, empty set removed) that usually are
/// not. Classification is the validator's job, not the generator's.
pub fn gen_family(seed: u64) -> Result<(Universe, SemiringDesc)> {
    let mut rng = rng_for(seed, 0x46414d49);
    let size = rng.gen_range(2..=6u32);
    let universe = Universe::finite(size)?;
    let mut masks: Vec<u64> = match rng.gen_range(0..4u32) {
        0 => {
            // power set of a sub-universe
            let k = rng.gen_range(1..=size.min(4));
            (0u64..(1u64 << k)).collect()
        }
        1 => {
            // empty set plus the blocks of a random partition
            let mut blocks = random_partition(&mut rng, size);
            blocks.insert(0, 0);
            blocks
        }
        2 => {
            // empty set plus all unions of partition blocks
            let blocks = random_partition(&mut rng, size);
            let mut all = Vec::new();
            for pick in 0u64..(1u64 << blocks.len()) {
                let mut m = 0u64;
                for (i, b) in blocks.iter().enumerate() {
                    if pick & (1 << i) != 0 {
                        m |= b;
                    }
                }
                all.push(m);
            }
            all.sort_unstable();
            all.dedup();
            all
        }
        _ => {
            // label segments [i, j): a finite analogue of the interval semiring
            let mut segs = vec![0u64];
            for i in 0..size {
                for j in (i + 1)..=size {
                    let m = ((1u64 << j) - 1) & !((1u64 << i) - 1);
                    segs.push(m);
                }
            }
            segs.sort_unstable();
            segs.dedup();
            segs
        }
    };

    // mutations: bias toward leaving some families intact
    for _ in 0..rng.gen_range(0..=2u32) {
        match rng.gen_range(0..3u32) {
            0 if masks.len() > 1 => {
                let at = rng.gen_range(0..masks.len());
                masks.remove(at);
            }
            1 => {
                let junk = rng.gen_range(0..(1u64 << size));
                if !masks.contains(&junk) {
                    masks.push(junk);
                }
            }
            _ => {
                masks.retain(|&m| m != 0);
            }
        }
    }

    let family: Vec<SetExpr> = masks
        .into_iter()
        .map(|m| SetExpr::Finite(FiniteSet::from_mask(m)))
        .collect();
    Ok((universe, SemiringDesc::explicit(family)?))
}

fn random_partition(rng: &mut ChaCha8Rng, size: u32) -> Vec<u64> {
    let mut blocks: BTreeMap<u32, u64> = BTreeMap::new();
    let nblocks = rng.gen_range(1..=size);
    for p in 0..size {
        let b = rng.gen_range(0..nblocks);
        *blocks.entry(b).or_insert(0) |= 1u64 << p;
    }
    blocks.into_values().collect()
}

/// A power-set space with random rational point weights.
pub fn gen_weighted_space(seed: u64, size: u32, allow_zero: bool) -> Result<MeasureSpace> {
    let mut rng = rng_for(seed, 0x57454947);
    let weights = (0..size)
        .map(|_| random_weight(&mut rng, allow_zero))
        .collect();
    MeasureSpace::weighted(size, weights)
}

/// A random explicit family (always containing the empty set) with a random
/// tabulated set function: raw material for outer-measure checks. Not
/// required to be a semiring or additive.
pub fn gen_tabulated_space(seed: u64, max_points: u32, max_members: usize) -> Result<MeasureSpace> {
    let mut rng = rng_for(seed, 0x54414255);
    let size = rng.gen_range(2..=max_points.max(2));
    let universe = Universe::finite(size)?;
    let mut masks = vec![0u64];
    let wanted = rng.gen_range(3..=max_members.max(3));
    let mut guard = 0;
    while masks.len() < wanted && guard < 512 {
        guard += 1;
        let m = rng.gen_range(0..(1u64 << size));
        if !masks.contains(&m) {
            masks.push(m);
        }
    }
    let mut assignments = BTreeMap::new();
    let mut family = Vec::new();
    for m in masks {
        let set = SetExpr::Finite(FiniteSet::from_mask(m));
        let value = if m == 0 {
            ExtReal::zero()
        } else {
            random_weight(&mut rng, true)
        };
        family.push(set.clone());
        assignments.insert(set, value);
    }
    MeasureSpace::new(
        universe,
        SemiringDesc::explicit(family)?,
        MeasureDesc::tabulated(assignments)?,
        None,
    )
}

/// What a corruptor did, for the report.
#[derive(Debug, Clone, Serialize)]
pub struct CorruptionInfo {
    pub member: SetExpr,
    pub before: ExtReal,
    pub after: ExtReal,
}

/// Re-expresses a power-set point-mass space as an explicitly tabulated one
/// (the only representation whose entries can be perturbed independently).
pub fn tabulate_point_mass(space: &MeasureSpace) -> Result<MeasureSpace> {
    let family = space.semiring().members().ok_or_else(|| {
        Error::PreconditionFailed("only explicit-family spaces can be tabulated".into())
    })?;
    let mut assignments = BTreeMap::new();
    for s in family {
        assignments.insert(s.clone(), space.measure().eval(s)?);
    }
    MeasureSpace::new(
        *space.universe(),
        space.semiring().clone(),
        MeasureDesc::tabulated(assignments)?,
        space.sigma_finite_witness().map(|w| w.to_vec()),
    )
}

/// Perturbs one randomly chosen assignment by plus or minus `magnitude`,
/// floored at zero, leaving `mu(empty) = 0` untouched. With a positive
/// magnitude the output is guaranteed to differ from the input (the sign
/// flips to plus whenever subtraction would be a no-op); magnitude zero
/// returns the space unchanged.
pub fn gen_corrupted(
    seed: u64,
    base: &MeasureSpace,
    magnitude: &ExtReal,
) -> Result<(MeasureSpace, Option<CorruptionInfo>)> {
    if magnitude.is_zero() {
        return Ok((base.clone(), None));
    }
    if !magnitude.is_finite() {
        return Err(Error::PreconditionFailed(
            "corruption magnitude must be finite".into(),
        ));
    }
    let mut rng = rng_for(seed, 0x434f5252);
    match base.measure() {
        MeasureDesc::Tabulated(map) => {
            let candidates: Vec<&SetExpr> = map.keys().filter(|s| !s.is_empty()).collect();
            if candidates.is_empty() {
                return Err(Error::PreconditionFailed(
                    "no non-empty member to corrupt".into(),
                ));
            }
            let target = candidates[rng.gen_range(0..candidates.len())].clone();
            let before = map[&target].clone();
            let after = perturb(&mut rng, &before, magnitude);
            let mut new_map = map.clone();
            new_map.insert(target.clone(), after.clone());
            let space = MeasureSpace::new(
                *base.universe(),
                base.semiring().clone(),
                MeasureDesc::tabulated(new_map)?,
                base.sigma_finite_witness().map(|w| w.to_vec()),
            )?;
            Ok((
                space,
                Some(CorruptionInfo {
                    member: target,
                    before,
                    after,
                }),
            ))
        }
        MeasureDesc::PointMass(weights) => {
            let size = match base.universe() {
                Universe::Finite { size } => *size,
                Universe::Interval => unreachable!("point mass implies finite"),
            };
            let p = rng.gen_range(0..size);
            let before = weights.get(&p).cloned().unwrap_or_else(ExtReal::zero);
            let after = perturb(&mut rng, &before, magnitude);
            let mut new_weights = weights.clone();
            new_weights.insert(p, after.clone());
            let space = MeasureSpace::new(
                *base.universe(),
                base.semiring().clone(),
                MeasureDesc::point_mass(new_weights),
                base.sigma_finite_witness().map(|w| w.to_vec()),
            )?;
            Ok((
                space,
                Some(CorruptionInfo {
                    member: SetExpr::points(vec![p]),
                    before,
                    after,
                }),
            ))
        }
        MeasureDesc::Length => Err(Error::PreconditionFailed(
            "the length measure has no stored assignments to corrupt".into(),
        )),
    }
}

fn perturb(rng: &mut ChaCha8Rng, value: &ExtReal, magnitude: &ExtReal) -> ExtReal {
    let subtract = rng.gen_bool(0.5);
    if subtract {
        if let (ExtReal::Finite(v), ExtReal::Finite(m)) = (value, magnitude) {
            let down = v - m;
            let floored = if down < BigRational::zero() {
                BigRational::zero()
            } else {
                down
            };
            if &floored != v {
                return ExtReal::Finite(floored);
            }
        }
        // subtraction was a no-op (value already 0, or infinite): add instead
    }
    value.add(magnitude)
}

/// A ready-to-run witness-extraction instance with thresholds guaranteed to
/// satisfy the preconditions.
#[derive(Debug, Clone)]
pub struct WitnessInstance {
    pub space_x: MeasureSpace,
    pub space_y: MeasureSpace,
    pub d: ProductSet,
    pub cover: RectFamily,
    pub r: ExtReal,
    pub s: ExtReal,
}

/// Generates a witness instance: a guillotine cover of a rectangle (over
/// the line or over finite weighted grids), `D` the union of a random
/// nonempty subset of the cover, `r` half the smallest positive section
/// value, and `s` half of `mu*_X(D^{>r})`. Retries derived seeds until the
/// thresholds come out strictly positive.
pub fn gen_witness_instance(seed: u64, limits: &Limits) -> Result<WitnessInstance> {
    for attempt in 0..64u64 {
        let derived = seed.wrapping_add(attempt.wrapping_mul(0x9e3779b97f4a7c15));
        let mut rng = rng_for(derived, 0x57495453);
        if let Some(instance) = try_witness_instance(&mut rng, limits)? {
            return Ok(instance);
        }
    }
    Err(Error::BudgetExceeded(format!(
        "no valid witness instance found for seed {}",
        seed
    )))
}

fn try_witness_instance(
    rng: &mut ChaCha8Rng,
    limits: &Limits,
) -> Result<Option<WitnessInstance>> {
    let interval_flavor = rng.gen_bool(0.5);
    let (space_x, space_y, whole) = if interval_flavor {
        let a = rng.gen_range(1..=3u64);
        let b = rng.gen_range(1..=3u64);
        let whole = Rect::new(
            SetExpr::interval(rat_u64(0, 1), rat_u64(a, 1)),
            SetExpr::interval(rat_u64(0, 1), rat_u64(b, 1)),
        );
        (
            MeasureSpace::length_line(),
            MeasureSpace::length_line(),
            whole,
        )
    } else {
        let nx = rng.gen_range(2..=4u32);
        let ny = rng.gen_range(2..=4u32);
        let space_x = gen_weighted_space(rng.gen(), nx, true)?;
        let space_y = gen_weighted_space(rng.gen(), ny, true)?;
        let whole = Rect::new(
            SetExpr::points((0..nx).collect()),
            SetExpr::points((0..ny).collect()),
        );
        (space_x, space_y, whole)
    };
    let capacity = match (&whole.base, &whole.side) {
        (SetExpr::Finite(b), SetExpr::Finite(s)) => (b.len() * s.len()) as u32,
        _ => u32::MAX,
    };
    let pieces = rng.gen_range(2..=10u32).min(capacity);
    let cover = match gen_guillotine(rng.gen(), pieces, &whole, limits) {
        Ok(c) => c,
        Err(Error::BudgetExceeded(_)) => return Ok(None),
        Err(e) => return Err(e),
    };

    // D = union of a random nonempty subset of the cover
    let count = cover.rects.len();
    let mut picked: Vec<Rect> = cover
        .rects
        .iter()
        .filter(|_| rng.gen_bool(0.7))
        .cloned()
        .collect();
    if picked.is_empty() {
        picked.push(cover.rects[rng.gen_range(0..count)].clone());
    }
    let d = ProductSet::new(RectFamily::new(picked, None)?);

    // smallest positive section value decides r
    let pool = section_value_pool(&d, &space_x, &space_y, limits)?;
    let v_min = match pool.into_iter().filter(|v| !v.is_zero()).min() {
        Some(ExtReal::Finite(v)) => v,
        _ => return Ok(None),
    };
    let half = BigRational::from_integer(2.into());
    let r = ExtReal::Finite(v_min / &half);
    let level = superlevel(&d, space_x.universe(), &space_y, &r, limits)?;
    let level_mass = match space_x.universe() {
        Universe::Finite { .. } => OuterTable::build(&space_x, limits)?.value(&level)?.clone(),
        Universe::Interval => ExtReal::from_rational(level.as_intervals()?.total_length())?,
    };
    let s = match level_mass {
        ExtReal::Finite(m) if !m.is_zero() => ExtReal::Finite(m / &half),
        _ => return Ok(None),
    };
    Ok(Some(WitnessInstance {
        space_x,
        space_y,
        d,
        cover,
        r,
        s,
    }))
}

/// Attainable section values of `d`, one per point (finite X) or per cell
/// of the base-endpoint partition (interval X).
fn section_value_pool(
    d: &ProductSet,
    space_x: &MeasureSpace,
    space_y: &MeasureSpace,
    limits: &Limits,
) -> Result<Vec<ExtReal>> {
    let mut values = Vec::new();
    match space_x.universe() {
        Universe::Finite { size } => {
            let table_y = OuterTable::build(space_y, limits)?;
            for p in 0..*size {
                let sec = section(d, &Point::Finite(p), space_y.universe())?;
                values.push(table_y.value(&sec)?.clone());
            }
        }
        Universe::Interval => {
            let mut endpoints: Vec<BigRational> = Vec::new();
            for rect in &d.family.rects {
                for iv in rect.base.as_intervals()?.intervals() {
                    endpoints.push(iv.lo.clone());
                    endpoints.push(iv.hi.clone());
                }
            }
            endpoints.sort();
            endpoints.dedup();
            let two = BigRational::from_integer(2.into());
            for pair in endpoints.windows(2) {
                let mid = Point::Rational((&pair[0] + &pair[1]) / &two);
                let sec = section(d, &mid, space_y.universe())?;
                values.push(ExtReal::from_rational(sec.as_intervals()?.total_length())?);
            }
        }
    }
    Ok(values)
}
