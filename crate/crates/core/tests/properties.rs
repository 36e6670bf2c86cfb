//! Cross-module properties: canonicalization laws, arithmetic laws over
//! random rationals, point-mass additivity, membership preservation under
//! rectangle disjointification, the cover-bound side of the length outer
//! measure, and witness stability under cover refinement.

use num::bigint::BigInt;
use num::rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mf_core::exact::ExtReal;
use mf_core::gen::{gen_guillotine, gen_witness_instance};
use mf_core::outer::{cover_bound, outer_measure, Cover};
use mf_core::product::{rect_disjointify, Point, ProductSet, RectFamily};
use mf_core::spaces::{IntervalUnion, MeasureDesc, MeasureSpace, SemiringDesc, SetExpr};
use mf_core::theorem::extract_witness;
use mf_core::Limits;

fn big_rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn arb_rational() -> impl Strategy<Value = BigRational> {
    (-50i64..50, 1i64..20).prop_map(|(n, d)| big_rat(n, d))
}

fn arb_ext_real() -> impl Strategy<Value = ExtReal> {
    prop_oneof![
        9 => (0i64..100, 1i64..20).prop_map(|(n, d)| ExtReal::Finite(big_rat(n, d))),
        1 => Just(ExtReal::Infinity),
    ]
}

proptest! {
    #[test]
    fn interval_canonicalization_idempotent_and_order_insensitive(
        pairs in proptest::collection::vec((arb_rational(), arb_rational()), 0..8),
        shuffle_seed in any::<u64>(),
    ) {
        let canonical = IntervalUnion::new(pairs.clone());
        // idempotence
        let again = IntervalUnion::new(
            canonical.intervals().iter().map(|iv| (iv.lo.clone(), iv.hi.clone())).collect(),
        );
        prop_assert_eq!(&again, &canonical);
        // order insensitivity
        let mut shuffled = pairs;
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
        for i in (1..shuffled.len()).rev() {
            let j = rng.gen_range(0..=i);
            shuffled.swap(i, j);
        }
        prop_assert_eq!(&IntervalUnion::new(shuffled), &canonical);
    }

    #[test]
    fn ext_real_laws(a in arb_ext_real(), b in arb_ext_real(), c in arb_ext_real()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        if a < b {
            prop_assert!(a.add(&c) <= b.add(&c));
        }
    }
}

#[test]
fn point_mass_additive_over_disjoint_unions_exhaustive() {
    // universes up to size 6, seeded weights; every disjoint pair must add
    for size in 1..=6u32 {
        let mut rng = ChaCha8Rng::seed_from_u64(size as u64);
        let weights: std::collections::BTreeMap<u32, ExtReal> = (0..size)
            .map(|p| {
                let n = rng.gen_range(0..6u64);
                let d = rng.gen_range(1..4u64);
                (p, ExtReal::Finite(big_rat(n as i64, d as i64)))
            })
            .collect();
        let m = MeasureDesc::point_mass(weights);
        for a in 0u64..(1 << size) {
            for b in 0u64..(1 << size) {
                if a & b != 0 {
                    continue;
                }
                let sa = SetExpr::Finite(mf_core::spaces::FiniteSet::from_mask(a));
                let sb = SetExpr::Finite(mf_core::spaces::FiniteSet::from_mask(b));
                let su = SetExpr::Finite(mf_core::spaces::FiniteSet::from_mask(a | b));
                assert_eq!(
                    m.eval(&su).unwrap(),
                    m.eval(&sa).unwrap().add(&m.eval(&sb).unwrap()),
                );
            }
        }
    }
}

#[test]
fn disjointify_preserves_membership_bulk() {
    let limits = Limits::default();
    let sr = SemiringDesc::IntervalSemiring;
    let mut rng = ChaCha8Rng::seed_from_u64(0xd15);
    for trial in 0..10 {
        // random overlapping rectangles inside [0,4)^2
        let rects: Vec<_> = (0..rng.gen_range(2..6))
            .map(|_| {
                let x0 = rng.gen_range(0..12i64);
                let x1 = rng.gen_range((x0 + 1)..16);
                let y0 = rng.gen_range(0..12i64);
                let y1 = rng.gen_range((y0 + 1)..16);
                mf_core::product::Rect::new(
                    SetExpr::interval(big_rat(x0, 4), big_rat(x1, 4)),
                    SetExpr::interval(big_rat(y0, 4), big_rat(y1, 4)),
                )
            })
            .collect();
        let before = ProductSet::new(RectFamily {
            rects: rects.clone(),
            tail: None,
        });
        let after = ProductSet::new(rect_disjointify(rects, &sr, &sr).unwrap());
        for _ in 0..1000 {
            let x = Point::Rational(big_rat(rng.gen_range(-4..68), 16));
            let y = Point::Rational(big_rat(rng.gen_range(-4..68), 16));
            assert_eq!(
                before.contains(&x, &y).unwrap(),
                after.contains(&x, &y).unwrap(),
                "trial {} at ({}, {})",
                trial,
                x,
                y
            );
        }
    }
    let _ = limits;
}

#[test]
fn length_outer_matches_canonical_length_and_cover_bounds() {
    let line = MeasureSpace::length_line();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e57);
    for _ in 0..50 {
        let pairs: Vec<_> = (0..rng.gen_range(1..4))
            .map(|_| {
                let a = rng.gen_range(0..12i64);
                let b = rng.gen_range((a + 1)..16);
                (big_rat(a, 2), big_rat(b, 2))
            })
            .collect();
        let target = SetExpr::intervals(pairs);
        if target.is_empty() {
            continue;
        }
        let outer = outer_measure(&line, &target).unwrap();
        let canonical_length =
            ExtReal::from_rational(target.as_intervals().unwrap().total_length()).unwrap();
        assert_eq!(outer.value, canonical_length);

        // the self-cover achieves it exactly
        let self_cover = outer.witness_cover.as_ref().unwrap();
        assert_eq!(cover_bound(line.measure(), self_cover).unwrap(), outer.value);

        // random refinements with optional overshoot never drop below
        let mut pieces = Vec::new();
        for iv in target.as_intervals().unwrap().intervals() {
            let mid = (&iv.lo + &iv.hi) / big_rat(2, 1);
            let slack = big_rat(rng.gen_range(0..3), 4);
            pieces.push(SetExpr::interval(iv.lo.clone(), mid.clone()));
            pieces.push(SetExpr::interval(mid, &iv.hi + slack));
        }
        let cover = Cover::new(pieces, target.clone()).unwrap();
        let bound = cover_bound(line.measure(), &cover).unwrap();
        assert!(bound >= outer.value);
    }
}

#[test]
fn witness_survives_cover_refinement() {
    // splitting one cover rectangle never invalidates certifiability
    let limits = Limits::default();
    let mut refinements = 0;
    let mut seed = 0u64;
    while refinements < 100 {
        seed += 1;
        let inst = gen_witness_instance(seed, &limits).unwrap();
        extract_witness(
            &inst.space_x,
            &inst.space_y,
            &inst.d,
            &inst.cover,
            &inst.r,
            &inst.s,
            &limits,
        )
        .expect("generated instances extract");

        // split each splittable cover rectangle in turn
        for (i, rect) in inst.cover.rects.iter().enumerate() {
            let split = match gen_guillotine(seed, 2, rect, &limits) {
                Ok(fam) if fam.rects.len() == 2 => fam,
                _ => continue,
            };
            let mut refined = inst.cover.rects.clone();
            refined.splice(i..=i, split.rects);
            let refined = RectFamily::new(refined, None).unwrap();
            let w = extract_witness(
                &inst.space_x,
                &inst.space_y,
                &inst.d,
                &refined,
                &inst.r,
                &inst.s,
                &limits,
            )
            .expect("refined cover still certifies");
            assert!(w.lhs < w.rhs);
            refinements += 1;
            if refinements >= 100 {
                break;
            }
        }
    }
}
