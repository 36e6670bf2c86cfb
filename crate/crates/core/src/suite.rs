//! The verification suites: seeded instance streams for each acceptance
//! family of checks, emitting one self-certifying report per instance.
//! Reports are byte-identical across reruns with the same seed once wall
//! times are zeroed (`RunReport::canonical_json`).

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::exact::ExtReal;
use crate::gen::{
    gen_corrupted, gen_family, gen_guillotine, gen_staircase, gen_tabulated_space,
    gen_weighted_space, gen_witness_instance, tabulate_point_mass,
};
use crate::jsonio::rect_to_json;
use crate::limits::Limits;
use crate::outer::{
    check_outer_axioms, cover_bound, oracle::exhaustive_outer_measure, outer_measure_with, Cover,
    Exactness,
};
use crate::product::{product_measure, ProductSet, Rect, RectFamily};
use crate::spaces::{
    check_finite_additivity, FiniteSet, MeasureSpace, SetExpr, Universe,
};
use crate::theorem::{certify_sigma_additivity, extract_witness, verify_witness, NullSectionContext};
use crate::Result;

/// One verification check inside a report.
#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

impl CheckEntry {
    fn new(name: impl Into<String>, pass: bool, detail: Value) -> CheckEntry {
        CheckEntry {
            name: name.into(),
            pass,
            detail,
        }
    }
}

/// Per-instance report: descriptor, per-check verdicts with exact values,
/// and wall time. Every claimed inequality is re-derivable from the
/// embedded values.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub suite: String,
    pub index: usize,
    pub instance: Value,
    pub checks: Vec<CheckEntry>,
    pub pass: bool,
    /// Set on instances that are supposed to be refuted (corrupted
    /// measures): `pass` then means "refutation delivered".
    pub expected_negative: bool,
    pub wall_time_ms: u64,
}

impl RunReport {
    /// Deterministic serialization: identical seeds give identical bytes
    /// (wall time zeroed).
    pub fn canonical_json(&self) -> String {
        let mut clone = self.clone();
        clone.wall_time_ms = 0;
        serde_json::to_string(&clone).expect("reports serialize")
    }
}

/// Aggregate over one suite run.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub instances: usize,
    pub failures: usize,
    pub pass: bool,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    SemiringAxioms,
    OuterAxioms,
    ProductExactness,
    CertificationPath,
    WitnessSoundness,
    NullSectionEquivalence,
    NegativePath,
}

impl SuiteKind {
    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::SemiringAxioms => "semiring_axioms",
            SuiteKind::OuterAxioms => "outer_axioms",
            SuiteKind::ProductExactness => "product_exactness",
            SuiteKind::CertificationPath => "certification_path",
            SuiteKind::WitnessSoundness => "witness_soundness",
            SuiteKind::NullSectionEquivalence => "null_section_equivalence",
            SuiteKind::NegativePath => "negative_path",
        }
    }

    /// Instance counts the acceptance criteria pin down.
    pub fn default_count(self) -> usize {
        match self {
            SuiteKind::SemiringAxioms => 1000,
            SuiteKind::OuterAxioms => 50,
            SuiteKind::ProductExactness => 500,
            SuiteKind::CertificationPath => 100,
            SuiteKind::WitnessSoundness => 1000,
            SuiteKind::NullSectionEquivalence => 20,
            SuiteKind::NegativePath => 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub kind: SuiteKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

/// Configuration for `run_suite`: a seed and the suites to execute. An
/// empty suite list is an empty (successful) run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    #[serde(default)]
    pub suites: Vec<SuiteEntry>,
}

impl SuiteConfig {
    /// All seven suites at their acceptance counts.
    pub fn full(seed: u64) -> SuiteConfig {
        let suites = [
            SuiteKind::SemiringAxioms,
            SuiteKind::OuterAxioms,
            SuiteKind::ProductExactness,
            SuiteKind::CertificationPath,
            SuiteKind::WitnessSoundness,
            SuiteKind::NullSectionEquivalence,
            SuiteKind::NegativePath,
        ]
        .into_iter()
        .map(|kind| SuiteEntry { kind, count: None })
        .collect();
        SuiteConfig { seed, suites }
    }
}

/// Runs the configured suites in order, streaming a report per instance;
/// the summary's `pass` is the conjunction over suites.
pub fn run_suite(
    config: &SuiteConfig,
    limits: &Limits,
    emit: &mut dyn FnMut(RunReport),
) -> Result<Vec<SuiteOutcome>> {
    let mut outcomes = Vec::new();
    for entry in &config.suites {
        let count = entry.count.unwrap_or_else(|| entry.kind.default_count());
        let outcome = run_one(entry.kind, config.seed, count, limits, emit)?;
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

pub fn run_one(
    kind: SuiteKind,
    seed: u64,
    count: usize,
    limits: &Limits,
    emit: &mut dyn FnMut(RunReport),
) -> Result<SuiteOutcome> {
    match kind {
        SuiteKind::SemiringAxioms => run_semiring_axioms(seed, count, limits, emit),
        SuiteKind::OuterAxioms => run_outer_axioms(seed, count, limits, emit),
        SuiteKind::ProductExactness => run_product_exactness(seed, count, limits, emit),
        SuiteKind::CertificationPath => run_certification_path(seed, count, limits, emit),
        SuiteKind::WitnessSoundness => run_witness_soundness(seed, count, limits, emit),
        SuiteKind::NullSectionEquivalence => run_null_section_equivalence(seed, count, limits, emit),
        SuiteKind::NegativePath => run_negative_path(seed, count, limits, emit),
    }
}

fn derive(seed: u64, i: u64) -> u64 {
    seed.wrapping_add(i.wrapping_mul(0x9e3779b97f4a7c15))
}

struct SuiteAcc {
    suite: &'static str,
    started: Instant,
    instances: usize,
    failures: usize,
}

impl SuiteAcc {
    fn new(suite: &'static str) -> SuiteAcc {
        SuiteAcc {
            suite,
            started: Instant::now(),
            instances: 0,
            failures: 0,
        }
    }

    fn push(
        &mut self,
        emit: &mut dyn FnMut(RunReport),
        index: usize,
        instance: Value,
        checks: Vec<CheckEntry>,
        expected_negative: bool,
        started: Instant,
    ) {
        let pass = checks.iter().all(|c| c.pass);
        self.instances += 1;
        if !pass {
            self.failures += 1;
        }
        emit(RunReport {
            suite: self.suite.to_string(),
            index,
            instance,
            checks,
            pass,
            expected_negative,
            wall_time_ms: started.elapsed().as_millis() as u64,
        });
    }

    fn finish(self) -> SuiteOutcome {
        SuiteOutcome {
            suite: self.suite.to_string(),
            instances: self.instances,
            failures: self.failures,
            pass: self.failures == 0,
            wall_time_ms: self.started.elapsed().as_millis() as u64,
        }
    }
}

// ---------------------------------------------------------------------------
// suite 1: semiring axiom classification vs point-membership oracle
// ---------------------------------------------------------------------------

/// Independent classification of an explicit family by exhaustive point
/// membership: intersections and complements are compared as point sets,
/// and decomposability is decided by a bottom-up closure (every point set
/// reachable as a disjoint union of members), not by the validator's
/// top-down backtracking.
fn oracle_classify(size: u32, family: &[SetExpr]) -> (bool, bool, bool) {
    let sets: Vec<BTreeSet<u32>> = family
        .iter()
        .map(|s| match s {
            SetExpr::Finite(f) => f.members().iter().copied().collect(),
            SetExpr::Intervals(_) => unreachable!("explicit families are finite"),
        })
        .collect();
    let member = |t: &BTreeSet<u32>| sets.iter().any(|s| s == t);
    let has_empty = sets.iter().any(|s| s.is_empty());

    let mut inter_ok = true;
    for a in &sets {
        for b in &sets {
            let i: BTreeSet<u32> = a.intersection(b).copied().collect();
            if !member(&i) {
                inter_ok = false;
            }
        }
    }

    // disjoint-union closure of the members
    let mut tileable: BTreeSet<BTreeSet<u32>> = BTreeSet::new();
    tileable.insert(BTreeSet::new());
    loop {
        let mut grew = false;
        for t in tileable.clone() {
            for m in &sets {
                if m.is_empty() || !t.is_disjoint(m) {
                    continue;
                }
                let u: BTreeSet<u32> = t.union(m).copied().collect();
                if tileable.insert(u) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    let mut diff_ok = true;
    for a in &sets {
        for b in &sets {
            let d: BTreeSet<u32> = a.difference(b).copied().collect();
            if !tileable.contains(&d) {
                diff_ok = false;
            }
        }
    }
    let is_semiring = has_empty && inter_ok && diff_ok;

    let full: BTreeSet<u32> = (0..size).collect();
    let compl_ok = sets
        .iter()
        .all(|s| member(&full.difference(s).copied().collect()));
    let is_algebra = !sets.is_empty() && inter_ok && compl_ok;
    let mut union_ok = true;
    for a in &sets {
        for b in &sets {
            let u: BTreeSet<u32> = a.union(b).copied().collect();
            if !member(&u) {
                union_ok = false;
            }
        }
    }
    let is_sigma_algebra = is_algebra && union_ok;
    (is_semiring, is_algebra, is_sigma_algebra)
}

pub fn run_semiring_axioms(
    seed: u64,
    count: usize,
    _limits: &Limits,
    emit: &mut dyn FnMut(RunReport),
) -> Result<SuiteOutcome> {
    let mut acc = SuiteAcc::new("semiring_axioms");
    for i in 0..count {
        let started = Instant::now();
        let instance_seed = derive(seed, i as u64);
        let (universe, sr) = gen_family(instance_seed)?;
        let size = match universe {
            Universe::Finite { size } => size,
            Universe::Interval => unreachable!(),
        };
        let family = sr.members().expect("generated families are explicit");
        let report = sr.validate(&universe)?;
        let (o_semiring, o_algebra, o_sigma) = oracle_classify(size, family);
        let agree = report.is_semiring == o_semiring
            && report.is_algebra == o_algebra
            && report.is_sigma_algebra == o_sigma;
        let mut checks = vec![CheckEntry::new(
            "classification agrees with point-membership oracle",
            agree,
            json!({
                "validator": {
                    "is_semiring": report.is_semiring,
                    "is_algebra": report.is_algebra,
                    "is_sigma_algebra": report.is_sigma_algebra,
                    "violations": report.violations.len(),
                },
                "oracle": {
                    "is_semiring": o_semiring,
                    "is_algebra": o_algebra,
                    "is_sigma_algebra": o_sigma,
                },
            }),
        )];
        if report.is_semiring {
            // the decompositions behind the verdict must themselves check
            // out pointwise: disjoint family members uniting to a \ b
            let mut sound = true;
            let mut witness_failure = Value::Null;
            'pairs: for a in family {
                for b in family {
                    let pieces = sr.difference(a, b)?;
                    let mut seen = 0u64;
                    let mut ok = true;
                    for p in &pieces {
                        let m = p.as_finite()?.to_mask();
                        ok &= seen & m == 0 && family.contains(p);
                        seen |= m;
                    }
                    let expect = a.as_finite()?.to_mask() & !b.as_finite()?.to_mask();
                    ok &= seen == expect;
                    if !ok {
                        sound = false;
                        witness_failure = json!({"a": a, "b": b});
                        break 'pairs;
                    }
                }
            }
            checks.push(CheckEntry::new(
                "decompositions are disjoint members uniting to the difference",
                sound,
                witness_failure,
            ));
        }
        acc.push(
            emit,
            i,
            json!({"seed": instance_seed, "universe": size, "family_len": family.len()}),
            checks,
            false,
            started,
        );
    }
    Ok(acc.finish())
}

// ---------------------------------------------------------------------------
// suite 2: outer-measure axioms, search vs exhaustive oracle
// ---------------------------------------------------------------------------

pub fn run_outer_axioms(
    seed: u64,
    count: usize,
    limits: &Limits,
    emit: &mut dyn FnMut(RunReport),
) -> Result<SuiteOutcome> {
    let mut acc = SuiteAcc::new("outer_axioms");
    for i in 0..count {
        let started = Instant::now();
        let instance_seed = derive(seed, i as u64);
        // alternate raw tabulated set functions and power-set point masses
        let space = if i % 2 == 0 {
            gen_tabulated_space(instance_seed, 4, 12)?
        } else {
            gen_weighted_space(instance_seed, 2 + (i as u32 % 2), true)?
        };
        let size = match space.universe() {
            Universe::Finite { size } => *size,
            Universe::Interval => unreachable!(),
        };
        let samples: Vec<SetExpr> = (0u64..(1u64 << size))
            .map(|m| SetExpr::Finite(FiniteSet::from_mask(m)))
            .collect();

        let axioms = check_outer_axioms(&space, &samples, limits)?;
        let mut checks = vec![CheckEntry::new(
            "outer-measure axioms (null empty, monotone, subadditive, dominated)",
            axioms.pass,
            json!({
                "monotone_pairs": axioms.monotone_pairs,
                "subadditive_tuples": axioms.subadditive_tuples,
                "dominated_members": axioms.dominated_members,
                "violations": axioms.violations,
            }),
        )];

        let mut oracle_agree = true;
        let mut first_disagreement = Value::Null;
        for sample in &samples {
            let ov = outer_measure_with(&space, sample, limits)?;
            if ov.exactness != Exactness::Exact {
                return Err(Error::BudgetExceeded(format!(
                    "instance {}: search returned a bound, not an exact value",
                    i
                )));
            }
            let reference = exhaustive_outer_measure(&space, sample)?;
            if ov.value != reference {
                oracle_agree = false;
                if first_disagreement.is_null() {
                    first_disagreement = json!({
                        "target": sample,
                        "search": ov.value.to_string(),
                        "oracle": reference.to_string(),
                    });
                }
            }
            // the witness cover, when present, must achieve the value
            if let Some(cover) = &ov.witness_cover {
                let achieved = cover_bound(space.measure(), cover)?;
                if achieved != ov.value {
                    oracle_agree = false;
                }
            }
        }
        checks.push(CheckEntry::new(
            "search equals all-covers oracle on every subset",
            oracle_agree,
            first_disagreement,
        ));

        // infimum property against arbitrary valid covers
        let family = space.semiring().members().expect("explicit");
        let masks: Vec<u64> = family
            .iter()
            .map(|s| s.as_finite().map(FiniteSet::to_mask))
            .collect::<Result<_>>()?;
        let mut infimum_ok = true;
        let mut rng_state = instance_seed | 1;
        let mut next = || {
            // xorshift: deterministic, cheap, and unrelated to the search
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            rng_state
        };
        let mut tried = 0;
        let mut attempts = 0;
        while tried < 100 && attempts < 2000 {
            attempts += 1;
            let target_mask = next() & ((1u64 << size) - 1);
            let pick = next() & ((1u64 << family.len().min(63)) - 1);
            let union = masks
                .iter()
                .enumerate()
                .filter(|(j, _)| pick & (1 << j) != 0)
                .fold(0u64, |u, (_, m)| u | m);
            if target_mask & !union != 0 {
                continue;
            }
            tried += 1;
            let target = SetExpr::Finite(FiniteSet::from_mask(target_mask));
            let pieces: Vec<SetExpr> = family
                .iter()
                .enumerate()
                .filter(|(j, _)| pick & (1 << j) != 0)
                .map(|(_, s)| s.clone())
                .collect();
            let cover = Cover::new(pieces, target.clone())?;
            let bound = cover_bound(space.measure(), &cover)?;
            let ov = outer_measure_with(&space, &target, limits)?;
            if ov.value > bound {
                infimum_ok = false;
            }
        }
        checks.push(CheckEntry::new(
            "infimum never exceeds random cover bounds",
            infimum_ok,
            json!({"covers_tried": tried}),
        ));

        acc.push(
            emit,
            i,
            json!({"seed": instance_seed, "universe": size, "family_len": family.len()}),
            checks,
            false,
            started,
        );
    }
    Ok(acc.finish())
}

// ---------------------------------------------------------------------------
// suite 3: product-measure exactness on guillotine partitions
// ---------------------------------------------------------------------------

pub fn run_product_exactness(
    seed: u64,
    count: usize,
    limits: &Limits,
    emit: &mut dyn FnMut(RunReport),
) -> Result<SuiteOutcome> {
    let mut acc = SuiteAcc::new("product_exactness");
    let line = MeasureSpace::length_line();
    for i in 0..count {
        let started = Instant::now();
        let instance_seed = derive(seed, i as u64);
        let a = 1 + (instance_seed % 3);
        let b = 1 + ((instance_seed >> 8) % 3);
        let whole = Rect::new(
            SetExpr::interval(crate::exact::rat(0, 1), crate::exact::rat(a as i64, 1)),
            SetExpr::interval(crate::exact::rat(0, 1), crate::exact::rat(b as i64, 1)),
        );
        let pieces = 1 + (instance_seed % 64) as u32;
        let parts = gen_guillotine(instance_seed, pieces, &whole, limits)?;
        let product = product_measure(line.measure(), line.measure(), &whole)?;
        let total: ExtReal = parts
            .rects
            .iter()
            .map(|r| product_measure(line.measure(), line.measure(), r))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .sum();
        let exact = total == product;
        acc.push(
            emit,
            i,
            json!({"seed": instance_seed, "pieces": pieces, "whole": rect_to_json(&whole)}),
            vec![CheckEntry::new(
                "sum of piece products equals the whole product exactly",
                exact,
                json!({"sum": total.to_string(), "product": product.to_string()}),
            )],
            false,
            started,
        );
    }
    Ok(acc.finish())
}

// ---------------------------------------------------------------------------
// suite 4: certification path with dyadic levels
// ---------------------------------------------------------------------------

pub fn run_certification_path(
    seed: u64,
    count: usize,
    limits: &Limits,
    emit: &mut dyn FnMut(RunReport),
) -> Result<SuiteOutcome> {
    let mut acc = SuiteAcc::new("certification_path");
    let line = MeasureSpace::length_line();
    let unit_square = Rect::new(
        SetExpr::interval(crate::exact::rat(0, 1), crate::exact::rat(1, 1)),
        SetExpr::interval(crate::exact::rat(0, 1), crate::exact::rat(1, 1)),
    );
    for i in 0..count {
        let started = Instant::now();
        let instance_seed = derive(seed, i as u64);
        let staircase = i % 2 == 1;
        let parts = if staircase {
            gen_staircase(instance_seed, &unit_square)?
        } else {
            let pieces = 2 + (instance_seed % 15) as u32;
            gen_guillotine(instance_seed, pieces, &unit_square, limits)?
        };
        let mut checks = Vec::new();
        for k in 1..=10u32 {
            let t = ExtReal::ratio((1u64 << k) - 1, 1u64 << k);
            match certify_sigma_additivity(&line, &line, &unit_square, &parts, &t, limits) {
                Ok(report) => {
                    let witness_ok = report.witness.rhs > t && report.witness.lhs < report.witness.rhs;
                    let mut detail = json!({
                        "t": t.to_string(),
                        "witness_sum": report.witness.rhs.to_string(),
                        "f_len": report.witness.f_indices.len(),
                    });
                    let mut depth_ok = true;
                    if staircase {
                        let tail = parts.tail.as_ref().expect("staircase has a tail");
                        let max_index =
                            *report.witness.f_indices.iter().max().expect("nonempty F") as u32;
                        // sufficiency at the returned depth and necessity of
                        // depth k, straight from the closed form
                        let reached =
                            ExtReal::from_rational(tail.partial_span_length(max_index + 1))?;
                        let at_k_minus_1 =
                            ExtReal::from_rational(tail.partial_span_length(k))?;
                        depth_ok = max_index >= k
                            && reached == report.witness.rhs
                            && at_k_minus_1 <= t;
                        detail["tail_depth"] = json!(max_index);
                        detail["closed_form_sum"] = json!(reached.to_string());
                    }
                    checks.push(CheckEntry::new(
                        format!("certified at t = product - 2^-{}", k),
                        witness_ok && depth_ok,
                        detail,
                    ));
                }
                Err(e) => {
                    checks.push(CheckEntry::new(
                        format!("certified at t = product - 2^-{}", k),
                        false,
                        json!({"error": e.to_string()}),
                    ));
                }
            }
        }
        acc.push(
            emit,
            i,
            json!({
                "seed": instance_seed,
                "shape": if staircase { "dyadic_staircase" } else { "guillotine" },
            }),
            checks,
            false,
            started,
        );
    }
    Ok(acc.finish())
}

// ---------------------------------------------------------------------------
// suite 5: witness soundness under independent re-verification
// ---------------------------------------------------------------------------

pub fn run_witness_soundness(
    seed: u64,
    count: usize,
    limits: &Limits,
    emit: &mut dyn FnMut(RunReport),
) -> Result<SuiteOutcome> {
    let mut acc = SuiteAcc::new("witness_soundness");
    for i in 0..count {
        let started = Instant::now();
        let instance_seed = derive(seed, i as u64);
        let inst = gen_witness_instance(instance_seed, limits)?;
        let checks = match extract_witness(
            &inst.space_x,
            &inst.space_y,
            &inst.d,
            &inst.cover,
            &inst.r,
            &inst.s,
            limits,
        ) {
            Ok(witness) => {
                let reverified =
                    verify_witness(&witness, &inst.space_x, &inst.space_y, &inst.cover)?;
                vec![CheckEntry::new(
                    "witness re-verifies from the report alone",
                    reverified,
                    json!({
                        "r": witness.r.to_string(),
                        "s": witness.s.to_string(),
                        "lhs": witness.lhs.to_string(),
                        "rhs": witness.rhs.to_string(),
                        "f": witness.f_indices,
                    }),
                )]
            }
            Err(e) => vec![CheckEntry::new(
                "witness extraction succeeds on a valid instance",
                false,
                json!({"error": e.to_string()}),
            )],
        };
        acc.push(
            emit,
            i,
            json!({
                "seed": instance_seed,
                "cover_len": inst.cover.rects.len(),
                "r": inst.r.to_string(),
                "s": inst.s.to_string(),
            }),
            checks,
            false,
            started,
        );
    }
    Ok(acc.finish())
}

// ---------------------------------------------------------------------------
// suite 6: null-section equivalence, exhaustive over D
// ---------------------------------------------------------------------------

/// For every pair of universe sizes up to 3 and `count` seeded weighted
/// measures per pair, sweeps all subsets `D` of the product grid: the
/// forward direction must hold whenever `(mu_X x mu_Y)*(D) = 0`, the
/// converse must hold whenever its preconditions do, and on product-null
/// `D` the forward verdict must coincide with the converse's section
/// precondition.
pub fn run_null_section_equivalence(
    seed: u64,
    count: usize,
    limits: &Limits,
    emit: &mut dyn FnMut(RunReport),
) -> Result<SuiteOutcome> {
    let mut acc = SuiteAcc::new("null_section_equivalence");
    let mut index = 0;
    for nx in 1..=3u32 {
        for ny in 1..=3u32 {
            for m in 0..count {
                let started = Instant::now();
                let instance_seed = derive(seed, (index * 1000 + m) as u64);
                let space_x = gen_weighted_space(instance_seed, nx, true)?;
                let space_y = gen_weighted_space(derive(instance_seed, 1), ny, true)?;
                let ctx = NullSectionContext::new(&space_x, &space_y, limits)?;

                let total = 1u64 << (nx * ny);
                let mut forward_checked = 0u64;
                let mut converse_checked = 0u64;
                let mut consistency_checked = 0u64;
                let mut failures: Vec<Value> = Vec::new();
                for d_mask in 0..total {
                    let d = product_set_from_mask(d_mask, nx, ny);
                    let product_null = ctx.product_outer(&d)?.is_zero();
                    let (measurable, sections_null) = ctx.converse_preconditions(&d)?;
                    if product_null {
                        forward_checked += 1;
                        let verdict = ctx.forward(&d)?;
                        if !verdict.holds {
                            failures.push(json!({"d": d_mask, "direction": "forward"}));
                        }
                        consistency_checked += 1;
                        if verdict.holds != sections_null {
                            failures.push(json!({"d": d_mask, "direction": "consistency"}));
                        }
                    }
                    if measurable && sections_null {
                        converse_checked += 1;
                        let verdict = ctx.converse(&d)?;
                        if !verdict.holds {
                            failures.push(json!({"d": d_mask, "direction": "converse"}));
                        }
                    }
                }
                let pass = failures.is_empty();
                acc.push(
                    emit,
                    index * count + m,
                    json!({
                        "seed": instance_seed,
                        "nx": nx,
                        "ny": ny,
                        "subsets": total,
                    }),
                    vec![CheckEntry::new(
                        "forward, converse, and consistency over all D",
                        pass,
                        json!({
                            "forward_checked": forward_checked,
                            "converse_checked": converse_checked,
                            "consistency_checked": consistency_checked,
                            "failures": failures,
                        }),
                    )],
                    false,
                    started,
                );
            }
            index += 1;
        }
    }
    Ok(acc.finish())
}

/// The subset of the product grid encoded by `mask`, as a disjoint union of
/// singleton rectangles.
pub fn product_set_from_mask(mask: u64, nx: u32, ny: u32) -> ProductSet {
    let mut rects = Vec::new();
    for x in 0..nx {
        for y in 0..ny {
            if mask & (1u64 << (x * ny + y)) != 0 {
                rects.push(Rect::new(
                    SetExpr::points(vec![x]),
                    SetExpr::points(vec![y]),
                ));
            }
        }
    }
    ProductSet::new(RectFamily { rects, tail: None })
}

// ---------------------------------------------------------------------------
// suite 7: negative-path detection on corrupted measures
// ---------------------------------------------------------------------------

/// Flags a tabulated space iff some member disagrees with the sum of its
/// singletons. Complete for single-entry corruptions of additive
/// tabulations over power sets.
fn additivity_sweep(space: &MeasureSpace) -> Result<Option<Value>> {
    let family = space.semiring().members().expect("explicit family");
    for member in family {
        let fs = member.as_finite()?;
        if fs.is_empty() {
            continue;
        }
        let parts: Vec<SetExpr> = fs
            .members()
            .iter()
            .map(|&p| SetExpr::points(vec![p]))
            .collect();
        let report = check_finite_additivity(space.measure(), member, &parts)?;
        if !report.pass {
            return Ok(Some(json!({
                "member": member,
                "lhs": report.lhs.to_string(),
                "rhs": report.rhs.to_string(),
            })));
        }
    }
    Ok(None)
}

/// Certification probe: the column split of `X x {0}` certified at
/// `t = product - 2^-10`. `None` when the product is too small to probe.
fn certify_probe(space: &MeasureSpace, limits: &Limits) -> Result<Option<bool>> {
    let size = match space.universe() {
        Universe::Finite { size } => *size,
        Universe::Interval => unreachable!(),
    };
    let space_y = MeasureSpace::counting(1)?;
    let whole = Rect::new(
        SetExpr::points((0..size).collect()),
        SetExpr::points(vec![0]),
    );
    let parts = RectFamily::new(
        (0..size)
            .map(|p| Rect::new(SetExpr::points(vec![p]), SetExpr::points(vec![0])))
            .collect(),
        None,
    )?;
    let product = product_measure(space.measure(), space_y.measure(), &whole)?;
    let eps = ExtReal::ratio(1, 1 << 10);
    let t = match (&product, &eps) {
        (ExtReal::Finite(p), ExtReal::Finite(e)) if p > e => ExtReal::Finite(p - e),
        _ => return Ok(None),
    };
    match certify_sigma_additivity(space, &space_y, &whole, &parts, &t, limits) {
        Ok(_) => Ok(Some(false)),                            // not flagged
        Err(Error::CertificationFailed(_)) => Ok(Some(true)), // flagged
        Err(e) => Err(e),
    }
}

pub fn run_negative_path(
    seed: u64,
    count: usize,
    limits: &Limits,
    emit: &mut dyn FnMut(RunReport),
) -> Result<SuiteOutcome> {
    let mut acc = SuiteAcc::new("negative_path");
    for i in 0..count {
        let started = Instant::now();
        let instance_seed = derive(seed, i as u64);
        let size = 2 + (instance_seed % 3) as u32;
        let control = tabulate_point_mass(&gen_weighted_space(instance_seed, size, false)?)?;
        let magnitude = ExtReal::ratio(1 + (instance_seed >> 16) % 3, 1 + (instance_seed >> 32) % 2);
        let (corrupted, info) = gen_corrupted(derive(instance_seed, 7), &control, &magnitude)?;
        let info = info.expect("positive magnitude always corrupts");

        let control_flag = additivity_sweep(&control)?;
        let corrupted_flag = additivity_sweep(&corrupted)?;
        let control_certify = certify_probe(&control, limits)?;
        let corrupted_certify = certify_probe(&corrupted, limits)?;

        let flagged = corrupted_flag.is_some() || corrupted_certify == Some(true);
        let clean = control_flag.is_none() && control_certify != Some(true);
        let checks = vec![
            CheckEntry::new(
                "corruption flagged by additivity check or certifier",
                flagged,
                json!({
                    "additivity": corrupted_flag,
                    "certify_flagged": corrupted_certify,
                    "corruption": {
                        "member": info.member,
                        "before": info.before.to_string(),
                        "after": info.after.to_string(),
                    },
                }),
            ),
            CheckEntry::new(
                "uncorrupted control passes both detectors",
                clean,
                json!({
                    "additivity": control_flag,
                    "certify_flagged": control_certify,
                }),
            ),
        ];
        acc.push(
            emit,
            i,
            json!({"seed": instance_seed, "universe": size, "magnitude": magnitude.to_string()}),
            checks,
            true,
            started,
        );
    }
    Ok(acc.finish())
}
