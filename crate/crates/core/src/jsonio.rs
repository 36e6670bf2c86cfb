//! The JSON document grammar for spaces, sets, rectangles, and instances.
//!
//! Sets are context-dependent: a finite set is an array of point labels,
//! an interval union an array of `["a", "b"]` endpoint pairs, and the
//! ambiguous empty array resolves through the universe in scope. Rationals
//! travel as canonical strings (`"p/q"` in lowest terms or integer
//! shorthand `"k"`); anything non-canonical is rejected with a precise
//! error rather than silently normalized.
//!
//! ```text
//! space     := {"universe": {"finite": n} | "interval",
//!               "semiring": {"explicit": [set...]} | "power_set" | "interval",
//!               "measure":  {"point_mass": {"<point>": extreal, ...}}
//!                         | {"tabulated": [[set, extreal]...]}
//!                         | "length",
//!               "sigma_finite": [set...]?}
//! set       := [point...] | [[rational, rational]...]
//! extreal   := "p/q" | "k" | "inf"
//! rect      := {"base": set, "side": set}
//! family    := {"rects": [rect...],
//!               "tail": {"kind": "dyadic", "axis": "x"|"y",
//!                        "from": rational, "to": rational, "fixed": set}?}
//! ```

use std::collections::BTreeMap;

use serde_json::Value;

use crate::error::Error;
use crate::exact::{parse_rational, ExtReal};
use crate::product::{Axis, DyadicTail, ProductSet, Rect, RectFamily};
use crate::spaces::{MeasureDesc, MeasureSpace, SemiringDesc, SetExpr, Universe};
use crate::Result;

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn parse_universe(v: &Value) -> Result<Universe> {
    match v {
        Value::String(s) if s == "interval" => Ok(Universe::Interval),
        Value::Object(map) => {
            let n = map
                .get("finite")
                .and_then(Value::as_u64)
                .ok_or_else(|| bad("universe object must be {\"finite\": n}"))?;
            Universe::finite(u32::try_from(n).map_err(|_| bad("universe size too large"))?)
        }
        _ => Err(bad(
            "universe must be \"interval\" or {\"finite\": n}",
        )),
    }
}

pub fn parse_set(v: &Value, universe: &Universe) -> Result<SetExpr> {
    let items = v
        .as_array()
        .ok_or_else(|| bad(format!("a set must be a JSON array, got {}", v)))?;
    match universe {
        Universe::Finite { .. } => {
            let mut points = Vec::with_capacity(items.len());
            for item in items {
                let p = item
                    .as_u64()
                    .ok_or_else(|| bad(format!("finite-set member {} is not a point label", item)))?;
                points.push(u32::try_from(p).map_err(|_| bad("point label too large"))?);
            }
            let set = SetExpr::points(points);
            set.check_in(universe)?;
            Ok(set)
        }
        Universe::Interval => {
            let mut pairs = Vec::with_capacity(items.len());
            for item in items {
                let pair = item
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| {
                        bad(format!("interval {} must be a two-element array", item))
                    })?;
                let lo = parse_rational(
                    pair[0]
                        .as_str()
                        .ok_or_else(|| bad("interval endpoints are rational strings"))?,
                )?;
                let hi = parse_rational(
                    pair[1]
                        .as_str()
                        .ok_or_else(|| bad("interval endpoints are rational strings"))?,
                )?;
                if lo > hi {
                    return Err(bad(format!(
                        "interval [{}, {}) has endpoints out of order",
                        pair[0], pair[1]
                    )));
                }
                pairs.push((lo, hi));
            }
            Ok(SetExpr::intervals(pairs))
        }
    }
}

fn parse_extreal(v: &Value) -> Result<ExtReal> {
    v.as_str()
        .ok_or_else(|| bad(format!("measure value {} must be a string", v)))?
        .parse()
}

pub fn parse_space(v: &Value) -> Result<MeasureSpace> {
    let obj = v
        .as_object()
        .ok_or_else(|| bad("a space document must be a JSON object"))?;
    let universe = parse_universe(
        obj.get("universe")
            .ok_or_else(|| bad("space document is missing \"universe\""))?,
    )?;
    let semiring = parse_semiring(
        obj.get("semiring")
            .ok_or_else(|| bad("space document is missing \"semiring\""))?,
        &universe,
    )?;
    let measure = parse_measure(
        obj.get("measure")
            .ok_or_else(|| bad("space document is missing \"measure\""))?,
        &universe,
    )?;
    let witness = match obj.get("sigma_finite") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_array()
                .ok_or_else(|| bad("\"sigma_finite\" must be an array of sets"))?
                .iter()
                .map(|s| parse_set(s, &universe))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    MeasureSpace::new(universe, semiring, measure, witness)
}

pub fn parse_semiring(v: &Value, universe: &Universe) -> Result<SemiringDesc> {
    match v {
        Value::String(s) if s == "interval" => match universe {
            Universe::Interval => Ok(SemiringDesc::IntervalSemiring),
            _ => Err(bad("the interval semiring needs the interval universe")),
        },
        Value::String(s) if s == "power_set" => match universe {
            Universe::Finite { size } => SemiringDesc::power_set(*size),
            _ => Err(bad("\"power_set\" needs a finite universe")),
        },
        Value::Object(map) => {
            let fam = map
                .get("explicit")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("semiring object must be {\"explicit\": [set...]}"))?;
            let family = fam
                .iter()
                .map(|s| parse_set(s, universe))
                .collect::<Result<Vec<_>>>()?;
            SemiringDesc::explicit(family)
        }
        _ => Err(bad(
            "semiring must be \"interval\", \"power_set\", or {\"explicit\": [...]}",
        )),
    }
}

pub fn parse_measure(v: &Value, universe: &Universe) -> Result<MeasureDesc> {
    match v {
        Value::String(s) if s == "length" => Ok(MeasureDesc::Length),
        Value::Object(map) => {
            if let Some(pm) = map.get("point_mass") {
                let entries = pm
                    .as_object()
                    .ok_or_else(|| bad("\"point_mass\" must map point labels to values"))?;
                let mut weights = BTreeMap::new();
                for (k, val) in entries {
                    let p: u32 = k
                        .parse()
                        .map_err(|_| bad(format!("point-mass key {:?} is not a point label", k)))?;
                    weights.insert(p, parse_extreal(val)?);
                }
                Ok(MeasureDesc::point_mass(weights))
            } else if let Some(tab) = map.get("tabulated") {
                let rows = tab
                    .as_array()
                    .ok_or_else(|| bad("\"tabulated\" must be an array of [set, value] pairs"))?;
                let mut assignments = BTreeMap::new();
                for row in rows {
                    let pair = row
                        .as_array()
                        .filter(|a| a.len() == 2)
                        .ok_or_else(|| bad("tabulated rows are [set, value] pairs"))?;
                    let set = parse_set(&pair[0], universe)?;
                    let value = parse_extreal(&pair[1])?;
                    if assignments.insert(set.clone(), value).is_some() {
                        return Err(bad(format!("duplicate tabulated entry for {}", set)));
                    }
                }
                MeasureDesc::tabulated(assignments)
            } else {
                Err(bad(
                    "measure object must contain \"point_mass\" or \"tabulated\"",
                ))
            }
        }
        _ => Err(bad(
            "measure must be \"length\", {\"point_mass\": ...}, or {\"tabulated\": ...}",
        )),
    }
}

pub fn parse_rect(v: &Value, ux: &Universe, uy: &Universe) -> Result<Rect> {
    let obj = v
        .as_object()
        .ok_or_else(|| bad("a rectangle must be {\"base\": set, \"side\": set}"))?;
    let base = parse_set(
        obj.get("base").ok_or_else(|| bad("rectangle is missing \"base\""))?,
        ux,
    )?;
    let side = parse_set(
        obj.get("side").ok_or_else(|| bad("rectangle is missing \"side\""))?,
        uy,
    )?;
    Ok(Rect::new(base, side))
}

pub fn parse_family(v: &Value, ux: &Universe, uy: &Universe) -> Result<RectFamily> {
    let obj = v
        .as_object()
        .ok_or_else(|| bad("a family must be {\"rects\": [...], \"tail\"?: {...}}"))?;
    let rects = obj
        .get("rects")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("family is missing \"rects\""))?
        .iter()
        .map(|r| parse_rect(r, ux, uy))
        .collect::<Result<Vec<_>>>()?;
    let tail = match obj.get("tail") {
        None | Some(Value::Null) => None,
        Some(t) => Some(parse_tail(t, ux, uy)?),
    };
    RectFamily::new(rects, tail)
}

fn parse_tail(v: &Value, ux: &Universe, uy: &Universe) -> Result<DyadicTail> {
    let obj = v.as_object().ok_or_else(|| bad("tail must be an object"))?;
    match obj.get("kind").and_then(Value::as_str) {
        Some("dyadic") => {}
        _ => return Err(bad("the only supported tail kind is \"dyadic\"")),
    }
    let axis = match obj.get("axis").and_then(Value::as_str) {
        Some("x") => Axis::X,
        Some("y") => Axis::Y,
        _ => return Err(bad("tail axis must be \"x\" or \"y\"")),
    };
    let lo = parse_rational(
        obj.get("from")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("tail is missing \"from\""))?,
    )?;
    let hi = parse_rational(
        obj.get("to")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("tail is missing \"to\""))?,
    )?;
    let fixed_universe = match axis {
        Axis::X => uy,
        Axis::Y => ux,
    };
    let span_universe = match axis {
        Axis::X => ux,
        Axis::Y => uy,
    };
    if !matches!(span_universe, Universe::Interval) {
        return Err(bad("a dyadic tail shrinks along an interval universe"));
    }
    let fixed = parse_set(
        obj.get("fixed").ok_or_else(|| bad("tail is missing \"fixed\""))?,
        fixed_universe,
    )?;
    DyadicTail::new(axis, lo, hi, fixed)
}

/// `{"space_x": ..., "space_y": ..., "whole": rect, "parts": family}`.
pub fn parse_certify_instance(v: &Value) -> Result<(MeasureSpace, MeasureSpace, Rect, RectFamily)> {
    let (space_x, space_y) = parse_space_pair(v)?;
    let obj = v.as_object().expect("checked by parse_space_pair");
    let whole = parse_rect(
        obj.get("whole").ok_or_else(|| bad("instance is missing \"whole\""))?,
        space_x.universe(),
        space_y.universe(),
    )?;
    let parts = parse_family(
        obj.get("parts").ok_or_else(|| bad("instance is missing \"parts\""))?,
        space_x.universe(),
        space_y.universe(),
    )?;
    Ok((space_x, space_y, whole, parts))
}

/// `{"space_x": ..., "space_y": ..., "d": family, "cover": family}`.
pub fn parse_witness_instance(
    v: &Value,
) -> Result<(MeasureSpace, MeasureSpace, ProductSet, RectFamily)> {
    let (space_x, space_y) = parse_space_pair(v)?;
    let obj = v.as_object().expect("checked by parse_space_pair");
    let d = parse_family(
        obj.get("d").ok_or_else(|| bad("instance is missing \"d\""))?,
        space_x.universe(),
        space_y.universe(),
    )?;
    let cover = parse_family(
        obj.get("cover").ok_or_else(|| bad("instance is missing \"cover\""))?,
        space_x.universe(),
        space_y.universe(),
    )?;
    Ok((space_x, space_y, ProductSet::new(d), cover))
}

/// `{"space_x": ..., "space_y": ..., "d": family}`.
pub fn parse_null_section_instance(
    v: &Value,
) -> Result<(MeasureSpace, MeasureSpace, ProductSet)> {
    let (space_x, space_y) = parse_space_pair(v)?;
    let obj = v.as_object().expect("checked by parse_space_pair");
    let d = parse_family(
        obj.get("d").ok_or_else(|| bad("instance is missing \"d\""))?,
        space_x.universe(),
        space_y.universe(),
    )?;
    Ok((space_x, space_y, ProductSet::new(d)))
}

fn parse_space_pair(v: &Value) -> Result<(MeasureSpace, MeasureSpace)> {
    let obj = v
        .as_object()
        .ok_or_else(|| bad("an instance document must be a JSON object"))?;
    let space_x = parse_space(
        obj.get("space_x")
            .ok_or_else(|| bad("instance is missing \"space_x\""))?,
    )?;
    let space_y = parse_space(
        obj.get("space_y")
            .ok_or_else(|| bad("instance is missing \"space_y\""))?,
    )?;
    Ok((space_x, space_y))
}

/// Serializes a space back into the document grammar.
pub fn space_to_json(space: &MeasureSpace) -> Value {
    let universe = match space.universe() {
        Universe::Finite { size } => serde_json::json!({"finite": size}),
        Universe::Interval => Value::String("interval".into()),
    };
    let semiring = match space.semiring() {
        SemiringDesc::IntervalSemiring => Value::String("interval".into()),
        SemiringDesc::Explicit { family } => serde_json::json!({
            "explicit": family.iter().map(set_to_json).collect::<Vec<_>>()
        }),
    };
    let measure = match space.measure() {
        MeasureDesc::Length => Value::String("length".into()),
        MeasureDesc::PointMass(weights) => {
            let mut map = serde_json::Map::new();
            for (p, w) in weights {
                map.insert(p.to_string(), Value::String(w.to_string()));
            }
            serde_json::json!({ "point_mass": map })
        }
        MeasureDesc::Tabulated(assignments) => serde_json::json!({
            "tabulated": assignments
                .iter()
                .map(|(s, v)| serde_json::json!([set_to_json(s), v.to_string()]))
                .collect::<Vec<_>>()
        }),
    };
    let mut doc = serde_json::json!({
        "universe": universe,
        "semiring": semiring,
        "measure": measure,
    });
    if let Some(w) = space.sigma_finite_witness() {
        doc["sigma_finite"] = Value::Array(w.iter().map(set_to_json).collect());
    }
    doc
}

pub fn set_to_json(s: &SetExpr) -> Value {
    serde_json::to_value(s).expect("set serialization is infallible")
}

pub fn rect_to_json(r: &Rect) -> Value {
    serde_json::json!({"base": set_to_json(&r.base), "side": set_to_json(&r.side)})
}

pub fn family_to_json(f: &RectFamily) -> Value {
    serde_json::to_value(f).expect("family serialization is infallible")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_round_trip() {
        let space = MeasureSpace::counting(2).unwrap();
        let doc = space_to_json(&space);
        let parsed = parse_space(&doc).unwrap();
        assert_eq!(space_to_json(&parsed), doc);
    }

    #[test]
    fn interval_space_parses() {
        let doc = serde_json::json!({
            "universe": "interval",
            "semiring": "interval",
            "measure": "length",
        });
        let space = parse_space(&doc).unwrap();
        assert!(matches!(space.universe(), Universe::Interval));
    }

    #[test]
    fn non_canonical_rational_rejected() {
        let doc = serde_json::json!({
            "universe": "interval",
            "semiring": "interval",
            "measure": "length",
        });
        let space = parse_space(&doc).unwrap();
        let bad_set = serde_json::json!([["2/4", "1"]]);
        let err = parse_set(&bad_set, space.universe()).unwrap_err();
        assert!(err.to_string().contains("lowest terms"), "{}", err);
    }

    #[test]
    fn empty_set_resolves_by_universe() {
        let finite = Universe::finite(3).unwrap();
        let line = Universe::Interval;
        let empty = serde_json::json!([]);
        assert!(matches!(
            parse_set(&empty, &finite).unwrap(),
            SetExpr::Finite(_)
        ));
        assert!(matches!(
            parse_set(&empty, &line).unwrap(),
            SetExpr::Intervals(_)
        ));
    }

    #[test]
    fn witness_instance_parses() {
        let doc = serde_json::json!({
            "space_x": {"universe": "interval", "semiring": "interval", "measure": "length"},
            "space_y": {"universe": "interval", "semiring": "interval", "measure": "length"},
            "d": {"rects": [{"base": [["0", "1"]], "side": [["0", "1"]]}]},
            "cover": {"rects": [{"base": [["0", "1"]], "side": [["0", "1"]]}]},
        });
        let (_, _, d, cover) = parse_witness_instance(&doc).unwrap();
        assert_eq!(d.family.rects.len(), 1);
        assert_eq!(cover.rects.len(), 1);
    }

    #[test]
    fn tail_parses() {
        let doc = serde_json::json!({
            "rects": [],
            "tail": {"kind": "dyadic", "axis": "x", "from": "0", "to": "1", "fixed": [["0","1"]]},
        });
        let fam = parse_family(&doc, &Universe::Interval, &Universe::Interval).unwrap();
        assert!(fam.tail.is_some());
    }
}
