//! JSON documents for monotone functions, integrands, reports and batch
//! instances.
//!
//! A value is a JSON number (read as an `f64`, then held exactly) or a
//! string: `"p/q"` and integer strings are exact rationals, anything else is
//! parsed as a float literal. Output uses numbers whenever the value is an
//! `f64` exactly and `"p/q"` strings otherwise, so emitted documents
//! re-parse to the same values.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use stieltjes::scalar::{from_f64, is_f64_exact, to_f64};
use stieltjes::substitution::{JumpSplit, MassProbe, Term};
use stieltjes::{
    Bound, Breakpoint, Decomposition, FlatLevels, MonotoneFn, PiecewiseFn, Poly, Scalar,
    SegmentKind, VerificationReport,
};

/// Tolerance for optional segment data supplied alongside breakpoints.
const SEGMENT_TOLERANCE: f64 = 1e-12;

/// A rejected document, with the JSON path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocError {
    pub path: String,
    pub message: String,
}

impl DocError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        DocError {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for DocError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

pub fn parse_scalar(text: &str) -> Result<Scalar, String> {
    let t = text.trim();
    let exact = !t.is_empty()
        && t.trim_start_matches(['-', '+'])
            .chars()
            .all(|c| c.is_ascii_digit() || c == '/');
    if exact {
        return Scalar::from_str(t.trim_start_matches('+'))
            .map_err(|_| format!("malformed rational {text:?}"));
    }
    let v: f64 = t
        .parse()
        .map_err(|_| format!("malformed number {text:?}"))?;
    from_f64(v).map_err(|_| format!("non-finite number {text:?}"))
}

/// A scalar as it appears in a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Num(pub Scalar);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let v = match Raw::deserialize(d)
            .map_err(|_| de::Error::custom("expected a number or a \"p/q\" string"))?
        {
            Raw::Int(i) => Scalar::from_integer(i.into()),
            Raw::Float(f) => from_f64(f).map_err(de::Error::custom)?,
            Raw::Text(s) => parse_scalar(&s).map_err(de::Error::custom)?,
        };
        Ok(Num(v))
    }
}

pub fn scalar_json(v: &Scalar) -> Value {
    if is_f64_exact(v) {
        json!(to_f64(v))
    } else {
        Value::String(v.to_string())
    }
}

/// Text form used for object keys (`point_values`).
pub fn scalar_key(v: &Scalar) -> String {
    if is_f64_exact(v) {
        format!("{:?}", to_f64(v))
    } else {
        v.to_string()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakpointDoc {
    x: Num,
    left: Option<Num>,
    value: Num,
    right: Option<Num>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindDoc {
    Linear,
    Constant,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentDoc {
    kind: KindDoc,
    slope: Num,
    anchor: Num,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotoneDoc {
    domain: Option<[Num; 2]>,
    breakpoints: Vec<BreakpointDoc>,
    segments: Option<Vec<SegmentDoc>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDoc {
    interval: [Num; 2],
    coeffs: Vec<Num>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandDoc {
    domain: Option<[Num; 2]>,
    pieces: Vec<PieceDoc>,
    #[serde(default)]
    point_values: BTreeMap<String, Num>,
}

fn close(a: &Scalar, b: &Scalar) -> bool {
    let (a, b) = (to_f64(a), to_f64(b));
    (a - b).abs() <= SEGMENT_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

fn check_domain(
    domain: &Option<[Num; 2]>,
    lo: &Scalar,
    hi: &Scalar,
    first: &str,
) -> Result<(), DocError> {
    if let Some([a, b]) = domain {
        if &a.0 != lo {
            return Err(DocError::at("domain[0]", format!("does not match {first}")));
        }
        if &b.0 != hi {
            return Err(DocError::at(
                "domain[1]",
                format!("does not match the last {first}"),
            ));
        }
    }
    Ok(())
}

impl MonotoneDoc {
    pub fn build(self) -> Result<MonotoneFn, DocError> {
        if self.breakpoints.len() < 2 {
            return Err(DocError::at("breakpoints", "need at least two breakpoints"));
        }
        let mut bps: Vec<Breakpoint> = Vec::with_capacity(self.breakpoints.len());
        for (i, b) in self.breakpoints.into_iter().enumerate() {
            let value = b.value.0;
            let left = b.left.map_or_else(|| value.clone(), |n| n.0);
            let right = b.right.map_or_else(|| value.clone(), |n| n.0);
            let at = |field: &str| format!("breakpoints[{i}].{field}");
            if let Some(prev) = bps.last() {
                if b.x.0 <= prev.x {
                    return Err(DocError::at(
                        at("x"),
                        "breakpoints must be strictly increasing in x",
                    ));
                }
                if left < prev.right {
                    return Err(DocError::at(
                        at("left"),
                        "function decreases from the previous breakpoint",
                    ));
                }
            }
            if value < left {
                return Err(DocError::at(at("value"), "value below the left limit"));
            }
            if right < value {
                return Err(DocError::at(at("right"), "right limit below the value"));
            }
            bps.push(Breakpoint::jump(b.x.0, left, value, right));
        }
        let (lo, hi) = (bps[0].x.clone(), bps[bps.len() - 1].x.clone());
        check_domain(&self.domain, &lo, &hi, "the first breakpoint")?;
        let f = MonotoneFn::new(bps).map_err(|e| DocError::at("breakpoints", e.to_string()))?;
        if let Some(segments) = self.segments {
            let derived = f.segments();
            if segments.len() != derived.len() {
                return Err(DocError::at(
                    "segments",
                    format!(
                        "expected {} segments, got {}",
                        derived.len(),
                        segments.len()
                    ),
                ));
            }
            for (i, (got, want)) in segments.iter().zip(&derived).enumerate() {
                let kind_matches = matches!(
                    (got.kind, want.kind),
                    (KindDoc::Linear, SegmentKind::Linear)
                        | (KindDoc::Constant, SegmentKind::Constant)
                );
                if !kind_matches {
                    return Err(DocError::at(
                        format!("segments[{i}].kind"),
                        "disagrees with breakpoints",
                    ));
                }
                if !close(&got.slope.0, &want.slope) {
                    return Err(DocError::at(
                        format!("segments[{i}].slope"),
                        "disagrees with breakpoints",
                    ));
                }
                if !close(&got.anchor.0, &want.anchor) {
                    return Err(DocError::at(
                        format!("segments[{i}].anchor"),
                        "disagrees with breakpoints",
                    ));
                }
            }
        }
        Ok(f)
    }
}

impl IntegrandDoc {
    /// Boundaries without an explicit point value take the value of the piece
    /// on their right (the last piece at the upper end).
    pub fn build(self) -> Result<PiecewiseFn, DocError> {
        if self.pieces.is_empty() {
            return Err(DocError::at("pieces", "need at least one piece"));
        }
        let mut boundaries: Vec<Scalar> = vec![self.pieces[0].interval[0].0.clone()];
        let mut polys = Vec::with_capacity(self.pieces.len());
        for (i, p) in self.pieces.into_iter().enumerate() {
            let [a, b] = p.interval;
            if boundaries.last() != Some(&a.0) {
                return Err(DocError::at(
                    format!("pieces[{i}].interval[0]"),
                    "pieces must be contiguous and in order",
                ));
            }
            if b.0 <= a.0 {
                return Err(DocError::at(
                    format!("pieces[{i}].interval[1]"),
                    "empty interval",
                ));
            }
            let coeffs: Vec<Scalar> = p.coeffs.into_iter().map(|c| c.0).collect();
            if coeffs.is_empty() {
                return Err(DocError::at(
                    format!("pieces[{i}].coeffs"),
                    "need at least one coefficient",
                ));
            }
            let poly = Poly::from_slice(&coeffs)
                .map_err(|e| DocError::at(format!("pieces[{i}].coeffs"), e.to_string()))?;
            polys.push(poly);
            boundaries.push(b.0);
        }
        let (lo, hi) = (
            boundaries[0].clone(),
            boundaries[boundaries.len() - 1].clone(),
        );
        check_domain(&self.domain, &lo, &hi, "the first piece")?;
        let last = polys.len() - 1;
        let mut values: Vec<Scalar> = boundaries
            .iter()
            .enumerate()
            .map(|(i, b)| polys[i.min(last)].eval(b))
            .collect();
        for (key, v) in self.point_values {
            let path = format!("point_values.{key}");
            let x = parse_scalar(&key).map_err(|e| DocError::at(&path, e))?;
            let i = boundaries
                .binary_search(&x)
                .map_err(|_| DocError::at(&path, "not a piece boundary"))?;
            values[i] = v.0;
        }
        PiecewiseFn::new(boundaries, polys, values)
            .map_err(|e| DocError::at("pieces", e.to_string()))
    }
}

fn from_value<T: for<'de> Deserialize<'de>>(value: Value) -> Result<T, DocError> {
    serde_path_to_error::deserialize(value)
        .map_err(|e| DocError::at(e.path().to_string(), e.inner().to_string()))
}

pub fn parse_json(text: &str) -> Result<Value, DocError> {
    serde_json::from_str(text).map_err(|e| DocError::at("", format!("malformed JSON: {e}")))
}

pub fn monotone_from_value(value: Value) -> Result<MonotoneFn, DocError> {
    from_value::<MonotoneDoc>(value)?.build()
}

pub fn integrand_from_value(value: Value) -> Result<PiecewiseFn, DocError> {
    from_value::<IntegrandDoc>(value)?.build()
}

/// Either kind of function, told apart by its keys.
pub enum AnyFn {
    Monotone(MonotoneFn),
    Integrand(PiecewiseFn),
}

pub fn any_from_value(value: Value) -> Result<AnyFn, DocError> {
    match &value {
        Value::Object(map) if map.contains_key("breakpoints") => {
            monotone_from_value(value).map(AnyFn::Monotone)
        }
        Value::Object(map) if map.contains_key("pieces") => {
            integrand_from_value(value).map(AnyFn::Integrand)
        }
        _ => Err(DocError::at(
            "",
            "expected an object with \"breakpoints\" or \"pieces\"",
        )),
    }
}

pub fn monotone_json(f: &MonotoneFn) -> Value {
    let breakpoints: Vec<Value> = f
        .breakpoints()
        .iter()
        .map(|b| {
            json!({
                "x": scalar_json(&b.x),
                "left": scalar_json(&b.left),
                "value": scalar_json(&b.value),
                "right": scalar_json(&b.right),
            })
        })
        .collect();
    let segments: Vec<Value> = f
        .segments()
        .iter()
        .map(|s| {
            json!({
                "kind": match s.kind {
                    SegmentKind::Linear => "linear",
                    SegmentKind::Constant => "constant",
                },
                "slope": scalar_json(&s.slope),
                "anchor": scalar_json(&s.anchor),
            })
        })
        .collect();
    json!({
        "domain": [scalar_json(f.lo()), scalar_json(f.hi())],
        "breakpoints": breakpoints,
        "segments": segments,
    })
}

pub fn integrand_json(f: &PiecewiseFn) -> Value {
    let b = f.boundaries();
    let pieces: Vec<Value> = f
        .polys()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            json!({
                "interval": [scalar_json(&b[i]), scalar_json(&b[i + 1])],
                "coeffs": p.coeffs().iter().map(scalar_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    let point_values: Map<String, Value> = b
        .iter()
        .zip(f.point_values())
        .map(|(x, v)| (scalar_key(x), scalar_json(v)))
        .collect();
    json!({
        "domain": [scalar_json(f.lo()), scalar_json(f.hi())],
        "pieces": pieces,
        "point_values": point_values,
    })
}

pub fn flats_json(h: &FlatLevels) -> Value {
    Value::Array(
        h.iter()
            .map(|l| {
                json!({
                    "y": scalar_json(&l.y),
                    "x_left": scalar_json(&l.x_left),
                    "x_right": scalar_json(&l.x_right),
                })
            })
            .collect(),
    )
}

pub fn jumps_json(s: &JumpSplit) -> Value {
    Value::Array(
        s.levels
            .iter()
            .map(|l| {
                json!({
                    "y": scalar_json(&l.y),
                    "delta_minus": scalar_json(&l.delta_minus),
                    "delta_plus": scalar_json(&l.delta_plus),
                })
            })
            .collect(),
    )
}

pub fn decomposition_json(d: &Decomposition) -> Value {
    json!({
        "n1": monotone_json(&d.n1),
        "n2": monotone_json(&d.n2),
        "n3": monotone_json(&d.n3),
        "jumps": jumps_json(&d.jumps),
    })
}

fn term_json(t: &Term) -> Value {
    json!({ "name": t.name, "value": scalar_json(&t.value) })
}

fn probe_json(p: &MassProbe) -> Value {
    json!({
        "x": scalar_json(&p.x),
        "lambda_mass": scalar_json(&p.lambda_mass),
        "preimage_mass": scalar_json(&p.preimage_mass),
        "mismatch": scalar_json(&p.mismatch()),
    })
}

pub fn report_json(r: &VerificationReport) -> Value {
    json!({
        "identity": r.identity.tag(),
        "lhs": scalar_json(&r.lhs),
        "rhs_terms": r.rhs_terms.iter().map(term_json).collect::<Vec<_>>(),
        "rhs_total": scalar_json(&r.rhs_total),
        "residual": scalar_json(&r.residual),
        "residual_f64": r.residual_f64(),
        "tolerance": r.tolerance,
        "pass": r.pass,
        "bound": r.bound.map(|b| match b {
            Bound::Lower => "lower",
            Bound::Upper => "upper",
        }),
        "precondition_met": r.precondition_met,
        "probes": r.probes.iter().map(probe_json).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use stieltjes::scalar::{ratio, sc};

    #[test]
    fn scalars_round_trip() {
        for v in [sc(0.1), sc(-2.5), ratio(1, 3), ratio(-7, 10), sc(1e-300)] {
            let back = match scalar_json(&v) {
                Value::Number(n) => from_f64(n.as_f64().unwrap()).unwrap(),
                Value::String(s) => parse_scalar(&s).unwrap(),
                other => panic!("{other}"),
            };
            assert_eq!(back, v);
            assert_eq!(parse_scalar(&scalar_key(&v)).unwrap(), v);
        }
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("nan").is_err());
        assert!(parse_scalar("x").is_err());
    }

    #[test]
    fn field_paths_in_errors() {
        let bad =
            parse_json(r#"{"breakpoints":[{"x":0,"value":0},{"x":1,"value":"oops"}]}"#).unwrap();
        let err = monotone_from_value(bad).err().unwrap();
        assert_eq!(err.path, "breakpoints[1].value");

        let decreasing =
            parse_json(r#"{"breakpoints":[{"x":0,"value":1},{"x":1,"value":0}]}"#).unwrap();
        assert_eq!(
            monotone_from_value(decreasing).err().unwrap().path,
            "breakpoints[1].left"
        );

        let gap = parse_json(
            r#"{"pieces":[{"interval":[0,1],"coeffs":[0]},{"interval":[2,3],"coeffs":[1]}]}"#,
        )
        .unwrap();
        assert_eq!(
            integrand_from_value(gap).err().unwrap().path,
            "pieces[1].interval[0]"
        );
    }

    #[test]
    fn segments_are_checked() {
        let doc = r#"{"breakpoints":[{"x":0,"value":0},{"x":2,"value":1}],
                      "segments":[{"kind":"linear","slope":0.5,"anchor":0}]}"#;
        assert!(monotone_from_value(parse_json(doc).unwrap()).is_ok());
        let wrong = doc.replace("0.5", "0.6");
        assert_eq!(
            monotone_from_value(parse_json(&wrong).unwrap())
                .err()
                .unwrap()
                .path,
            "segments[0].slope"
        );
    }
}
