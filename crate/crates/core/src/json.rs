//! JSON formats for boxes, coupler tensors and command outputs.
//!
//! Rationals are always strings in `num/den` form. A bipartite box is either
//! explicit, `{"p": [[[[..]]]]}` in `[x][y][a][b]` order, or one of the named
//! constructors:
//!
//! ```json
//! {"vertex": {"alpha": 0, "beta": 1, "gamma": 0, "delta": 0}}
//! {"pr": true}
//! {"anti_pr": true}
//! {"identity": true}
//! {"noisy": {"xi": "1/2", "gamma": "0"}}
//! ```
//!
//! Parse errors carry a JSON path such as `p[0][1][1][0]` naming the offending value.

use crate::boxes::{
    make_anti_pr_box, make_identity_box, make_local_vertex, make_noisy_box, make_pr_box, BipartiteBox,
    NoisyBoxParams, SingleBox,
};
use crate::coupler::{CouplerSynthesis, CouplerTensor, SwapOutcome};
use crate::polytope::{Classification, Tier, TlmStatus};
use crate::protocols::TeleportResult;
use crate::rational::{format_rational, parse_rational, Rational};
use serde_json::{json, Map, Value};
use std::fmt;

pub const COUPLER_SCHEMA_VERSION: u64 = 1;

/// A malformed input, located by its JSON path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError {
    pub path: String,
    pub message: String,
}

impl InputError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        InputError { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for InputError {}

fn rational_at(v: &Value, path: &str) -> Result<Rational, InputError> {
    let s = v.as_str().ok_or_else(|| InputError::new(path, "expected a \"num/den\" string"))?;
    parse_rational(s).map_err(|e| InputError::new(path, e.to_string()))
}

fn array_at<'a>(v: &'a Value, path: &str, len: usize) -> Result<&'a [Value], InputError> {
    match v.as_array() {
        Some(a) if a.len() == len => Ok(a),
        Some(a) => Err(InputError::new(path, format!("expected {len} elements, found {}", a.len()))),
        None => Err(InputError::new(path, "expected an array")),
    }
}

fn bit_at(obj: &Map<String, Value>, key: &str, path: &str) -> Result<u8, InputError> {
    let p = format!("{path}.{key}");
    match obj.get(key).and_then(Value::as_u64) {
        Some(b @ (0 | 1)) => Ok(b as u8),
        Some(_) => Err(InputError::new(p, "expected 0 or 1")),
        None => Err(InputError::new(p, "missing bit")),
    }
}

fn nested_rationals(v: &Value, path: &str, depth: usize) -> Result<Vec<Rational>, InputError> {
    if depth == 0 {
        return Ok(vec![rational_at(v, path)?]);
    }
    let mut out = Vec::new();
    for (i, item) in array_at(v, path, 2)?.iter().enumerate() {
        out.extend(nested_rationals(item, &format!("{path}[{i}]"), depth - 1)?);
    }
    Ok(out)
}

fn flag_is_true(obj: &Map<String, Value>, key: &str) -> Result<bool, InputError> {
    match obj.get(key) {
        None => Ok(false),
        Some(Value::Bool(b)) => Ok(*b),
        Some(_) => Err(InputError::new(key, "expected true or false")),
    }
}

/// Parses a bipartite box in any of the accepted forms. The result is not validated.
pub fn parse_box(v: &Value) -> Result<BipartiteBox, InputError> {
    let obj = v.as_object().ok_or_else(|| InputError::new("", "expected a JSON object"))?;
    if let Some(p) = obj.get("p") {
        return Ok(BipartiteBox::from_slice(&nested_rationals(p, "p", 4)?));
    }
    if let Some(vx) = obj.get("vertex") {
        let o = vx.as_object().ok_or_else(|| InputError::new("vertex", "expected an object"))?;
        return Ok(make_local_vertex(
            bit_at(o, "alpha", "vertex")?,
            bit_at(o, "beta", "vertex")?,
            bit_at(o, "gamma", "vertex")?,
            bit_at(o, "delta", "vertex")?,
        ));
    }
    if let Some(n) = obj.get("noisy") {
        let o = n.as_object().ok_or_else(|| InputError::new("noisy", "expected an object"))?;
        let field = |k: &str| {
            let p = format!("noisy.{k}");
            o.get(k).ok_or_else(|| InputError::new(&p, "missing value")).and_then(|v| rational_at(v, &p))
        };
        let params = NoisyBoxParams::new(field("xi")?, field("gamma")?)
            .map_err(|e| InputError::new("noisy", e.to_string()))?;
        return Ok(make_noisy_box(&params));
    }
    if flag_is_true(obj, "pr")? {
        return Ok(make_pr_box());
    }
    if flag_is_true(obj, "anti_pr")? {
        return Ok(make_anti_pr_box());
    }
    if flag_is_true(obj, "identity")? {
        return Ok(make_identity_box());
    }
    Err(InputError::new("", "expected one of \"p\", \"vertex\", \"pr\", \"anti_pr\", \"identity\", \"noisy\""))
}

pub fn box_to_json(bx: &BipartiteBox) -> Value {
    let e = bx.entries();
    let p: Vec<Value> = e
        .iter()
        .map(|ex| {
            Value::Array(
                ex.iter()
                    .map(|ey| {
                        Value::Array(
                            ey.iter()
                                .map(|ea| Value::Array(ea.iter().map(|v| Value::String(format_rational(v))).collect()))
                                .collect(),
                        )
                    })
                    .collect(),
            )
        })
        .collect();
    json!({ "p": p })
}

/// Parses `{"p": [[..],[..]]}` indexed `[y][b]`, or `{"vertex": {"alpha": .., "beta": ..}}`.
pub fn parse_single_box(v: &Value) -> Result<SingleBox, InputError> {
    let obj = v.as_object().ok_or_else(|| InputError::new("", "expected a JSON object"))?;
    if let Some(p) = obj.get("p") {
        let e = nested_rationals(p, "p", 2)?;
        return Ok(SingleBox::from_fn(|y, b| e[y * 2 + b].clone()));
    }
    if let Some(vx) = obj.get("vertex") {
        let o = vx.as_object().ok_or_else(|| InputError::new("vertex", "expected an object"))?;
        return Ok(SingleBox::local(bit_at(o, "alpha", "vertex")?, bit_at(o, "beta", "vertex")?));
    }
    Err(InputError::new("", "expected \"p\" or \"vertex\""))
}

pub fn single_box_to_json(sb: &SingleBox) -> Value {
    let p: Vec<Value> = sb
        .entries()
        .iter()
        .map(|row| Value::Array(row.iter().map(|v| Value::String(format_rational(v))).collect()))
        .collect();
    json!({ "p": p })
}

pub fn tensor_to_json(t: &CouplerTensor) -> Value {
    let coefficients: Vec<Value> = t.to_vec().iter().map(|v| Value::String(format_rational(v))).collect();
    json!({
        "schema_version": COUPLER_SCHEMA_VERSION,
        "index_order": "[b'][y1][y2][b1][b2]",
        "coefficients": coefficients,
    })
}

/// Tensor JSON plus the synthesis record (rule and solution-space dimensions).
pub fn synthesis_to_json(s: &CouplerSynthesis) -> Value {
    let mut v = tensor_to_json(&s.tensor);
    let obj = v.as_object_mut().expect("object");
    obj.insert("canonical_rule".into(), json!(s.canonical_rule));
    obj.insert("rank".into(), json!(s.rank));
    obj.insert("solution_space_dim".into(), json!(s.solution_space_dim));
    obj.insert("observable_dim".into(), json!(s.observable_dim));
    v
}

pub fn parse_tensor(v: &Value) -> Result<CouplerTensor, InputError> {
    let obj = v.as_object().ok_or_else(|| InputError::new("", "expected a JSON object"))?;
    match obj.get("schema_version").and_then(Value::as_u64) {
        Some(COUPLER_SCHEMA_VERSION) => {}
        Some(other) => {
            return Err(InputError::new("schema_version", format!("unsupported version {other}")))
        }
        None => return Err(InputError::new("schema_version", "missing")),
    }
    let coeffs = obj.get("coefficients").ok_or_else(|| InputError::new("coefficients", "missing"))?;
    let items = array_at(coeffs, "coefficients", 32)?;
    let values = items
        .iter()
        .enumerate()
        .map(|(i, v)| rational_at(v, &format!("coefficients[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CouplerTensor::from_slice(&values))
}

pub fn classification_to_json(c: &Classification) -> Value {
    json!({ "tier": c.tier.as_str(), "tlm": c.tlm.as_str(), "ch": format_rational(&c.ch) })
}

pub fn parse_classification(v: &Value) -> Result<Classification, InputError> {
    let s = |k: &str| v.get(k).and_then(Value::as_str).ok_or_else(|| InputError::new(k, "expected a string"));
    let tier = match s("tier")? {
        "Local" => Tier::Local,
        "GenuineNonlocal" => Tier::GenuineNonlocal,
        "NonSignallingNonGenuine" => Tier::NonSignallingNonGenuine,
        "Invalid" => Tier::Invalid,
        other => return Err(InputError::new("tier", format!("unknown tier {other}"))),
    };
    let tlm = match s("tlm")? {
        "Satisfied" => TlmStatus::Satisfied,
        "Violated" => TlmStatus::Violated,
        "Boundary" => TlmStatus::Boundary,
        other => return Err(InputError::new("tlm", format!("unknown TLM status {other}"))),
    };
    let ch = rational_at(v.get("ch").unwrap_or(&Value::Null), "ch")?;
    Ok(Classification { tier, tlm, ch })
}

pub fn swap_outcome_to_json(o: &SwapOutcome) -> Value {
    json!({
        "q": format_rational(&o.q),
        "success_box": box_to_json(&o.success_box),
        "failure_box": o.failure_box.as_ref().map(box_to_json),
    })
}

pub fn parse_swap_outcome(v: &Value) -> Result<SwapOutcome, InputError> {
    let q = rational_at(v.get("q").unwrap_or(&Value::Null), "q")?;
    let nested = |k: &str| {
        parse_box(v.get(k).unwrap_or(&Value::Null)).map_err(|e| InputError::new(format!("{k}.{}", e.path), e.message))
    };
    let success_box = nested("success_box")?;
    let failure_box = match v.get("failure_box") {
        None | Some(Value::Null) => None,
        Some(_) => Some(nested("failure_box")?),
    };
    Ok(SwapOutcome { q, success_box, failure_box })
}

pub fn teleport_result_to_json(r: &TeleportResult) -> Value {
    json!({ "q": format_rational(&r.q), "alice_box": single_box_to_json(&r.alice_box) })
}

pub fn parse_teleport_result(v: &Value) -> Result<TeleportResult, InputError> {
    let q = rational_at(v.get("q").unwrap_or(&Value::Null), "q")?;
    let alice_box = parse_single_box(v.get("alice_box").unwrap_or(&Value::Null))
        .map_err(|e| InputError::new(format!("alice_box.{}", e.path), e.message))?;
    Ok(TeleportResult { q, alice_box })
}

/// `{"p": [P(b'=0), P(b'=1)]}`.
pub fn distribution_to_json(p: &[Rational; 2]) -> Value {
    json!({ "p": [format_rational(&p[0]), format_rational(&p[1])] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{make_pr_variant, VertexId};
    use crate::rational::ratio;

    #[test]
    fn named_constructors() {
        let v: Value = serde_json::from_str(r#"{"pr": true}"#).unwrap();
        assert_eq!(parse_box(&v).unwrap(), make_pr_box());
        let v: Value = serde_json::from_str(r#"{"vertex": {"alpha":1,"beta":0,"gamma":1,"delta":0}}"#).unwrap();
        assert_eq!(parse_box(&v).unwrap(), VertexId::local(1, 0, 1, 0).to_box());
        let v: Value = serde_json::from_str(r#"{"noisy": {"xi":"1/2","gamma":"0"}}"#).unwrap();
        let expected = make_noisy_box(&NoisyBoxParams::new(ratio(1, 2), ratio(0, 1)).unwrap());
        assert_eq!(parse_box(&v).unwrap(), expected);
        let v: Value = serde_json::from_str(r#"{"anti_pr": true}"#).unwrap();
        assert_eq!(parse_box(&v).unwrap(), make_pr_variant(0, 0, 1));
    }

    #[test]
    fn explicit_box_round_trip() {
        let bx = make_noisy_box(&NoisyBoxParams::new(ratio(1, 3), ratio(1, 5)).unwrap());
        assert_eq!(parse_box(&box_to_json(&bx)).unwrap(), bx);
    }

    #[test]
    fn errors_name_the_offending_path() {
        let mut v = box_to_json(&make_pr_box());
        v["p"][0][1][1][0] = json!("x/2");
        let err = parse_box(&v).unwrap_err();
        assert_eq!(err.path, "p[0][1][1][0]");

        let mut v = box_to_json(&make_pr_box());
        v["p"][1][0] = json!([["1/2"]]);
        assert_eq!(parse_box(&v).unwrap_err().path, "p[1][0]");

        let v: Value = serde_json::from_str(r#"{"vertex": {"alpha":2,"beta":0,"gamma":1,"delta":0}}"#).unwrap();
        assert_eq!(parse_box(&v).unwrap_err().path, "vertex.alpha");

        let v: Value = serde_json::from_str(r#"{"noisy": {"xi":"3/4","gamma":"1/2"}}"#).unwrap();
        assert_eq!(parse_box(&v).unwrap_err().path, "noisy");

        let v: Value = serde_json::from_str(r#"{"bogus": 1}"#).unwrap();
        assert!(parse_box(&v).is_err());
    }

    #[test]
    fn tensor_schema() {
        let t = CouplerTensor::canonical();
        let v = tensor_to_json(t);
        assert_eq!(v["coefficients"].as_array().unwrap().len(), 32);
        assert_eq!(&parse_tensor(&v).unwrap(), t);

        let mut bad = v.clone();
        bad["schema_version"] = json!(7);
        assert_eq!(parse_tensor(&bad).unwrap_err().path, "schema_version");
        let mut bad = v;
        bad["coefficients"][31] = json!(3);
        assert_eq!(parse_tensor(&bad).unwrap_err().path, "coefficients[31]");
    }

    #[test]
    fn single_box_forms() {
        let v: Value = serde_json::from_str(r#"{"vertex": {"alpha":1,"beta":1}}"#).unwrap();
        assert_eq!(parse_single_box(&v).unwrap(), SingleBox::local(1, 1));
        let sb = SingleBox::local(0, 1);
        assert_eq!(parse_single_box(&single_box_to_json(&sb)).unwrap(), sb);
    }
}
