//! Sequence specifications read from JSON or CSV files.
//!
//! Accepted JSON shapes:
//!
//! ```json
//! {"type": "explicit", "values": [1.0, 0.5, 0.25]}
//! {"type": "builtin", "name": "thm1", "params": {"j_max": 3}}
//! {"type": "complex", "theta0": 0.5, "terms": [[1, 1.0, 0.2], [-1, 0.5, 0.0]]}
//! ```
//!
//! A `.csv` file with a `k,a_k` header (lines starting with `#` are skipped)
//! is read as an explicit sequence.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::complexseries::ExplicitComplexSequence;
use crate::error::{Error, Result};
use crate::generators::{
    gen_family, gen_prop3, gen_thm1, gen_thm6, BlockSchedule, Family, FamilySequence, Growth,
    Prop3Sequence, Prop3Spec, Thm1Sequence, Thm1Spec, Thm6Sequence, Thm6Spec,
};
use crate::sequence::{ExplicitSequence, SequenceProvider, SharedSequence};

/// Names accepted by `{"type": "builtin"}`.
pub const BUILTIN_NAMES: [&str; 8] = [
    "thm1",
    "thm6",
    "prop3",
    "power_p",
    "log_damped",
    "constant",
    "dyadic_ramp",
    "sparse_zeros",
];

/// A constructed builtin generator, keeping its concrete type.
#[derive(Debug, Clone)]
pub enum Builtin {
    Thm1(Thm1Sequence),
    Thm6(Thm6Sequence),
    Prop3(Prop3Sequence),
    Family(FamilySequence),
}

impl Builtin {
    /// Builds `name` from a JSON parameter object; missing parameters take defaults.
    pub fn from_params(name: &str, params: &Value) -> Result<Self> {
        let empty = Map::new();
        let obj = match params {
            Value::Null => &empty,
            Value::Object(m) => m,
            _ => return Err(Error::spec("params", "expected an object")),
        };
        let p = Params { obj, path: "params" };
        Ok(match name {
            "thm1" => Builtin::Thm1(gen_thm1(Thm1Spec { j_max: p.uint("j_max", 3)? as usize })?),
            "thm6" => {
                let growth = match obj.get("growth") {
                    None => Growth::Log2Ceil { scale: 10.0 },
                    Some(g) => serde_json::from_value::<Growth>(g.clone())
                        .map_err(|e| Error::spec("params.growth", e.to_string()))?,
                };
                Builtin::Thm6(gen_thm6(Thm6Spec { growth: growth.provider(), j_max: p.uint("j_max", 3)? as usize })?)
            }
            "prop3" => {
                let base: SharedSequence = match obj.get("base") {
                    None => Arc::new(gen_family(Family::PowerP { p: 1.0 })?),
                    Some(v) => match parse_value_at(v, "params.base")? {
                        LoadedSpec::Real { seq, .. } => seq,
                        LoadedSpec::Complex(_) => {
                            return Err(Error::spec("params.base", "base must be a real sequence"))
                        }
                    },
                };
                Builtin::Prop3(gen_prop3(Prop3Spec { base, k_max: p.uint("k_max", 12)? as u32 })?)
            }
            "power_p" => Builtin::Family(gen_family(Family::PowerP { p: p.real("p", 1.0)? })?),
            "log_damped" => Builtin::Family(gen_family(Family::LogDamped)?),
            "constant" => Builtin::Family(gen_family(Family::Constant { c: p.real("c", 1.0)? })?),
            "dyadic_ramp" => Builtin::Family(gen_family(Family::DyadicRamp { alpha: p.real("alpha", 1.0)? })?),
            "sparse_zeros" => Builtin::Family(gen_family(Family::SparseZeros)?),
            other => {
                return Err(Error::spec(
                    "name",
                    format!("unknown builtin `{other}`; expected one of {}", BUILTIN_NAMES.join(", ")),
                ))
            }
        })
    }

    pub fn shared(&self) -> SharedSequence {
        match self {
            Builtin::Thm1(s) => Arc::new(s.clone()),
            Builtin::Thm6(s) => Arc::new(s.clone()),
            Builtin::Prop3(s) => Arc::new(s.clone()),
            Builtin::Family(s) => Arc::new(s.clone()),
        }
    }

    pub fn block_schedule(&self) -> Option<&dyn BlockSchedule> {
        match self {
            Builtin::Thm1(s) => Some(s),
            Builtin::Thm6(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_provider(&self) -> &dyn SequenceProvider {
        match self {
            Builtin::Thm1(s) => s,
            Builtin::Thm6(s) => s,
            Builtin::Prop3(s) => s,
            Builtin::Family(s) => s,
        }
    }

    /// Generation starts `n_j` for the block constructions, dyadic starts
    /// `2^k` for the zero-band sequence, empty otherwise.
    pub fn schedule(&self) -> Vec<u64> {
        match self {
            Builtin::Thm1(s) => s.schedule(),
            Builtin::Thm6(s) => s.schedule(),
            Builtin::Prop3(s) => (0..=s.k_max()).map(|k| 1u64 << k).collect(),
            Builtin::Family(_) => Vec::new(),
        }
    }
}

struct Params<'a> {
    obj: &'a Map<String, Value>,
    path: &'a str,
}

impl Params<'_> {
    fn real(&self, key: &str, default: f64) -> Result<f64> {
        match self.obj.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| Error::spec(format!("{}.{key}", self.path), "expected a number")),
        }
    }

    fn uint(&self, key: &str, default: u64) -> Result<u64> {
        match self.obj.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .ok_or_else(|| Error::spec(format!("{}.{key}", self.path), "expected a nonnegative integer")),
        }
    }
}

/// A parsed specification.
#[derive(Debug, Clone)]
pub enum LoadedSpec {
    Real {
        seq: SharedSequence,
        /// Set when the spec named a builtin generator.
        builtin: Option<Arc<Builtin>>,
        /// The JSON form of the spec, recorded in output sidecars.
        source: Value,
    },
    Complex(Arc<ExplicitComplexSequence>),
}

impl LoadedSpec {
    pub fn real(&self) -> Option<&SharedSequence> {
        match self {
            LoadedSpec::Real { seq, .. } => Some(seq),
            LoadedSpec::Complex(_) => None,
        }
    }
}

/// Reads a JSON spec, or a `k,a_k` CSV file when the extension is `.csv`.
pub fn parse_sequence_spec(path: impl AsRef<Path>) -> Result<LoadedSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::spec(path.display().to_string(), e.to_string()))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let label = path.file_stem().map_or("csv".into(), |s| s.to_string_lossy().into_owned());
        let seq = parse_csv_sequence(&text, &label)?;
        let source = json!({"type": "explicit", "values": seq.values()});
        return Ok(LoadedSpec::Real { seq: Arc::new(seq), builtin: None, source });
    }
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::spec(path.display().to_string(), e.to_string()))?;
    parse_sequence_value(&value)
}

pub fn parse_sequence_value(value: &Value) -> Result<LoadedSpec> {
    parse_value_at(value, "$")
}

fn parse_value_at(value: &Value, path: &str) -> Result<LoadedSpec> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::spec(path, "expected an object"))?;
    let kind = match obj.get("type") {
        Some(Value::String(s)) => s.as_str(),
        Some(_) => return Err(Error::spec(format!("{path}.type"), "expected a string")),
        None if obj.contains_key("terms") => "complex",
        None => return Err(Error::spec(format!("{path}.type"), "missing")),
    };
    match kind {
        "explicit" => {
            let values = obj
                .get("values")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::spec(format!("{path}.values"), "expected an array of numbers"))?;
            let values = values
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    v.as_f64()
                        .ok_or_else(|| Error::spec(format!("{path}.values[{i}]"), "expected a number"))
                })
                .collect::<Result<Vec<_>>>()?;
            let label = obj.get("label").and_then(Value::as_str).unwrap_or("explicit");
            let seq = ExplicitSequence::new(values, label)?;
            Ok(LoadedSpec::Real { seq: Arc::new(seq), builtin: None, source: value.clone() })
        }
        "builtin" => {
            let name = obj
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::spec(format!("{path}.name"), "expected a string"))?;
            let builtin = Builtin::from_params(name, obj.get("params").unwrap_or(&Value::Null))
                .map_err(|e| match e {
                    Error::Spec { path: inner, reason } => Error::spec(format!("{path}.{inner}"), reason),
                    other => other,
                })?;
            Ok(LoadedSpec::Real { seq: builtin.shared(), builtin: Some(Arc::new(builtin)), source: value.clone() })
        }
        "complex" => {
            let theta0 = obj
                .get("theta0")
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::spec(format!("{path}.theta0"), "expected a number"))?;
            let terms = obj
                .get("terms")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::spec(format!("{path}.terms"), "expected an array of [k, re, im]"))?;
            let triples = terms
                .iter()
                .enumerate()
                .map(|(i, t)| parse_triple(t).ok_or_else(|| Error::spec(format!("{path}.terms[{i}]"), "expected [k, re, im]")))
                .collect::<Result<Vec<_>>>()?;
            let label = obj.get("label").and_then(Value::as_str).unwrap_or("complex");
            Ok(LoadedSpec::Complex(Arc::new(ExplicitComplexSequence::new(triples, theta0, label)?)))
        }
        other => Err(Error::spec(format!("{path}.type"), format!("unknown type `{other}`"))),
    }
}

fn parse_triple(t: &Value) -> Option<(i64, Complex64)> {
    match t.as_array()?.as_slice() {
        [k, re, im] => Some((k.as_i64()?, Complex64::new(re.as_f64()?, im.as_f64()?))),
        _ => None,
    }
}

/// Reads `k,a_k` rows; `k` must run 1, 2, 3, ... without gaps.
pub fn parse_csv_sequence(text: &str, label: &str) -> Result<ExplicitSequence> {
    let mut values = Vec::new();
    let mut header_seen = false;
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != "k,a_k" {
                return Err(Error::spec(format!("line {}", line_no + 1), "expected header `k,a_k`"));
            }
            header_seen = true;
            continue;
        }
        let bad = || Error::spec(format!("line {}", line_no + 1), "expected `k,a_k`");
        let (k, a) = line.split_once(',').ok_or_else(bad)?;
        let k: u64 = k.trim().parse().map_err(|_| bad())?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        if k != values.len() as u64 + 1 {
            return Err(Error::spec(format!("line {}", line_no + 1), format!("expected k = {}, got {k}", values.len() + 1)));
        }
        values.push(a);
    }
    ExplicitSequence::new(values, label)
}
