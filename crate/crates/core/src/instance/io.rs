//! Canonical JSON instance format.
//!
//! Top-level keys: `name`, `buses`, `generators`, `existing_lines`,
//! `candidate_lines`, `scenarios`. Output is deterministic: object keys are
//! sorted and floats are written with 12 significant digits.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{validate, Bus, Generator, Instance, Line, LineId, LineKind, Scenario};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    name: String,
    buses: Vec<Bus>,
    generators: Vec<Generator>,
    existing_lines: Vec<ExistingRecord>,
    candidate_lines: Vec<CandidateRecord>,
    scenarios: Vec<Scenario>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExistingRecord {
    id: LineId,
    from_bus: usize,
    to_bus: usize,
    parallel_index: usize,
    susceptance: f64,
    capacity: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateRecord {
    id: LineId,
    from_bus: usize,
    to_bus: usize,
    parallel_index: usize,
    susceptance: f64,
    capacity: f64,
    invest_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    twin_existing: Option<LineId>,
}

/// Parses and validates an instance document.
pub fn load_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut lines = Vec::with_capacity(file.existing_lines.len() + file.candidate_lines.len());
    for r in file.existing_lines {
        lines.push(Line {
            id: r.id,
            from_bus: r.from_bus,
            to_bus: r.to_bus,
            parallel_index: r.parallel_index,
            susceptance: r.susceptance,
            capacity: r.capacity,
            kind: LineKind::Existing,
            invest_cost: 0.0,
            twin_existing: None,
        });
    }
    for r in file.candidate_lines {
        lines.push(Line {
            id: r.id,
            from_bus: r.from_bus,
            to_bus: r.to_bus,
            parallel_index: r.parallel_index,
            susceptance: r.susceptance,
            capacity: r.capacity,
            kind: LineKind::Candidate,
            invest_cost: r.invest_cost,
            twin_existing: r.twin_existing,
        });
    }
    let inst =
        Instance { name: file.name, buses: file.buses, generators: file.generators, lines, scenarios: file.scenarios };
    let diags = validate(&inst);
    if !diags.is_empty() {
        return Err(Error::Validation(diags));
    }
    Ok(inst)
}

pub fn load_instance_file(path: impl AsRef<Path>) -> Result<Instance> {
    load_instance(&std::fs::read_to_string(path)?)
}

/// Writes the canonical document. Existing lines precede candidates, each
/// group in instance order.
pub fn serialize_instance(inst: &Instance) -> String {
    let file = InstanceFile {
        name: inst.name.clone(),
        buses: inst.buses.clone(),
        generators: inst.generators.clone(),
        existing_lines: inst
            .existing_lines()
            .map(|l| ExistingRecord {
                id: l.id,
                from_bus: l.from_bus,
                to_bus: l.to_bus,
                parallel_index: l.parallel_index,
                susceptance: l.susceptance,
                capacity: l.capacity,
            })
            .collect(),
        candidate_lines: inst
            .candidate_lines()
            .map(|l| CandidateRecord {
                id: l.id,
                from_bus: l.from_bus,
                to_bus: l.to_bus,
                parallel_index: l.parallel_index,
                susceptance: l.susceptance,
                capacity: l.capacity,
                invest_cost: l.invest_cost,
                twin_existing: l.twin_existing,
            })
            .collect(),
        scenarios: inst.scenarios.clone(),
    };
    let value = serde_json::to_value(&file).expect("instance records always serialize");
    to_canonical_json(&value)
}

/// Deterministic JSON rendering: sorted keys, two-space indentation,
/// containers of scalars kept on one line, floats with 12 significant digits.
pub fn to_canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.iter().all(is_scalar) {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, depth + 1);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    indent(out, depth + 1);
                    write_value(out, item, depth + 1);
                    out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
                }
                indent(out, depth);
                out.push(']');
            }
        }
        Value::Object(map) => {
            // serde_json's default map is a BTreeMap, so keys iterate sorted.
            let inline = map.values().all(is_scalar);
            out.push('{');
            if !inline {
                out.push('\n');
            }
            for (i, (k, item)) in map.iter().enumerate() {
                if inline {
                    if i > 0 {
                        out.push_str(", ");
                    }
                } else {
                    indent(out, depth + 1);
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, depth + 1);
                if !inline {
                    out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
                }
            }
            if !inline {
                indent(out, depth);
            }
            out.push('}');
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

/// Formats `v` like C's `%.12g`. Non-finite values become `null`, which the
/// loader rejects.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return "null".into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
