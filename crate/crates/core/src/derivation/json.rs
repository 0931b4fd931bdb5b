//! JSON encoding of derivations, one object per node.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::{check_derivation, CheckReport, Derivation, Rule, Sequent};
use crate::context::Context;
use crate::names::Name;
use crate::term::{parse_term, ParseError};
use crate::types::Type;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema error at node {path}: {message}")]
    Schema { path: String, message: String },
    #[error("bad term at node {path}: {source}")]
    Term { path: String, source: ParseError },
    #[error("derivation does not check:\n{0}")]
    Check(CheckReport),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BindingJson {
    var: String,
    #[serde(rename = "type")]
    ty: Type,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeJson {
    rule: String,
    ctx: Vec<BindingJson>,
    term: String,
    #[serde(rename = "type")]
    ty: Type,
    #[serde(default)]
    premises: Vec<NodeJson>,
    #[serde(default)]
    data: Value,
}

fn encode(d: &Derivation) -> NodeJson {
    let (rule, data) = match &d.rule {
        Rule::Ax => ("ax", json!({})),
        Rule::Weaken { var, ty } => (
            "w",
            json!({"var": var.as_str(), "type": Type::Linear(ty.clone())}),
        ),
        Rule::ArrowIntro { var } => ("arrow_i", json!({"var": var.as_str()})),
        Rule::ArrowElim => ("arrow_e", json!({})),
        Rule::And => ("and", json!({"n": d.premises.len()})),
        Rule::Mux { merged, fresh } => {
            let merged: Vec<&str> = merged.iter().map(|m| m.as_str()).collect();
            ("mux", json!({"merged": merged, "fresh": fresh.as_str()}))
        }
    };
    NodeJson {
        rule: rule.to_string(),
        ctx: d
            .context()
            .iter()
            .map(|(x, t)| BindingJson {
                var: x.to_string(),
                ty: t.clone(),
            })
            .collect(),
        term: d.subject().to_string(),
        ty: d.ty().clone(),
        premises: d.premises.iter().map(encode).collect(),
        data,
    }
}

pub fn to_json(d: &Derivation) -> Value {
    serde_json::to_value(encode(d)).expect("derivations always serialize")
}

pub fn to_json_string(d: &Derivation) -> String {
    serde_json::to_string_pretty(&encode(d)).expect("derivations always serialize")
}

fn schema<T>(path: &str, message: impl Into<String>) -> Result<T, DecodeError> {
    Err(DecodeError::Schema {
        path: path.to_string(),
        message: message.into(),
    })
}

fn field_str(data: &Value, key: &str, path: &str) -> Result<Name, DecodeError> {
    match data.get(key).and_then(Value::as_str) {
        Some(s) => Ok(Name::from(s)),
        None => schema(path, format!("data.{key} must be a string")),
    }
}

fn decode(node: NodeJson, path: &str) -> Result<Derivation, DecodeError> {
    let mut context = Context::new();
    for b in node.ctx {
        if context.insert(Name::from(b.var.as_str()), b.ty).is_some() {
            return schema(path, format!("variable {} bound twice", b.var));
        }
    }
    let subject = parse_term(&node.term).map_err(|source| DecodeError::Term {
        path: path.to_string(),
        source,
    })?;
    let n = node.premises.len();
    let expect = |k: usize| -> Result<(), DecodeError> {
        if n == k {
            Ok(())
        } else {
            schema(
                path,
                format!("rule {} takes {k} premise(s), found {n}", node.rule),
            )
        }
    };
    let rule = match node.rule.as_str() {
        "ax" => {
            expect(0)?;
            Rule::Ax
        }
        "w" => {
            expect(1)?;
            let var = field_str(&node.data, "var", path)?;
            let ty: Type =
                serde_json::from_value(node.data.get("type").cloned().unwrap_or(Value::Null))
                    .map_err(|e| DecodeError::Schema {
                        path: path.into(),
                        message: e.to_string(),
                    })?;
            match ty {
                Type::Linear(ty) => Rule::Weaken { var, ty },
                Type::Inter(_) => return schema(path, "weakening needs a linear type"),
            }
        }
        "arrow_i" => {
            expect(1)?;
            Rule::ArrowIntro {
                var: field_str(&node.data, "var", path)?,
            }
        }
        "arrow_e" => {
            expect(2)?;
            Rule::ArrowElim
        }
        "and" => {
            if let Some(k) = node.data.get("n") {
                if k.as_u64() != Some(n as u64) {
                    return schema(path, format!("data.n = {k} but there are {n} premises"));
                }
            }
            if n < 2 {
                return schema(path, "∧n needs n ≥ 2 premises");
            }
            Rule::And
        }
        "mux" => {
            expect(1)?;
            let merged = match node.data.get("merged").and_then(Value::as_array) {
                Some(vs) => vs
                    .iter()
                    .map(|v| v.as_str().map(Name::from))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| DecodeError::Schema {
                        path: path.into(),
                        message: "data.merged must list strings".into(),
                    })?,
                None => return schema(path, "data.merged missing"),
            };
            if merged.len() < 2 {
                return schema(
                    path,
                    format!("(m) needs n ≥ 2 merged variables, found {}", merged.len()),
                );
            }
            Rule::Mux {
                merged,
                fresh: field_str(&node.data, "fresh", path)?,
            }
        }
        other => return schema(path, format!("unknown rule {other:?}")),
    };
    let premises = node
        .premises
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let sub = if path == "root" {
                i.to_string()
            } else {
                format!("{path}.{i}")
            };
            decode(p, &sub)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Derivation {
        rule,
        conclusion: Sequent {
            context,
            subject,
            ty: node.ty,
        },
        premises,
    })
}

/// Decodes and checks a derivation.
pub fn from_json(v: Value) -> Result<Derivation, DecodeError> {
    let node: NodeJson = serde_json::from_value(v)?;
    let d = decode(node, "root")?;
    let report = check_derivation(&d);
    if !report.is_ok() {
        return Err(DecodeError::Check(report));
    }
    Ok(d)
}

pub fn from_json_str(s: &str) -> Result<Derivation, DecodeError> {
    from_json(serde_json::from_str(s)?)
}
