//! The JSON market file: tree, bid–ask boxes, kernels and an optional claim,
//! every number an exact ratio or decimal string.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "horizon": 1,
//!   "assets": 2,
//!   "nodes": [
//!     {"id": 0, "parent": null, "mid": ["1", "1"], "spread": "3/2", "kernels": [["1/2", "1/2"]]},
//!     {"id": 1, "parent": 0, "mid": ["2", "1"], "spread": "3/2", "kernels": []},
//!     {"id": 2, "parent": 0, "mid": ["1/2", "1"], "spread": "3/2", "kernels": []}
//!   ],
//!   "claim": {"payoff": {"1": ["0", "1"], "2": ["0", "0"]}}
//! }
//! ```
//!
//! `intervals` (one `[lo, hi]` per risky asset) overrides the default box
//! `[S/c, cS]`; `frictionless: true` admits `spread = 1` and collapsed
//! intervals.

use crate::cone::{build_cone, BidAskSpec};
use crate::pricing::{ClaimSpec, StaticOption};
use crate::rational::{fmt_q, fmt_vec, parse_q};
use crate::scenario::{NodeSpec, ScenarioTree};
use crate::Q;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use thiserror::Error;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("line {line}, column {column}: {msg}")]
    Syntax { line: usize, column: usize, msg: String },
    #[error("{field}: {msg}")]
    Field { field: String, msg: String },
}

fn field(field: impl Into<String>, msg: impl ToString) -> SpecError {
    SpecError::Field { field: field.into(), msg: msg.to_string() }
}

/// How a generated instance was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorInfo {
    pub seed: u64,
    pub na2: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted_node: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Market {
    pub tree: ScenarioTree,
    pub claim: Option<ClaimSpec>,
    pub generator: Option<GeneratorInfo>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRepr {
    schema: u32,
    horizon: usize,
    assets: usize,
    nodes: Vec<NodeRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    claim: Option<ClaimRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<GeneratorInfo>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRepr {
    id: usize,
    parent: Option<usize>,
    mid: Vec<String>,
    spread: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intervals: Option<Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "is_false")]
    frictionless: bool,
    kernels: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClaimRepr {
    payoff: BTreeMap<usize, Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    statics: Vec<StaticRepr>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StaticRepr {
    payoff: BTreeMap<usize, Vec<String>>,
    bound: String,
}

fn num(path: &str, s: &str) -> Result<Q, SpecError> {
    parse_q(s).map_err(|e| field(path, e))
}

fn nums(path: &str, v: &[String]) -> Result<Vec<Q>, SpecError> {
    v.iter().enumerate().map(|(i, s)| num(&format!("{path}[{i}]"), s)).collect()
}

fn payoff(path: &str, p: &BTreeMap<usize, Vec<String>>) -> Result<BTreeMap<usize, Vec<Q>>, SpecError> {
    p.iter().map(|(k, v)| Ok((*k, nums(&format!("{path}.{k}"), v)?))).collect()
}

fn to_market(f: FileRepr) -> Result<Market, SpecError> {
    if f.schema != SCHEMA {
        return Err(field("schema", format!("unsupported version {}, expected {SCHEMA}", f.schema)));
    }
    let mut specs = Vec::with_capacity(f.nodes.len());
    for (i, n) in f.nodes.iter().enumerate() {
        let at = |s: &str| format!("nodes[{i}].{s}");
        let mid = nums(&at("mid"), &n.mid)?;
        if mid.len() != f.assets {
            return Err(field(at("mid"), format!("has {} entries, expected {} assets", mid.len(), f.assets)));
        }
        let intervals = match &n.intervals {
            Some(iv) => Some(
                iv.iter()
                    .enumerate()
                    .map(|(j, [lo, hi])| Ok((num(&at(&format!("intervals[{j}][0]")), lo)?, num(&at(&format!("intervals[{j}][1]")), hi)?)))
                    .collect::<Result<Vec<_>, SpecError>>()?,
            ),
            None => None,
        };
        let spec = BidAskSpec { mid, factor: num(&at("spread"), &n.spread)?, intervals, frictionless: n.frictionless };
        let cone = build_cone(&spec).map_err(|e| field(format!("nodes[{i}]"), e))?;
        let kernels = n
            .kernels
            .iter()
            .enumerate()
            .map(|(k, ker)| nums(&at(&format!("kernels[{k}]")), ker))
            .collect::<Result<Vec<_>, _>>()?;
        specs.push(NodeSpec { id: n.id, parent: n.parent, cone, kernels });
    }
    let tree = ScenarioTree::new(f.horizon, specs).map_err(|e| field("nodes", e))?;
    let claim = match &f.claim {
        Some(c) => {
            let mut statics = Vec::new();
            for (i, s) in c.statics.iter().enumerate() {
                let at = format!("claim.statics[{i}]");
                statics.push(StaticOption { payoff: payoff(&format!("{at}.payoff"), &s.payoff)?, bound: num(&format!("{at}.bound"), &s.bound)? });
            }
            let claim = ClaimSpec { xi: payoff("claim.payoff", &c.payoff)?, statics };
            claim.validate(&tree).map_err(|e| field("claim", e))?;
            Some(claim)
        }
        None => None,
    };
    Ok(Market { tree, claim, generator: f.generator })
}

fn fmt_payoff(p: &BTreeMap<usize, Vec<Q>>) -> BTreeMap<usize, Vec<String>> {
    p.iter().map(|(k, v)| (*k, fmt_vec(v))).collect()
}

fn to_repr(m: &Market) -> Result<FileRepr, SpecError> {
    let mut nodes = Vec::with_capacity(m.tree.len());
    for n in m.tree.nodes() {
        let spec = n.cone.bid_ask_spec().ok_or_else(|| field(format!("nodes[{}]", n.id), "slice is not a box"))?;
        let c = &spec.factor;
        let iv = spec.intervals.expect("boxes report intervals");
        let default = iv.iter().zip(&spec.mid).all(|((lo, hi), s)| lo == &(s / c) && hi == &(s * c));
        nodes.push(NodeRepr {
            id: n.id,
            parent: n.parent,
            mid: fmt_vec(&spec.mid),
            spread: fmt_q(c),
            intervals: (!default).then(|| iv.iter().map(|(lo, hi)| [fmt_q(lo), fmt_q(hi)]).collect()),
            frictionless: spec.frictionless,
            kernels: n.kernels.iter().map(|k| fmt_vec(k)).collect(),
        });
    }
    let claim = m.claim.as_ref().map(|c| ClaimRepr {
        payoff: fmt_payoff(&c.xi),
        statics: c.statics.iter().map(|s| StaticRepr { payoff: fmt_payoff(&s.payoff), bound: fmt_q(&s.bound) }).collect(),
    });
    Ok(FileRepr { schema: SCHEMA, horizon: m.tree.horizon(), assets: m.tree.d(), nodes, claim, generator: m.generator.clone() })
}

pub fn parse_market(text: &str) -> Result<Market, SpecError> {
    let f: FileRepr = serde_json::from_str(text)
        .map_err(|e| SpecError::Syntax { line: e.line(), column: e.column(), msg: e.to_string() })?;
    to_market(f)
}

/// Pretty JSON with a trailing newline.
pub fn emit_market(m: &Market) -> Result<String, SpecError> {
    let mut s = serde_json::to_string_pretty(&to_repr(m)?).expect("plain data");
    s.push('\n');
    Ok(s)
}

/// SHA-256 of the compact canonical serialization.
pub fn digest(m: &Market) -> Result<String, SpecError> {
    let s = serde_json::to_string(&to_repr(m)?).expect("plain data");
    Ok(hex::encode(Sha256::digest(s.as_bytes())))
}
