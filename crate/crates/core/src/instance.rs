//! Problem instances and their JSON form.
//!
//! ```json
//! {"nodes": 3, "k": 1, "edges": [{"id": 0, "u": 0, "v": 1, "C": 1, "c": "5/2", "d": "0.5"}]}
//! ```
//!
//! Costs are integers or strings holding an integer, a decimal or a fraction.
//! JSON numbers with a fractional part or exponent are rejected so that no
//! value ever passes through binary floating point.

use std::collections::{BTreeMap, BTreeSet};

use exact_lp::{format_rational, parse_rational, Rational};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::graph::{EdgeId, MultiGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
}

/// First-stage cost `C`, second-stage lower bound `c` and interval width `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostTriple {
    pub first: Rational,
    pub lower: Rational,
    pub width: Rational,
}

impl CostTriple {
    pub fn new(first: Rational, lower: Rational, width: Rational) -> Self {
        CostTriple { first, lower, width }
    }

    /// Worst-case second-stage cost `c + d`.
    pub fn second_stage(&self) -> Rational {
        &self.lower + &self.width
    }

    fn validate(&self, e: EdgeId) -> Result<(), InstanceError> {
        for (name, v) in [("C", &self.first), ("c", &self.lower), ("d", &self.width)] {
            if v.is_negative() {
                return Err(InstanceError::Validation(format!(
                    "edge {} has negative cost {name} = {}",
                    e.0,
                    format_rational(v)
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    graph: MultiGraph,
    costs: BTreeMap<EdgeId, CostTriple>,
    k: usize,
}

impl Instance {
    pub fn new(graph: MultiGraph, costs: BTreeMap<EdgeId, CostTriple>, k: usize) -> Result<Self, InstanceError> {
        let ids: BTreeSet<EdgeId> = graph.edge_ids().collect();
        if let Some(e) = ids.iter().find(|e| !costs.contains_key(e)) {
            return Err(InstanceError::Validation(format!("edge {} has no cost triple", e.0)));
        }
        if let Some(e) = costs.keys().find(|e| !ids.contains(e)) {
            return Err(InstanceError::Validation(format!("cost given for unknown edge {}", e.0)));
        }
        for (e, c) in &costs {
            c.validate(*e)?;
        }
        if graph.node_count() == 0 {
            return Err(InstanceError::Validation("graph has no nodes".into()));
        }
        if !graph.is_connected() {
            return Err(InstanceError::Validation("graph is disconnected".into()));
        }
        if k + 1 > graph.node_count() {
            return Err(InstanceError::Validation(format!("k = {k} outside 0..={}", graph.node_count() - 1)));
        }
        Ok(Instance { graph, costs, k })
    }

    pub fn graph(&self) -> &MultiGraph {
        &self.graph
    }

    pub fn costs(&self) -> &BTreeMap<EdgeId, CostTriple> {
        &self.costs
    }

    pub fn cost(&self, e: EdgeId) -> &CostTriple {
        &self.costs[&e]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Required overlap `n - 1 - k`.
    pub fn overlap_target(&self) -> usize {
        self.graph.node_count() - 1 - self.k
    }

    pub fn with_k(&self, k: usize) -> Result<Self, InstanceError> {
        Instance::new(self.graph.clone(), self.costs.clone(), k)
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            nodes: self.graph.node_count() as i64,
            k: self.k as i64,
            edges: self
                .graph
                .edges()
                .map(|(id, u, v)| {
                    let c = &self.costs[&id];
                    EdgeRecord {
                        id: id.0,
                        u,
                        v,
                        first: cost_to_value(&c.first),
                        lower: cost_to_value(&c.lower),
                        width: cost_to_value(&c.width),
                    }
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    nodes: i64,
    k: i64,
    edges: Vec<EdgeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRecord {
    id: usize,
    u: usize,
    v: usize,
    #[serde(rename = "C")]
    first: Value,
    #[serde(rename = "c")]
    lower: Value,
    #[serde(rename = "d")]
    width: Value,
}

/// Integers are written as JSON numbers, everything else as `"p/q"`.
pub(crate) fn cost_to_value(v: &Rational) -> Value {
    if v.is_integer() {
        if let Ok(i) = v.numer().to_string().parse::<i64>() {
            return Value::from(i);
        }
    }
    Value::String(format_rational(v))
}

pub(crate) fn parse_cost_value(v: &Value, what: &str) -> Result<Rational, InstanceError> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(exact_lp::int(i))
            } else if let Some(u) = n.as_u64() {
                parse_rational(&u.to_string()).map_err(|e| InstanceError::Parse(e.to_string()))
            } else {
                Err(InstanceError::Parse(format!(
                    "{what}: floating-point number {n} rejected; write it as a string such as \"2.5\""
                )))
            }
        }
        Value::String(s) => parse_rational(s).map_err(|e| InstanceError::Parse(format!("{what}: {e}"))),
        other => Err(InstanceError::Parse(format!("{what}: expected number or string, got {other}"))),
    }
}

pub(crate) fn validate_k(k: i64, max: usize) -> Result<usize, InstanceError> {
    if k < 0 || k as usize > max {
        return Err(InstanceError::Validation(format!("k = {k} outside 0..={max}")));
    }
    Ok(k as usize)
}

pub fn load_instance(text: &str) -> Result<Instance, InstanceError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))?;
    if file.nodes <= 0 {
        return Err(InstanceError::Validation("graph has no nodes".into()));
    }
    let nodes = file.nodes as usize;
    let mut costs = BTreeMap::new();
    let mut edges = Vec::with_capacity(file.edges.len());
    for rec in &file.edges {
        let id = EdgeId(rec.id);
        let triple = CostTriple::new(
            parse_cost_value(&rec.first, &format!("edge {} C", rec.id))?,
            parse_cost_value(&rec.lower, &format!("edge {} c", rec.id))?,
            parse_cost_value(&rec.width, &format!("edge {} d", rec.id))?,
        );
        costs.insert(id, triple);
        edges.push((id, rec.u, rec.v));
    }
    let graph = MultiGraph::new(nodes, edges).map_err(|e| InstanceError::Validation(e.to_string()))?;
    let k = validate_k(file.k, nodes - 1)?;
    Instance::new(graph, costs, k)
}

/// Sum of `f` over `edges`.
pub fn total<'a>(edges: impl IntoIterator<Item = &'a EdgeId>, f: impl Fn(&EdgeId) -> Rational) -> Rational {
    edges.into_iter().fold(Rational::zero(), |acc, e| acc + f(e))
}
