//! Graphic, uniform and partition matroids with deletion and contraction.
//!
//! A [`MatroidHandle`] is an immutable value: a base matroid plus the ordered
//! list of minor operations applied to it. Independence in the minor
//! `M / C \ D` is decided by extending a maximal independent subset of the
//! contracted elements `C`, so rank identities such as
//! `r_{M/e}(U) = r_M(U + e) - r_M({e})` hold by construction. Contracting a
//! loop leaves the independent sets unchanged.

use std::collections::{BTreeMap, BTreeSet};

use exact_lp::Rational;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::graph::{EdgeId, MultiGraph};
use crate::instance::{cost_to_value, parse_cost_value, validate_k, CostTriple, Instance, InstanceError};

/// Largest ground set accepted by exhaustive routines.
pub const MAX_EXHAUSTIVE_GROUND: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatroidError {
    #[error("element {0} is not in the ground set")]
    ElementNotInGround(EdgeId),
    #[error("ground set of {0} elements is too large for exhaustive enumeration")]
    GroundTooLarge(usize),
    #[error("no weight given for element {0}")]
    MissingWeight(EdgeId),
    #[error("greedy selection did not reach the rank")]
    NoBasis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    pub elements: BTreeSet<EdgeId>,
    pub capacity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// Forests of the graph (which may be disconnected).
    Graphic(MultiGraph),
    /// Sets of size at most `rank`.
    Uniform { rank: usize },
    /// Sets meeting each part in at most its capacity.
    Partition { parts: Vec<Part> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinorOp {
    Deleted(EdgeId),
    Contracted(EdgeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatroidHandle {
    family: Family,
    ground: BTreeSet<EdgeId>,
    minor_stack: Vec<MinorOp>,
    /// Maximal independent subset of the contracted elements, in the base matroid.
    contracted_basis: Vec<EdgeId>,
}

impl MatroidHandle {
    pub fn graphic(graph: MultiGraph) -> Self {
        let ground = graph.edge_ids().collect();
        Self::with_family(Family::Graphic(graph), ground)
    }

    pub fn uniform(ground: impl IntoIterator<Item = EdgeId>, rank: usize) -> Self {
        Self::with_family(Family::Uniform { rank }, ground.into_iter().collect())
    }

    /// Parts must be pairwise disjoint; the ground set is their union.
    pub fn partition(parts: Vec<Part>) -> Self {
        let ground = parts.iter().flat_map(|p| p.elements.iter().copied()).collect();
        Self::with_family(Family::Partition { parts }, ground)
    }

    fn with_family(family: Family, ground: BTreeSet<EdgeId>) -> Self {
        MatroidHandle { family, ground, minor_stack: Vec::new(), contracted_basis: Vec::new() }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn ground(&self) -> &BTreeSet<EdgeId> {
        &self.ground
    }

    pub fn minor_stack(&self) -> &[MinorOp] {
        &self.minor_stack
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.ground.contains(&e)
    }

    fn base_independent(&self, set: &[EdgeId]) -> bool {
        match &self.family {
            Family::Graphic(g) => g.is_forest(set.iter().copied()),
            Family::Uniform { rank } => set.len() <= *rank,
            Family::Partition { parts } => {
                parts.iter().all(|p| set.iter().filter(|e| p.elements.contains(e)).count() <= p.capacity)
            }
        }
    }

    fn check_subset<'a>(&self, set: impl IntoIterator<Item = &'a EdgeId>) -> Result<(), MatroidError> {
        match set.into_iter().find(|e| !self.ground.contains(e)) {
            Some(e) => Err(MatroidError::ElementNotInGround(*e)),
            None => Ok(()),
        }
    }

    /// Independence in the current minor.
    pub fn is_independent(&self, set: &BTreeSet<EdgeId>) -> Result<bool, MatroidError> {
        self.check_subset(set)?;
        let mut all = self.contracted_basis.clone();
        all.extend(set.iter().copied());
        Ok(self.base_independent(&all))
    }

    /// Size of a largest independent subset of `set`, grown greedily in
    /// increasing id order.
    pub fn rank(&self, set: &BTreeSet<EdgeId>) -> Result<usize, MatroidError> {
        self.check_subset(set)?;
        Ok(self.rank_unchecked(set.iter().copied()))
    }

    fn rank_unchecked(&self, set: impl IntoIterator<Item = EdgeId>) -> usize {
        let mut acc = self.contracted_basis.clone();
        let base = acc.len();
        for e in set {
            acc.push(e);
            if !self.base_independent(&acc) {
                acc.pop();
            }
        }
        acc.len() - base
    }

    /// `out[j]` is the rank of the first `j` elements of `order`.
    pub fn prefix_ranks(&self, order: &[EdgeId]) -> Result<Vec<usize>, MatroidError> {
        self.check_subset(order)?;
        let mut acc = self.contracted_basis.clone();
        let mut out = Vec::with_capacity(order.len() + 1);
        out.push(0);
        let mut r = 0;
        for &e in order {
            acc.push(e);
            if self.base_independent(&acc) {
                r += 1;
            } else {
                acc.pop();
            }
            out.push(r);
        }
        Ok(out)
    }

    pub fn full_rank(&self) -> usize {
        self.rank_unchecked(self.ground.iter().copied())
    }

    pub fn delete(&self, e: EdgeId) -> Result<MatroidHandle, MatroidError> {
        if !self.ground.contains(&e) {
            return Err(MatroidError::ElementNotInGround(e));
        }
        let mut m = self.clone();
        m.ground.remove(&e);
        m.minor_stack.push(MinorOp::Deleted(e));
        Ok(m)
    }

    pub fn contract(&self, e: EdgeId) -> Result<MatroidHandle, MatroidError> {
        if !self.ground.contains(&e) {
            return Err(MatroidError::ElementNotInGround(e));
        }
        let mut m = self.clone();
        m.ground.remove(&e);
        m.minor_stack.push(MinorOp::Contracted(e));
        m.contracted_basis.push(e);
        if !m.base_independent(&m.contracted_basis) {
            m.contracted_basis.pop();
        }
        Ok(m)
    }

    /// Elements of rank zero in the current minor.
    pub fn loops(&self) -> Vec<EdgeId> {
        self.ground.iter().copied().filter(|&e| self.rank_unchecked([e]) == 0).collect()
    }

    /// Minimum-weight basis; equal weights are taken in increasing id order.
    pub fn greedy_min_basis(&self, weight: &BTreeMap<EdgeId, Rational>) -> Result<BTreeSet<EdgeId>, MatroidError> {
        let mut order = Vec::with_capacity(self.ground.len());
        for &e in &self.ground {
            let w = weight.get(&e).ok_or(MatroidError::MissingWeight(e))?;
            order.push((w.clone(), e));
        }
        order.sort();
        let mut acc = self.contracted_basis.clone();
        let mut basis = BTreeSet::new();
        for (_, e) in order {
            acc.push(e);
            if self.base_independent(&acc) {
                basis.insert(e);
            } else {
                acc.pop();
            }
        }
        if basis.len() != self.full_rank() {
            return Err(MatroidError::NoBasis);
        }
        Ok(basis)
    }

    pub fn is_basis(&self, set: &BTreeSet<EdgeId>) -> bool {
        matches!(self.is_independent(set), Ok(true)) && set.len() == self.full_rank()
    }

    /// Every basis of the current minor, each as a sorted set, in
    /// lexicographic order.
    pub fn enumerate_bases(&self) -> Result<Vec<BTreeSet<EdgeId>>, MatroidError> {
        if self.ground.len() > MAX_EXHAUSTIVE_GROUND {
            return Err(MatroidError::GroundTooLarge(self.ground.len()));
        }
        let elems: Vec<EdgeId> = self.ground.iter().copied().collect();
        let r = self.full_rank();
        let mut out = Vec::new();
        let mut acc = self.contracted_basis.clone();
        let base = acc.len();
        self.extend_bases(&elems, 0, r, base, &mut acc, &mut out);
        Ok(out)
    }

    fn extend_bases(
        &self,
        elems: &[EdgeId],
        from: usize,
        r: usize,
        base: usize,
        acc: &mut Vec<EdgeId>,
        out: &mut Vec<BTreeSet<EdgeId>>,
    ) {
        let chosen = acc.len() - base;
        if chosen == r {
            out.push(acc[base..].iter().copied().collect());
            return;
        }
        if elems.len() - from < r - chosen {
            return;
        }
        for i in from..elems.len() {
            acc.push(elems[i]);
            if self.base_independent(acc) {
                self.extend_bases(elems, i + 1, r, base, acc, out);
            }
            acc.pop();
        }
    }

    /// The current minor of a graphic matroid as a multigraph, together with
    /// the ground elements that have become loops.
    pub fn minor_graph(&self) -> Option<(MultiGraph, Vec<EdgeId>)> {
        let Family::Graphic(base) = &self.family else {
            return None;
        };
        let mut g = base.clone();
        for op in &self.minor_stack {
            g = match *op {
                MinorOp::Deleted(e) if g.contains(e) => g.delete_edge(e).ok()?,
                MinorOp::Contracted(e) if g.contains(e) => g.contract_edge(e).ok()?,
                _ => g,
            };
        }
        let loops = self.ground.iter().copied().filter(|e| !g.contains(*e)).collect();
        Some((g, loops))
    }
}

/// A matroid together with interval costs and a recovery parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatroidInstance {
    matroid: MatroidHandle,
    costs: BTreeMap<EdgeId, CostTriple>,
    k: usize,
}

impl MatroidInstance {
    pub fn new(matroid: MatroidHandle, costs: BTreeMap<EdgeId, CostTriple>, k: usize) -> Result<Self, InstanceError> {
        let ground: BTreeSet<EdgeId> = costs.keys().copied().collect();
        if &ground != matroid.ground() {
            return Err(InstanceError::Validation("cost ids must match the matroid ground set exactly".into()));
        }
        for (e, c) in &costs {
            if [&c.first, &c.lower, &c.width].iter().any(|v| num_traits::Signed::is_negative(*v)) {
                return Err(InstanceError::Validation(format!("element {} has a negative cost", e.0)));
            }
        }
        if let Family::Partition { parts } = matroid.family() {
            let total: usize = parts.iter().map(|p| p.elements.len()).sum();
            if total != matroid.ground().len() {
                return Err(InstanceError::Validation("partition parts overlap".into()));
            }
        }
        if let Family::Uniform { rank } = matroid.family() {
            if *rank > matroid.ground().len() {
                return Err(InstanceError::Validation(format!(
                    "uniform rank {rank} exceeds ground size {}",
                    matroid.ground().len()
                )));
            }
        }
        let r = matroid.full_rank();
        if k > r {
            return Err(InstanceError::Validation(format!("k = {k} outside 0..={r}")));
        }
        Ok(MatroidInstance { matroid, costs, k })
    }

    /// The graphic matroid of a graph instance with the same costs and `k`.
    pub fn from_graph_instance(inst: &Instance) -> Self {
        MatroidInstance {
            matroid: MatroidHandle::graphic(inst.graph().clone()),
            costs: inst.costs().clone(),
            k: inst.k(),
        }
    }

    pub fn matroid(&self) -> &MatroidHandle {
        &self.matroid
    }

    pub fn costs(&self) -> &BTreeMap<EdgeId, CostTriple> {
        &self.costs
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn overlap_target(&self) -> usize {
        self.matroid.full_rank() - self.k
    }

    pub fn with_k(&self, k: usize) -> Result<Self, InstanceError> {
        MatroidInstance::new(self.matroid.clone(), self.costs.clone(), k)
    }

    pub fn to_json(&self) -> String {
        let mut obj = serde_json::Map::new();
        match self.matroid.family() {
            Family::Graphic(g) => {
                obj.insert("family".into(), "graphic".into());
                obj.insert("nodes".into(), g.node_count().into());
                let edges: Vec<Value> =
                    g.edges().map(|(id, u, v)| serde_json::json!({"id": id.0, "u": u, "v": v})).collect();
                obj.insert("edges".into(), edges.into());
            }
            Family::Uniform { rank } => {
                obj.insert("family".into(), "uniform".into());
                obj.insert("rank".into(), (*rank).into());
            }
            Family::Partition { parts } => {
                obj.insert("family".into(), "partition".into());
                obj.insert("parts".into(), serde_json::to_value(parts).expect("parts serialize"));
            }
        }
        obj.insert("k".into(), self.k.into());
        let costs: Vec<Value> = self
            .costs
            .iter()
            .map(|(id, c)| {
                serde_json::json!({
                    "id": id.0,
                    "C": cost_to_value(&c.first),
                    "c": cost_to_value(&c.lower),
                    "d": cost_to_value(&c.width),
                })
            })
            .collect();
        obj.insert("costs".into(), costs.into());
        serde_json::to_string_pretty(&Value::Object(obj)).expect("instance serializes")
    }
}

#[derive(Debug, Deserialize)]
struct MatroidFile {
    family: String,
    k: i64,
    costs: Vec<CostRecord>,
    nodes: Option<usize>,
    edges: Option<Vec<GraphEdge>>,
    rank: Option<usize>,
    parts: Option<Vec<Part>>,
}

#[derive(Debug, Deserialize)]
struct CostRecord {
    id: usize,
    #[serde(rename = "C")]
    first: Value,
    #[serde(rename = "c")]
    lower: Value,
    #[serde(rename = "d")]
    width: Value,
}

#[derive(Debug, Deserialize)]
struct GraphEdge {
    id: usize,
    u: usize,
    v: usize,
}

pub fn load_matroid_instance(text: &str) -> Result<MatroidInstance, InstanceError> {
    let file: MatroidFile = serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))?;
    let missing = |field: &str| InstanceError::Parse(format!("{} matroid needs \"{field}\"", file.family));
    let matroid = match file.family.as_str() {
        "graphic" => {
            let nodes = file.nodes.ok_or_else(|| missing("nodes"))?;
            let edges = file.edges.as_ref().ok_or_else(|| missing("edges"))?;
            let g = MultiGraph::new(nodes, edges.iter().map(|e| (EdgeId(e.id), e.u, e.v)))
                .map_err(|e| InstanceError::Validation(e.to_string()))?;
            MatroidHandle::graphic(g)
        }
        "uniform" => {
            let rank = file.rank.ok_or_else(|| missing("rank"))?;
            MatroidHandle::uniform(file.costs.iter().map(|c| EdgeId(c.id)), rank)
        }
        "partition" => MatroidHandle::partition(file.parts.clone().ok_or_else(|| missing("parts"))?),
        other => return Err(InstanceError::Parse(format!("unknown matroid family {other:?}"))),
    };
    let mut costs = BTreeMap::new();
    for rec in &file.costs {
        let triple = CostTriple::new(
            parse_cost_value(&rec.first, &format!("element {} C", rec.id))?,
            parse_cost_value(&rec.lower, &format!("element {} c", rec.id))?,
            parse_cost_value(&rec.width, &format!("element {} d", rec.id))?,
        );
        if costs.insert(EdgeId(rec.id), triple).is_some() {
            return Err(InstanceError::Validation(format!("element {} listed twice", rec.id)));
        }
    }
    let k = validate_k(file.k, matroid.full_rank())?;
    MatroidInstance::new(matroid, costs, k)
}
