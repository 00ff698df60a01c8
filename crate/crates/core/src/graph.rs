//! Undirected multigraphs with contraction and deletion.
//!
//! Edges keep their [`EdgeId`] for their whole life, so a contracted graph can
//! always be related back to the instance it came from. Nodes are identified
//! by their original label; after contractions each live node is named by the
//! smallest original label merged into it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("edge {edge} has endpoint {node} outside [0, {node_count})")]
    NodeOutOfRange { edge: EdgeId, node: usize, node_count: usize },
    #[error("edge {0} is a self-loop")]
    SelfLoop(EdgeId),
    #[error("edge id {0} is used more than once")]
    DuplicateEdge(EdgeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    /// Canonical live node for every original node.
    rep: Vec<usize>,
    node_count: usize,
    /// Original endpoints of every live edge.
    edges: BTreeMap<EdgeId, (usize, usize)>,
}

impl MultiGraph {
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (EdgeId, usize, usize)>) -> Result<Self, GraphError> {
        let mut map = BTreeMap::new();
        for (id, u, v) in edges {
            for node in [u, v] {
                if node >= node_count {
                    return Err(GraphError::NodeOutOfRange { edge: id, node, node_count });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(id));
            }
            if map.insert(id, (u, v)).is_some() {
                return Err(GraphError::DuplicateEdge(id));
            }
        }
        Ok(MultiGraph { rep: (0..node_count).collect(), node_count, edges: map })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of nodes before any contraction.
    pub fn original_node_count(&self) -> usize {
        self.rep.len()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.contains_key(&e)
    }

    /// Live edge ids in increasing order.
    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.keys().copied()
    }

    /// Live edges with their current endpoints.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, usize, usize)> + '_ {
        self.edges.iter().map(|(&id, &(u, v))| (id, self.rep[u], self.rep[v]))
    }

    pub fn endpoints(&self, e: EdgeId) -> Option<(usize, usize)> {
        self.edges.get(&e).map(|&(u, v)| (self.rep[u], self.rep[v]))
    }

    pub fn original_endpoints(&self, e: EdgeId) -> Option<(usize, usize)> {
        self.edges.get(&e).copied()
    }

    /// Live node labels in increasing order.
    pub fn nodes(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.rep.iter().copied().collect();
        set.into_iter().collect()
    }

    /// Live node that `original` has been merged into.
    pub fn canonical(&self, original: usize) -> usize {
        self.rep[original]
    }

    /// Dense index `0..node_count` for every original node, following live
    /// node order.
    pub fn dense_index(&self) -> Vec<usize> {
        let nodes = self.nodes();
        let mut pos = vec![0; self.rep.len()];
        for (i, &n) in nodes.iter().enumerate() {
            pos[n] = i;
        }
        self.rep.iter().map(|&r| pos[r]).collect()
    }

    /// Contracts `e`, also returning the edges that became self-loops and were
    /// dropped.
    pub fn contract_with_loops(&self, e: EdgeId) -> Result<(MultiGraph, Vec<EdgeId>), GraphError> {
        let (u, v) = self.endpoints(e).ok_or(GraphError::UnknownEdge(e))?;
        let (keep, gone) = (u.min(v), u.max(v));
        let mut g = self.clone();
        g.edges.remove(&e);
        for r in g.rep.iter_mut() {
            if *r == gone {
                *r = keep;
            }
        }
        g.node_count -= 1;
        let loops: Vec<EdgeId> =
            g.edges.iter().filter(|(_, &(a, b))| g.rep[a] == g.rep[b]).map(|(&id, _)| id).collect();
        for id in &loops {
            g.edges.remove(id);
        }
        Ok((g, loops))
    }

    pub fn contract_edge(&self, e: EdgeId) -> Result<MultiGraph, GraphError> {
        self.contract_with_loops(e).map(|(g, _)| g)
    }

    pub fn delete_edge(&self, e: EdgeId) -> Result<MultiGraph, GraphError> {
        if !self.contains(e) {
            return Err(GraphError::UnknownEdge(e));
        }
        let mut g = self.clone();
        g.edges.remove(&e);
        Ok(g)
    }

    /// Edges with both current endpoints in `nodes` (live labels).
    pub fn edges_within(&self, nodes: &[usize]) -> Vec<EdgeId> {
        let set: BTreeSet<usize> = nodes.iter().copied().collect();
        self.edges().filter(|(_, u, v)| set.contains(u) && set.contains(v)).map(|(id, _, _)| id).collect()
    }

    /// Number of connected components of (live nodes, `subset`).
    pub fn component_count_of(&self, subset: impl IntoIterator<Item = EdgeId>) -> usize {
        let idx = self.dense_index();
        let mut dsu = Dsu::new(self.node_count);
        let mut comps = self.node_count;
        for e in subset {
            if let Some(&(u, v)) = self.edges.get(&e) {
                if dsu.union(idx[u], idx[v]) {
                    comps -= 1;
                }
            }
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.component_count_of(self.edge_ids()) <= 1
    }

    /// True when `edges` is a spanning tree of this graph.
    pub fn is_spanning_tree(&self, edges: &BTreeSet<EdgeId>) -> bool {
        edges.iter().all(|e| self.contains(*e))
            && edges.len() + 1 == self.node_count
            && self.component_count_of(edges.iter().copied()) == 1
    }

    /// True when `edges` contains no cycle.
    pub fn is_forest(&self, edges: impl IntoIterator<Item = EdgeId>) -> bool {
        let idx = self.dense_index();
        let mut dsu = Dsu::new(self.node_count);
        edges.into_iter().all(|e| match self.edges.get(&e) {
            Some(&(u, v)) => dsu.union(idx[u], idx[v]),
            None => false,
        })
    }

    /// Kruskal's algorithm; equal weights are taken in increasing id order.
    /// Returns a spanning forest when the graph is disconnected.
    pub fn min_spanning_forest<W: Ord + Clone>(&self, weight: impl Fn(EdgeId) -> W) -> Vec<EdgeId> {
        let mut order: Vec<(W, EdgeId)> = self.edge_ids().map(|e| (weight(e), e)).collect();
        order.sort();
        let idx = self.dense_index();
        let mut dsu = Dsu::new(self.node_count);
        let mut out: Vec<EdgeId> = order
            .into_iter()
            .filter(|(_, e)| {
                let (u, v) = self.edges[e];
                dsu.union(idx[u], idx[v])
            })
            .map(|(_, e)| e)
            .collect();
        out.sort();
        out
    }
}

/// Union-find over `0..n`.
#[derive(Debug, Clone)]
pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes of `a` and `b`; false if they were already merged.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}
