//! Separation oracles for subtour constraints `x(E(U)) <= |U| - 1` and rank
//! constraints `x(U) <= r(U)`.
//!
//! Every oracle returns its violated cuts sorted by slack (most violated
//! first), then by the canonical encoding of the set, so callers that take
//! the first entry get a deterministic choice.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use exact_lp::Rational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::graph::{EdgeId, MultiGraph};
use crate::matroid::{Family, MatroidError, MatroidHandle, MAX_EXHAUSTIVE_GROUND};

/// Largest node count accepted by exhaustive subtour separation.
pub const MAX_EXHAUSTIVE_NODES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeparationError {
    #[error("{size} items exceed the exhaustive separation limit of {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("point has no value for {0}")]
    MissingValue(EdgeId),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
}

/// The set defining a cut: live node labels for subtour cuts, elements for
/// rank cuts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CutSet {
    Nodes(Vec<usize>),
    Elements(Vec<EdgeId>),
}

/// The constraint `sum(x_e for e in members) <= rhs`, violated by `-slack`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub set: CutSet,
    pub members: Vec<EdgeId>,
    pub rhs: usize,
    pub slack: Rational,
}

impl Cut {
    pub fn lhs(&self, point: &BTreeMap<EdgeId, Rational>) -> Rational {
        self.members.iter().filter_map(|e| point.get(e)).fold(Rational::zero(), |acc, v| acc + v)
    }

    /// Recomputes the slack from scratch and checks it is negative and
    /// matches the stored value.
    pub fn certifies(&self, point: &BTreeMap<EdgeId, Rational>) -> bool {
        let slack = Rational::from_integer(self.rhs.into()) - self.lhs(point);
        slack.is_negative() && slack == self.slack
    }
}

fn value(point: &BTreeMap<EdgeId, Rational>, e: EdgeId) -> Result<&Rational, SeparationError> {
    point.get(&e).ok_or(SeparationError::MissingValue(e))
}

fn sort_cuts(mut cuts: Vec<Cut>) -> Vec<Cut> {
    cuts.sort_by(|a, b| a.slack.cmp(&b.slack).then_with(|| a.set.cmp(&b.set)));
    cuts.dedup_by(|a, b| a.set == b.set);
    cuts
}

fn node_cut(point: &BTreeMap<EdgeId, Rational>, g: &MultiGraph, nodes: Vec<usize>) -> Cut {
    let members = g.edges_within(&nodes);
    let rhs = nodes.len() - 1;
    let lhs = members.iter().filter_map(|e| point.get(e)).fold(Rational::zero(), |acc, v| acc + v);
    Cut { set: CutSet::Nodes(nodes), members, rhs, slack: Rational::from_integer(rhs.into()) - lhs }
}

/// Residual network with paired arcs `i` and `i ^ 1`.
struct FlowNetwork {
    head: Vec<usize>,
    cap: Vec<Rational>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork { head: Vec::new(), cap: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: Rational) {
        self.adj[from].push(self.head.len());
        self.head.push(to);
        self.cap.push(cap);
        self.adj[to].push(self.head.len());
        self.head.push(from);
        self.cap.push(Rational::zero());
    }

    /// Shortest augmenting paths; returns the nodes on the source side of a
    /// minimum cut.
    fn min_cut_source_side(&mut self, s: usize, t: usize) -> Vec<bool> {
        loop {
            let mut via = vec![usize::MAX; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &a in &self.adj[u] {
                    let v = self.head[a];
                    if !seen[v] && self.cap[a].is_positive() {
                        seen[v] = true;
                        via[v] = a;
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return seen;
            }
            let mut bottleneck: Option<Rational> = None;
            let mut v = t;
            while v != s {
                let a = via[v];
                if bottleneck.as_ref().is_none_or(|b| self.cap[a] < *b) {
                    bottleneck = Some(self.cap[a].clone());
                }
                v = self.head[a ^ 1];
            }
            let b = bottleneck.expect("path has arcs");
            let mut v = t;
            while v != s {
                let a = via[v];
                self.cap[a] -= &b;
                self.cap[a ^ 1] += &b;
                v = self.head[a ^ 1];
            }
        }
    }
}

/// Violated subtour cuts found by one max-flow per forced vertex.
///
/// Each run marks one vertex `r` with sink capacity zero and forces a set of
/// vertices out of `U` with effectively infinite sink capacity; the runs
/// together cover every `U` with `2 <= |U| < node_count`, so the first cut
/// returned is a most violated one.
pub fn forest_cuts_mincut(point: &BTreeMap<EdgeId, Rational>, g: &MultiGraph) -> Result<Vec<Cut>, SeparationError> {
    let nodes = g.nodes();
    let n = nodes.len();
    if n < 3 {
        return Ok(Vec::new());
    }
    let idx = g.dense_index();
    let mut support = Vec::new();
    let mut total = Rational::zero();
    for (e, u, v) in g.edges() {
        let x = value(point, e)?;
        if x.is_positive() {
            total += x;
            support.push((x.clone(), idx[u], idx[v]));
        }
    }
    let infinite = total + Rational::from_integer(n.into()) + Rational::one();

    let mut runs: Vec<(usize, Vec<usize>)> = (1..n).map(|i| (i, (0..i).collect())).collect();
    runs.extend((1..n).map(|s| (0, vec![s])));

    let mut found = BTreeSet::new();
    let mut cuts = Vec::new();
    for (forced, out) in runs {
        let (source, sink) = (0, 1);
        let mut net = FlowNetwork::new(2 + n + support.len());
        for (i, (x, u, v)) in support.iter().enumerate() {
            let node = 2 + n + i;
            net.add_arc(source, node, x.clone());
            net.add_arc(node, 2 + u, infinite.clone());
            net.add_arc(node, 2 + v, infinite.clone());
        }
        for w in 0..n {
            if w == forced {
                continue;
            }
            let cap = if out.contains(&w) { infinite.clone() } else { Rational::one() };
            net.add_arc(2 + w, sink, cap);
        }
        let side = net.min_cut_source_side(source, sink);
        let set: Vec<usize> = (0..n).filter(|&w| side[2 + w]).map(|w| nodes[w]).collect();
        if set.len() < 2 || set.len() >= n || !found.insert(set.clone()) {
            continue;
        }
        let cut = node_cut(point, g, set);
        if cut.slack.is_negative() {
            cuts.push(cut);
        }
    }
    Ok(sort_cuts(cuts))
}

/// Every violated subtour cut, by enumerating all node subsets.
pub fn forest_cuts_exhaustive(point: &BTreeMap<EdgeId, Rational>, g: &MultiGraph) -> Result<Vec<Cut>, SeparationError> {
    let nodes = g.nodes();
    let n = nodes.len();
    if n > MAX_EXHAUSTIVE_NODES {
        return Err(SeparationError::TooLarge { size: n, limit: MAX_EXHAUSTIVE_NODES });
    }
    let idx = g.dense_index();
    let mut support = Vec::new();
    for (e, u, v) in g.edges() {
        let x = value(point, e)?;
        if x.is_positive() {
            support.push((x.clone(), (1u32 << idx[u]) | (1u32 << idx[v])));
        }
    }
    let mut cuts = Vec::new();
    for mask in 1u32..(1u32 << n) - 1 {
        let size = mask.count_ones() as usize;
        if size < 2 {
            continue;
        }
        let lhs = support.iter().filter(|(_, m)| mask & m == *m).fold(Rational::zero(), |acc, (x, _)| acc + x);
        if lhs > Rational::from_integer((size - 1).into()) {
            let set = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| nodes[i]).collect();
            cuts.push(node_cut(point, g, set));
        }
    }
    Ok(sort_cuts(cuts))
}

/// Most violated subtour cut via max-flow, or `None` if the point satisfies
/// every subtour constraint with `2 <= |U| < node_count`.
pub fn separate_forest(point: &BTreeMap<EdgeId, Rational>, g: &MultiGraph) -> Result<Option<Cut>, SeparationError> {
    Ok(forest_cuts_mincut(point, g)?.into_iter().next())
}

pub fn separate_forest_exhaustive(
    point: &BTreeMap<EdgeId, Rational>,
    g: &MultiGraph,
) -> Result<Option<Cut>, SeparationError> {
    Ok(forest_cuts_exhaustive(point, g)?.into_iter().next())
}

fn element_cut(point: &BTreeMap<EdgeId, Rational>, mut members: Vec<EdgeId>, rhs: usize) -> Cut {
    members.sort();
    let lhs = members.iter().filter_map(|e| point.get(e)).fold(Rational::zero(), |acc, v| acc + v);
    Cut { set: CutSet::Elements(members.clone()), members, rhs, slack: Rational::from_integer(rhs.into()) - lhs }
}

/// Elements of `ground` by decreasing value, ties by id.
fn by_value(
    point: &BTreeMap<EdgeId, Rational>,
    ground: impl IntoIterator<Item = EdgeId>,
) -> Result<Vec<EdgeId>, SeparationError> {
    let mut order = Vec::new();
    for e in ground {
        order.push((value(point, e)?.clone(), e));
    }
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(order.into_iter().map(|(_, e)| e).collect())
}

/// Best prefix of `order`: the length `j` maximising `x(order[..j]) - r(order[..j])`.
fn best_prefix(
    point: &BTreeMap<EdgeId, Rational>,
    m: &MatroidHandle,
    order: &[EdgeId],
) -> Result<Vec<(Rational, usize)>, SeparationError> {
    let ranks = m.prefix_ranks(order)?;
    let mut sum = Rational::zero();
    let mut out = Vec::with_capacity(order.len());
    for (j, e) in order.iter().enumerate() {
        sum += value(point, *e)?;
        out.push((&sum - Rational::from_integer(ranks[j + 1].into()), ranks[j + 1]));
    }
    Ok(out)
}

/// Violated rank cuts of the current minor.
///
/// Graphic matroids delegate to subtour separation on the minor graph
/// (loops with positive value give `x_e <= 0`). Uniform matroids check each
/// top-`j` set, partition matroids pick the best top-`j` set in every part.
/// With `exhaustive`, all subsets of the ground set are checked instead.
pub fn rank_cuts(
    point: &BTreeMap<EdgeId, Rational>,
    m: &MatroidHandle,
    exhaustive: bool,
) -> Result<Vec<Cut>, SeparationError> {
    if let Some((g, loops)) = m.minor_graph() {
        let mut cuts = Vec::new();
        for e in loops {
            if value(point, e)?.is_positive() {
                cuts.push(element_cut(point, vec![e], 0));
            }
        }
        cuts.extend(if exhaustive { forest_cuts_exhaustive(point, &g)? } else { forest_cuts_mincut(point, &g)? });
        return Ok(sort_cuts(cuts));
    }
    if exhaustive {
        return rank_cuts_exhaustive(point, m);
    }
    let mut cuts = Vec::new();
    match m.family() {
        Family::Uniform { .. } => {
            let order = by_value(point, m.ground().iter().copied())?;
            for (j, (excess, r)) in best_prefix(point, m, &order)?.into_iter().enumerate() {
                if excess.is_positive() {
                    cuts.push(element_cut(point, order[..=j].to_vec(), r));
                }
            }
        }
        Family::Partition { parts } => {
            let mut members = Vec::new();
            let mut rhs = 0;
            for part in parts {
                let order = by_value(point, part.elements.iter().copied().filter(|e| m.contains(*e)))?;
                let mut best = (Rational::zero(), 0, 0);
                for (j, (excess, r)) in best_prefix(point, m, &order)?.into_iter().enumerate() {
                    if excess > best.0 {
                        best = (excess, j + 1, r);
                    }
                }
                members.extend_from_slice(&order[..best.1]);
                rhs += best.2;
            }
            if !members.is_empty() {
                cuts.push(element_cut(point, members, rhs));
            }
        }
        Family::Graphic(_) => unreachable!("graphic handled above"),
    }
    Ok(sort_cuts(cuts))
}

fn rank_cuts_exhaustive(point: &BTreeMap<EdgeId, Rational>, m: &MatroidHandle) -> Result<Vec<Cut>, SeparationError> {
    let ground: Vec<EdgeId> = m.ground().iter().copied().collect();
    if ground.len() > MAX_EXHAUSTIVE_GROUND {
        return Err(MatroidError::GroundTooLarge(ground.len()).into());
    }
    let values: Vec<Rational> = ground.iter().map(|e| value(point, *e).cloned()).collect::<Result<_, _>>()?;
    let mut cuts = Vec::new();
    for mask in 1u32..(1u32 << ground.len()) {
        let subset: BTreeSet<EdgeId> = (0..ground.len()).filter(|&i| mask >> i & 1 == 1).map(|i| ground[i]).collect();
        let lhs = (0..ground.len()).filter(|&i| mask >> i & 1 == 1).fold(Rational::zero(), |acc, i| acc + &values[i]);
        let r = m.rank(&subset)?;
        if lhs > Rational::from_integer(r.into()) {
            cuts.push(element_cut(point, subset.into_iter().collect(), r));
        }
    }
    Ok(sort_cuts(cuts))
}

/// Most violated rank cut of the current minor, or `None`.
pub fn separate_rank(point: &BTreeMap<EdgeId, Rational>, m: &MatroidHandle) -> Result<Option<Cut>, SeparationError> {
    Ok(rank_cuts(point, m, false)?.into_iter().next())
}
