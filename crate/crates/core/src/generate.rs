//! Seeded instance generators and the builtin suite of small graphs.

use std::collections::{BTreeMap, BTreeSet};

use exact_lp::{int, Rational};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{EdgeId, MultiGraph};
use crate::instance::{CostTriple, Instance, InstanceError};
use crate::matroid::{MatroidHandle, MatroidInstance, Part};

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub nodes: usize,
    /// Probability of each edge outside the random spanning tree.
    pub density: f64,
    pub k: usize,
    pub cost_max: u64,
    pub seed: u64,
}

fn random_triple(rng: &mut ChaCha8Rng, cost_max: u64) -> CostTriple {
    let mut draw = || Rational::from_integer(rng.gen_range(0..=cost_max).into());
    let first = draw();
    let lower = draw();
    let width = draw();
    CostTriple::new(first, lower, width)
}

/// A random spanning tree plus every other node pair with probability
/// `density`, with integer costs uniform in `[0, cost_max]`. Edge ids follow
/// the lexicographic order of the endpoint pairs.
pub fn random_instance(p: &GenParams) -> Result<Instance, InstanceError> {
    if p.nodes == 0 {
        return Err(InstanceError::Validation("need at least one node".into()));
    }
    if !(0.0..=1.0).contains(&p.density) {
        return Err(InstanceError::Validation(format!("density {} outside [0, 1]", p.density)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut order: Vec<usize> = (0..p.nodes).collect();
    order.shuffle(&mut rng);
    let mut pairs = BTreeSet::new();
    for i in 1..p.nodes {
        let j = rng.gen_range(0..i);
        let (u, v) = (order[i], order[j]);
        pairs.insert((u.min(v), u.max(v)));
    }
    for u in 0..p.nodes {
        for v in u + 1..p.nodes {
            if !pairs.contains(&(u, v)) && rng.gen_bool(p.density) {
                pairs.insert((u, v));
            }
        }
    }
    let edges: Vec<(EdgeId, usize, usize)> =
        pairs.into_iter().enumerate().map(|(i, (u, v))| (EdgeId(i), u, v)).collect();
    let costs = edges.iter().map(|(e, _, _)| (*e, random_triple(&mut rng, p.cost_max))).collect();
    let graph = MultiGraph::new(p.nodes, edges).map_err(|e| InstanceError::Validation(e.to_string()))?;
    Instance::new(graph, costs, p.k)
}

fn random_costs(
    ids: impl IntoIterator<Item = EdgeId>,
    cost_max: u64,
    rng: &mut ChaCha8Rng,
) -> BTreeMap<EdgeId, CostTriple> {
    ids.into_iter().map(|e| (e, random_triple(rng, cost_max))).collect()
}

/// `U_{rank,size}` with random costs.
pub fn random_uniform(
    size: usize,
    rank: usize,
    k: usize,
    cost_max: u64,
    seed: u64,
) -> Result<MatroidInstance, InstanceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = MatroidHandle::uniform((0..size).map(EdgeId), rank);
    let costs = random_costs((0..size).map(EdgeId), cost_max, &mut rng);
    MatroidInstance::new(m, costs, k)
}

/// A partition matroid on `size` elements split into `parts` nonempty
/// blocks, each with a random capacity between 1 and its size.
pub fn random_partition(
    size: usize,
    parts: usize,
    k: usize,
    cost_max: u64,
    seed: u64,
) -> Result<MatroidInstance, InstanceError> {
    if parts == 0 || parts > size {
        return Err(InstanceError::Validation(format!("cannot split {size} elements into {parts} parts")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<EdgeId> = (0..size).map(EdgeId).collect();
    ids.shuffle(&mut rng);
    let mut blocks: Vec<BTreeSet<EdgeId>> = ids[..parts].iter().map(|e| [*e].into()).collect();
    for e in &ids[parts..] {
        let b = rng.gen_range(0..parts);
        blocks[b].insert(*e);
    }
    let parts: Vec<Part> = blocks
        .into_iter()
        .map(|elements| {
            let capacity = rng.gen_range(1..=elements.len());
            Part { elements, capacity }
        })
        .collect();
    let costs = random_costs((0..size).map(EdgeId), cost_max, &mut rng);
    MatroidInstance::new(MatroidHandle::partition(parts), costs, k)
}

/// Edge lists of all connected simple graphs on `n` nodes up to isomorphism.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << pairs.len()) {
        let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|&i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
        if edges.len() + 1 < n {
            continue;
        }
        let g =
            MultiGraph::new(n, edges.iter().enumerate().map(|(i, &(u, v))| (EdgeId(i), u, v))).expect("simple graph");
        if !g.is_connected() {
            continue;
        }
        let canonical = perms
            .iter()
            .map(|p| {
                let mut relabeled: Vec<(usize, usize)> =
                    edges.iter().map(|&(u, v)| (p[u].min(p[v]), p[u].max(p[v]))).collect();
                relabeled.sort();
                relabeled
            })
            .min()
            .expect("at least one permutation");
        if seen.insert(canonical) {
            out.push(edges);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostPattern {
    /// `C = c = 1`, `d = 0`.
    Unit,
    /// `C` increasing and `c + d` decreasing in edge id.
    Anti,
    /// Integers in `[0, 9]` from a fixed seed.
    Random,
}

impl CostPattern {
    pub const ALL: [CostPattern; 3] = [CostPattern::Unit, CostPattern::Anti, CostPattern::Random];

    pub fn name(self) -> &'static str {
        match self {
            CostPattern::Unit => "unit",
            CostPattern::Anti => "anti",
            CostPattern::Random => "random",
        }
    }

    fn costs(self, m: usize, seed: u64) -> BTreeMap<EdgeId, CostTriple> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|i| {
                let t = match self {
                    CostPattern::Unit => CostTriple::new(int(1), int(1), int(0)),
                    CostPattern::Anti => CostTriple::new(int(i as i64 + 1), int((m - i) as i64), int(1)),
                    CostPattern::Random => random_triple(&mut rng, 9),
                };
                (EdgeId(i), t)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub name: String,
    pub instance: Instance,
}

/// Every connected graph on at most `max_nodes` nodes up to isomorphism,
/// with each cost pattern and every `k` in `0..n`.
pub fn small_suite(max_nodes: usize) -> Vec<SuiteCase> {
    let mut out = Vec::new();
    for n in 1..=max_nodes {
        for (gi, edges) in connected_graphs(n).into_iter().enumerate() {
            let graph = MultiGraph::new(n, edges.iter().enumerate().map(|(i, &(u, v))| (EdgeId(i), u, v)))
                .expect("simple graph");
            for pattern in CostPattern::ALL {
                let costs = pattern.costs(edges.len(), (n * 1000 + gi) as u64);
                for k in 0..n {
                    let instance = Instance::new(graph.clone(), costs.clone(), k).expect("valid suite instance");
                    out.push(SuiteCase { name: format!("n{n}-g{gi}-{}-k{k}", pattern.name()), instance });
                }
            }
        }
    }
    out
}

/// The suite used by `compare --suite builtin-small`.
pub fn builtin_small_suite() -> Vec<SuiteCase> {
    small_suite(5)
}
