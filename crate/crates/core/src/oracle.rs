//! Brute-force reference solvers.
//!
//! These enumerate every spanning tree or basis and scan all pairs, so they
//! are only usable on small instances. Limits are hard errors.

use std::collections::{BTreeMap, BTreeSet};

use exact_lp::Rational;
use thiserror::Error;

use crate::graph::{EdgeId, MultiGraph};
use crate::instance::{total, CostTriple, Instance};
use crate::matroid::{MatroidError, MatroidInstance};
use crate::solver::Solution;

pub const MAX_TREES: usize = 1_000_000;
pub const MAX_PAIRS: u64 = 100_000_000;
pub const MAX_ORACLE_GROUND: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("more than {0} spanning trees")]
    TooManyTrees(usize),
    #[error("{0} pairs exceed the scan limit")]
    TooManyPairs(u64),
    #[error("ground set of {0} elements is too large for the oracle")]
    GroundTooLarge(usize),
    #[error("no feasible pair")]
    NoFeasiblePair,
    #[error(transparent)]
    Matroid(#[from] MatroidError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreePairResult {
    pub best_x: BTreeSet<EdgeId>,
    pub best_y: BTreeSet<EdgeId>,
    pub best_cost: Rational,
    pub pairs_examined: u64,
}

impl TreePairResult {
    /// The pair in solver format. `Z` holds the `overlap_target` smallest
    /// common ids and no relaxation is involved, so the bound is the cost.
    pub fn to_solution(&self, costs: &BTreeMap<EdgeId, CostTriple>, overlap_target: usize) -> Solution {
        let first_stage = total(&self.best_x, |e| costs[e].first.clone());
        let second_stage = total(&self.best_y, |e| costs[e].second_stage());
        Solution {
            z: self.best_x.intersection(&self.best_y).take(overlap_target).copied().collect(),
            x: self.best_x.clone(),
            y: self.best_y.clone(),
            total: &first_stage + &second_stage,
            first_stage,
            second_stage,
            lp_bound: self.best_cost.clone(),
            iterations: 0,
        }
    }
}

/// Every spanning tree of `g` exactly once, sorted lexicographically by
/// their sorted edge ids.
pub fn enumerate_spanning_trees(g: &MultiGraph) -> Result<Vec<BTreeSet<EdgeId>>, OracleError> {
    let mut out = Vec::new();
    if g.is_connected() {
        let mut chosen = Vec::new();
        trees_rec(g, &mut chosen, &mut out)?;
    }
    out.sort_by(|a: &BTreeSet<EdgeId>, b| a.iter().cmp(b.iter()));
    Ok(out)
}

/// Trees containing the first edge (contract it) plus trees avoiding it
/// (delete it, if the rest stays connected).
fn trees_rec(g: &MultiGraph, chosen: &mut Vec<EdgeId>, out: &mut Vec<BTreeSet<EdgeId>>) -> Result<(), OracleError> {
    if g.node_count() == 1 {
        if out.len() == MAX_TREES {
            return Err(OracleError::TooManyTrees(MAX_TREES));
        }
        out.push(chosen.iter().copied().collect());
        return Ok(());
    }
    let e = g.edge_ids().next().expect("connected graph with two nodes has an edge");
    chosen.push(e);
    trees_rec(&g.contract_edge(e).expect("live edge"), chosen, out)?;
    chosen.pop();
    let rest = g.delete_edge(e).expect("live edge");
    if rest.is_connected() {
        trees_rec(&rest, chosen, out)?;
    }
    Ok(())
}

fn bits(set: &BTreeSet<EdgeId>, index: &BTreeMap<EdgeId, usize>, words: usize) -> Vec<u64> {
    let mut w = vec![0u64; words];
    for e in set {
        let i = index[e];
        w[i / 64] |= 1 << (i % 64);
    }
    w
}

/// Exhaustive scan over ordered pairs with overlap at least `required`.
/// Pairs are visited in lexicographic order and only strictly better pairs
/// replace the incumbent, so ties go to the smallest `(X, Y)`.
fn best_pair(
    sets: &[BTreeSet<EdgeId>],
    costs: &BTreeMap<EdgeId, CostTriple>,
    required: usize,
) -> Result<TreePairResult, OracleError> {
    let pairs = (sets.len() as u64).saturating_mul(sets.len() as u64);
    if pairs > MAX_PAIRS {
        return Err(OracleError::TooManyPairs(pairs));
    }
    let index: BTreeMap<EdgeId, usize> = costs.keys().enumerate().map(|(i, e)| (*e, i)).collect();
    let words = index.len().div_ceil(64).max(1);
    let masks: Vec<Vec<u64>> = sets.iter().map(|s| bits(s, &index, words)).collect();
    let first: Vec<Rational> = sets.iter().map(|s| total(s, |e| costs[e].first.clone())).collect();
    let second: Vec<Rational> = sets.iter().map(|s| total(s, |e| costs[e].second_stage())).collect();
    let mut best: Option<(Rational, usize, usize)> = None;
    for i in 0..sets.len() {
        for j in 0..sets.len() {
            let overlap: u32 = masks[i].iter().zip(&masks[j]).map(|(a, b)| (a & b).count_ones()).sum();
            if (overlap as usize) < required {
                continue;
            }
            let cost = &first[i] + &second[j];
            if best.as_ref().is_none_or(|(b, _, _)| cost < *b) {
                best = Some((cost, i, j));
            }
        }
    }
    let (best_cost, i, j) = best.ok_or(OracleError::NoFeasiblePair)?;
    Ok(TreePairResult { best_x: sets[i].clone(), best_y: sets[j].clone(), best_cost, pairs_examined: pairs })
}

pub fn brute_force_rrst(inst: &Instance) -> Result<TreePairResult, OracleError> {
    let trees = enumerate_spanning_trees(inst.graph())?;
    best_pair(&trees, inst.costs(), inst.overlap_target())
}

pub fn brute_force_rrmb(minst: &MatroidInstance) -> Result<TreePairResult, OracleError> {
    let size = minst.matroid().ground().len();
    if size > MAX_ORACLE_GROUND {
        return Err(OracleError::GroundTooLarge(size));
    }
    let bases = minst.matroid().enumerate_bases()?;
    best_pair(&bases, minst.costs(), minst.overlap_target())
}
