//! The iterative relaxation loop.
//!
//! Each iteration solves the relaxation at a vertex, drops elements whose
//! variable is zero, fixes elements at one by contraction and moves elements
//! fixed on both sides from the candidate set `E_Z` into the certified
//! overlap `Z`. Throughout, `L + |Z|` equals the required overlap.

use std::collections::{BTreeMap, BTreeSet};

use exact_lp::{format_rational, parse_rational, Rational};
use log::{debug, info};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::EdgeId;
use crate::instance::{total, CostTriple, Instance};
use crate::matroid::MatroidInstance;
use crate::model::{
    build_relaxation, cutting_plane_solve, BasisSide, CuttingPlaneOutcome, GraphSide, MatroidSide, ModelConfig,
    ModelError, ModelShape,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("vertex in iteration {iteration} has no coordinate equal to 1")]
    NoIntegralCoordinate { iteration: usize },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FixingMode {
    /// Fix every coordinate at one.
    #[default]
    Batch,
    /// Fix at most one coordinate per side, the one with the smallest id.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolverConfig {
    pub fixing: FixingMode,
    pub model: ModelConfig,
    /// Keep solving relaxations once `E_Z` is empty instead of completing
    /// both sides with minimum spanning trees.
    pub lp_completion: bool,
}

#[derive(Debug, Clone)]
pub struct SolverState<S> {
    pub x_side: S,
    pub y_side: S,
    pub ez: BTreeSet<EdgeId>,
    pub budget: usize,
    pub x: BTreeSet<EdgeId>,
    pub y: BTreeSet<EdgeId>,
    pub z: BTreeSet<EdgeId>,
    pub iteration: usize,
    pub overlap_target: usize,
}

impl<S: BasisSide> SolverState<S> {
    pub fn new(x_side: S, y_side: S, ez: BTreeSet<EdgeId>, overlap_target: usize) -> Self {
        SolverState {
            x_side,
            y_side,
            ez,
            budget: overlap_target,
            x: BTreeSet::new(),
            y: BTreeSet::new(),
            z: BTreeSet::new(),
            iteration: 0,
            overlap_target,
        }
    }

    pub fn is_done(&self) -> bool {
        !self.x_side.is_active() && !self.y_side.is_active()
    }

    pub fn check_invariants(&self) -> Result<(), SolverError> {
        let fail = |msg: String| Err(SolverError::Invariant(msg));
        if self.budget + self.z.len() != self.overlap_target {
            return fail(format!("L + |Z| = {} + {} differs from {}", self.budget, self.z.len(), self.overlap_target));
        }
        if let Some(e) = self.z.iter().find(|e| !self.x.contains(e) || !self.y.contains(e)) {
            return fail(format!("{e} is in Z but not in both X and Y"));
        }
        let ex: BTreeSet<EdgeId> = self.x_side.elements().into_iter().collect();
        let ey: BTreeSet<EdgeId> = self.y_side.elements().into_iter().collect();
        for e in &self.ez {
            if self.x.contains(e) && self.y.contains(e) {
                return fail(format!("{e} is still a candidate although fixed on both sides"));
            }
            if !(ex.contains(e) || self.x.contains(e)) || !(ey.contains(e) || self.y.contains(e)) {
                return fail(format!("candidate {e} is no longer available on both sides"));
            }
        }
        Ok(())
    }
}

/// What happened in one iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub shape: ModelShape,
    pub lp_objective: Rational,
    pub lp_solves: usize,
    pub cuts: usize,
    pub removed: usize,
    pub fixed_x: Vec<EdgeId>,
    pub fixed_y: Vec<EdgeId>,
    pub moved_to_z: Vec<EdgeId>,
    /// `L` and `|Z|` after the iteration.
    pub budget: usize,
    pub z_count: usize,
}

fn remove_zeros<S: BasisSide>(side: &mut S, values: &BTreeMap<EdgeId, Rational>) -> Result<usize, SolverError> {
    let mut n = 0;
    for (e, v) in values {
        if v.is_zero() {
            side.delete(*e)?;
            n += 1;
        }
    }
    Ok(n)
}

fn unit_coordinates(values: &BTreeMap<EdgeId, Rational>, mode: FixingMode) -> Vec<EdgeId> {
    let ones = values.iter().filter(|(_, v)| v.is_one()).map(|(e, _)| *e);
    match mode {
        FixingMode::Batch => ones.collect(),
        FixingMode::Strict => ones.take(1).collect(),
    }
}

fn fix<S: BasisSide>(side: &mut S, chosen: &mut BTreeSet<EdgeId>, edges: &[EdgeId]) -> Result<(), SolverError> {
    for &e in edges {
        chosen.insert(e);
        let loops = side.contract(e)?;
        if !loops.is_empty() {
            return Err(SolverError::Invariant(format!(
                "fixing {e} turned {loops:?} into loops although they had positive value"
            )));
        }
    }
    Ok(())
}

/// Applies one vertex to the state: zero removal, fixing, then `Z`
/// bookkeeping.
pub fn iterate_once<S: BasisSide>(
    mut state: SolverState<S>,
    vertex: &CuttingPlaneOutcome,
    shape: ModelShape,
    mode: FixingMode,
) -> Result<(SolverState<S>, IterationRecord), SolverError> {
    state.iteration += 1;
    let mut removed = 0;
    for (e, v) in &vertex.z {
        if v.is_zero() {
            state.ez.remove(e);
            removed += 1;
        }
    }
    removed += remove_zeros(&mut state.x_side, &vertex.x)?;
    removed += remove_zeros(&mut state.y_side, &vertex.y)?;

    let fixed_x = unit_coordinates(&vertex.x, mode);
    let fixed_y = unit_coordinates(&vertex.y, mode);
    if fixed_x.is_empty() && fixed_y.is_empty() {
        return Err(SolverError::NoIntegralCoordinate { iteration: state.iteration });
    }
    fix(&mut state.x_side, &mut state.x, &fixed_x)?;
    fix(&mut state.y_side, &mut state.y, &fixed_y)?;

    let moved: Vec<EdgeId> = state.ez.iter().copied().filter(|e| state.x.contains(e) && state.y.contains(e)).collect();
    for e in &moved {
        if state.budget == 0 {
            return Err(SolverError::Invariant(format!("overlap budget exhausted before moving {e}")));
        }
        state.ez.remove(e);
        state.z.insert(*e);
        state.budget -= 1;
    }
    state.check_invariants()?;
    debug!(
        "iteration {}: removed {removed}, fixed x {fixed_x:?}, fixed y {fixed_y:?}, L = {}",
        state.iteration, state.budget
    );
    let record = IterationRecord {
        iteration: state.iteration,
        shape,
        lp_objective: vertex.objective.clone(),
        lp_solves: vertex.objectives.len(),
        cuts: vertex.cuts.len(),
        removed,
        fixed_x,
        fixed_y,
        moved_to_z: moved,
        budget: state.budget,
        z_count: state.z.len(),
    };
    Ok((state, record))
}

fn weights(costs: &BTreeMap<EdgeId, CostTriple>, f: impl Fn(&CostTriple) -> Rational) -> BTreeMap<EdgeId, Rational> {
    costs.iter().map(|(e, c)| (*e, f(c))).collect()
}

/// Completes both sides with minimum-weight spanning trees or bases once no
/// candidates remain. Returns the elements added to `X` and to `Y`.
pub fn finish_integral<S: BasisSide>(
    state: &mut SolverState<S>,
    costs: &BTreeMap<EdgeId, CostTriple>,
) -> Result<(BTreeSet<EdgeId>, BTreeSet<EdgeId>), SolverError> {
    if !state.ez.is_empty() || state.budget != 0 {
        return Err(SolverError::Invariant("completion requires E_Z empty and L = 0".into()));
    }
    let bx = state.x_side.min_basis(&weights(costs, |c| c.first.clone()))?;
    let by = state.y_side.min_basis(&weights(costs, CostTriple::second_stage))?;
    let (ax, ay): (Vec<_>, Vec<_>) = (bx.iter().copied().collect(), by.iter().copied().collect());
    fix(&mut state.x_side, &mut state.x, &ax)?;
    fix(&mut state.y_side, &mut state.y, &ay)?;
    for side_left in [state.x_side.elements(), state.y_side.elements()] {
        if !side_left.is_empty() {
            return Err(SolverError::Invariant("completion left elements behind".into()));
        }
    }
    Ok((bx, by))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub x: BTreeSet<EdgeId>,
    pub y: BTreeSet<EdgeId>,
    pub z: BTreeSet<EdgeId>,
    pub first_stage: Rational,
    pub second_stage: Rational,
    pub total: Rational,
    pub lp_bound: Rational,
    pub iterations: usize,
}

#[derive(Serialize, Deserialize)]
struct SolutionFile {
    #[serde(rename = "X")]
    x: Vec<usize>,
    #[serde(rename = "Y")]
    y: Vec<usize>,
    #[serde(rename = "Z")]
    z: Vec<usize>,
    first_stage: String,
    second_stage: String,
    total: String,
    lp_bound: String,
    iterations: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("bad solution file: {0}")]
pub struct SolutionParseError(pub String);

impl Solution {
    pub fn to_json(&self) -> String {
        let ids = |s: &BTreeSet<EdgeId>| s.iter().map(|e| e.0).collect();
        let file = SolutionFile {
            x: ids(&self.x),
            y: ids(&self.y),
            z: ids(&self.z),
            first_stage: format_rational(&self.first_stage),
            second_stage: format_rational(&self.second_stage),
            total: format_rational(&self.total),
            lp_bound: format_rational(&self.lp_bound),
            iterations: self.iterations,
        };
        serde_json::to_string(&file).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SolutionParseError> {
        let file: SolutionFile = serde_json::from_str(text).map_err(|e| SolutionParseError(e.to_string()))?;
        let num = |s: &str| parse_rational(s).map_err(|e| SolutionParseError(e.to_string()));
        let ids = |v: &[usize]| v.iter().map(|&i| EdgeId(i)).collect();
        Ok(Solution {
            x: ids(&file.x),
            y: ids(&file.y),
            z: ids(&file.z),
            first_stage: num(&file.first_stage)?,
            second_stage: num(&file.second_stage)?,
            total: num(&file.total)?,
            lp_bound: num(&file.lp_bound)?,
            iterations: file.iterations,
        })
    }
}

/// A solution with the per-iteration trace that produced it.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Solution,
    pub trace: Vec<IterationRecord>,
    pub lp_solves: usize,
    pub cuts: usize,
}

fn run<S: BasisSide>(
    mut state: SolverState<S>,
    costs: &BTreeMap<EdgeId, CostTriple>,
    config: &SolverConfig,
) -> Result<SolveReport, SolverError> {
    state.check_invariants()?;
    let mut trace = Vec::new();
    let mut lp_bound = None;
    let mut finished_with_trees = false;
    while !state.is_done() {
        if state.ez.is_empty() && !config.lp_completion {
            let (bx, by) = finish_integral(&mut state, costs)?;
            finished_with_trees = !(bx.is_empty() && by.is_empty());
            break;
        }
        let mut model =
            build_relaxation(&state.x_side, &state.y_side, &state.ez, state.budget, costs, config.model.carry_cuts)?;
        let shape = model.shape;
        let outcome = cutting_plane_solve(&mut model, &mut state.x_side, &mut state.y_side, &state.ez, &config.model)?;
        lp_bound.get_or_insert_with(|| outcome.objective.clone());
        let (next, record) = iterate_once(state, &outcome, shape, config.fixing)?;
        state = next;
        trace.push(record);
    }
    if state.budget != 0 || state.z.len() != state.overlap_target {
        return Err(SolverError::Invariant(format!(
            "terminated with L = {} and |Z| = {}",
            state.budget,
            state.z.len()
        )));
    }
    state.check_invariants()?;
    let first_stage = total(&state.x, |e| costs[e].first.clone());
    let second_stage = total(&state.y, |e| costs[e].second_stage());
    let total_cost = &first_stage + &second_stage;
    let solution = Solution {
        lp_bound: lp_bound.unwrap_or_else(|| total_cost.clone()),
        iterations: trace.len() + usize::from(finished_with_trees),
        x: state.x,
        y: state.y,
        z: state.z,
        first_stage,
        second_stage,
        total: total_cost,
    };
    info!("solved: total {} in {} iterations", format_rational(&solution.total), solution.iterations);
    Ok(SolveReport {
        lp_solves: trace.iter().map(|r| r.lp_solves).sum(),
        cuts: trace.iter().map(|r| r.cuts).sum(),
        solution,
        trace,
    })
}

pub fn solve_rrst_with(inst: &Instance, config: &SolverConfig) -> Result<SolveReport, SolverError> {
    let side = GraphSide::new(inst.graph().clone());
    let ez = inst.graph().edge_ids().collect();
    run(SolverState::new(side.clone(), side, ez, inst.overlap_target()), inst.costs(), config)
}

pub fn solve_rrst(inst: &Instance) -> Result<Solution, SolverError> {
    solve_rrst_with(inst, &SolverConfig::default()).map(|r| r.solution)
}

pub fn solve_rrmb_with(minst: &MatroidInstance, config: &SolverConfig) -> Result<SolveReport, SolverError> {
    let mut side = MatroidSide::new(minst.matroid().clone());
    let loops = minst.matroid().loops();
    for &l in &loops {
        side.delete(l)?;
    }
    let ez = side.elements().into_iter().collect();
    run(SolverState::new(side.clone(), side, ez, minst.overlap_target()), minst.costs(), config)
}

pub fn solve_rrmb(minst: &MatroidInstance) -> Result<Solution, SolverError> {
    solve_rrmb_with(minst, &SolverConfig::default()).map(|r| r.solution)
}

/// The first check a solution fails.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyFailure {
    #[error("X not spanning")]
    XNotSpanning,
    #[error("Y not spanning")]
    YNotSpanning,
    #[error("X not a basis")]
    XNotBasis,
    #[error("Y not a basis")]
    YNotBasis,
    #[error("overlap {found} below required {required}")]
    OverlapTooSmall { found: usize, required: usize },
    #[error("Z not contained in X and Y")]
    ZOutsideOverlap,
    #[error("cost mismatch")]
    CostMismatch,
}

fn verify_costs(sol: &Solution, costs: &BTreeMap<EdgeId, CostTriple>, required: usize) -> Result<(), VerifyFailure> {
    let found = sol.x.intersection(&sol.y).count();
    if found < required {
        return Err(VerifyFailure::OverlapTooSmall { found, required });
    }
    if !sol.z.iter().all(|e| sol.x.contains(e) && sol.y.contains(e)) {
        return Err(VerifyFailure::ZOutsideOverlap);
    }
    let first = total(&sol.x, |e| costs[e].first.clone());
    let second = total(&sol.y, |e| costs[e].second_stage());
    if first != sol.first_stage || second != sol.second_stage || &first + &second != sol.total {
        return Err(VerifyFailure::CostMismatch);
    }
    Ok(())
}

/// Checks spanning, overlap, `Z` and cost arithmetic of a graph solution.
pub fn verify_rrst(inst: &Instance, sol: &Solution) -> Result<(), VerifyFailure> {
    if !inst.graph().is_spanning_tree(&sol.x) {
        return Err(VerifyFailure::XNotSpanning);
    }
    if !inst.graph().is_spanning_tree(&sol.y) {
        return Err(VerifyFailure::YNotSpanning);
    }
    verify_costs(sol, inst.costs(), inst.overlap_target())
}

pub fn verify_rrmb(minst: &MatroidInstance, sol: &Solution) -> Result<(), VerifyFailure> {
    if !minst.matroid().is_basis(&sol.x) {
        return Err(VerifyFailure::XNotBasis);
    }
    if !minst.matroid().is_basis(&sol.y) {
        return Err(VerifyFailure::YNotBasis);
    }
    verify_costs(sol, minst.costs(), minst.overlap_target())
}
