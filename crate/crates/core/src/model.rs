//! The relaxation solved in every iteration and its cutting-plane loop.
//!
//! Variables are `x_e` for the first-stage side, `z_e` for candidate common
//! elements and `y_e` for the second-stage side. The base rows are
//!
//! ```text
//! sum x = target_x
//! z_e - x_e <= 0        for e in E_X and E_Z
//! sum z = L
//! z_e - y_e <= 0        for e in E_Y and E_Z
//! sum y = target_y
//! ```
//!
//! Subtour or rank rows enter lazily. When one side has no elements left the
//! program is reduced to the other side alone with `sum_{E_Z} y >= L`, and a
//! `z` meeting the budget is rebuilt from the solution.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::PathBuf;

use exact_lp::{
    solve, Constraint, LinearProgram, LpError, LpSession, Rational, Relation, SolveStatus, VarId, VertexSolution,
};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::graph::{EdgeId, GraphError, MultiGraph};
use crate::instance::CostTriple;
use crate::matroid::{MatroidError, MatroidHandle};
use crate::separation::{forest_cuts_exhaustive, forest_cuts_mincut, rank_cuts, Cut, CutSet, SeparationError};

/// Upper bound on cuts taken from one side in one round when all are requested.
pub const MAX_CUTS_PER_ROUND: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("relaxation is infeasible")]
    InfeasibleModel,
    #[error("relaxation is unbounded")]
    Unbounded,
    #[error("cutting-plane loop exceeded {0} rounds")]
    IterationLimit(usize),
    #[error("nothing left to optimise")]
    EmptyModel,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error("inconsistent model: {0}")]
    Inconsistent(String),
    #[error("cannot write LP dump: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeparationMode {
    #[default]
    MinCut,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutsPerRound {
    #[default]
    One,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub separation: SeparationMode,
    pub cuts_per_round: CutsPerRound,
    /// Re-add cuts found in earlier iterations when a model is rebuilt.
    pub carry_cuts: bool,
    /// Append every solved program to this file.
    pub dump_path: Option<PathBuf>,
    pub max_rounds: usize,
    /// Re-optimise incrementally between cuts; see [`cutting_plane_solve`].
    pub warm_start: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            separation: SeparationMode::MinCut,
            cuts_per_round: CutsPerRound::One,
            carry_cuts: true,
            dump_path: None,
            max_rounds: 10_000,
            warm_start: true,
        }
    }
}

/// One side of the problem: the remaining graph or matroid minor from which
/// a spanning tree or basis is still to be chosen.
pub trait BasisSide: Clone {
    /// Remaining elements in increasing id order.
    fn elements(&self) -> Vec<EdgeId>;

    fn is_active(&self) -> bool {
        !self.elements().is_empty()
    }

    /// Number of elements still to be chosen.
    fn target(&self) -> usize;

    fn delete(&mut self, e: EdgeId) -> Result<(), ModelError>;

    /// Contracts `e` and deletes every element that became a loop, returning
    /// those elements.
    fn contract(&mut self, e: EdgeId) -> Result<Vec<EdgeId>, ModelError>;

    /// Violated lazy rows at `point`, most violated first.
    fn cuts(&self, point: &BTreeMap<EdgeId, Rational>, mode: SeparationMode) -> Result<Vec<Cut>, ModelError>;

    /// Cuts found earlier, restated for the current structure as
    /// `(members, rhs)`.
    fn pooled_rows(&self) -> Vec<(Vec<EdgeId>, usize)>;

    fn remember(&mut self, cut: &Cut);

    /// Minimum-weight spanning tree or basis of what remains.
    fn min_basis(&self, weight: &BTreeMap<EdgeId, Rational>) -> Result<BTreeSet<EdgeId>, ModelError>;
}

/// A contracted multigraph side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSide {
    graph: MultiGraph,
    /// Subtour sets as sets of original nodes.
    pool: BTreeSet<Vec<usize>>,
}

impl GraphSide {
    pub fn new(graph: MultiGraph) -> Self {
        GraphSide { graph, pool: BTreeSet::new() }
    }

    pub fn graph(&self) -> &MultiGraph {
        &self.graph
    }
}

impl BasisSide for GraphSide {
    fn elements(&self) -> Vec<EdgeId> {
        self.graph.edge_ids().collect()
    }

    fn target(&self) -> usize {
        self.graph.node_count() - self.graph.component_count_of(self.graph.edge_ids())
    }

    fn delete(&mut self, e: EdgeId) -> Result<(), ModelError> {
        self.graph = self.graph.delete_edge(e)?;
        Ok(())
    }

    fn contract(&mut self, e: EdgeId) -> Result<Vec<EdgeId>, ModelError> {
        let (g, loops) = self.graph.contract_with_loops(e)?;
        self.graph = g;
        Ok(loops)
    }

    fn cuts(&self, point: &BTreeMap<EdgeId, Rational>, mode: SeparationMode) -> Result<Vec<Cut>, ModelError> {
        Ok(match mode {
            SeparationMode::MinCut => forest_cuts_mincut(point, &self.graph)?,
            SeparationMode::Exhaustive => forest_cuts_exhaustive(point, &self.graph)?,
        })
    }

    fn pooled_rows(&self) -> Vec<(Vec<EdgeId>, usize)> {
        let mut seen = BTreeSet::new();
        let mut rows = Vec::new();
        for original in &self.pool {
            let live: BTreeSet<usize> = original.iter().map(|&u| self.graph.canonical(u)).collect();
            if live.len() < 2 || live.len() >= self.graph.node_count() || !seen.insert(live.clone()) {
                continue;
            }
            let live: Vec<usize> = live.into_iter().collect();
            let members = self.graph.edges_within(&live);
            if !members.is_empty() {
                rows.push((members, live.len() - 1));
            }
        }
        rows
    }

    fn remember(&mut self, cut: &Cut) {
        if let CutSet::Nodes(nodes) = &cut.set {
            let original = (0..self.graph.original_node_count())
                .filter(|&u| nodes.binary_search(&self.graph.canonical(u)).is_ok())
                .collect();
            self.pool.insert(original);
        }
    }

    fn min_basis(&self, weight: &BTreeMap<EdgeId, Rational>) -> Result<BTreeSet<EdgeId>, ModelError> {
        if let Some(e) = self.graph.edge_ids().find(|e| !weight.contains_key(e)) {
            return Err(ModelError::Inconsistent(format!("no weight for {e}")));
        }
        Ok(self.graph.min_spanning_forest(|e| weight[&e].clone()).into_iter().collect())
    }
}

/// A matroid minor side. Graphic matroids are mirrored by a [`GraphSide`] so
/// that they are handled exactly like the graph problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatroidSide {
    matroid: MatroidHandle,
    graph: Option<GraphSide>,
    /// Rank-cut sets as element sets.
    pool: BTreeSet<Vec<EdgeId>>,
}

impl MatroidSide {
    pub fn new(matroid: MatroidHandle) -> Self {
        let graph = matroid.minor_graph().map(|(g, _)| GraphSide::new(g));
        MatroidSide { matroid, graph, pool: BTreeSet::new() }
    }

    pub fn matroid(&self) -> &MatroidHandle {
        &self.matroid
    }
}

impl BasisSide for MatroidSide {
    fn elements(&self) -> Vec<EdgeId> {
        self.matroid.ground().iter().copied().collect()
    }

    fn target(&self) -> usize {
        self.matroid.full_rank()
    }

    fn delete(&mut self, e: EdgeId) -> Result<(), ModelError> {
        self.matroid = self.matroid.delete(e)?;
        if let Some(g) = &mut self.graph {
            g.delete(e)?;
        }
        Ok(())
    }

    fn contract(&mut self, e: EdgeId) -> Result<Vec<EdgeId>, ModelError> {
        self.matroid = self.matroid.contract(e)?;
        if let Some(g) = &mut self.graph {
            g.contract(e)?;
        }
        let loops = self.matroid.loops();
        for &l in &loops {
            self.matroid = self.matroid.delete(l)?;
        }
        Ok(loops)
    }

    fn cuts(&self, point: &BTreeMap<EdgeId, Rational>, mode: SeparationMode) -> Result<Vec<Cut>, ModelError> {
        if let Some(g) = &self.graph {
            return g.cuts(point, mode);
        }
        Ok(rank_cuts(point, &self.matroid, mode == SeparationMode::Exhaustive)?)
    }

    fn pooled_rows(&self) -> Vec<(Vec<EdgeId>, usize)> {
        if let Some(g) = &self.graph {
            return g.pooled_rows();
        }
        let mut seen = BTreeSet::new();
        let mut rows = Vec::new();
        for set in &self.pool {
            let live: BTreeSet<EdgeId> = set.iter().copied().filter(|e| self.matroid.contains(*e)).collect();
            if live.is_empty() || !seen.insert(live.clone()) {
                continue;
            }
            let rank = self.matroid.rank(&live).expect("subset of ground");
            rows.push((live.into_iter().collect(), rank));
        }
        rows
    }

    fn remember(&mut self, cut: &Cut) {
        match &mut self.graph {
            Some(g) => g.remember(cut),
            None => {
                self.pool.insert(cut.members.clone());
            }
        }
    }

    fn min_basis(&self, weight: &BTreeMap<EdgeId, Rational>) -> Result<BTreeSet<EdgeId>, ModelError> {
        if let Some(g) = &self.graph {
            return g.min_basis(weight);
        }
        Ok(self.matroid.greedy_min_basis(weight)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideTag {
    X,
    Y,
}

/// A violated lazy row together with the side it belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolatedCut {
    pub side: SideTag,
    pub cut: Cut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelShape {
    Full,
    /// First-stage side exhausted; only `y` variables remain.
    SecondOnly,
    /// Second-stage side exhausted; only `x` variables remain.
    FirstOnly,
}

#[derive(Debug, Clone)]
pub struct RelaxationModel {
    pub var_x: BTreeMap<EdgeId, VarId>,
    pub var_z: BTreeMap<EdgeId, VarId>,
    pub var_y: BTreeMap<EdgeId, VarId>,
    pub budget: usize,
    pub shape: ModelShape,
    /// Rows of the base program.
    pub base_rows: usize,
    lp: LinearProgram,
    /// Cuts carried over from earlier iterations, added once violated.
    pool: Vec<Constraint>,
}

impl RelaxationModel {
    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    /// Carried-over rows not yet in the program.
    pub fn pool(&self) -> &[Constraint] {
        &self.pool
    }

    fn pool_row(&mut self, vars: &BTreeMap<EdgeId, VarId>, members: &[EdgeId], rhs: usize) -> Result<(), ModelError> {
        let row = cut_row(vars, members, rhs)?;
        self.pool.push(row);
        Ok(())
    }
}

fn cut_row(vars: &BTreeMap<EdgeId, VarId>, members: &[EdgeId], rhs: usize) -> Result<Constraint, ModelError> {
    let mut terms = Vec::with_capacity(members.len());
    for e in members {
        let v = vars.get(e).ok_or_else(|| ModelError::Inconsistent(format!("cut member {e} has no variable")))?;
        terms.push((*v, Rational::one()));
    }
    Ok(Constraint::new(terms, Relation::Le, count(rhs)))
}

fn count(n: usize) -> Rational {
    Rational::from_integer(n.into())
}

fn ones(vars: impl IntoIterator<Item = VarId>) -> Vec<(VarId, Rational)> {
    vars.into_iter().map(|v| (v, Rational::one())).collect()
}

/// Builds the relaxation for the current state, including carried-over cuts
/// when `carry_cuts` is set.
pub fn build_relaxation<S: BasisSide>(
    x_side: &S,
    y_side: &S,
    ez: &BTreeSet<EdgeId>,
    budget: usize,
    costs: &BTreeMap<EdgeId, CostTriple>,
    carry_cuts: bool,
) -> Result<RelaxationModel, ModelError> {
    let ex = x_side.elements();
    let ey = y_side.elements();
    let shape = match (ex.is_empty(), ey.is_empty()) {
        (false, false) => ModelShape::Full,
        (true, false) => ModelShape::SecondOnly,
        (false, true) => ModelShape::FirstOnly,
        (true, true) => return Err(ModelError::EmptyModel),
    };
    let cost = |e: &EdgeId| costs.get(e).ok_or_else(|| ModelError::Inconsistent(format!("no costs for {e}")));
    let mut lp = LinearProgram::new();
    let mut var_x = BTreeMap::new();
    let mut var_z = BTreeMap::new();
    let mut var_y = BTreeMap::new();
    if shape != ModelShape::SecondOnly {
        for e in &ex {
            let v = lp.add_var(format!("x{}", e.0), true);
            lp.set_cost(v, cost(e)?.first.clone());
            var_x.insert(*e, v);
        }
    }
    if shape == ModelShape::Full {
        for e in ez {
            var_z.insert(*e, lp.add_var(format!("z{}", e.0), true));
        }
    }
    if shape != ModelShape::FirstOnly {
        for e in &ey {
            let v = lp.add_var(format!("y{}", e.0), true);
            lp.set_cost(v, cost(e)?.second_stage());
            var_y.insert(*e, v);
        }
    }

    match shape {
        ModelShape::Full => {
            if let Some(e) = ez.iter().find(|e| !var_x.contains_key(e) && !var_y.contains_key(e)) {
                return Err(ModelError::Inconsistent(format!("{e} is a z-candidate on neither side")));
            }
            lp.add_constraint(Constraint::new(ones(var_x.values().copied()), Relation::Eq, count(x_side.target())));
            for (e, z) in &var_z {
                if let Some(x) = var_x.get(e) {
                    lp.add_constraint(Constraint::new(
                        vec![(*x, -Rational::one()), (*z, Rational::one())],
                        Relation::Le,
                        Rational::zero(),
                    ));
                }
            }
            lp.add_constraint(Constraint::new(ones(var_z.values().copied()), Relation::Eq, count(budget)));
            for (e, z) in &var_z {
                if let Some(y) = var_y.get(e) {
                    lp.add_constraint(Constraint::new(
                        vec![(*z, Rational::one()), (*y, -Rational::one())],
                        Relation::Le,
                        Rational::zero(),
                    ));
                }
            }
            lp.add_constraint(Constraint::new(ones(var_y.values().copied()), Relation::Eq, count(y_side.target())));
        }
        ModelShape::SecondOnly | ModelShape::FirstOnly => {
            let (vars, side) = if shape == ModelShape::SecondOnly { (&var_y, y_side) } else { (&var_x, x_side) };
            let mut linked = Vec::new();
            for e in ez {
                let v = vars.get(e).ok_or_else(|| {
                    ModelError::Inconsistent(format!("z-candidate {e} missing from the remaining side"))
                })?;
                linked.push(*v);
            }
            lp.add_constraint(Constraint::new(ones(vars.values().copied()), Relation::Eq, count(side.target())));
            lp.add_constraint(Constraint::new(ones(linked), Relation::Ge, count(budget)));
        }
    }

    let base_rows = lp.constraints().len();
    let mut model = RelaxationModel { var_x, var_z, var_y, budget, shape, base_rows, lp, pool: Vec::new() };
    if carry_cuts {
        if shape != ModelShape::SecondOnly {
            let vars = model.var_x.clone();
            for (members, rhs) in x_side.pooled_rows() {
                model.pool_row(&vars, &members, rhs)?;
            }
        }
        if shape != ModelShape::FirstOnly {
            let vars = model.var_y.clone();
            for (members, rhs) in y_side.pooled_rows() {
                model.pool_row(&vars, &members, rhs)?;
            }
        }
    }
    Ok(model)
}

/// An optimal vertex of the full relaxation, split by variable family.
#[derive(Debug, Clone)]
pub struct CuttingPlaneOutcome {
    pub x: BTreeMap<EdgeId, Rational>,
    pub z: BTreeMap<EdgeId, Rational>,
    pub y: BTreeMap<EdgeId, Rational>,
    pub objective: Rational,
    pub vertex: VertexSolution,
    /// Objective after each solve, in order.
    pub objectives: Vec<Rational>,
    pub cuts: Vec<ViolatedCut>,
}

fn point(vars: &BTreeMap<EdgeId, VarId>, v: &VertexSolution) -> BTreeMap<EdgeId, Rational> {
    vars.iter().map(|(e, var)| (*e, v.value(*var).clone())).collect()
}

/// `z_e = w_e` on `ez` in increasing id order until the sum reaches `budget`.
fn rebuild_z(
    ez: &BTreeSet<EdgeId>,
    w: &BTreeMap<EdgeId, Rational>,
    budget: usize,
) -> Result<BTreeMap<EdgeId, Rational>, ModelError> {
    let mut left = count(budget);
    let mut z = BTreeMap::new();
    for e in ez {
        let take = w[e].clone().min(left.clone());
        left -= &take;
        z.insert(*e, take);
    }
    if left.is_positive() {
        return Err(ModelError::Inconsistent("reduced solution misses the overlap budget".into()));
    }
    Ok(z)
}

fn dump(path: &PathBuf, round: usize, lp: &LinearProgram) -> Result<(), ModelError> {
    let mut f =
        std::fs::OpenOptions::new().create(true).append(true).open(path).map_err(|e| ModelError::Io(e.to_string()))?;
    writeln!(f, "# round {round}\n{}", lp.to_text()).map_err(|e| ModelError::Io(e.to_string()))
}

fn side_cuts<S: BasisSide>(
    side: &S,
    tag: SideTag,
    p: &BTreeMap<EdgeId, Rational>,
    config: &ModelConfig,
) -> Result<Vec<ViolatedCut>, ModelError> {
    let mut cuts = side.cuts(p, config.separation)?;
    cuts.truncate(match config.cuts_per_round {
        CutsPerRound::One => 1,
        CutsPerRound::All => MAX_CUTS_PER_ROUND,
    });
    for c in &cuts {
        if !c.certifies(p) {
            return Err(ModelError::Inconsistent(format!("separator returned a non-violated cut {:?}", c.set)));
        }
    }
    Ok(cuts.into_iter().map(|cut| ViolatedCut { side: tag, cut }).collect())
}

fn optimal_vertex(status: &SolveStatus) -> Result<VertexSolution, ModelError> {
    match status {
        SolveStatus::Optimal(v) => Ok(v.clone()),
        SolveStatus::Infeasible => Err(ModelError::InfeasibleModel),
        SolveStatus::Unbounded => Err(ModelError::Unbounded),
    }
}

fn separate_both<S: BasisSide>(
    model: &RelaxationModel,
    x_side: &S,
    y_side: &S,
    vertex: &VertexSolution,
    config: &ModelConfig,
) -> Result<Vec<ViolatedCut>, ModelError> {
    let mut found = Vec::new();
    if model.shape != ModelShape::SecondOnly {
        found.extend(side_cuts(x_side, SideTag::X, &point(&model.var_x, vertex), config)?);
    }
    if model.shape != ModelShape::FirstOnly {
        found.extend(side_cuts(y_side, SideTag::Y, &point(&model.var_y, vertex), config)?);
    }
    Ok(found)
}

/// Solves, separates and re-solves until no lazy row is violated. Pooled
/// rows are tried before the separators. Cuts found are remembered by the
/// sides.
///
/// With `warm_start` each added row is handled by a dual simplex step from
/// the previous basis; otherwise every round is solved cold. Both return an
/// optimal vertex of the same program, though not necessarily the same one.
pub fn cutting_plane_solve<S: BasisSide>(
    model: &mut RelaxationModel,
    x_side: &mut S,
    y_side: &mut S,
    ez: &BTreeSet<EdgeId>,
    config: &ModelConfig,
) -> Result<CuttingPlaneOutcome, ModelError> {
    let mut objectives: Vec<Rational> = Vec::new();
    let mut all_cuts = Vec::new();
    let mut session = if config.warm_start { Some(LpSession::new(model.lp.clone())?) } else { None };
    for round in 0..config.max_rounds {
        if let Some(path) = &config.dump_path {
            dump(path, round, &model.lp)?;
        }
        let vertex = match &session {
            Some(s) => optimal_vertex(s.status())?,
            None => optimal_vertex(&solve(&model.lp)?)?,
        };
        if objectives.last().is_some_and(|prev| vertex.objective_value < *prev) {
            return Err(ModelError::Inconsistent("objective decreased after adding a cut".into()));
        }
        objectives.push(vertex.objective_value.clone());

        let (violated, kept): (Vec<Constraint>, Vec<Constraint>) =
            std::mem::take(&mut model.pool).into_iter().partition(|c| !c.is_satisfied_by(&vertex.values));
        model.pool = kept;
        let mut rows = violated;
        if rows.is_empty() {
            let found = separate_both(model, x_side, y_side, &vertex, config)?;
            if found.is_empty() {
                let px = point(&model.var_x, &vertex);
                let py = point(&model.var_y, &vertex);
                let z = match model.shape {
                    ModelShape::Full => point(&model.var_z, &vertex),
                    ModelShape::SecondOnly => rebuild_z(ez, &py, model.budget)?,
                    ModelShape::FirstOnly => rebuild_z(ez, &px, model.budget)?,
                };
                return Ok(CuttingPlaneOutcome {
                    x: px,
                    z,
                    y: py,
                    objective: vertex.objective_value.clone(),
                    vertex,
                    objectives,
                    cuts: all_cuts,
                });
            }
            for vc in found {
                let vars = match vc.side {
                    SideTag::X => {
                        x_side.remember(&vc.cut);
                        &model.var_x
                    }
                    SideTag::Y => {
                        y_side.remember(&vc.cut);
                        &model.var_y
                    }
                };
                rows.push(cut_row(vars, &vc.cut.members, vc.cut.rhs)?);
                all_cuts.push(vc);
            }
        }
        for row in rows {
            if let Some(s) = &mut session {
                s.add_constraint(row.clone())?;
            }
            model.lp.add_constraint(row);
        }
    }
    Err(ModelError::IterationLimit(config.max_rounds))
}
