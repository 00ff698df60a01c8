//! Two-phase tableau simplex over exact rationals.
//!
//! Pivoting follows Bland's rule throughout: the entering column is the
//! lowest-index column with negative reduced cost and the leaving row is the
//! minimum-ratio row whose basic column has the lowest index. This makes every
//! solve terminate and makes its result a pure function of the input program.
//!
//! Column order is: structural columns (one per variable, plus a negated copy
//! for free variables, in declaration order), then one slack or surplus column
//! per inequality row, then the phase-1 artificial columns.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use crate::num::Num;

use crate::program::{Constraint, ConstraintId, LinearProgram, Relation, VarId};
use crate::rational::Rational;
use crate::LpError;

/// A column of the standard-form tableau that may appear in a basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisMember {
    Var(VarId),
    /// Negative part of a free variable.
    NegPart(VarId),
    /// Slack (for `<=`) or surplus (for `>=`) of a constraint.
    Slack(ConstraintId),
}

/// Basic optimal solution of a [`LinearProgram`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSolution {
    /// Value of each declared variable, indexed by [`VarId`].
    pub values: Vec<Rational>,
    /// Basic columns, sorted. Rows found redundant during phase 1 contribute
    /// no member.
    pub basis: Vec<BasisMember>,
    pub objective_value: Rational,
}

impl VertexSolution {
    pub fn value(&self, var: VarId) -> &Rational {
        &self.values[var.0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal(VertexSolution),
    Infeasible,
    Unbounded,
}

impl SolveStatus {
    pub fn optimal(self) -> Option<VertexSolution> {
        match self {
            SolveStatus::Optimal(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Pos(usize),
    Neg(usize),
    Slack(usize),
    Artificial,
}

/// Degenerate dual pivots tolerated before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

struct Tableau {
    columns: Vec<Column>,
    rows: Vec<Vec<Num>>,
    rhs: Vec<Num>,
    basis: Vec<usize>,
    reduced: Vec<Num>,
    pivots: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let mut columns = Vec::new();
        let mut struct_col = Vec::with_capacity(lp.num_vars());
        for (j, v) in lp.vars().iter().enumerate() {
            let pos = columns.len();
            columns.push(Column::Pos(j));
            let neg = if v.nonnegative {
                None
            } else {
                columns.push(Column::Neg(j));
                Some(columns.len() - 1)
            };
            struct_col.push((pos, neg));
        }

        // Normalize each row so that its right-hand side is nonnegative.
        let normalized: Vec<(Vec<Rational>, Relation, Rational)> = lp
            .constraints()
            .iter()
            .map(|c| {
                let mut dense = vec![Rational::zero(); columns.len()];
                for (v, a) in &c.terms {
                    let (pos, neg) = struct_col[v.0];
                    dense[pos] += a;
                    if let Some(neg) = neg {
                        dense[neg] -= a;
                    }
                }
                if c.rhs.is_negative() {
                    for a in dense.iter_mut() {
                        *a = -a.clone();
                    }
                    let rel = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (dense, rel, -c.rhs.clone())
                } else {
                    (dense, c.relation, c.rhs.clone())
                }
            })
            .collect();

        let m = normalized.len();
        let mut slack_of_row = vec![None; m];
        for (i, (_, rel, _)) in normalized.iter().enumerate() {
            if *rel != Relation::Eq {
                slack_of_row[i] = Some(columns.len());
                columns.push(Column::Slack(i));
            }
        }
        let mut artificial_of_row = vec![None; m];
        for (i, (_, rel, _)) in normalized.iter().enumerate() {
            if *rel != Relation::Le {
                artificial_of_row[i] = Some(columns.len());
                columns.push(Column::Artificial);
            }
        }

        let ncols = columns.len();
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        for (i, (dense, rel, b)) in normalized.into_iter().enumerate() {
            let mut row: Vec<Num> = dense.iter().map(Num::from_rational).collect();
            row.resize(ncols, Num::zero());
            if let Some(s) = slack_of_row[i] {
                row[s] = if rel == Relation::Le { Num::one() } else { Num::one().neg() };
            }
            match artificial_of_row[i] {
                Some(a) => {
                    row[a] = Num::one();
                    basis.push(a);
                }
                None => basis.push(slack_of_row[i].expect("<= row has a slack")),
            }
            rows.push(row);
            rhs.push(Num::from_rational(&b));
        }

        Tableau { columns, rows, rhs, basis, reduced: Vec::new(), pivots: 0 }
    }

    fn set_costs(&mut self, costs: &[Num]) {
        let mut reduced = costs.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &costs[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (d, a) in reduced.iter_mut().zip(row) {
                d.sub_mul(cb, a);
            }
        }
        self.reduced = reduced;
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let piv = self.rows[r][q].clone();
        if !piv.is_one() {
            let inv = piv.recip();
            for a in self.rows[r].iter_mut().filter(|a| !a.is_zero()) {
                *a = a.mul(&inv);
            }
            self.rhs[r] = self.rhs[r].mul(&inv);
        }
        let nz: Vec<usize> = self.rows[r].iter().enumerate().filter(|(_, a)| !a.is_zero()).map(|(j, _)| j).collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][q].is_zero() {
                continue;
            }
            let f = self.rows[i][q].clone();
            let row = &mut self.rows[i];
            for &j in &nz {
                row[j].sub_mul(&f, &pivot_row[j]);
            }
            self.rhs[i].sub_mul(&f, &pivot_rhs);
        }
        if !self.reduced[q].is_zero() {
            let f = self.reduced[q].clone();
            for &j in &nz {
                self.reduced[j].sub_mul(&f, &pivot_row[j]);
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = q;
        self.pivots += 1;
    }

    fn run(&mut self, eligible: usize) -> PhaseOutcome {
        loop {
            let Some(q) = (0..eligible).find(|&j| self.reduced[j].is_negative()) else {
                return PhaseOutcome::Optimal;
            };
            let mut best: Option<(usize, Num)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][q];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs[i].div(a);
                let better = match &best {
                    None => true,
                    Some((bi, br)) => match ratio.cmp(br) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[i] < self.basis[*bi],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, q),
                None => return PhaseOutcome::Unbounded,
            }
        }
    }

    fn drop_row(&mut self, r: usize) {
        self.rows.remove(r);
        self.rhs.remove(r);
        self.basis.remove(r);
    }
}

/// Solves `lp` to a basic optimal solution.
pub fn solve(lp: &LinearProgram) -> Result<SolveStatus, LpError> {
    solve_tableau(lp).map(|(status, _)| status)
}

fn solve_tableau(lp: &LinearProgram) -> Result<(SolveStatus, Option<Tableau>), LpError> {
    lp.validate()?;
    let mut t = Tableau::build(lp);
    let ncols = t.columns.len();
    let first_artificial = t.columns.iter().position(|c| *c == Column::Artificial).unwrap_or(ncols);

    if first_artificial < ncols {
        let phase1: Vec<Num> =
            t.columns.iter().map(|c| if *c == Column::Artificial { Num::one() } else { Num::zero() }).collect();
        t.set_costs(&phase1);
        // Phase 1 is bounded below by zero.
        t.run(ncols);
        let infeasible = t.basis.iter().zip(&t.rhs).any(|(&col, b)| col >= first_artificial && b.is_positive());
        if infeasible {
            return Ok((SolveStatus::Infeasible, None));
        }
        // Drive zero-level artificials out of the basis; rows where that is
        // impossible are linear combinations of the others.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] < first_artificial {
                r += 1;
                continue;
            }
            match (0..first_artificial).find(|&j| !t.rows[r][j].is_zero()) {
                Some(q) => {
                    t.pivot(r, q);
                    r += 1;
                }
                None => t.drop_row(r),
            }
        }
        for row in t.rows.iter_mut() {
            row.truncate(first_artificial);
        }
        t.columns.truncate(first_artificial);
    }

    let costs: Vec<Num> = t
        .columns
        .iter()
        .map(|c| match *c {
            Column::Pos(j) => Num::from_rational(&lp.cost(VarId(j))),
            Column::Neg(j) => Num::from_rational(&lp.cost(VarId(j))).neg(),
            _ => Num::zero(),
        })
        .collect();
    t.set_costs(&costs);
    let eligible = t.columns.len();
    if let PhaseOutcome::Unbounded = t.run(eligible) {
        return Ok((SolveStatus::Unbounded, None));
    }
    let vertex = t.extract(lp);
    Ok((SolveStatus::Optimal(vertex), Some(t)))
}

impl Tableau {
    fn extract(&self, lp: &LinearProgram) -> VertexSolution {
        let t = self;
        let mut values = vec![Rational::zero(); lp.num_vars()];
        let mut basis = Vec::with_capacity(t.basis.len());
        for (i, &col) in t.basis.iter().enumerate() {
            match t.columns[col] {
                Column::Pos(j) => {
                    values[j] += t.rhs[i].to_rational();
                    basis.push(BasisMember::Var(VarId(j)));
                }
                Column::Neg(j) => {
                    values[j] -= t.rhs[i].to_rational();
                    basis.push(BasisMember::NegPart(VarId(j)));
                }
                Column::Slack(row) => basis.push(BasisMember::Slack(ConstraintId(row))),
                Column::Artificial => unreachable!("artificial columns removed after phase 1"),
            }
        }
        basis.sort();
        let objective_value = lp.objective_at(&values);
        VertexSolution { values, basis, objective_value }
    }
}

/// Appends `cut` to `lp` and re-solves.
///
/// `prior` must be an optimal solution of `lp` that violates `cut`. The result
/// equals a cold [`solve`] of the extended program.
pub fn add_constraint_and_resolve(
    lp: &mut LinearProgram,
    prior: &VertexSolution,
    cut: Constraint,
) -> Result<SolveStatus, LpError> {
    if prior.values.len() != lp.num_vars() {
        return Err(LpError::MalformedProgram("prior solution does not match the program's variables".into()));
    }
    if cut.terms.iter().any(|(v, _)| v.0 >= lp.num_vars()) {
        return Err(LpError::MalformedProgram("cut references an undeclared variable".into()));
    }
    if cut.is_satisfied_by(&prior.values) {
        return Err(LpError::CutNotViolated);
    }
    lp.add_constraint(cut);
    solve(lp)
}

/// A program solved once and then extended with inequality rows, each
/// re-optimised from the previous basis by the dual simplex method.
///
/// Intended for discovering cuts cheaply. The vertex reached may differ from
/// the one a cold [`solve`] of the same program returns; the optimal value
/// does not.
pub struct LpSession {
    lp: LinearProgram,
    tableau: Option<Tableau>,
    status: SolveStatus,
}

impl LpSession {
    pub fn new(lp: LinearProgram) -> Result<Self, LpError> {
        let (status, tableau) = solve_tableau(&lp)?;
        Ok(LpSession { lp, tableau, status })
    }

    pub fn program(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn status(&self) -> &SolveStatus {
        &self.status
    }

    /// Appends `constraint` and re-optimises. Equality rows, and programs
    /// without an optimal basis, fall back to a cold solve.
    pub fn add_constraint(&mut self, constraint: Constraint) -> Result<&SolveStatus, LpError> {
        if let Some((v, _)) = constraint.terms.iter().find(|(v, _)| v.0 >= self.lp.num_vars()) {
            return Err(LpError::MalformedProgram(format!("constraint references undeclared variable {}", v.0)));
        }
        let index = self.lp.constraints().len();
        self.lp.add_constraint(constraint.clone());
        if self.status == SolveStatus::Infeasible {
            return Ok(&self.status);
        }
        let Some(t) = self.tableau.as_mut().filter(|_| constraint.relation != Relation::Eq) else {
            let (status, tableau) = solve_tableau(&self.lp)?;
            self.status = status;
            self.tableau = tableau;
            return Ok(&self.status);
        };

        let sign = if constraint.relation == Relation::Ge { Num::one().neg() } else { Num::one() };
        let mut row = vec![Num::zero(); t.columns.len() + 1];
        for (v, a) in &constraint.terms {
            let a = Num::from_rational(a).mul(&sign);
            for (j, c) in t.columns.iter().enumerate() {
                match *c {
                    Column::Pos(k) if k == v.0 => row[j] = row[j].add(&a),
                    Column::Neg(k) if k == v.0 => row[j] = row[j].sub(&a),
                    _ => {}
                }
            }
        }
        let slack = t.columns.len();
        row[slack] = Num::one();
        let mut rhs = Num::from_rational(&constraint.rhs).mul(&sign);
        for r in t.rows.iter_mut() {
            r.push(Num::zero());
        }
        t.reduced.push(Num::zero());
        t.columns.push(Column::Slack(index));
        for i in 0..t.rows.len() {
            let f = row[t.basis[i]].clone();
            if f.is_zero() {
                continue;
            }
            for (a, b) in row.iter_mut().zip(&t.rows[i]) {
                a.sub_mul(&f, b);
            }
            rhs.sub_mul(&f, &t.rhs[i]);
        }
        t.rows.push(row);
        t.rhs.push(rhs);
        t.basis.push(slack);

        if t.dual_run() {
            self.status = SolveStatus::Optimal(t.extract(&self.lp));
        } else {
            self.status = SolveStatus::Infeasible;
            self.tableau = None;
        }
        Ok(&self.status)
    }
}

impl Tableau {
    /// Dual simplex from a dual-feasible basis. The leaving row is the one
    /// with negative right-hand side whose basic column has the lowest index;
    /// the entering column minimises the dual ratio, ties by lowest index.
    /// Returns false when the program is infeasible.
    /// Dual simplex from a dual feasible basis. The leaving row is the most
    /// negative right-hand side; after [`DEGENERATE_LIMIT`] pivots in a row
    /// that leave the objective unchanged, Bland's rule takes over until
    /// the objective moves again, which rules out cycling.
    fn dual_run(&mut self) -> bool {
        let mut degenerate = 0;
        loop {
            let infeasible = (0..self.rows.len()).filter(|&i| self.rhs[i].is_negative());
            let leaving = if degenerate >= DEGENERATE_LIMIT {
                infeasible.min_by_key(|&i| self.basis[i])
            } else {
                infeasible.min_by(|&a, &b| self.rhs[a].cmp(&self.rhs[b]).then(self.basis[a].cmp(&self.basis[b])))
            };
            let Some(r) = leaving else {
                return true;
            };
            let mut best: Option<(usize, Num)> = None;
            for (j, a) in self.rows[r].iter().enumerate() {
                if !a.is_negative() {
                    continue;
                }
                let ratio = self.reduced[j].div(&a.neg());
                if best.as_ref().is_none_or(|(_, b)| ratio.cmp(b) == Ordering::Less) {
                    best = Some((j, ratio));
                }
            }
            match best {
                Some((q, ratio)) => {
                    if ratio.is_zero() {
                        degenerate += 1;
                    } else {
                        degenerate = 0;
                    }
                    self.pivot(r, q)
                }
                None => return false,
            }
        }
    }
}
