//! Linear program description and its plain-text dump format.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use num_traits::{Signed, Zero};

use crate::rational::{format_rational, parse_rational, Rational};
use crate::LpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub nonnegative: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub terms: Vec<(VarId, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(terms: Vec<(VarId, Rational)>, relation: Relation, rhs: Rational) -> Self {
        Constraint { terms, relation, rhs }
    }

    pub fn lhs_at(&self, values: &[Rational]) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, (v, a)| acc + a * &values[v.0])
    }

    pub fn is_satisfied_by(&self, values: &[Rational]) -> bool {
        self.relation.holds(&self.lhs_at(values), &self.rhs)
    }

    /// Amount by which `values` violates the constraint; zero when satisfied.
    pub fn violation(&self, values: &[Rational]) -> Rational {
        let lhs = self.lhs_at(values);
        let diff = &lhs - &self.rhs;
        match self.relation {
            Relation::Le if diff.is_positive() => diff,
            Relation::Ge if diff.is_negative() => -diff,
            Relation::Eq => diff.abs(),
            _ => Rational::zero(),
        }
    }
}

/// A minimization problem over declared variables.
///
/// Constraints are append-only: ids handed out by [`LinearProgram::add_constraint`]
/// stay valid for the lifetime of the program.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearProgram {
    vars: Vec<Variable>,
    objective: BTreeMap<VarId, Rational>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, nonnegative: bool) -> VarId {
        self.vars.push(Variable { name: name.into(), nonnegative });
        VarId(self.vars.len() - 1)
    }

    /// Sets the objective coefficient of `var`; unset coefficients are zero.
    pub fn set_cost(&mut self, var: VarId, cost: Rational) {
        if cost.is_zero() {
            self.objective.remove(&var);
        } else {
            self.objective.insert(var, cost);
        }
    }

    pub fn add_constraint(&mut self, constraint: Constraint) -> ConstraintId {
        self.constraints.push(constraint);
        ConstraintId(self.constraints.len() - 1)
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn cost(&self, var: VarId) -> Rational {
        self.objective.get(&var).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn objective_terms(&self) -> impl Iterator<Item = (&VarId, &Rational)> {
        self.objective.iter()
    }

    pub fn objective_at(&self, values: &[Rational]) -> Rational {
        self.objective.iter().fold(Rational::zero(), |acc, (v, c)| acc + c * &values[v.0])
    }

    /// Checks that every referenced variable is declared.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.vars.len();
        if let Some(v) = self.objective.keys().find(|v| v.0 >= n) {
            return Err(LpError::MalformedProgram(format!("objective references undeclared variable {}", v.0)));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if let Some((v, _)) = c.terms.iter().find(|(v, _)| v.0 >= n) {
                return Err(LpError::MalformedProgram(format!(
                    "constraint {i} references undeclared variable {}",
                    v.0
                )));
            }
        }
        Ok(())
    }

    /// True when `values` satisfies every constraint and sign restriction exactly.
    pub fn is_feasible(&self, values: &[Rational]) -> bool {
        values.len() == self.vars.len()
            && self.vars.iter().zip(values).all(|(var, v)| !var.nonnegative || !v.is_negative())
            && self.constraints.iter().all(|c| c.is_satisfied_by(values))
    }

    /// Plain-text dump, one item per line:
    ///
    /// ```text
    /// var x0 >= 0
    /// var w free
    /// min: 1 x0 + -3/2 w
    /// c0: 1 x0 + 1 w <= 5/2
    /// ```
    ///
    /// Variables are referenced by name in the objective and constraint lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vars {
            let bound = if v.nonnegative { ">= 0" } else { "free" };
            let _ = writeln!(out, "var {} {}", v.name, bound);
        }
        let obj: Vec<(VarId, Rational)> = self.objective.iter().map(|(v, c)| (*v, c.clone())).collect();
        let _ = writeln!(out, "min: {}", self.format_terms(&obj));
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = writeln!(
                out,
                "c{}: {} {} {}",
                i,
                self.format_terms(&c.terms),
                c.relation.symbol(),
                format_rational(&c.rhs)
            );
        }
        out
    }

    fn format_terms(&self, terms: &[(VarId, Rational)]) -> String {
        if terms.is_empty() {
            return "0".to_string();
        }
        terms
            .iter()
            .map(|(v, a)| format!("{} {}", format_rational(a), self.vars[v.0].name))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Parses the format written by [`LinearProgram::to_text`].
    pub fn from_text(text: &str) -> Result<Self, LpError> {
        let bad = |line: usize, msg: &str| LpError::MalformedProgram(format!("line {}: {msg}", line + 1));
        let mut lp = LinearProgram::new();
        let mut names: BTreeMap<String, VarId> = BTreeMap::new();

        let parse_terms = |s: &str, line: usize, names: &BTreeMap<String, VarId>| {
            let s = s.trim();
            if s == "0" {
                return Ok(Vec::new());
            }
            s.split(" + ")
                .map(|term| {
                    let (coef, name) =
                        term.trim().split_once(' ').ok_or_else(|| bad(line, "term must be '<coef> <var>'"))?;
                    let coef = parse_rational(coef).map_err(|e| bad(line, &e.to_string()))?;
                    let var = names.get(name.trim()).copied().ok_or_else(|| bad(line, "unknown variable"))?;
                    Ok((var, coef))
                })
                .collect::<Result<Vec<_>, LpError>>()
        };

        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("var ") {
                let mut parts = rest.split_whitespace();
                let name = parts.next().ok_or_else(|| bad(ln, "missing name"))?;
                let nonneg = match parts.collect::<Vec<_>>().join(" ").as_str() {
                    ">= 0" => true,
                    "free" => false,
                    _ => return Err(bad(ln, "bound must be '>= 0' or 'free'")),
                };
                if names.contains_key(name) {
                    return Err(bad(ln, "duplicate variable"));
                }
                let id = lp.add_var(name, nonneg);
                names.insert(name.to_string(), id);
            } else if let Some(rest) = line.strip_prefix("min:") {
                for (v, c) in parse_terms(rest, ln, &names)? {
                    let total = lp.cost(v) + c;
                    lp.set_cost(v, total);
                }
            } else if let Some((_, body)) = line.split_once(": ") {
                let (relation, split) = [(" <= ", Relation::Le), (" >= ", Relation::Ge), (" = ", Relation::Eq)]
                    .iter()
                    .find_map(|(sym, rel)| body.rsplit_once(sym).map(|p| (*rel, p)))
                    .ok_or_else(|| bad(ln, "missing relation"))?;
                let terms = parse_terms(split.0, ln, &names)?;
                let rhs = parse_rational(split.1).map_err(|e| bad(ln, &e.to_string()))?;
                lp.add_constraint(Constraint::new(terms, relation, rhs));
            } else {
                return Err(bad(ln, "unrecognized line"));
            }
        }
        Ok(lp)
    }
}

impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
