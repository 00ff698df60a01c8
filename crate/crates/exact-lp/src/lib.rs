//! Exact linear programming over arbitrary-precision rationals.
//!
//! [`solve`] runs a two-phase tableau simplex with Bland's pivot rule and
//! returns a basic (vertex) optimal solution together with its basis. No
//! floating point is involved anywhere, so callers can test values for exact
//! equality with `0` or `1`.
//!
//! ```
//! use exact_lp::{solve, Constraint, LinearProgram, Relation, SolveStatus, int, ratio};
//!
//! let mut lp = LinearProgram::new();
//! let x = lp.add_var("x", true);
//! let y = lp.add_var("y", true);
//! lp.set_cost(x, int(1));
//! lp.set_cost(y, int(1));
//! lp.add_constraint(Constraint::new(vec![(x, int(1)), (y, int(1))], Relation::Ge, ratio(3, 2)));
//! lp.add_constraint(Constraint::new(vec![(x, int(1))], Relation::Le, int(1)));
//! lp.add_constraint(Constraint::new(vec![(y, int(1))], Relation::Le, int(1)));
//!
//! let SolveStatus::Optimal(v) = solve(&lp).unwrap() else { panic!() };
//! assert_eq!(v.objective_value, ratio(3, 2));
//! ```

mod num;
mod program;
mod rational;
mod simplex;

pub use program::{Constraint, ConstraintId, LinearProgram, Relation, VarId, Variable};
pub use rational::{format_rational, int, is_nonnegative, parse_rational, ratio, ParseRationalError, Rational};
pub use simplex::{add_constraint_and_resolve, solve, BasisMember, LpSession, SolveStatus, VertexSolution};

pub use num_bigint::BigInt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("cut is not violated by the prior solution")]
    CutNotViolated,
}
