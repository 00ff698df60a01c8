//! Robust recoverable spanning trees and matroid bases with interval costs.
//!
//! Given first-stage costs `C` and second-stage cost intervals `[c, c + d]`,
//! the problem asks for two spanning trees (or matroid bases) `X` and `Y`
//! sharing at least `n - 1 - k` elements that minimise
//! `C(X) + (c + d)(Y)`. [`solve_rrst`] and [`solve_rrmb`] find an optimum by
//! iterative relaxation over exact rationals; [`oracle`] holds brute-force
//! reference solvers for small instances.

pub mod generate;
pub mod graph;
pub mod instance;
pub mod matroid;
pub mod model;
pub mod oracle;
pub mod separation;
pub mod solver;

pub use graph::{EdgeId, GraphError, MultiGraph};
pub use instance::{load_instance, total, CostTriple, Instance, InstanceError};
pub use matroid::{load_matroid_instance, Family, MatroidError, MatroidHandle, MatroidInstance, MinorOp, Part};
pub use model::{CutsPerRound, ModelConfig, SeparationMode};
pub use solver::{
    solve_rrmb, solve_rrmb_with, solve_rrst, solve_rrst_with, verify_rrmb, verify_rrst, FixingMode, Solution,
    SolveReport, SolverConfig, SolverError, VerifyFailure,
};
