//! Graph and matroid instances behind one interface.

use std::collections::BTreeMap;

use anyhow::Result;

use rrst::matroid::load_matroid_instance;
use rrst::oracle::{brute_force_rrmb, brute_force_rrst, OracleError, TreePairResult};
use rrst::{
    load_instance, solve_rrmb_with, solve_rrst_with, verify_rrmb, verify_rrst, CostTriple, EdgeId, Instance,
    InstanceError, MatroidInstance, Solution, SolveReport, SolverConfig, SolverError, VerifyFailure,
};

pub enum Problem {
    Graph(Instance),
    Matroid(MatroidInstance),
}

impl Problem {
    /// Files with a `family` key are matroid instances. With `matroid` set a
    /// graph file is read as its graphic matroid.
    pub fn load(text: &str, matroid: bool) -> Result<Problem, InstanceError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))?;
        if value.get("family").is_some() {
            return Ok(Problem::Matroid(load_matroid_instance(text)?));
        }
        let inst = load_instance(text)?;
        Ok(if matroid { Problem::Matroid(MatroidInstance::from_graph_instance(&inst)) } else { Problem::Graph(inst) })
    }

    /// `(n, m, k)`; for a matroid, `n` is its rank and `m` its ground size.
    pub fn summary(&self) -> (usize, usize, usize) {
        match self {
            Problem::Graph(i) => (i.node_count(), i.edge_count(), i.k()),
            Problem::Matroid(m) => (m.matroid().full_rank(), m.matroid().ground().len(), m.k()),
        }
    }

    pub fn costs(&self) -> &BTreeMap<EdgeId, CostTriple> {
        match self {
            Problem::Graph(i) => i.costs(),
            Problem::Matroid(m) => m.costs(),
        }
    }

    pub fn overlap_target(&self) -> usize {
        match self {
            Problem::Graph(i) => i.overlap_target(),
            Problem::Matroid(m) => m.overlap_target(),
        }
    }

    pub fn solve(&self, config: &SolverConfig) -> Result<SolveReport, SolverError> {
        match self {
            Problem::Graph(i) => solve_rrst_with(i, config),
            Problem::Matroid(m) => solve_rrmb_with(m, config),
        }
    }

    pub fn oracle(&self) -> Result<TreePairResult, OracleError> {
        match self {
            Problem::Graph(i) => brute_force_rrst(i),
            Problem::Matroid(m) => brute_force_rrmb(m),
        }
    }

    pub fn verify(&self, sol: &Solution) -> Result<(), VerifyFailure> {
        match self {
            Problem::Graph(i) => verify_rrst(i, sol),
            Problem::Matroid(m) => verify_rrmb(m, sol),
        }
    }
}
