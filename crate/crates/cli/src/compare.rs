//! Solver against oracle over a suite, one JSON line per instance.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use exact_lp::format_rational;
use rrst::generate::{builtin_small_suite, random_instance, GenParams};

use crate::problem::Problem;
use crate::{BadInput, SolverArgs};

/// Instances handed to the worker pool at a time; reports are printed after
/// each batch so long runs stream.
const BATCH: usize = 64;

#[derive(Args)]
pub struct CompareArgs {
    /// A directory of instance files, or `builtin-small`.
    #[arg(long, conflicts_with = "seeds")]
    suite: Option<String>,
    /// Inclusive seed range `a..b` of random instances.
    #[arg(long, value_parser = parse_seeds, requires = "nodes")]
    seeds: Option<(u64, u64)>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Recovery parameter of random instances; by default `seed mod nodes`.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 9)]
    cost_max: u64,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Defaults to standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

fn parse_seeds(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad seed {a:?}: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad seed {b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty seed range {s}"));
    }
    Ok((a, b))
}

#[derive(Debug)]
pub struct Disagreement(pub usize);

impl std::fmt::Display for Disagreement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} instance(s) failed", self.0)
    }
}

impl std::error::Error for Disagreement {}

#[derive(Debug, Serialize)]
pub struct SolverSummary {
    pub total: String,
    pub lp_bound: String,
    pub iterations: usize,
    pub lp_solves: usize,
    pub cuts: usize,
}

#[derive(Debug, Serialize)]
pub struct OracleSummary {
    pub best_cost: String,
    pub pairs_examined: u64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub name: String,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub solver: Option<SolverSummary>,
    pub oracle: Option<OracleSummary>,
    /// Solver and oracle totals are equal.
    pub agree: bool,
    pub wall_ms: f64,
    pub error: Option<String>,
}

struct Case {
    name: String,
    problem: Result<Problem, String>,
}

fn directory_cases(dir: &Path) -> Result<Vec<Case>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|x| x == "json"));
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|p| Case {
            name: p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            problem: std::fs::read_to_string(&p)
                .map_err(|e| e.to_string())
                .and_then(|text| Problem::load(&text, false).map_err(|e| e.to_string())),
        })
        .collect())
}

fn cases(args: &CompareArgs) -> Result<Vec<Case>> {
    match (&args.suite, args.seeds) {
        (Some(s), _) if s == "builtin-small" => Ok(builtin_small_suite()
            .into_iter()
            .map(|c| Case { name: c.name, problem: Ok(Problem::Graph(c.instance)) })
            .collect()),
        (Some(dir), _) => directory_cases(Path::new(dir)),
        (None, Some((a, b))) => {
            let nodes = args.nodes.ok_or_else(|| BadInput("--seeds needs --nodes".into()))?;
            if nodes == 0 {
                return Err(BadInput("--nodes must be positive".into()).into());
            }
            Ok((a..=b)
                .map(|seed| {
                    let params = GenParams {
                        nodes,
                        density: args.density,
                        k: args.k.unwrap_or((seed % nodes as u64) as usize),
                        cost_max: args.cost_max,
                        seed,
                    };
                    Case {
                        name: format!("seed-{seed}"),
                        problem: random_instance(&params).map(Problem::Graph).map_err(|e| e.to_string()),
                    }
                })
                .collect())
        }
        (None, None) => Err(BadInput("give --suite or --seeds".into()).into()),
    }
}

fn run_case(case: &Case, args: &SolverArgs) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport {
        name: case.name.clone(),
        n: None,
        m: None,
        k: None,
        solver: None,
        oracle: None,
        agree: false,
        wall_ms: 0.0,
        error: None,
    };
    let problem = match &case.problem {
        Ok(p) => p,
        Err(e) => {
            report.error = Some(e.clone());
            return report;
        }
    };
    let (n, m, k) = problem.summary();
    (report.n, report.m, report.k) = (Some(n), Some(m), Some(k));
    let mut errors = Vec::new();
    let solved = problem.solve(&args.config());
    let oracle = problem.oracle();
    match &solved {
        Ok(r) => {
            if let Err(e) = problem.verify(&r.solution) {
                errors.push(format!("solver output: {e}"));
            }
            report.solver = Some(SolverSummary {
                total: format_rational(&r.solution.total),
                lp_bound: format_rational(&r.solution.lp_bound),
                iterations: r.solution.iterations,
                lp_solves: r.lp_solves,
                cuts: r.cuts,
            });
        }
        Err(e) => errors.push(format!("solver: {e}")),
    }
    match &oracle {
        Ok(o) => {
            report.oracle =
                Some(OracleSummary { best_cost: format_rational(&o.best_cost), pairs_examined: o.pairs_examined })
        }
        Err(e) => errors.push(format!("oracle: {e}")),
    }
    if let (Ok(r), Ok(o)) = (&solved, &oracle) {
        report.agree = r.solution.total == o.best_cost;
    }
    if !errors.is_empty() {
        report.error = Some(errors.join("; "));
    }
    report.wall_ms = start.elapsed().as_secs_f64() * 1000.0;
    report
}

pub fn run(args: &CompareArgs) -> Result<()> {
    let cases = cases(args)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build()?;
    let mut out: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("cannot write {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut failed = 0;
    for batch in cases.chunks(BATCH) {
        let reports: Vec<RunReport> = pool.install(|| batch.par_iter().map(|c| run_case(c, &args.solver)).collect());
        for r in reports {
            if !r.agree || r.error.is_some() {
                failed += 1;
            }
            writeln!(out, "{}", serde_json::to_string(&r)?)?;
        }
        out.flush()?;
    }
    log::info!("{} instances, {failed} failed", cases.len());
    if failed > 0 {
        return Err(Disagreement(failed).into());
    }
    Ok(())
}
