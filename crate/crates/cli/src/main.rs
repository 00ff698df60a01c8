//! `rrst`: solve, generate, verify and cross-check robust recoverable
//! spanning tree and matroid basis instances.
//!
//! Exit status: 0 success, 2 invalid input, 3 failed verification or
//! disagreement with the oracle, 4 internal error.

mod compare;
mod problem;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use exact_lp::format_rational;
use rrst::generate::{random_instance, GenParams};
use rrst::oracle::OracleError;
use rrst::{
    CutsPerRound, FixingMode, InstanceError, ModelConfig, SeparationMode, Solution, SolverConfig, SolverError,
    VerifyFailure,
};

use crate::compare::{CompareArgs, Disagreement};
use crate::problem::Problem;

#[derive(Parser)]
#[command(name = "rrst", version, about = "Exact robust recoverable spanning tree and matroid basis solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance by iterative relaxation.
    Solve(SolveArgs),
    /// Write a random connected instance.
    Gen(GenArgs),
    /// Check a solution against its instance.
    Verify(VerifyArgs),
    /// Run solver and brute-force oracle side by side, one JSON line per instance.
    Compare(CompareArgs),
    /// Solve an instance by exhaustive enumeration.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Strict,
    Batch,
}

#[derive(Clone, Copy, ValueEnum)]
enum Separation {
    Mincut,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Cuts {
    One,
    All,
}

/// Solver knobs shared by `solve` and `compare`.
#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "batch")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "mincut")]
    separation: Separation,
    /// Violated rows added per side and round.
    #[arg(long, value_enum, default_value = "one")]
    cuts: Cuts,
    /// Append every relaxation solved to this file.
    #[arg(long)]
    dump: Option<PathBuf>,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            fixing: match self.mode {
                Mode::Strict => FixingMode::Strict,
                Mode::Batch => FixingMode::Batch,
            },
            model: ModelConfig {
                separation: match self.separation {
                    Separation::Mincut => SeparationMode::MinCut,
                    Separation::Exhaustive => SeparationMode::Exhaustive,
                },
                cuts_per_round: match self.cuts {
                    Cuts::One => CutsPerRound::One,
                    Cuts::All => CutsPerRound::All,
                },
                dump_path: self.dump.clone(),
                ..ModelConfig::default()
            },
            ..SolverConfig::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Treat the input as a matroid instance; graph files become graphic matroids.
    #[arg(long)]
    matroid: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    nodes: usize,
    /// Probability of each edge beyond the random spanning tree.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    k: usize,
    #[arg(long, default_value_t = 9)]
    cost_max: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    #[arg(long)]
    matroid: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    matroid: bool,
}

/// Invalid input that is not covered by a library error type.
#[derive(Debug)]
struct BadInput(String);

impl std::fmt::Display for BadInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BadInput {}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n")).with_context(|| format!("cannot write {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let problem = Problem::load(&read(&args.input)?, args.matroid)?;
    let report = problem.solve(&args.solver.config())?;
    info!(
        "total {} after {} iterations, {} relaxations, {} cuts",
        format_rational(&report.solution.total),
        report.solution.iterations,
        report.lp_solves,
        report.cuts
    );
    write_output(args.output.as_deref(), &report.solution.to_json())
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let inst = random_instance(&GenParams {
        nodes: args.nodes,
        density: args.density,
        k: args.k,
        cost_max: args.cost_max,
        seed: args.seed,
    })?;
    write_output(args.output.as_deref(), &inst.to_json())
}

fn cmd_verify(args: &VerifyArgs) -> Result<()> {
    let problem = Problem::load(&read(&args.instance)?, args.matroid)?;
    let solution = Solution::from_json(&read(&args.solution)?)?;
    problem.verify(&solution).context("verification failed")?;
    println!("ok");
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> Result<()> {
    let problem = Problem::load(&read(&args.input)?, args.matroid)?;
    let result = problem.oracle()?;
    info!("{} pairs examined", result.pairs_examined);
    let solution = result.to_solution(problem.costs(), problem.overlap_target());
    write_output(args.output.as_deref(), &solution.to_json())
}

/// Maps the first recognised error in the chain to its exit status.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<VerifyFailure>() || cause.is::<Disagreement>() {
            return 3;
        }
        if cause.is::<SolverError>() {
            return 4;
        }
        if cause.is::<InstanceError>()
            || cause.is::<rrst::solver::SolutionParseError>()
            || cause.is::<std::io::Error>()
            || cause.is::<BadInput>()
            || cause.is::<OracleError>()
        {
            return 2;
        }
    }
    4
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("RRST_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Compare(a) => compare::run(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
