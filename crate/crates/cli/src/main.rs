//! `dgmres`: solve singular systems for their Drazin-inverse solution with
//! restarted DGMRES or ADGMRES and compare solvers side by side.
//!
//! Exit codes: 0 when every run converged, 2 when some run hit the cycle
//! cap, 1 on usage, input or solver errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use drazin_krylov::problems::{resolve, ExampleId, IndexChoice, MatrixSource, ProblemSpec, RhsChoice, X0Choice};
use drazin_krylov::report::{
    checkpoint_table, export_history, export_plot_data, run_compare, summary, CompareOptions, Method, RunReport,
    SolverRun,
};

#[derive(Parser, Debug)]
#[command(
    name = "dgmres",
    version,
    about = "Drazin-inverse solutions of singular systems by (A)DGMRES"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one solver.
    Solve(SolveArgs),
    /// Run several solvers on the same problem from the same initial guess.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// Matrix Market file with the system matrix.
    #[arg(long, required_unless_present = "example", conflicts_with = "example")]
    matrix: Option<PathBuf>,
    /// Built-in example: ex1, ex2, ex3 or ex4.
    #[arg(long, value_parser = parse_example)]
    example: Option<ExampleId>,
    /// Right-hand side file (plain list or one-column Matrix Market).
    #[arg(long, conflicts_with = "ones")]
    rhs: Option<PathBuf>,
    /// Use b = (1, ..., 1).
    #[arg(long)]
    ones: bool,
    /// Index of the matrix, or `auto` to compute it.
    #[arg(long, value_parser = parse_index)]
    index: IndexChoice,
    /// Initial guess file (default: zero vector).
    #[arg(long)]
    x0: Option<PathBuf>,
    /// Apply a reproducible random similarity transform to (A, b).
    #[arg(long)]
    similarity_seed: Option<u64>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Relative seminorm tolerance.
    #[arg(long)]
    eps: Option<f64>,
    /// Maximum number of restart cycles.
    #[arg(long)]
    max_cycles: Option<usize>,
    /// Write the convergence history as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write gnuplot-ready `cycle relative_seminorm` blocks.
    #[arg(long)]
    plot_data: Option<PathBuf>,
    /// Cross-check the given index against the computed one and print the
    /// dense Drazin-inverse solution.
    #[arg(long)]
    oracle_check: bool,
    /// Largest dimension for which the dense oracle runs.
    #[arg(long, default_value_t = 500)]
    oracle_cap: usize,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// dgmres or adgmres.
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Restart size m (must exceed the index).
    #[arg(short = 'm', long = "restart")]
    m: usize,
    /// Number of Ritz vectors added per cycle (adgmres only).
    #[arg(short = 'k', long = "augment", default_value_t = 0)]
    k: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Solver as method,m,k (repeatable), e.g. --run adgmres,6,1 --run dgmres,7,0
    #[arg(long = "run", required = true, value_parser = parse_run)]
    runs: Vec<SolverRun>,
    /// Fixed-budget mode: run to the largest cycle count and tabulate the
    /// relative seminorm at each listed count, e.g. 50,100,200,300.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["eps", "max_cycles"])]
    checkpoints: Vec<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_example(s: &str) -> Result<ExampleId, String> {
    s.parse()
        .map_err(|e: drazin_krylov::problems::ProblemError| e.to_string())
}

fn parse_index(s: &str) -> Result<IndexChoice, String> {
    s.parse()
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn parse_run(s: &str) -> Result<SolverRun, String> {
    s.parse().map_err(|e: drazin_krylov::report::ReportError| e.to_string())
}

fn problem_spec(args: &ProblemArgs) -> ProblemSpec {
    let source = match (&args.matrix, args.example) {
        (Some(path), _) => MatrixSource::File(path.clone()),
        (None, Some(id)) => MatrixSource::Example(id),
        (None, None) => unreachable!("clap requires one source"),
    };
    let rhs = match (&args.rhs, args.ones) {
        (Some(path), _) => RhsChoice::File(path.clone()),
        (None, true) => RhsChoice::Ones,
        (None, false) => RhsChoice::Default,
    };
    ProblemSpec {
        source,
        rhs,
        index: args.index,
        x0: args.x0.clone().map_or(X0Choice::Zero, X0Choice::File),
        similarity_seed: args.similarity_seed,
    }
}

fn execute(problem_args: &ProblemArgs, runs: &[SolverRun], output: &OutputArgs, checkpoints: &[usize]) -> Result<bool> {
    let spec = problem_spec(problem_args);
    let problem = resolve(&spec, output.oracle_check)?;
    if let Some(ci) = problem.computed_index {
        if spec.index == IndexChoice::Auto {
            println!("index resolved automatically: a = {ci}");
        }
    }
    for run in runs {
        if run.method == Method::Dgmres && run.k != 0 {
            anyhow::bail!("{run}: k applies to adgmres only");
        }
    }
    let mut opts = CompareOptions {
        oracle_size_cap: output.oracle_cap,
        ..CompareOptions::default()
    };
    if let Some(&last) = checkpoints.iter().max() {
        opts.eps = f64::MIN_POSITIVE;
        opts.max_cycles = last;
    }
    if let Some(eps) = output.eps {
        opts.eps = eps;
    }
    if let Some(c) = output.max_cycles {
        opts.max_cycles = c;
    }

    let report = run_compare(&problem, runs, &opts)?;
    print!("{}", summary(&report));
    if !checkpoints.is_empty() {
        print!("{}", checkpoint_table(&report, checkpoints));
    }
    if output.oracle_check {
        print_oracle(&report);
    }
    if let Some(path) = &output.out {
        export_history(&report, path).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &output.plot_data {
        export_plot_data(&report, path).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report.all_converged())
}

fn print_oracle(report: &RunReport) {
    match &report.oracle_solution {
        Some(x) => {
            let shown: Vec<String> = x.iter().take(8).map(|z| format!("{:.6e}", z.re)).collect();
            let more = if x.len() > 8 { ", ..." } else { "" };
            println!("oracle A^D b (real parts): [{}{more}]", shown.join(", "));
        }
        None => println!("oracle solution not computed"),
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve(args) => {
            let run = SolverRun {
                method: args.method,
                m: args.m,
                k: args.k,
            };
            execute(&args.problem, &[run], &args.output, &[])
        }
        Command::Compare(args) => execute(&args.problem, &args.runs, &args.output, &args.checkpoints),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
