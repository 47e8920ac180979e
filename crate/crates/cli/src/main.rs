use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gpolyuc::engine::{solve_extensive, solve_uc, CutMode, SolveOptions, SolveReport, SolveStatus};
use gpolyuc::gpoly::{check_structure, BorderEvaluator};
use gpolyuc::io::{
    bench_csv, generate_instance, load_instance, run_bench, save_instance, write_cuts_csv, write_report,
    BenchConfig, GeneratorParams, IoError,
};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_ITERATION_LIMIT: u8 = 4;

#[derive(Parser)]
#[command(name = "gpolyuc", version, about = "Unit commitment with an exactly aggregated EV fleet")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file.
    Solve(SolveArgs),
    /// Write a synthetic instance.
    Generate(GenerateArgs),
    /// Validate an instance and check the structure of its border functions.
    Check(CheckArgs),
    /// Solve a grid of synthetic instances and write timing CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CutModeArg {
    All,
    Single,
}

#[derive(Args)]
struct SolverFlags {
    /// Separation tolerance, relative to 1 + |p|_1.
    #[arg(long, default_value_t = 1e-6)]
    sep_tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Worker threads for border evaluation.
    #[arg(long, env = "UC_THREADS", default_value_t = 1)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = CutModeArg::All)]
    cut_mode: CutModeArg,
    /// Stop after the first master solve.
    #[arg(long)]
    no_separation: bool,
}

impl SolverFlags {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            sep_tol: self.sep_tol,
            max_iters: self.max_iters,
            threads: self.threads.max(1),
            cut_mode: match self.cut_mode {
                CutModeArg::All => CutMode::All,
                CutModeArg::Single => CutMode::Single,
            },
            separation: !self.no_separation,
            ..SolveOptions::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Report JSON path; defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cuts_csv: Option<PathBuf>,
    /// Solve the disaggregated reference model instead.
    #[arg(long)]
    extensive: bool,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct GeneratorFlags {
    #[arg(long = "step-hours", default_value_t = 1.0)]
    step_hours: f64,
    #[arg(long, default_value_t = 5_100_000)]
    fleet_size: u64,
    /// Fleet driving energy as a fraction of total demand.
    #[arg(long, default_value_t = 0.035)]
    ev_share: f64,
    /// Allow discharging into the grid.
    #[arg(long)]
    v2g: bool,
    #[arg(long, default_value_t = 12)]
    units: usize,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(short = 'T', long = "T", default_value_t = 24)]
    steps: usize,
    #[arg(short = 'N', long = "N", default_value_t = 10)]
    profiles: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    generator: GeneratorFlags,
}

impl GeneratorFlags {
    fn params(&self, steps: usize, profiles: usize, seed: u64) -> GeneratorParams {
        GeneratorParams {
            steps,
            step_hours: self.step_hours,
            num_profiles: profiles,
            fleet_size: self.fleet_size,
            ev_share: self.ev_share,
            v2g: self.v2g,
            num_units: self.units,
            seed,
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    instance: PathBuf,
    /// Random subset pairs per border pair when T > 4.
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long = "T-list", value_delimiter = ',', default_value = "24,48,96")]
    steps: Vec<usize>,
    #[arg(long = "N-list", value_delimiter = ',', default_value = "2,10,50")]
    profiles: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV path; defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    generator: GeneratorFlags,
    #[command(flatten)]
    solver: SolverFlags,
}

/// An error tagged with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn fail(code: u8) -> impl FnOnce(anyhow::Error) -> Failure {
    move |error| Failure { code, error }
}

fn io_failure(e: IoError) -> Failure {
    let code = match e {
        IoError::Engine(_) => EXIT_SOLVER,
        _ => EXIT_INPUT,
    };
    Failure { code, error: e.into() }
}

fn status_code(report: &SolveReport) -> u8 {
    match report.status {
        SolveStatus::Optimal => 0,
        SolveStatus::Infeasible => EXIT_SOLVER,
        SolveStatus::IterationLimit => EXIT_ITERATION_LIMIT,
    }
}

fn solve(args: SolveArgs) -> Result<u8, Failure> {
    let instance = load_instance(&args.instance).map_err(io_failure)?;
    let opts = args.solver.options();
    let report = if args.extensive { solve_extensive(&instance) } else { solve_uc(&instance, &opts) }
        .map_err(|e| Failure { code: EXIT_SOLVER, error: e.into() })?;
    match &args.out {
        Some(path) => write_report(&report, &opts, path).map_err(io_failure)?,
        None => {
            let v = gpolyuc::io::report_json(&report, &opts);
            println!("{}", serde_json::to_string_pretty(&v).expect("report serializes"));
        }
    }
    if let Some(path) = &args.cuts_csv {
        write_cuts_csv(&report, path).map_err(io_failure)?;
    }
    eprintln!(
        "status {:?}, objective {}, {} iterations, {} cuts",
        report.status,
        report.objective,
        report.iterations.len(),
        report.total_cuts
    );
    Ok(status_code(&report))
}

fn generate(args: GenerateArgs) -> Result<u8, Failure> {
    let instance = generate_instance(&args.generator.params(args.steps, args.profiles, args.seed));
    save_instance(&instance, &args.out).map_err(io_failure)?;
    Ok(0)
}

fn check(args: CheckArgs) -> Result<u8, Failure> {
    let instance = load_instance(&args.instance).map_err(io_failure)?;
    let steps = instance.steps();
    let mut checked = 0;
    for n in 0..instance.fleet.len() {
        let single = BorderEvaluator::new(&instance.fleet[n..n + 1], steps);
        let r = check_structure(&single, args.samples, args.seed)
            .with_context(|| format!("profile {n}"))
            .map_err(fail(EXIT_INPUT))?;
        checked += r.pairs_checked;
    }
    let aggregate = BorderEvaluator::new(&instance.fleet, steps);
    let r = check_structure(&aggregate, args.samples, args.seed)
        .context("aggregate fleet")
        .map_err(fail(EXIT_INPUT))?;
    checked += r.pairs_checked;
    println!(
        "ok: T={steps}, {} units, {} profiles, {checked} subset pairs checked{}",
        instance.units.len(),
        instance.fleet.len(),
        if r.exhaustive { " (exhaustive)" } else { "" }
    );
    Ok(0)
}

fn bench(args: BenchArgs) -> Result<u8, Failure> {
    let cfg = BenchConfig {
        steps: args.steps,
        profiles: args.profiles,
        runs: args.runs,
        seed: args.seed,
        generator: args.generator.params(0, 0, 0),
        solve: args.solver.options(),
    };
    let (rows, _) = run_bench(&cfg).map_err(io_failure)?;
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))
                .map_err(fail(EXIT_INPUT))?;
            bench_csv(&rows, file).map_err(io_failure)?;
        }
        None => bench_csv(&rows, std::io::stdout().lock()).map_err(io_failure)?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Generate(a) => generate(a),
        Command::Check(a) => check(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
