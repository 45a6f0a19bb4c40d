use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use vlfuse::io::{self, IoError, PlotKind, RunConfig};
use vlfuse::pipeline::{locate, locate_all, Algorithm};
use vlfuse::sim::{aggregate_stats, intersection_error_bound, run_sweep};
use vlfuse::Error;

/// Ground-target localization from camera pixels and laser ranges.
#[derive(Parser)]
#[command(name = "vlfuse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep over intersection angles.
    Simulate(SimulateArgs),
    /// Localize the target in one observation file with one algorithm.
    Solve(SolveArgs),
    /// Run every algorithm on one observation file.
    Compare(CompareArgs),
    /// Depth error caused by an angular error at a given intersection angle.
    Bound(BoundArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Intersection angles in degrees, comma separated.
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    algo: Option<Vec<Algorithm>>,
    /// Output directory; the results table goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write median and RMS plots (needs --out).
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    obs: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "fused_ridge")]
    algo: Algorithm,
    /// Write the estimate here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    obs: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    /// Intersection angle, degrees.
    #[arg(long)]
    gamma: f64,
    /// Line-of-sight angular error, degrees.
    #[arg(long)]
    delta: f64,
    /// Half the baseline between the two stations, meters.
    #[arg(long, default_value_t = 1000.0)]
    half_baseline: f64,
}

enum Failure {
    Usage(String),
    Data(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Solver(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Solver(m) => m,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Parse { .. } | IoError::UnknownKey(_) | IoError::OutOfRange { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Data(e.to_string()),
        }
    }
}

fn solver_failure(e: Error) -> Failure {
    Failure::Solver(e.to_string())
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Failure> {
    match path {
        Some(p) => Ok(io::parse_config(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(g) = args.gamma {
        cfg.gamma_sweep = g;
    }
    if let Some(a) = args.algo {
        cfg.algorithms = a;
    }
    cfg.validate()?;
    if args.plot && args.out.is_none() {
        return Err(Failure::Usage("--plot needs --out".into()));
    }

    let records = run_sweep(
        &cfg.scenario,
        &cfg.gamma_sweep,
        &cfg.noise,
        &cfg.algorithms,
        cfg.trials,
        cfg.seed,
        &cfg.localization(),
    )
    .map_err(|e| match e {
        Error::GeometryInfeasible(_) | Error::InvalidInput(_) => Failure::Usage(e.to_string()),
        other => solver_failure(other),
    })?;
    let stats = aggregate_stats(&records).map_err(solver_failure)?;

    match args.out {
        Some(dir) => {
            std::fs::create_dir_all(&dir).map_err(|e| Failure::Data(format!("{}: {e}", dir.display())))?;
            io::write_results(&stats, &dir.join("results.csv"))?;
            if args.plot {
                for kind in [PlotKind::MedianVsGamma, PlotKind::RmsVsGamma] {
                    io::emit_plot(&stats, &dir.join(kind.file_name()), kind)?;
                }
            }
        }
        None => print!("{}", io::results::render_results(&stats)?),
    }
    Ok(())
}

#[derive(Serialize)]
struct EstimateDoc {
    algorithm: Algorithm,
    x_m: f64,
    y_m: f64,
    z_m: f64,
    converged: bool,
    iterations: usize,
    final_residual_rms: f64,
    homogeneous_slack: f64,
    ridge_k_final: f64,
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let cfg = load_config(args.config.as_deref())?;
    let obs = io::load_observations(&args.obs, &cfg.scenario.camera)?;
    let out = locate(&obs, args.algo, &cfg.localization()).map_err(solver_failure)?;
    let report = out.report.as_ref();
    let doc = EstimateDoc {
        algorithm: out.algorithm,
        x_m: out.estimate.x,
        y_m: out.estimate.y,
        z_m: out.estimate.z,
        converged: out.converged,
        iterations: report.map_or(0, |r| r.iterations),
        final_residual_rms: report.map_or(f64::NAN, |r| r.final_residual_rms),
        homogeneous_slack: report.map_or(f64::NAN, |r| r.homogeneous_slack),
        ridge_k_final: report.and_then(|r| r.ridge_history.last().copied()).unwrap_or(f64::NAN),
    };
    let text = toml::to_string(&doc).map_err(|e| Failure::Data(e.to_string()))?;
    print!("{text}");
    if let Some(path) = args.out {
        std::fs::write(&path, &text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    }
    if let Some(r) = report {
        for w in &r.warnings {
            eprintln!("warning: {w:?}");
        }
    }
    Ok(())
}

fn compare(args: CompareArgs) -> Result<(), Failure> {
    let cfg = load_config(args.config.as_deref())?;
    let obs = io::load_observations(&args.obs, &cfg.scenario.camera)?;
    println!("algorithm,x_m,y_m,z_m,converged,iterations");
    let mut failed = None;
    for (algo, result) in locate_all(&obs, &Algorithm::ALL, &cfg.localization()) {
        match result {
            Ok(o) => println!(
                "{algo},{},{},{},{},{}",
                io::format_sig6(o.estimate.x),
                io::format_sig6(o.estimate.y),
                io::format_sig6(o.estimate.z),
                o.converged,
                o.report.as_ref().map_or(0, |r| r.iterations)
            ),
            Err(e) => {
                println!("{algo},NaN,NaN,NaN,false,0");
                eprintln!("{algo}: {e}");
                failed.get_or_insert(e);
            }
        }
    }
    match failed {
        Some(e) => Err(solver_failure(e)),
        None => Ok(()),
    }
}

fn bound(args: BoundArgs) -> Result<(), Failure> {
    match intersection_error_bound(args.gamma, args.delta, args.half_baseline) {
        Ok(v) => {
            println!("{}", io::format_sig6(v));
            Ok(())
        }
        Err(e @ Error::UnboundedError { .. }) => Err(solver_failure(e)),
        Err(e) => Err(Failure::Usage(e.to_string())),
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
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Solve(a) => solve(a),
        Command::Compare(a) => compare(a),
        Command::Bound(a) => bound(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
