use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use recourse_core::audit::GroupChoice;
use recourse_core::pipeline::{
    metrics_csv, parse_duration, run_solve, write_audit, write_text, LoadedFront, PredictorSpec, RunConfig,
};
use recourse_core::solver::{SolveStatus, SolverConfig, DEFAULT_MAX_DEPTH, DEFAULT_MAX_NODES, DEFAULT_MIN_LEAF};
use recourse_core::synth::{gen_synth, write_synth, SynthSpec};
use recourse_core::{Error, Result};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_TIMEOUT: u8 = 4;

/// Solutions echoed after a solve.
const SHOWN: usize = 12;

/// Compute, evaluate and audit Pareto fronts of recourse summary trees.
#[derive(Parser)]
#[command(name = "recourse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for the cost/loss front and write front.json, stats.json and front.csv.
    Solve(SolveArgs),
    /// Re-evaluate a saved front on a dataset.
    Evaluate(EvaluateArgs),
    /// Compare recourse between two groups of a categorical feature.
    Audit(AuditArgs),
    /// Write a seeded synthetic dataset described by a JSON spec.
    GenSynth(SynthArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    /// `logistic`, `rules=PATH` or `external=COMMAND`.
    #[arg(long, default_value = "logistic")]
    predictor: String,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    depth: usize,
    /// Largest number of branch nodes; defaults to min(7, 2^depth - 1).
    #[arg(long)]
    max_nodes: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MIN_LEAF)]
    min_leaf: usize,
    #[arg(long, default_value_t = 3)]
    sparsity: usize,
    /// Wall-clock budget such as `90s`, `500ms` or `10m`.
    #[arg(long, value_parser = duration)]
    timeout: Option<Duration>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Bin count for every numeric feature, overriding the schema.
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cache file to reuse, created when missing.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    front: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Label written to the `split` column.
    #[arg(long, default_value = "test")]
    split: String,
    /// Also report each value of this categorical feature.
    #[arg(long)]
    group: Option<String>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    front: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    group: String,
    /// Group expected to fare worse; the group with the highest adverse rate by default.
    #[arg(long)]
    focus: Option<String>,
    /// Comparison group; the group with the lowest adverse rate by default.
    #[arg(long)]
    reference: Option<String>,
    /// Output directory; the front's directory when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn duration(text: &str) -> std::result::Result<Duration, String> {
    parse_duration(text).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

fn solve(args: SolveArgs) -> Result<u8> {
    let max_nodes = args.max_nodes.unwrap_or_else(|| {
        let full = 1usize.checked_shl(args.depth as u32).map_or(usize::MAX, |p| p - 1);
        DEFAULT_MAX_NODES.min(full)
    });
    let mut config = RunConfig::new(args.data, args.schema, args.out);
    config.predictor = args.predictor.parse::<PredictorSpec>()?;
    config.solver = SolverConfig {
        timeout: args.timeout,
        threads: args.threads,
        ..SolverConfig::new(args.depth, max_nodes, args.min_leaf)
    };
    config.sparsity = args.sparsity;
    config.bins = args.bins;
    config.seed = args.seed;
    config.cache_file = args.cache;
    let report = run_solve(&config)?;
    let front = &report.front;
    println!(
        "{} solutions over {} affected instances ({:?}) written to {}",
        front.solutions.len(),
        front.n_affected,
        front.status,
        config.out.display()
    );
    let shown = front.solutions.len().min(SHOWN);
    let skip = front.solutions.len() - shown;
    for (k, s) in front.solutions.iter().enumerate() {
        if k >= shown / 2 && k < shown / 2 + skip {
            if k == shown / 2 {
                println!("  ... {skip} more; see front.csv");
            }
            continue;
        }
        println!(
            "  #{:<3} cost {:.4}  loss {:.4}  invalidity {:.4}  depth {}",
            s.index, s.cost_mean, s.loss_mean, s.invalidity, s.depth
        );
    }
    Ok(match front.status {
        SolveStatus::Complete => 0,
        SolveStatus::TimedOut => {
            log::warn!("time budget exhausted; the front may be incomplete");
            EXIT_TIMEOUT
        }
    })
}

fn evaluate(args: EvaluateArgs) -> Result<u8> {
    let front = LoadedFront::load(&args.front)?;
    let data = front.load_data(&args.data)?;
    let groups = match &args.group {
        Some(group) => front.evaluate_by_group(&data, group)?,
        None => vec![("all".to_string(), front.evaluate(&data)?)],
    };
    let csv = metrics_csv(&groups, &args.split);
    match &args.out {
        Some(path) => write_text(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn audit(args: AuditArgs) -> Result<u8> {
    let front = LoadedFront::load(&args.front)?;
    let data = front.load_data(&args.data)?;
    let choice = GroupChoice {
        focus: args.focus,
        reference: args.reference,
    };
    let report = front.audit(&data, &args.group, &choice)?;
    let out = args.out.unwrap_or_else(|| {
        args.front
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."))
    });
    write_audit(&report, &out)?;
    print!("{}", report.to_markdown());
    Ok(0)
}

fn gen(args: SynthArgs) -> Result<u8> {
    let spec: SynthSpec = serde_json::from_str(&read(&args.spec)?)
        .map_err(|e| Error::Config(format!("{}: {e}", args.spec.display())))?;
    let output = gen_synth(&spec)?;
    write_synth(&output, &args.out)?;
    println!("{} rows written to {}", output.train.len(), args.out.display());
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Audit(args) => audit(args),
        Command::GenSynth(args) => gen(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() {
                EXIT_CONFIG
            } else if e.is_infeasible() {
                EXIT_INFEASIBLE
            } else {
                EXIT_FAILURE
            })
        }
    }
}
