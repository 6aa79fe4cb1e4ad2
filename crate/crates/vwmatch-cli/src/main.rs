//! `omlab`: generate matching/allocation instances, run seeded
//! competitive-ratio experiments, drive the exhaustive analysis verifier,
//! and emit reproducible JSON/CSV reports.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use vwmatch::experiment::{
    configure_thread_pool, experiment_report_to_csv, experiment_report_to_json, run_experiment,
    run_msvv_convergence, run_trial_records, Algorithm, ExperimentConfig,
};
use vwmatch::generators::{
    gen_canonical_2x2, gen_edge_weight_hard, gen_greedy_gadget, gen_random, gen_skew_pair,
    gen_upper_triangular, RandomSpec, WeightDist,
};
use vwmatch::io;
use vwmatch::online::run_msvv;
use vwmatch::oracle;
use vwmatch::reduction::{reduce_single_bid, VertexKind};
use vwmatch::verifier::Verifier;

#[derive(Parser)]
#[command(name = "omlab", version, about = "online matching lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance, allocation, or star-distribution file
    Gen(GenArgs),
    /// Run a Monte-Carlo experiment and emit a summary report
    Run(RunArgs),
    /// Run the analysis verifier on an instance
    Verify(VerifyArgs),
    /// Reduce a single-bid allocation file to a matching instance
    Reduce(ReduceArgs),
    /// Compare the budgeted allocation rule with perturbed matching
    /// across a budget-granularity ladder
    MsvvCompare(MsvvCompareArgs),
    /// Emit per-trial records (tidy rows) for external plotting
    Report(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    UpperTriangular,
    GreedyGadget,
    TwoByTwo,
    SkewG1,
    SkewG2,
    Random,
    Star,
    Staircase,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// size parameter (offline side, or star size)
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// online side for the random family (defaults to n)
    #[arg(long)]
    n_online: Option<usize>,
    #[arg(long, default_value_t = 0.001)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    copies: usize,
    /// swap the gadget weights (adversarial for Ranking)
    #[arg(long, default_value_t = false)]
    swap: bool,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    edge_prob: f64,
    #[arg(long, value_enum, default_value_t = Weights::Uniform)]
    weights: Weights,
    /// geometric base for the star family
    #[arg(long, default_value_t = 100.0)]
    d: f64,
    /// agents for the staircase allocation family
    #[arg(long, default_value_t = 3)]
    agents: usize,
    /// budget per agent (unit bids) for the staircase family
    #[arg(long, default_value_t = 10)]
    scale: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Weights {
    Uniform,
    Lognormal,
    Twopoint,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    Greedy,
    Ranking,
    Perturbed,
    PerturbedDiscrete,
    Msvv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    /// discretization for perturbed-discrete
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 3)]
    k: u32,
    /// negative-control switch: run the deliberately broken variant
    #[arg(long, default_value_t = false)]
    mutant: bool,
    /// override the state-space enumeration guard
    #[arg(long)]
    guard: Option<u64>,
    /// sample count for statistical mode
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    /// allocation input file
    #[arg(long)]
    instance: PathBuf,
    /// matching-instance output file
    #[arg(long)]
    out: PathBuf,
    /// origin-map output file
    #[arg(long)]
    map: PathBuf,
}

#[derive(Args)]
struct MsvvCompareArgs {
    #[arg(long, default_value_t = 3)]
    agents: usize,
    /// comma-separated budget ladder in units of the bid
    #[arg(long, default_value = "1,10,100", value_delimiter = ',')]
    scales: Vec<u64>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    configure_thread_pool();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::MsvvCompare(args) => cmd_msvv_compare(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("write {path:?}: {e}")),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode, String> {
    let text = match args.family {
        Family::UpperTriangular => io::instance_to_json(&gen_upper_triangular(args.n)),
        Family::GreedyGadget => {
            io::instance_to_json(&gen_greedy_gadget(args.eps, args.copies, args.swap))
        }
        Family::TwoByTwo => io::instance_to_json(&gen_canonical_2x2(args.alpha)),
        Family::SkewG1 => io::instance_to_json(&gen_skew_pair().0),
        Family::SkewG2 => io::instance_to_json(&gen_skew_pair().1),
        Family::Random => io::instance_to_json(&gen_random(&RandomSpec {
            n_offline: args.n,
            n_online: args.n_online.unwrap_or(args.n),
            edge_prob: args.edge_prob,
            weight_dist: match args.weights {
                Weights::Uniform => WeightDist::Uniform,
                Weights::Lognormal => WeightDist::LogNormal,
                Weights::Twopoint => WeightDist::TwoPointSkew,
            },
            seed: args.seed,
        })),
        Family::Star => io::star_to_json(&gen_edge_weight_hard(args.n, args.d)),
        Family::Staircase => io::allocation_to_json(
            &vwmatch::experiment::staircase_allocation(args.agents, args.scale),
        ),
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct MsvvRunReport {
    schema_version: u32,
    algorithm: &'static str,
    revenue: f64,
    optimum: f64,
    ratio: f64,
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, String> {
    if args.algorithm == AlgorithmArg::Msvv {
        let alloc = io::read_allocation(&args.instance).map_err(|e| e.to_string())?;
        let problems = alloc.validate();
        if !problems.is_empty() {
            return Err(format!("invalid allocation: {problems:?}"));
        }
        let outcome = run_msvv(&alloc);
        let image = reduce_single_bid(&alloc);
        let flat = image.instance.expand_capacities();
        let optimum = oracle::solve_optimal(&flat.instance).optimum_value;
        let report = MsvvRunReport {
            schema_version: 1,
            algorithm: "msvv",
            revenue: outcome.revenue,
            optimum,
            ratio: outcome.revenue / optimum,
        };
        let text = match args.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&report).expect("serializes");
                s.push('\n');
                s
            }
            Format::Csv => format!(
                "schema_version,algorithm,revenue,optimum,ratio\n1,msvv,{},{},{}\n",
                report.revenue, report.optimum, report.ratio
            ),
        };
        emit(&args.out, &text)?;
        return Ok(ExitCode::SUCCESS);
    }

    let inst = io::read_instance(&args.instance).map_err(|e| e.to_string())?;
    let config = experiment_config(&args)?;
    let report = run_experiment(&inst, &config).map_err(|e| e.to_string())?;
    let text = match args.format {
        Format::Json => experiment_report_to_json(&report),
        Format::Csv => experiment_report_to_csv(&[report]),
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn experiment_config(args: &RunArgs) -> Result<ExperimentConfig, String> {
    let algorithm = match args.algorithm {
        AlgorithmArg::Greedy => Algorithm::Greedy,
        AlgorithmArg::Ranking => Algorithm::Ranking,
        AlgorithmArg::Perturbed => Algorithm::Perturbed,
        AlgorithmArg::PerturbedDiscrete => {
            let k = args.k.ok_or("--k is required for perturbed-discrete")?;
            if k == 0 {
                return Err("--k must be >= 1".to_string());
            }
            Algorithm::PerturbedDiscrete { k }
        }
        AlgorithmArg::Msvv => unreachable!("handled separately"),
    };
    if args.k.is_some() && !matches!(algorithm, Algorithm::PerturbedDiscrete { .. }) {
        return Err("--k only applies to perturbed-discrete".to_string());
    }
    Ok(ExperimentConfig { algorithm, trials: args.trials, seed: args.seed })
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, String> {
    let inst = io::read_instance(&args.instance).map_err(|e| e.to_string())?;
    let mut verifier =
        Verifier::new(&inst, args.k, args.mutant).map_err(|e| e.to_string())?;
    if let Some(guard) = args.guard {
        verifier = verifier.with_guard(guard);
    }
    let report = if verifier.within_guard() {
        verifier.run_all().map_err(|e| e.to_string())?
    } else {
        eprintln!(
            "state space {} exceeds the enumeration guard; \
             downgrading to statistical mode ({} samples)",
            verifier.states(),
            args.samples
        );
        verifier.run_statistical(args.samples, args.seed)
    };
    let mut text = serde_json::to_string_pretty(&report).expect("serializes");
    text.push('\n');
    emit(&args.out, &text)?;
    for check in &report.checks {
        eprintln!(
            "{}: {} ({} cases, {} violations)",
            check.name,
            if check.passed { "pass" } else { "FAIL" },
            check.cases,
            check.violations.len()
        );
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(Serialize)]
struct OriginEntry {
    agent: usize,
    kind: &'static str,
}

#[derive(Serialize)]
struct MapFile {
    version: u32,
    origin: Vec<OriginEntry>,
    counts: Vec<CountEntry>,
}

#[derive(Serialize)]
struct CountEntry {
    full_copies: u64,
    residual: f64,
}

fn cmd_reduce(args: ReduceArgs) -> Result<ExitCode, String> {
    let alloc = io::read_allocation(&args.instance).map_err(|e| e.to_string())?;
    let problems = alloc.validate();
    if !problems.is_empty() {
        return Err(format!("invalid allocation: {problems:?}"));
    }
    let image = reduce_single_bid(&alloc);
    io::write_instance(&args.out, &image.instance).map_err(|e| e.to_string())?;
    let map = MapFile {
        version: 1,
        origin: image
            .origin
            .iter()
            .map(|&(agent, kind)| OriginEntry {
                agent,
                kind: match kind {
                    VertexKind::FullCopy => "full",
                    VertexKind::Residual => "residual",
                },
            })
            .collect(),
        counts: image
            .counts
            .iter()
            .map(|&(full_copies, residual)| CountEntry { full_copies, residual })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&map).expect("serializes");
    text.push('\n');
    std::fs::write(&args.map, text).map_err(|e| format!("write {:?}: {e}", args.map))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_msvv_compare(args: MsvvCompareArgs) -> Result<ExitCode, String> {
    if args.scales.is_empty() {
        return Err("at least one ladder entry is required".to_string());
    }
    let points = run_msvv_convergence(args.agents, &args.scales, args.trials, args.seed);
    let text = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&points).expect("serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("scale,optimum,msvv_revenue,pg_mean_revenue,gap\n");
            for p in &points {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    p.scale, p.optimum, p.msvv_revenue, p.pg_mean_revenue, p.gap
                ));
            }
            s
        }
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct TrialRows {
    schema_version: u32,
    instance_hash: String,
    algorithm: String,
    optimum: f64,
    trials: Vec<vwmatch::experiment::TrialRecord>,
}

fn cmd_report(args: RunArgs) -> Result<ExitCode, String> {
    if args.algorithm == AlgorithmArg::Msvv {
        return Err("report emits per-trial rows; msvv is deterministic, use `run`".to_string());
    }
    let inst = io::read_instance(&args.instance).map_err(|e| e.to_string())?;
    let config = experiment_config(&args)?;
    let (optimum, records) = run_trial_records(&inst, &config).map_err(|e| e.to_string())?;
    let text = match args.format {
        Format::Csv => {
            let mut s = String::from("trial,seed,gain,ratio\n");
            for r in &records {
                s.push_str(&format!("{},{},{},{}\n", r.index, r.seed, r.gain, r.ratio));
            }
            s
        }
        Format::Json => {
            let rows = TrialRows {
                schema_version: 1,
                instance_hash: io::instance_hash(&inst),
                algorithm: config.algorithm.name(),
                optimum,
                trials: records,
            };
            let mut s = serde_json::to_string_pretty(&rows).expect("serializes");
            s.push('\n');
            s
        }
    };
    emit(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}
