//! Command-line front end: parse a config, dispatch an analysis, simulation,
//! comparison, or scenario run, and write CSV/summary artifacts.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration or validation
//! error, 3 tolerance breach in `compare`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ini_lab::analytic::from_db;
use ini_lab::config::{load_config, parse_channel_spec, RunConfig};
use ini_lab::experiments::{adhoc_analytic, adhoc_montecarlo, Engine, ScenarioSpec};
use ini_lab::simulate::{cross_validate_detailed, EnsembleOptions, RngSpec};
use ini_lab::{CpMode, Error};

const COMPARE_TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "ini-lab",
    version,
    about = "Inter-numerology interference analysis for multiplexed CP-OFDM carriers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form per-subcarrier interference and SIR for one configuration
    Analytic(RunArgs),
    /// Seeded Monte-Carlo measurement of the same quantities
    Montecarlo(RunArgs),
    /// Cross-validate the closed forms against the single-tone chain
    Compare(RunArgs),
    /// Run a named scenario and write its artifacts
    Scenario(ScenarioArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file with `key = value` lines; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Narrow-numerology DFT size N
    #[arg(long)]
    n: Option<usize>,
    /// Subcarrier-spacing ratio Q (a power of two; 1 = single numerology)
    #[arg(long)]
    q: Option<usize>,
    /// Band share of the narrow numerology; the wide one gets the rest
    #[arg(long)]
    eta: Option<f64>,
    /// CP length as a fraction of the DFT size
    #[arg(long)]
    cp_ratio: Option<f64>,
    /// individual | common
    #[arg(long)]
    cp_mode: Option<String>,
    /// Narrow-numerology per-subcarrier power in dB
    #[arg(long)]
    power_nsn_db: Option<f64>,
    /// Wide-numerology per-subcarrier power in dB
    #[arg(long)]
    power_wsn_db: Option<f64>,
    /// Monte-Carlo trial count
    #[arg(long)]
    trials: Option<usize>,
    /// Monte-Carlo seed
    #[arg(long)]
    seed: Option<u64>,
    /// Data constellation (bpsk)
    #[arg(long)]
    modulation: Option<String>,
    /// identity | taps:<delay:gain_re:gain_im;..>
    #[arg(long)]
    channel: Option<String>,
    /// Output directory for CSV and summary artifacts
    #[arg(long, default_value = "./results")]
    out: PathBuf,
}

#[derive(Args)]
struct ScenarioArgs {
    /// per_subcarrier_ini | q_sweep | power_offset | cross_validation
    #[arg(long)]
    name: String,
    /// analytic | montecarlo | both
    #[arg(long)]
    engine: Option<String>,
    #[command(flatten)]
    run: RunArgs,
}

fn apply_overrides(config: &mut RunConfig, args: &RunArgs) -> Result<(), Error> {
    if let Some(n) = args.n {
        config.pair.n_fft = n;
    }
    if let Some(q) = args.q {
        config.pair.q = q;
    }
    if let Some(eta) = args.eta {
        config.pair.eta_nsn = eta;
        config.pair.eta_wsn = 1.0 - eta;
    }
    if let Some(cp_ratio) = args.cp_ratio {
        config.pair.cp_ratio = cp_ratio;
    }
    if let Some(cp_mode) = &args.cp_mode {
        config.pair.cp_mode = cp_mode.parse::<CpMode>()?;
    }
    if let Some(db) = args.power_nsn_db {
        config.pair.power_nsn = from_db(db);
    }
    if let Some(db) = args.power_wsn_db {
        config.pair.power_wsn = from_db(db);
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(modulation) = &args.modulation {
        config.modulation = modulation.parse()?;
    }
    if let Some(channel) = &args.channel {
        config.channel = parse_channel_spec(channel)?;
    }
    Ok(())
}

fn build_config(args: &RunArgs) -> Result<RunConfig, Error> {
    let mut config = match &args.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    apply_overrides(&mut config, args)?;
    Ok(config)
}

/// Worker count from INI_LAB_THREADS; 0 means available parallelism. The
/// results do not depend on it.
fn workers_from_env() -> Result<usize, Error> {
    match std::env::var("INI_LAB_THREADS") {
        Err(_) => Ok(0),
        Ok(s) => s.trim().parse().map_err(|_| {
            Error::BadConfig(format!("INI_LAB_THREADS = '{s}' is not a thread count"))
        }),
    }
}

fn ensemble_options(config: &RunConfig, workers: usize) -> EnsembleOptions {
    EnsembleOptions {
        trials: config.trials,
        rng: RngSpec { seed: config.seed },
        modulation: config.modulation,
        workers,
        channel: config.channel.clone(),
    }
}

fn run() -> Result<ExitCode, Error> {
    let cli = Cli::parse();
    let workers = workers_from_env()?;
    match cli.command {
        Command::Analytic(args) => {
            let config = build_config(&args)?;
            let result = adhoc_analytic(&config.pair)?;
            let (csv, summary) = result.write(&args.out)?;
            println!("wrote {} and {}", csv.display(), summary.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Montecarlo(args) => {
            let config = build_config(&args)?;
            let opts = ensemble_options(&config, workers);
            let result = adhoc_montecarlo(&config.pair, &opts)?;
            let (csv, summary) = result.write(&args.out)?;
            println!("wrote {} and {}", csv.display(), summary.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare(args) => {
            let config = build_config(&args)?;
            let pair = config.pair.validate()?;
            let report = cross_validate_detailed(&pair, pair.cp_mode());
            let pass = report.max_rel_err <= COMPARE_TOLERANCE;
            println!(
                "compare cp_mode={} wsn_to_nsn={:e} nsn_to_wsn={:e} max_rel_err={:e} tolerance={:e} status={}",
                pair.cp_mode().label(),
                report.wsn_to_nsn_max_rel_err,
                report.nsn_to_wsn_max_rel_err,
                report.max_rel_err,
                COMPARE_TOLERANCE,
                if pass { "PASS" } else { "FAIL" }
            );
            Ok(if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
        Command::Scenario(args) => {
            let Some(mut spec) = ScenarioSpec::by_name(&args.name) else {
                return Err(Error::BadConfig(format!(
                    "unknown scenario '{}'; expected one of {}",
                    args.name,
                    ScenarioSpec::names().join(", ")
                )));
            };
            let mut config = RunConfig {
                pair: spec.base.clone(),
                trials: spec.trials,
                seed: spec.seed,
                ..RunConfig::default()
            };
            if let Some(path) = &args.run.config {
                let file = load_config(path)?;
                config.pair = file.pair;
                config.trials = file.trials;
                config.seed = file.seed;
                config.modulation = file.modulation;
                config.channel = file.channel;
            }
            apply_overrides(&mut config, &args.run)?;
            spec.base = config.pair;
            spec.trials = config.trials;
            spec.seed = config.seed;
            spec.workers = workers;
            if let Some(engine) = &args.engine {
                spec.engine = engine.parse::<Engine>()?;
            }
            let result = spec.run()?;
            let (csv, summary) = result.write(&args.run.out)?;
            println!("wrote {} and {}", csv.display(), summary.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), e);
            let code = match e {
                Error::Io(_) => 1,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
