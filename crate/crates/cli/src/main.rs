//! `unibid`: seeded regret experiments and one-off auction clearing.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use unibid::auction::{clear_auction, validate_bid_profile, Valuation};
use unibid::harness::config::{parse_pricing, parse_reals, read_pairs};
use unibid::harness::{run_experiment, write_csv, write_svg, RunConfig};

#[derive(Parser)]
#[command(
    name = "unibid",
    version,
    about = "Learning to bid in repeated uniform-price auctions"
)]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Run a regret experiment (the default when no subcommand is given).
    Run(Box<RunArgs>),
    /// Clear a single auction and print the outcome.
    Clear(ClearArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// key=value file; flags given here take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Units on sale, K.
    #[arg(long)]
    units: Option<String>,
    /// Rounds per replication.
    #[arg(long)]
    horizon: Option<String>,
    /// full, bandit or allwinner.
    #[arg(long)]
    feedback: Option<String>,
    /// lab (frb is only accepted by `clear`).
    #[arg(long)]
    pricing: Option<String>,
    /// Comma-separated per-unit values.
    #[arg(long)]
    values: Option<String>,
    /// fixed:a,b | iid[:lo,hi] | schedule:a,b;c,d | fpr:h1,h2 | fpr-iid[:lo,hi]
    #[arg(long, allow_hyphen_values = true)]
    adversary: Option<String>,
    /// Grid step; overrides the horizon-tuned default.
    #[arg(long)]
    epsilon: Option<String>,
    /// Learning rate; overrides the horizon-tuned default.
    #[arg(long)]
    eta: Option<String>,
    /// Default learning-rate formula: standard or balanced.
    #[arg(long)]
    eta_form: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Independent replications.
    #[arg(long)]
    reps: Option<String>,
    /// validate or perturb.
    #[arg(long)]
    tie_mode: Option<String>,
    /// CSV path; standard output when absent.
    #[arg(long)]
    out: Option<String>,
    /// SVG path.
    #[arg(long)]
    plot: Option<String>,
    /// linear or loglog.
    #[arg(long)]
    scale: Option<String>,
    /// Worker threads; output does not depend on it.
    #[arg(long)]
    workers: Option<String>,
}

impl RunArgs {
    fn flag_pairs(&self) -> [(&'static str, &Option<String>); 16] {
        [
            ("units", &self.units),
            ("horizon", &self.horizon),
            ("feedback", &self.feedback),
            ("pricing", &self.pricing),
            ("values", &self.values),
            ("adversary", &self.adversary),
            ("epsilon", &self.epsilon),
            ("eta", &self.eta),
            ("eta-form", &self.eta_form),
            ("seed", &self.seed),
            ("reps", &self.reps),
            ("tie-mode", &self.tie_mode),
            ("out", &self.out),
            ("plot", &self.plot),
            ("scale", &self.scale),
            ("workers", &self.workers),
        ]
    }

    fn to_config(&self) -> Result<RunConfig, unibid::Error> {
        let mut pairs = match &self.config {
            Some(path) => read_pairs(path)?,
            None => BTreeMap::new(),
        };
        for (key, value) in self.flag_pairs() {
            if let Some(v) = value {
                pairs.insert(key.to_string(), v.clone());
            }
        }
        Ok(RunConfig::from_pairs(&pairs)?)
    }
}

#[derive(Args)]
struct ClearArgs {
    /// Learner bids, high to low.
    #[arg(long)]
    bids: String,
    /// Adversary bids, high to low.
    #[arg(long)]
    adversary: String,
    #[arg(long)]
    values: String,
    /// lab or frb.
    #[arg(long, default_value = "lab")]
    pricing: String,
}

fn run(args: &RunArgs) -> Result<(), Box<dyn std::error::Error>> {
    let config = args.to_config()?;
    let traces = run_experiment(&config).map_err(unibid::Error::from)?;
    match &config.out {
        Some(path) => write_csv(&traces, BufWriter::new(File::create(path)?))?,
        None => write_csv(&traces, io::stdout().lock())?,
    }
    if let Some(path) = &config.plot {
        write_svg(&traces, config.scale, BufWriter::new(File::create(path)?))?;
    }
    let params = config.parameters()?;
    let mean = traces.iter().map(|t| t.final_regret()).sum::<f64>() / traces.len() as f64;
    eprintln!(
        "{} run(s), T={}, 1/eps={}, eta={:.6}: mean final regret {:.4}",
        traces.len(),
        config.horizon,
        params.inv_epsilon,
        params.eta,
        mean
    );
    Ok(())
}

fn clear(args: &ClearArgs) -> Result<(), Box<dyn std::error::Error>> {
    let bids = parse_reals("bids", &args.bids)?;
    let adversary = parse_reals("adversary", &args.adversary)?;
    let values = Valuation::new(parse_reals("values", &args.values)?)?;
    let units = bids.len();
    let learner = validate_bid_profile(&bids, units, None)?;
    let adversary = validate_bid_profile(&adversary, units, None)?;
    let outcome = clear_auction(&learner, &adversary, parse_pricing(&args.pricing)?, &values)?;
    let mut out = io::stdout().lock();
    writeln!(out, "price={}", outcome.price)?;
    writeln!(out, "allocation={}", outcome.allocation)?;
    writeln!(out, "utility={}", outcome.utility)?;
    writeln!(out, "price_setter={:?}", outcome.price_setter)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Some(Command::Clear(args)) => clear(args),
        Some(Command::Run(args)) => run(args),
        None => run(&cli.run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
