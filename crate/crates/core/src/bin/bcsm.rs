use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bcsm::io::commands::{self, exit_code, CommandOutcome};
use bcsm::io::config::{Overrides, RunConfig, RunSettings};

#[derive(Parser)]
#[command(name = "bcsm", version, about = "Semi-Markov breast cancer progression model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "BCSM_OUT_DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    step: Option<f64>,
    /// pre, s1 or s2.
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// markov, semimarkov or both.
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long = "mu35-scale", global = true)]
    mu35_scale: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    paths: Option<u64>,
    /// Reporting time in years.
    #[arg(long, global = true)]
    horizon: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Occupancy probabilities to occupancy.csv.
    Solve,
    /// Survival and excess deaths to survival.csv and excess.csv.
    Report,
    /// All outputs across the sensitivity grid.
    Sweep,
    /// Monte Carlo occupancy estimates to simulation.csv.
    Simulate {
        /// Also dump the events of this many paths to paths.csv.
        #[arg(long, default_value_t = 0)]
        dump: u64,
    },
    /// Compare against the embedded reference tables.
    Validate,
    /// Refit the progression polynomial.
    Fit {
        #[arg(long = "degree", default_values_t = [4])]
        degrees: Vec<usize>,
    },
}

fn run(cli: Cli) -> bcsm::Result<CommandOutcome> {
    let c = cli.common;
    let file = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let explicit_out = c.out.clone();
    let overrides = Overrides {
        out: c.out,
        step: c.step,
        scenario: c.scenario,
        model: c.model,
        alpha: c.alpha,
        beta: c.beta,
        mu35_scale: c.mu35_scale,
        seed: c.seed,
        paths: c.paths,
        horizon: c.horizon,
    };
    let settings = RunSettings::resolve(file, overrides)?;
    match cli.command {
        Command::Solve => commands::run_solve(&settings),
        Command::Report => commands::run_report(&settings),
        Command::Sweep => commands::run_sweep(&settings),
        Command::Simulate { dump } => commands::run_simulate(&settings, dump),
        Command::Validate => commands::run_validate(settings.step, explicit_out.as_ref()).map(|(o, _)| o),
        Command::Fit { degrees } => commands::run_fit(&degrees, &settings),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            if !outcome.summary.ends_with('\n') {
                println!();
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(if outcome.failed { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("bcsm: {}", e.to_string().replace('\n', " "));
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
