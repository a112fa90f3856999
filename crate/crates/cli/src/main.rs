use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use compclass::experiment::{
    analyze, builtin, design, format_analysis, list_scenarios, parse_snr_range, read_csv, run, sweep_records,
    write_csv, KernelChoice, Overrides, ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "compclass", version, about = "Compressive classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Random,
    Designed,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in scenarios.
    List,
    /// Run an SNR sweep and write a CSV.
    Run {
        /// Built-in scenario name.
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        scenario: Option<String>,
        /// Scenario TOML file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of measurements.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_enum)]
        kernel: Option<KernelArg>,
        /// Monte Carlo trials per SNR point.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// SNR grid in dB as START:STOP:STEP.
        #[arg(long)]
        snr: Option<String>,
        /// Output CSV; defaults to `<scenario>_<kernel>_M<m>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a designed kernel and the geometry it achieves.
    Design {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        scenario: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        m: usize,
    },
    /// Fit slopes and gains on an existing sweep CSV.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn load(scenario: Option<&str>, config: Option<&PathBuf>) -> Result<ScenarioConfig> {
    match (scenario, config) {
        (Some(name), _) => Ok(builtin(name)?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(ScenarioConfig::from_toml_str(&text)?)
        }
        (None, None) => bail!("give --scenario or --config"),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::List => {
            for cfg in list_scenarios()? {
                println!("{:<30} {}", cfg.name, cfg.description);
            }
        }
        Command::Run { scenario, config, m, kernel, trials, seed, snr, out } => {
            let base = load(scenario.as_deref(), config.as_ref())?;
            let overrides = Overrides {
                m,
                kernel: kernel.map(|k| match k {
                    KernelArg::Random => KernelChoice::Random,
                    KernelArg::Designed => KernelChoice::Designed,
                }),
                trials,
                seed,
                snr: snr.as_deref().map(parse_snr_range).transpose()?,
            };
            let cfg = base.with_overrides(&overrides)?;
            let output = run(&cfg)?;
            let path = out.unwrap_or_else(|| {
                PathBuf::from(format!("{}_{}_M{}.csv", cfg.name, output.kernel.provenance().label(), output.kernel.m()))
            });
            let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(BufWriter::new(file), &sweep_records(&output.sweep))
                .with_context(|| format!("writing {}", path.display()))?;
            print!("{}", output.report());
            println!("csv: {}", path.display());
        }
        Command::Design { scenario, config, m } => {
            let cfg = load(scenario.as_deref(), config.as_ref())?;
            print!("{}", design(&cfg, m)?.report());
        }
        Command::Analyze { input } => {
            let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let records = read_csv(file).with_context(|| format!("reading {}", input.display()))?;
            print!("{}", format_analysis(&analyze(&records)));
        }
    }
    Ok(())
}
