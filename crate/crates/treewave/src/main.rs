//! Thin command-line front end over the library: network generation,
//! lossless/lossy comparison runs, and the invariant verification suite.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use treewave::experiment::{
    generate_network_bundle, run_lossless, run_lossy, run_verification, ExperimentConfig,
};
use treewave::zoo::Scheme;

#[derive(Parser)]
#[command(
    name = "treewave",
    about = "In-network transforms on routing trees",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (flat key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scheme list (comma separated).
    #[arg(long)]
    scheme: Option<String>,
    /// Override the trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> treewave::Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(schemes) = &self.scheme {
            config.schemes = schemes
                .split(',')
                .map(|s| Scheme::parse(s.trim()))
                .collect::<treewave::Result<Vec<_>>>()?;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a network with schedule and pruned causal sets as JSON.
    GenNet {
        #[arg(long, default_value_t = 50)]
        nodes: usize,
        #[arg(long, default_value_t = 600.0)]
        extent: f64,
        /// `variable` or `fixed:<radius>`.
        #[arg(long, default_value = "variable")]
        radio: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lossless-mode cost-reduction comparison across schemes.
    Lossless(RunArgs),
    /// Lossy cost-distortion sweep over quantizer steps.
    Lossy(RunArgs),
    /// Run the invariant suite on generated fixtures.
    Verify {
        #[arg(long, default_value_t = 30)]
        nodes: usize,
        #[arg(long, default_value_t = 10)]
        fixtures: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn emit(text: String, out: Option<PathBuf>) -> treewave::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Into::into),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run() -> treewave::Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::GenNet {
            nodes,
            extent,
            radio,
            seed,
            out,
        } => {
            let mut config = ExperimentConfig {
                nodes,
                extent,
                master_seed: seed,
                ..ExperimentConfig::default()
            };
            config.radio = if radio == "variable" {
                treewave::RadioModel::VariableRange
            } else if let Some(r) = radio.strip_prefix("fixed:") {
                treewave::RadioModel::FixedRange {
                    radius: r.parse().map_err(|e| {
                        treewave::Error::InvalidArgument(format!("radio radius: {e}"))
                    })?,
                }
            } else {
                return Err(treewave::Error::InvalidArgument(format!(
                    "radio must be variable or fixed:<radius>, got '{radio}'"
                )));
            };
            let bundle = generate_network_bundle(&config, 0)?;
            emit(serde_json::to_string_pretty(&bundle)? + "\n", out)?;
            Ok(true)
        }
        Command::Lossless(args) => {
            let config = args.config()?;
            let table = run_lossless(&config)?;
            emit(table.to_csv(), args.out)?;
            Ok(true)
        }
        Command::Lossy(args) => {
            let config = args.config()?;
            let table = run_lossy(&config)?;
            emit(table.to_csv(), args.out)?;
            Ok(true)
        }
        Command::Verify {
            nodes,
            fixtures,
            seed,
        } => {
            let results = run_verification(nodes, fixtures, seed);
            let mut all_pass = true;
            for r in &results {
                let status = if r.pass { "PASS" } else { "FAIL" };
                if r.detail.is_empty() {
                    println!("{status} {}", r.name);
                } else {
                    println!("{status} {} ({})", r.name, r.detail);
                }
                all_pass &= r.pass;
            }
            Ok(all_pass)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
