use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use langevin_mimo::harness::{
    emit_csv, load_config, run_experiment_with, RunOptions, DETECTOR_NAMES,
};
use langevin_mimo::langevin::{LangevinConfig, PRESET_NAMES};

#[derive(Parser)]
#[command(
    name = "langevin-mimo",
    version,
    about = "Massive-MIMO detection SER simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an SNR sweep and write one CSV row per (SNR, detector).
    Simulate {
        /// Experiment file (flat TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long, conflicts_with = "single_thread")]
        threads: Option<usize>,
        /// Run on one thread for reproducible timings.
        #[arg(long)]
        single_thread: bool,
        /// Comma-separated detector list; overrides the config file.
        #[arg(long, value_delimiter = ',')]
        detectors: Option<Vec<String>>,
        /// Skip wall-clock measurement and write ms_per_symbol as 0.
        #[arg(long)]
        no_timing: bool,
    },
    /// Print the sampler presets and detector names.
    Presets,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate {
            config,
            out,
            seed,
            threads,
            single_thread,
            detectors,
            no_timing,
        } => {
            let mut cfg =
                load_config(&config).with_context(|| format!("loading {}", config.display()))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(d) = detectors {
                cfg.detectors = d;
                cfg.validate()?;
            }
            for w in cfg.warnings() {
                eprintln!("warning: {w}");
            }
            let threads = match (single_thread, threads) {
                (true, _) => 1,
                (false, Some(0)) => bail!("--threads must be >= 1"),
                (false, Some(n)) => n,
                (false, None) => 0,
            };
            let opts = RunOptions {
                threads,
                timing: !no_timing,
            };
            let records = run_experiment_with(&cfg, &opts)?;
            for r in &records {
                eprintln!(
                    "{:>6.1} dB  {:<16} SER {:.3e}  {:.4} ms/symbol",
                    r.snr_db, r.detector, r.ser, r.ms_per_symbol
                );
            }
            emit_csv(&records, &out).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Presets => {
            for p in PRESET_NAMES {
                println!("{p}: {:?}", LangevinConfig::preset(p)?);
            }
            println!("detectors: {}", DETECTOR_NAMES.join(", "));
        }
    }
    Ok(())
}
