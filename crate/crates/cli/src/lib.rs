//! Command-line experiment harness for energy-optimal faulty Min-Sum LDPC
//! decoders.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use clap::{Parser, Subcommand};
use ldpc_energy::cache::DeCache;

use crate::config::{ExperimentConfig, Overrides};
use crate::error::CliError;
use crate::report::Report;

#[derive(Debug, Parser)]
#[command(name = "ldpc-energy", version, about = "Energy-optimal faulty quantized Min-Sum LDPC decoder design")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Density-evolution thresholds per (q, eps), minimized over (alpha, lambda).
    Threshold,
    /// Monte-Carlo BER under both fault models with finite-length predictions.
    Ber,
    /// Minimum-energy (q, N, eps) search with fixed-e_g baselines.
    Optimize,
    /// Energy per information bit across an SNR sweep by three routes.
    EnergyCurve,
    /// Lift the protographs to length N and write alist files.
    ExportAlist,
}

/// Runs one command with flags applied over the configuration file.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = ExperimentConfig::resolve(&cli.flags)?;
    if cfg.workers > 0 {
        // fails only when a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global();
    }
    let cache = DeCache::from_env();
    match cli.command {
        Command::Threshold => done(Report::new("threshold", &cfg, commands::threshold(&cfg, &cache)?).emit()?),
        Command::Ber => done(Report::new("ber", &cfg, commands::ber(&cfg, &cache)?).emit()?),
        Command::EnergyCurve => {
            done(Report::new("energy-curve", &cfg, commands::energy_curve(&cfg, &cache)?).emit()?)
        }
        Command::Optimize => {
            let results = commands::optimize(&cfg, &cache)?;
            let histories: serde_json::Map<String, serde_json::Value> = results
                .iter()
                .map(|r| Ok((r.row.protograph.clone(), serde_json::to_value(&r.state)?)))
                .collect::<Result<_, CliError>>()?;
            let mut report = Report::new("optimize", &cfg, results.into_iter().map(|r| r.row).collect());
            report.extra = Some(serde_json::Value::Object(histories));
            done(report.emit()?)
        }
        Command::ExportAlist => {
            for p in commands::export_alist(&cfg)? {
                log::info!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}

fn done(path: Option<std::path::PathBuf>) -> Result<(), CliError> {
    if let Some(p) = path {
        log::info!("wrote {}", p.display());
    }
    Ok(())
}
