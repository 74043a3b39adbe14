use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use byzcusum::experiment::{self, emit_outputs, ExperimentConfig};
use byzcusum::Error;

/// Byzantine-resilient CUSUM experiments.
#[derive(Debug, Parser)]
#[command(name = "byzcusum", version)]
struct Cli {
    /// Master seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials per estimate (overrides the config file).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output directory (overrides the config file).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate ARL and delay at the first configured threshold.
    Run { config: PathBuf },
    /// Estimate ARL and delay at every configured threshold.
    Sweep { config: PathBuf },
    /// Sweep, then compare delays with the honest N-1 sensor baseline.
    Ratio { config: PathBuf },
}

fn load(cli: &Cli, path: &Path) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Returns whether any estimate needs attention (censoring or unsettled
/// constants).
fn execute(cli: &Cli) -> Result<bool, Error> {
    let (cfg, sweep, ratios) = match &cli.command {
        Command::Run { config } => {
            let cfg = load(cli, config)?;
            let sweep = experiment::run_thresholds(&cfg, &cfg.thresholds[..1])?;
            (cfg, sweep, None)
        }
        Command::Sweep { config } => {
            let cfg = load(cli, config)?;
            let sweep = experiment::run_sweep(&cfg)?;
            (cfg, sweep, None)
        }
        Command::Ratio { config } => {
            let cfg = load(cli, config)?;
            let report = experiment::delay_ratio_report(&cfg)?;
            let flagged = report.flagged();
            (cfg, report.sweep, Some((report.rows, flagged)))
        }
    };
    for row in &sweep.rows {
        let bound = row.bound_delay.map_or_else(|| "-".to_string(), |b| format!("{b:.4}"));
        println!(
            "{:<14} h={:<6} ARL={:.4} (±{:.4})  delay={:.4} (±{:.4})  bound={bound}  censored={}/{}",
            row.scheme,
            row.threshold,
            row.arl_mean,
            row.arl_se,
            row.delay_mean,
            row.delay_se,
            row.censored_arl,
            row.censored_delay
        );
    }
    if let Some((rows, _)) = &ratios {
        for r in rows {
            let limit = r.ratio_limit.map_or_else(|| "-".to_string(), |l| format!("{l:.3}"));
            println!(
                "{:<14} h={:<6} ratio={:.3} (limit {limit})",
                r.scheme, r.threshold, r.ratio
            );
        }
    }
    let written = emit_outputs(
        &cfg.output,
        &cfg,
        &sweep.rows,
        ratios.as_ref().map(|(r, _)| r.as_slice()),
    )?;
    for path in written {
        println!("wrote {}", path.display());
    }
    let mut attention = false;
    if sweep.flagged() || ratios.as_ref().is_some_and(|(_, f)| *f) {
        eprintln!("warning: more than 1% of trials hit the step cap for some estimates");
        attention = true;
    }
    if sweep.unconverged() {
        eprintln!("warning: renewal constants did not converge over the threshold ladder");
        attention = true;
    }
    Ok(attention)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
