use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use leo_sfc::harness::{run_experiment, run_oracle, write_artifacts, write_snapshot};
use leo_sfc::solver::BRUTE_FORCE_LEAF_CAP;
use leo_sfc::ExperimentConfig;

/// Risk-aware SFC placement over a multi-epoch LEO constellation.
#[derive(Parser)]
#[command(name = "leo-sfc", version)]
struct Cli {
    /// Override the master seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (defaults to the config's output_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Only print errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every method over every epoch and write CSV, plots and scenario.
    Run { config: PathBuf },
    /// Parse the config and check the generated scenario.
    Validate { config: PathBuf },
    /// Compare the hybrid solver with exhaustive search on a small config.
    Oracle {
        config: PathBuf,
        /// Largest search space exhaustive search may enumerate.
        #[arg(long, default_value_t = BRUTE_FORCE_LEAF_CAP)]
        cap: f64,
        /// Largest acceptable relative gap.
        #[arg(long, default_value_t = 0.005)]
        max_gap: f64,
    },
    /// Dump satellites, links and visibility of one epoch as CSV.
    Snapshot {
        config: PathBuf,
        #[arg(long)]
        epoch: usize,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let say = |s: String| {
        if !cli.quiet {
            println!("{s}");
        }
    };
    match &cli.cmd {
        Cmd::Run { config } => {
            let cfg = load(config, cli.seed)?;
            let out = cli.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
            let exp = run_experiment(&cfg)?;
            let files = write_artifacts(&exp, &cfg, &out)?;
            for r in exp.reports.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "warning: epoch {} {}: {}",
                    r.epoch,
                    r.method,
                    r.error.as_deref().unwrap_or("")
                );
            }
            say(format!(
                "{:<10} {:>12} {:>10} {:>10} {:>10} {:>10}",
                "method", "risk_ex", "util_mean%", "util_peak%", "mig/epoch", "ms/epoch"
            ));
            for m in &cfg.methods {
                let rows: Vec<_> = exp
                    .reports
                    .iter()
                    .filter(|r| r.method == m.name && r.error.is_none())
                    .collect();
                let n = rows.len().max(1) as f64;
                let mean = |f: &dyn Fn(&leo_sfc::EpochReport) -> f64| {
                    rows.iter().map(|r| f(r)).sum::<f64>() / n
                };
                say(format!(
                    "{:<10} {:>12.6} {:>10.3} {:>10.3} {:>10.2} {:>10.1}",
                    m.name,
                    mean(&|r| r.risk.exact),
                    mean(&|r| r.util_mean_pct),
                    rows.iter().map(|r| r.util_peak_pct).fold(0.0, f64::max),
                    mean(&|r| r.mig_avoidable as f64),
                    mean(&|r| r.stage_ms.iter().sum()),
                ));
            }
            say(format!("wrote {} files to {}", files.len(), out.display()));
        }
        Cmd::Validate { config } => {
            let cfg = load(config, cli.seed)?;
            let (sc, snaps) = cfg.build()?;
            let uncovered: Vec<(usize, usize)> = snaps
                .iter()
                .enumerate()
                .flat_map(|(t, s)| {
                    s.visibility
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| v.visible.is_empty())
                        .map(move |(fu, _)| (t, fu))
                })
                .collect();
            say(format!(
                "ok: {} satellites, {} slices, {} users, {} chain entries, {} epochs, {} methods",
                sc.num_satellites,
                sc.slices.len(),
                sc.num_users(),
                sc.entries().len(),
                snaps.len(),
                cfg.methods.len()
            ));
            for (t, fu) in uncovered {
                let (n, u) = sc.user_of(fu);
                eprintln!("warning: epoch {t}: user ({n}, {u}) sees no satellite");
            }
        }
        Cmd::Oracle {
            config,
            cap,
            max_gap,
        } => {
            let cfg = load(config, cli.seed)?;
            let rows = run_oracle(&cfg, *cap)?;
            let mut worst = f64::NEG_INFINITY;
            for r in &rows {
                say(format!(
                    "epoch {:>3}: brute {:.9} hybrid {:.9} gap {:.3e}",
                    r.epoch, r.brute, r.hybrid, r.gap
                ));
                worst = worst.max(r.gap);
            }
            if worst > *max_gap {
                bail!("oracle gap {worst:.3e} exceeds {max_gap}");
            }
            say(format!(
                "oracle ok: worst gap {worst:.3e} over {} epochs",
                rows.len()
            ));
        }
        Cmd::Snapshot { config, epoch } => {
            let cfg = load(config, cli.seed)?;
            let (sc, snaps) = cfg.build()?;
            let snap = snaps.get(*epoch).ok_or(leo_sfc::Error::EpochOutOfRange {
                epoch: *epoch,
                num_epochs: snaps.len(),
            })?;
            let out = cli
                .out
                .clone()
                .unwrap_or_else(|| cfg.output_dir.join(format!("snapshot-{epoch}")));
            let files = write_snapshot(&sc, snap, &out)?;
            say(format!("wrote {} files to {}", files.len(), out.display()));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
