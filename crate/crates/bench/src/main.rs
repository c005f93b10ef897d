use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use advfid_bench::commands::{cmd_bench, cmd_descriptors, cmd_fit, cmd_mos, cmd_score};
use advfid_bench::{load_manifest, RunConfig, RunError};
use advfid_core::stats::ReportEntry;
use anyhow::Result;
use clap::{Parser, Subcommand};

/// Fidelity metrics vs. subjective scores for original/adversarial image pairs.
#[derive(Parser)]
#[command(name = "advfid", version)]
struct Cli {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for every artifact (default `advfid-out`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Comma-separated metric names, or all / tier1 / tier2 / norms.
    #[arg(long, global = true)]
    metrics: Option<String>,
    /// Worker threads for pair-level parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Ignore and do not populate the score cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every manifest pair with every enabled metric.
    Score {
        /// Pair manifest, CSV or `.json`.
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Full pipeline: screening, MOS, scoring and the performance report.
    Bench {
        /// Pair manifest, CSV or `.json`.
        #[arg(long)]
        manifest: PathBuf,
        /// Raw ratings CSV; without it the manifest's mos column is used.
        #[arg(long)]
        raw_scores: Option<PathBuf>,
    },
    /// Subject screening, MOS with 95% intervals and the MOS histogram.
    Mos {
        /// `stimulus_id,<subject>...` ratings on the 1-5 scale.
        #[arg(long)]
        raw_scores: PathBuf,
    },
    /// Spatial information and colourfulness of each reference content.
    Descriptors {
        /// Pair manifest, CSV or `.json`.
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Fit the 5-parameter logistic to an `x,y` CSV.
    Fit {
        /// CSV with `x,y` columns.
        #[arg(long)]
        input: PathBuf,
    },
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(m) = &cli.metrics {
        cfg.set("metrics", m)?;
    }
    if let Some(j) = cli.jobs {
        cfg.set("jobs", &j.to_string())?;
    }
    if cli.no_cache {
        cfg.cache = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report_errors(errors: &[RunError]) {
    for e in errors {
        match e.metric {
            Some(m) => eprintln!("error: {} [{m}]: {}", e.stimulus_id, e.message),
            None => eprintln!("error: {}: {}", e.stimulus_id, e.message),
        }
    }
}

/// Returns the number of collected (non-fatal) errors.
fn run(cli: Cli) -> Result<usize> {
    let cfg = resolve_config(&cli)?;
    let started = Instant::now();
    let out = cfg.out_dir.display().to_string();
    let errors = match &cli.command {
        Command::Score { manifest } => {
            let m = load_manifest(manifest, cfg.image_check)?;
            let run = cmd_score(&m, &cfg)?;
            eprintln!(
                "scored {} pairs: {} values ({} cached, {} computed) -> {out}",
                m.pairs.len(),
                run.scores.len(),
                run.cache_hits,
                run.computed
            );
            report_errors(&run.errors);
            run.errors.len()
        }
        Command::Bench {
            manifest,
            raw_scores,
        } => {
            let m = load_manifest(manifest, cfg.image_check)?;
            let run = cmd_bench(&m, raw_scores.as_deref(), &cfg)?;
            println!(
                "{:<8} {:>7} {:>7} {:>7} {:>7}",
                "metric", "PLCC", "SROCC", "RMSE", "OR"
            );
            for e in &run.report.entries {
                match e {
                    ReportEntry::Fitted(r) => println!(
                        "{:<8} {:>7.3} {:>7.3} {:>7.3} {:>7.3}",
                        r.metric.name(),
                        r.plcc,
                        r.srocc,
                        r.rmse,
                        r.outlier_ratio
                    ),
                    ReportEntry::Unfit { metric, reason, .. } => {
                        println!("{:<8} unfit: {reason}", metric.name())
                    }
                }
            }
            if let Some(mos) = &run.mos {
                eprintln!(
                    "screening rejected {} subject(s)",
                    mos.screening.rejected.len()
                );
            }
            report_errors(run.errors());
            run.errors().len()
        }
        Command::Mos { raw_scores } => {
            let run = cmd_mos(raw_scores, &cfg)?;
            eprintln!(
                "{} stimuli, {} of {} subjects rejected -> {out}",
                run.records.len(),
                run.screening.rejected.len(),
                run.screening.tallies.len()
            );
            0
        }
        Command::Descriptors { manifest } => {
            let m = load_manifest(manifest, cfg.image_check)?;
            let run = cmd_descriptors(&m, &cfg)?;
            eprintln!("{} contents -> {out}", run.rows.len());
            report_errors(&run.errors);
            run.errors.len()
        }
        Command::Fit { input } => {
            let run = cmd_fit(input, &cfg)?;
            let b = run.params.beta;
            println!(
                "beta = [{}, {}, {}, {}, {}]\nresidual rmse = {}\nplcc raw = {}, mapped = {}",
                b[0],
                b[1],
                b[2],
                b[3],
                b[4],
                run.diagnostics.residual_rmse,
                run.raw_plcc,
                run.mapped_plcc
            );
            0
        }
    };
    eprintln!("done in {:.1}s", started.elapsed().as_secs_f64());
    Ok(errors)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} error(s); see errors.csv");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
