//! The five subcommands. Each writes its artifacts under the configured
//! output directory together with `resolved_config.txt`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use advfid_core::descriptors::ContentDescriptor;
use advfid_core::load_image;
use advfid_core::stats::{
    evaluate_report, fit_logistic5, plcc, rmse, FitDiagnostics, LogisticParams, MosTarget,
    PerformanceReport, ReportEntry,
};
use advfid_core::subjective::{
    mos, mos_histogram, screen_outliers, MosRecord, ScreeningOutcome, SubjectScoreMatrix,
};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::manifest::Manifest;
use crate::output;
use crate::score::{score_manifest, RunError, ScoreRun};

pub const SCORES_FILE: &str = "scores.csv";
pub const ERRORS_FILE: &str = "errors.csv";
pub const REPORT_FILE: &str = "report.csv";
pub const REPORT_JSON_FILE: &str = "report.json";
pub const SNAPSHOT_FILE: &str = "resolved_config.txt";

fn prepare(config: &RunConfig) -> Result<()> {
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir)
        .with_context(|| format!("creating {}", config.out_dir.display()))?;
    output::write_text(&config.out_dir.join(SNAPSHOT_FILE), &config.snapshot())
}

/// Writes `scores.csv`, `score_notes.csv` and `errors.csv`.
pub fn cmd_score(manifest: &Manifest, config: &RunConfig) -> Result<ScoreRun> {
    prepare(config)?;
    cmd_score_inner(manifest, config)
}

#[derive(Clone, Debug)]
pub struct MosRun {
    pub screening: ScreeningOutcome,
    pub records: Vec<MosRecord>,
    pub histogram: Vec<usize>,
}

/// Screening, MOS and CI of a raw ratings CSV (`stimulus_id,<subject>...`).
pub fn process_raw_scores(path: &Path, bins: usize) -> Result<MosRun> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("opening raw scores {}", path.display()))?;
    let matrix = SubjectScoreMatrix::from_csv(file)
        .with_context(|| format!("parsing raw scores {}", path.display()))?;
    let screening = screen_outliers(&matrix)?;
    let records = mos(&screening.retained);
    let histogram = mos_histogram(&records, bins)?;
    Ok(MosRun {
        screening,
        records,
        histogram,
    })
}

fn write_mos_run(run: &MosRun, out_dir: &Path) -> Result<()> {
    output::write_screening(&out_dir.join("screening.csv"), &run.screening.tallies)?;
    output::write_mos(&out_dir.join("mos.csv"), &run.records)?;
    output::write_histogram(&out_dir.join("mos_histogram.csv"), &run.histogram)
}

/// Writes `screening.csv`, `mos.csv` and `mos_histogram.csv`.
pub fn cmd_mos(raw_scores: &Path, config: &RunConfig) -> Result<MosRun> {
    prepare(config)?;
    let run = process_raw_scores(raw_scores, config.histogram_bins)?;
    write_mos_run(&run, &config.out_dir)?;
    Ok(run)
}

#[derive(Clone, Debug)]
pub struct BenchRun {
    pub report: PerformanceReport,
    pub targets: Vec<MosTarget>,
    pub scores: ScoreRun,
    /// Present when the ground truth came from raw ratings.
    pub mos: Option<MosRun>,
    errors: Vec<RunError>,
}

impl BenchRun {
    /// Scoring failures followed by one entry per metric that could not be fitted.
    pub fn errors(&self) -> &[RunError] {
        &self.errors
    }
}

/// Ground truth for every manifest pair: raw ratings when given, otherwise
/// the manifest's own `mos`/`ci95` columns.
pub fn bench_targets(
    manifest: &Manifest,
    raw_scores: Option<&Path>,
    bins: usize,
) -> Result<(Vec<MosTarget>, Option<MosRun>)> {
    if let Some(path) = raw_scores {
        let run = process_raw_scores(path, bins)?;
        let wanted: HashSet<&str> = manifest
            .pairs
            .iter()
            .map(|p| p.stimulus_id.as_str())
            .collect();
        let rated: HashSet<&str> = run.records.iter().map(|r| r.stimulus_id.as_str()).collect();
        let mut unrated: Vec<&str> = wanted.difference(&rated).copied().collect();
        if !unrated.is_empty() {
            unrated.sort_unstable();
            bail!(
                "raw scores {} have no ratings for {} manifest stimuli, e.g. {:?}",
                path.display(),
                unrated.len(),
                &unrated[..unrated.len().min(5)]
            );
        }
        let targets = manifest
            .pairs
            .iter()
            .map(|p| {
                let r = run
                    .records
                    .iter()
                    .find(|r| r.stimulus_id == p.stimulus_id)
                    .expect("checked above");
                MosTarget::from(r)
            })
            .collect();
        return Ok((targets, Some(run)));
    }
    if !manifest.has_mos() {
        bail!("no subjective data: pass --raw-scores, or fill the manifest's mos column for every pair");
    }
    let targets = manifest
        .pairs
        .iter()
        .map(|p| MosTarget {
            stimulus_id: p.stimulus_id.clone(),
            mos: p.mos.expect("has_mos"),
            ci95: p.ci95,
        })
        .collect();
    Ok((targets, None))
}

/// Screening → MOS → scoring → per-metric evaluation. Writes everything
/// `score` and `mos` write, plus `report.csv`, `report.json`, `scatter/*.csv`
/// and `mos_histogram.csv`.
pub fn cmd_bench(
    manifest: &Manifest,
    raw_scores: Option<&Path>,
    config: &RunConfig,
) -> Result<BenchRun> {
    prepare(config)?;
    let (targets, mos_run) = bench_targets(manifest, raw_scores, config.histogram_bins)?;
    let out = &config.out_dir;
    match &mos_run {
        Some(run) => write_mos_run(run, out)?,
        None => {
            let records: Vec<MosRecord> = targets
                .iter()
                .map(|t| MosRecord {
                    stimulus_id: t.stimulus_id.clone(),
                    mos: t.mos,
                    ci95: t.ci95.unwrap_or(0.0),
                    n_subjects: 0,
                })
                .collect();
            output::write_histogram(
                &out.join("mos_histogram.csv"),
                &mos_histogram(&records, config.histogram_bins)?,
            )?;
        }
    }
    let scores = cmd_score_inner(manifest, config)?;
    let report = evaluate_report(&scores.scores, &targets, config.or_threshold);
    output::write_report(&out.join(REPORT_FILE), &report)?;
    output::write_json(&out.join(REPORT_JSON_FILE), &report)?;
    output::write_scatter(&out.join("scatter"), &report, &scores.scores, &targets)?;
    let mut errors = scores.errors.clone();
    errors.extend(report.entries.iter().filter_map(|e| match e {
        ReportEntry::Unfit { metric, reason, .. } => Some(RunError {
            stimulus_id: "*".into(),
            metric: Some(*metric),
            message: format!("not fitted: {reason}"),
        }),
        ReportEntry::Fitted(_) => None,
    }));
    output::write_errors(&out.join(ERRORS_FILE), &errors)?;
    Ok(BenchRun {
        report,
        targets,
        scores,
        mos: mos_run,
        errors,
    })
}

fn cmd_score_inner(manifest: &Manifest, config: &RunConfig) -> Result<ScoreRun> {
    let run = score_manifest(manifest, config)?;
    output::write_scores(&config.out_dir.join(SCORES_FILE), &run.scores)?;
    output::write_score_notes(&config.out_dir.join("score_notes.csv"), &run.scores)?;
    output::write_errors(&config.out_dir.join(ERRORS_FILE), &run.errors)?;
    Ok(run)
}

#[derive(Clone, Debug)]
pub struct DescriptorRun {
    pub rows: Vec<ContentDescriptor>,
    pub errors: Vec<RunError>,
}

/// One row per distinct reference image, in first-appearance order. Writes
/// `descriptors.csv` and `errors.csv`.
pub fn cmd_descriptors(manifest: &Manifest, config: &RunConfig) -> Result<DescriptorRun> {
    prepare(config)?;
    let mut seen: HashSet<&PathBuf> = HashSet::new();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for p in &manifest.pairs {
        if !seen.insert(&p.ref_path) {
            continue;
        }
        let content = p
            .ref_path
            .strip_prefix(&manifest.root)
            .unwrap_or(&p.ref_path)
            .to_string_lossy()
            .into_owned();
        match load_image(&p.ref_path)
            .and_then(|img| ContentDescriptor::compute(content.clone(), &img))
        {
            Ok(d) => rows.push(d),
            Err(e) => errors.push(RunError {
                stimulus_id: content,
                metric: None,
                message: e.to_string(),
            }),
        }
    }
    output::write_descriptors(&config.out_dir.join("descriptors.csv"), &rows)?;
    output::write_errors(&config.out_dir.join(ERRORS_FILE), &errors)?;
    Ok(DescriptorRun { rows, errors })
}

#[derive(Deserialize)]
struct FitSample {
    x: f64,
    y: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitRun {
    pub n: usize,
    pub params: LogisticParams,
    pub diagnostics: FitDiagnostics,
    pub raw_plcc: f64,
    pub mapped_plcc: f64,
    pub mapped_rmse: f64,
}

/// Fits the 5-parameter logistic to an `x,y` CSV. Writes `fit.json`.
pub fn cmd_fit(input: &Path, config: &RunConfig) -> Result<FitRun> {
    prepare(config)?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(input)
        .with_context(|| format!("opening {}", input.display()))?;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.deserialize::<FitSample>().enumerate() {
        let s = rec.with_context(|| format!("{} data row {}", input.display(), i + 1))?;
        x.push(s.x);
        y.push(s.y);
    }
    let (params, diagnostics) = fit_logistic5(&x, &y)?;
    let mapped = params.eval_all(&x);
    let run = FitRun {
        n: x.len(),
        params,
        diagnostics,
        raw_plcc: plcc(&x, &y)?,
        mapped_plcc: plcc(&mapped, &y)?,
        mapped_rmse: rmse(&mapped, &y)?,
    };
    output::write_json(&config.out_dir.join("fit.json"), &run)?;
    Ok(run)
}
