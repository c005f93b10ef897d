//! CSV and JSON writers for every artifact the commands emit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use advfid_core::descriptors::ContentDescriptor;
use advfid_core::stats::{MosTarget, PerformanceReport, ReportEntry};
use advfid_core::subjective::{histogram_edges, MosRecord, SubjectTally};
use advfid_core::MetricScore;
use anyhow::{Context, Result};
use serde::Serialize;

use crate::score::RunError;

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `stimulus_id,metric,value`; unbounded values are written as `inf`.
pub fn write_scores(path: &Path, scores: &[MetricScore]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["stimulus_id", "metric", "value"])?;
    for s in scores {
        w.write_record([s.pair_id.as_str(), s.metric.name(), &s.value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Notes attached to individual scores (e.g. reduced scale counts).
pub fn write_score_notes(path: &Path, scores: &[MetricScore]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["stimulus_id", "metric", "note"])?;
    for s in scores {
        if let Some(note) = &s.note {
            w.write_record([s.pair_id.as_str(), s.metric.name(), note])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_errors(path: &Path, errors: &[RunError]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["stimulus_id", "metric", "message"])?;
    for e in errors {
        w.write_record([
            e.stimulus_id.as_str(),
            e.metric.map_or("", |m| m.name()),
            &e.message,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `metric,plcc,srocc,rmse,or,beta1..beta5,n`; unfit rows leave the
/// statistics empty.
pub fn write_report(path: &Path, report: &PerformanceReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "metric", "plcc", "srocc", "rmse", "or", "beta1", "beta2", "beta3", "beta4", "beta5", "n",
    ])?;
    for e in &report.entries {
        match e {
            ReportEntry::Fitted(r) => {
                let mut rec = vec![
                    r.metric.name().to_string(),
                    r.plcc.to_string(),
                    r.srocc.to_string(),
                    r.rmse.to_string(),
                    r.outlier_ratio.to_string(),
                ];
                rec.extend(r.params.beta.iter().map(|b| b.to_string()));
                rec.push(r.n.to_string());
                w.write_record(&rec)?;
            }
            ReportEntry::Unfit { metric, n, .. } => {
                let mut rec = vec![metric.name().to_string()];
                rec.extend(std::iter::repeat_n(String::new(), 9));
                rec.push(n.to_string());
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// One file per fitted metric: `stimulus_id,raw,mapped,mos,ci95`.
pub fn write_scatter(
    dir: &Path,
    report: &PerformanceReport,
    scores: &[MetricScore],
    targets: &[MosTarget],
) -> Result<()> {
    for row in report.fitted() {
        let own: Vec<&MetricScore> = scores.iter().filter(|s| s.metric == row.metric).collect();
        // Unbounded scores enter the fit as (largest finite + 1).
        let finite_max = own
            .iter()
            .filter_map(|s| s.value.finite())
            .fold(f64::NEG_INFINITY, f64::max);
        let mut w = csv_writer(&dir.join(format!("{}.csv", row.metric.name())))?;
        w.write_record(["stimulus_id", "raw", "mapped", "mos", "ci95"])?;
        for t in targets {
            let Some(s) = own.iter().find(|s| s.pair_id == t.stimulus_id) else {
                continue;
            };
            let x = s.value.finite().unwrap_or(finite_max + 1.0);
            w.write_record([
                t.stimulus_id.clone(),
                s.value.to_string(),
                row.params.eval(x).to_string(),
                t.mos.to_string(),
                opt(t.ci95),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

/// `bin_low,bin_high,count` over [1, 5].
pub fn write_histogram(path: &Path, counts: &[usize]) -> Result<()> {
    let edges = histogram_edges(counts.len());
    let mut w = csv_writer(path)?;
    w.write_record(["bin_low", "bin_high", "count"])?;
    for (k, c) in counts.iter().enumerate() {
        w.write_record([
            edges[k].to_string(),
            edges[k + 1].to_string(),
            c.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_mos(path: &Path, records: &[MosRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["stimulus_id", "mos", "ci95", "n_subjects"])?;
    for r in records {
        w.write_record([
            r.stimulus_id.clone(),
            r.mos.to_string(),
            r.ci95.to_string(),
            r.n_subjects.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_screening(path: &Path, tallies: &[SubjectTally]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["subject_id", "above", "below", "rejected"])?;
    for t in tallies {
        w.write_record([
            t.subject_id.clone(),
            t.above.to_string(),
            t.below.to_string(),
            t.rejected.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `content,si,cf`; `cf` is `NA` for single-channel content.
pub fn write_descriptors(path: &Path, rows: &[ContentDescriptor]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["content", "si", "cf"])?;
    for d in rows {
        w.write_record([
            d.stimulus_id.clone(),
            d.si.to_string(),
            d.cf.map_or_else(|| "NA".to_string(), |v| v.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
