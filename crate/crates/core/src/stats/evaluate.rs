use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::correlation::{outlier_ratio_with, plcc, rmse, srocc};
use super::logistic::{fit_logistic5, FitDiagnostics, LogisticParams};
use crate::metrics::{MetricId, MetricScore, ScoreValue};
use crate::subjective::MosRecord;
use crate::{Error, Result};

/// Ground truth for one stimulus. `ci95` is absent when only a MOS column is known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MosTarget {
    pub stimulus_id: String,
    pub mos: f64,
    pub ci95: Option<f64>,
}

impl From<&MosRecord> for MosTarget {
    fn from(r: &MosRecord) -> Self {
        Self {
            stimulus_id: r.stimulus_id.clone(),
            mos: r.mos,
            ci95: Some(r.ci95),
        }
    }
}

/// Band used by the outlier ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrThreshold {
    /// Per-stimulus 95% interval; `fallback` applies to stimuli without one.
    Ci95 { fallback: f64 },
    /// The same half-width for every stimulus.
    Fixed(f64),
}

impl Default for OrThreshold {
    fn default() -> Self {
        OrThreshold::Ci95 { fallback: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowDiagnostics {
    pub fit: FitDiagnostics,
    /// Pearson correlation of the raw scores, before the logistic mapping.
    pub raw_plcc: f64,
    pub raw_rmse: f64,
    pub raw_outlier_ratio: f64,
    /// True when at least one stimulus was judged against a fixed band rather than its CI.
    pub or_fallback: bool,
    /// Unbounded scores replaced by (largest finite score + 1) before fitting.
    pub unbounded_clamped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerformanceRow {
    pub metric: MetricId,
    pub n: usize,
    pub plcc: f64,
    pub srocc: f64,
    pub rmse: f64,
    pub outlier_ratio: f64,
    pub params: LogisticParams,
    pub diagnostics: RowDiagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ReportEntry {
    Fitted(PerformanceRow),
    Unfit {
        metric: MetricId,
        n: usize,
        reason: String,
    },
}

impl ReportEntry {
    pub fn metric(&self) -> MetricId {
        match self {
            ReportEntry::Fitted(r) => r.metric,
            ReportEntry::Unfit { metric, .. } => *metric,
        }
    }
}

/// Rows in published table order.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PerformanceReport {
    pub entries: Vec<ReportEntry>,
}

impl PerformanceReport {
    pub fn fitted(&self) -> impl Iterator<Item = &PerformanceRow> {
        self.entries.iter().filter_map(|e| match e {
            ReportEntry::Fitted(r) => Some(r),
            ReportEntry::Unfit { .. } => None,
        })
    }

    pub fn row(&self, metric: MetricId) -> Option<&PerformanceRow> {
        self.fitted().find(|r| r.metric == metric)
    }
}

fn join<'a>(
    scores: &'a [MetricScore],
    targets: &'a [MosTarget],
) -> Result<Vec<(&'a MosTarget, ScoreValue)>> {
    let mut by_id: HashMap<&str, ScoreValue> = HashMap::with_capacity(scores.len());
    for s in scores {
        if by_id.insert(s.pair_id.as_str(), s.value).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate score for stimulus {:?}",
                s.pair_id
            )));
        }
    }
    let missing: Vec<&str> = targets
        .iter()
        .map(|t| t.stimulus_id.as_str())
        .filter(|id| !by_id.contains_key(id))
        .collect();
    if !missing.is_empty() || by_id.len() != targets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} scores vs {} MOS targets; targets without a score: {:?}",
            by_id.len(),
            targets.len(),
            &missing[..missing.len().min(5)]
        )));
    }
    Ok(targets
        .iter()
        .map(|t| (t, by_id[t.stimulus_id.as_str()]))
        .collect())
}

/// Fits the logistic to one metric's scores and computes PLCC, RMSE and OR
/// on the mapped scores and SROCC on the raw ones.
pub fn evaluate_metric(
    scores: &[MetricScore],
    targets: &[MosTarget],
    threshold: OrThreshold,
) -> Result<PerformanceRow> {
    let metric = scores
        .first()
        .ok_or_else(|| Error::InvalidArgument("no scores to evaluate".into()))?
        .metric;
    if let Some(other) = scores.iter().find(|s| s.metric != metric) {
        return Err(Error::InvalidArgument(format!(
            "mixed metrics {metric} and {}",
            other.metric
        )));
    }
    let joined = join(scores, targets)?;
    let finite_max = joined
        .iter()
        .filter_map(|(_, v)| v.finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !finite_max.is_finite() {
        return Err(Error::Degenerate(format!(
            "{metric}: every score is unbounded"
        )));
    }
    let unbounded_clamped = joined.iter().filter(|(_, v)| v.is_unbounded()).count();
    let x: Vec<f64> = joined
        .iter()
        .map(|(_, v)| v.finite().unwrap_or(finite_max + 1.0))
        .collect();
    let y: Vec<f64> = joined.iter().map(|(t, _)| t.mos).collect();
    let (half, or_fallback) = match threshold {
        OrThreshold::Ci95 { fallback } => {
            let h: Vec<f64> = joined
                .iter()
                .map(|(t, _)| t.ci95.unwrap_or(fallback))
                .collect();
            (h, joined.iter().any(|(t, _)| t.ci95.is_none()))
        }
        OrThreshold::Fixed(t) => (vec![t; joined.len()], true),
    };

    let (params, fit) = fit_logistic5(&x, &y)?;
    let mapped = params.eval_all(&x);
    Ok(PerformanceRow {
        metric,
        n: x.len(),
        plcc: plcc(&mapped, &y)?,
        srocc: srocc(&x, &y)?,
        rmse: rmse(&mapped, &y)?,
        outlier_ratio: outlier_ratio_with(&mapped, &y, &half)?,
        params,
        diagnostics: RowDiagnostics {
            fit,
            raw_plcc: plcc(&x, &y)?,
            raw_rmse: rmse(&x, &y)?,
            raw_outlier_ratio: outlier_ratio_with(&x, &y, &half)?,
            or_fallback,
            unbounded_clamped,
        },
    })
}

/// Evaluates every metric present in `scores`; failures become `Unfit` rows.
pub fn evaluate_report(
    scores: &[MetricScore],
    targets: &[MosTarget],
    threshold: OrThreshold,
) -> PerformanceReport {
    let mut grouped: BTreeMap<MetricId, Vec<MetricScore>> = BTreeMap::new();
    for s in scores {
        grouped.entry(s.metric).or_default().push(s.clone());
    }
    let entries = MetricId::TABLE_ORDER
        .iter()
        .filter_map(|m| grouped.get(m).map(|s| (*m, s)))
        .map(|(metric, s)| match evaluate_metric(s, targets, threshold) {
            Ok(row) => ReportEntry::Fitted(row),
            Err(e) => ReportEntry::Unfit {
                metric,
                n: s.len(),
                reason: e.to_string(),
            },
        })
        .collect();
    PerformanceReport { entries }
}
