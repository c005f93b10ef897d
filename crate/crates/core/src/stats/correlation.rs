use std::cmp::Ordering;

use crate::subjective::MosRecord;
use crate::{Error, Result};

fn check_pair(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions for {} targets",
            x.len(),
            y.len()
        )));
    }
    if x.len() < min {
        return Err(Error::InvalidArgument(format!(
            "need at least {min} samples, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("correlation input".into()));
    }
    Ok(())
}

/// Pearson linear correlation, clamped to [−1, 1].
pub fn plcc(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 3)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate(
            "correlation of a constant sequence".into(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && v[order[j]] == v[order[i]] {
            j += 1;
        }
        // Positions i..j hold ranks i+1..=j.
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Spearman rank-order correlation with average ranks for ties.
pub fn srocc(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 3)?;
    plcc(&average_ranks(x), &average_ranks(y))
}

pub fn rmse(pred: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(pred, y, 1)?;
    let sse: f64 = pred.iter().zip(y).map(|(p, t)| (p - t).powi(2)).sum();
    Ok((sse / pred.len() as f64).sqrt())
}

/// Fraction of predictions strictly outside their stimulus's 95% interval.
pub fn outlier_ratio(pred: &[f64], records: &[MosRecord]) -> Result<f64> {
    let mos: Vec<f64> = records.iter().map(|r| r.mos).collect();
    let half: Vec<f64> = records.iter().map(|r| r.ci95).collect();
    outlier_ratio_with(pred, &mos, &half)
}

/// Fraction of `|pred − mos| > half_width`, element by element.
pub fn outlier_ratio_with(pred: &[f64], mos: &[f64], half_width: &[f64]) -> Result<f64> {
    check_pair(pred, mos, 1)?;
    check_pair(pred, half_width, 1)?;
    if half_width.iter().any(|&h| h < 0.0) {
        return Err(Error::InvalidArgument("negative outlier threshold".into()));
    }
    let outside = pred
        .iter()
        .zip(mos)
        .zip(half_width)
        .filter(|((p, m), h)| (*p - *m).abs() > **h)
        .count();
    Ok(outside as f64 / pred.len() as f64)
}
