//! Raw subjective ratings to screened MOS with 95% confidence intervals.
//!
//! Ratings are on the five-grade impairment scale (1 = very annoying,
//! 5 = imperceptible). Subject screening follows the BT.500 kurtosis-based
//! procedure; confidence intervals use the Student t distribution.

use std::io::Read;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

/// Complete ratings matrix: one row per stimulus, one column per subject.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubjectScoreMatrix {
    subject_ids: Vec<String>,
    stimulus_ids: Vec<String>,
    // scores[j * n_subjects + i] is subject i's rating of stimulus j.
    scores: Vec<u8>,
}

impl SubjectScoreMatrix {
    /// `rows[j][i]` is subject `i`'s rating of stimulus `j`.
    pub fn new(
        subject_ids: Vec<String>,
        stimulus_ids: Vec<String>,
        rows: Vec<Vec<u8>>,
    ) -> Result<Self> {
        if rows.len() != stimulus_ids.len() {
            return Err(Error::InvalidDimensions(format!(
                "{} rating rows for {} stimuli",
                rows.len(),
                stimulus_ids.len()
            )));
        }
        let mut scores = Vec::with_capacity(rows.len() * subject_ids.len());
        for (j, row) in rows.into_iter().enumerate() {
            if row.len() != subject_ids.len() {
                return Err(Error::InvalidDimensions(format!(
                    "stimulus {:?} has {} ratings for {} subjects",
                    stimulus_ids[j],
                    row.len(),
                    subject_ids.len()
                )));
            }
            if let Some((i, r)) = row.iter().enumerate().find(|(_, r)| !(1..=5).contains(*r)) {
                return Err(Error::InvalidArgument(format!(
                    "rating {r} of subject {:?} for stimulus {:?} is outside 1..=5",
                    subject_ids[i], stimulus_ids[j]
                )));
            }
            scores.extend(row);
        }
        Ok(Self {
            subject_ids,
            stimulus_ids,
            scores,
        })
    }

    /// Parses `stimulus_id,subject_1,...,subject_N` CSV. Errors name the
    /// 1-based line and column of the offending cell.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::InvalidArgument(format!("raw scores header: {e}")))?
            .clone();
        if header.len() < 2 {
            return Err(Error::InvalidArgument(
                "raw scores need a stimulus_id column and at least one subject column".into(),
            ));
        }
        let subject_ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut stimulus_ids = Vec::new();
        let mut rows = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let line = k + 2;
            let rec = rec.map_err(|e| Error::InvalidArgument(format!("line {line}: {e}")))?;
            if rec.len() != header.len() {
                return Err(Error::InvalidArgument(format!(
                    "line {line}: expected {} cells, found {} (missing ratings are not imputed)",
                    header.len(),
                    rec.len()
                )));
            }
            stimulus_ids.push(rec[0].to_string());
            let mut row = Vec::with_capacity(subject_ids.len());
            for (col, cell) in rec.iter().enumerate().skip(1) {
                let r: u8 = cell
                    .parse()
                    .ok()
                    .filter(|r| (1..=5).contains(r))
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "line {line}, column {} ({}): rating {cell:?} is not an integer in 1..=5",
                            col + 1,
                            &header[col]
                        ))
                    })?;
                row.push(r);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::InvalidArgument(
                "raw scores contain no stimuli".into(),
            ));
        }
        Self::new(subject_ids, stimulus_ids, rows)
    }

    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }

    pub fn stimulus_ids(&self) -> &[String] {
        &self.stimulus_ids
    }

    pub fn n_subjects(&self) -> usize {
        self.subject_ids.len()
    }

    pub fn n_stimuli(&self) -> usize {
        self.stimulus_ids.len()
    }

    pub fn rating(&self, subject: usize, stimulus: usize) -> u8 {
        self.scores[stimulus * self.n_subjects() + subject]
    }

    /// Ratings of one stimulus across subjects.
    pub fn stimulus_ratings(&self, stimulus: usize) -> &[u8] {
        let n = self.n_subjects();
        &self.scores[stimulus * n..(stimulus + 1) * n]
    }

    /// Matrix restricted to the given subject columns, in that order.
    pub fn select_subjects(&self, keep: &[usize]) -> SubjectScoreMatrix {
        let rows = (0..self.n_stimuli())
            .map(|j| keep.iter().map(|&i| self.rating(i, j)).collect())
            .collect();
        SubjectScoreMatrix::new(
            keep.iter().map(|&i| self.subject_ids[i].clone()).collect(),
            self.stimulus_ids.clone(),
            rows,
        )
        .expect("subset of a valid matrix")
    }
}

/// Per-subject screening tallies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubjectTally {
    pub subject_id: String,
    /// Ratings above the stimulus mean by more than the threshold.
    pub above: usize,
    /// Ratings below the stimulus mean by more than the threshold.
    pub below: usize,
    pub rejected: bool,
}

#[derive(Clone, Debug)]
pub struct ScreeningOutcome {
    pub retained: SubjectScoreMatrix,
    pub rejected: Vec<String>,
    pub tallies: Vec<SubjectTally>,
}

/// Population kurtosis `m4 / m2²`; `None` when the ratings have no spread.
fn kurtosis(values: &[f64]) -> Option<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    (m2 > 0.0).then(|| m4 / (m2 * m2))
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// BT.500 subject screening.
///
/// For each stimulus the threshold is 2σ when the ratings' kurtosis lies in
/// [2, 4] and √20·σ otherwise; ratings strictly beyond mean ± threshold count
/// towards a subject's `above` / `below` tallies. A subject is rejected iff
/// `(P+Q)/J > 0.05` and `|P−Q|/(P+Q) < 0.3`.
pub fn screen_outliers(m: &SubjectScoreMatrix) -> Result<ScreeningOutcome> {
    let n = m.n_subjects();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "screening needs at least 3 subjects, got {n}"
        )));
    }
    let mut above = vec![0usize; n];
    let mut below = vec![0usize; n];
    for j in 0..m.n_stimuli() {
        let r: Vec<f64> = m
            .stimulus_ratings(j)
            .iter()
            .map(|&v| f64::from(v))
            .collect();
        let Some(beta2) = kurtosis(&r) else { continue };
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let sigma = sample_std(&r);
        let threshold = if (2.0..=4.0).contains(&beta2) {
            2.0 * sigma
        } else {
            20f64.sqrt() * sigma
        };
        for (i, &v) in r.iter().enumerate() {
            if v > mean + threshold {
                above[i] += 1;
            }
            if v < mean - threshold {
                below[i] += 1;
            }
        }
    }
    let j = m.n_stimuli() as f64;
    let tallies: Vec<SubjectTally> = (0..n)
        .map(|i| {
            let (p, q) = (above[i], below[i]);
            let total = (p + q) as f64;
            let rejected =
                total > 0.0 && total / j > 0.05 && (p as f64 - q as f64).abs() / total < 0.3;
            SubjectTally {
                subject_id: m.subject_ids()[i].clone(),
                above: p,
                below: q,
                rejected,
            }
        })
        .collect();
    let keep: Vec<usize> = (0..n).filter(|&i| !tallies[i].rejected).collect();
    let rejected = tallies
        .iter()
        .filter(|t| t.rejected)
        .map(|t| t.subject_id.clone())
        .collect();
    Ok(ScreeningOutcome {
        retained: m.select_subjects(&keep),
        rejected,
        tallies,
    })
}

/// Per-stimulus mean opinion score and 95% CI half-width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MosRecord {
    pub stimulus_id: String,
    pub mos: f64,
    pub ci95: f64,
    pub n_subjects: usize,
}

/// Two-sided 95% Student t quantile `t(0.975, df)`.
pub fn t_quantile_975(df: usize) -> f64 {
    assert!(df >= 1, "t quantile needs at least one degree of freedom");
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("valid t distribution")
        .inverse_cdf(0.975)
}

/// MOS as the plain mean across subjects; CI = t(0.975, n−1)·s/√n with the
/// sample standard deviation. A single subject yields a zero-width interval.
pub fn mos(m: &SubjectScoreMatrix) -> Vec<MosRecord> {
    let n = m.n_subjects();
    (0..m.n_stimuli())
        .map(|j| {
            let r: Vec<f64> = m
                .stimulus_ratings(j)
                .iter()
                .map(|&v| f64::from(v))
                .collect();
            let mean = r.iter().sum::<f64>() / n as f64;
            let ci95 = if n >= 2 {
                t_quantile_975(n - 1) * sample_std(&r) / (n as f64).sqrt()
            } else {
                0.0
            };
            MosRecord {
                stimulus_id: m.stimulus_ids()[j].clone(),
                mos: mean,
                ci95,
                n_subjects: n,
            }
        })
        .collect()
}

/// Equal-width bins over [1, 5]; every bin is left-closed except the last,
/// which is closed on both ends. Values outside [1, 5] are clamped.
pub fn mos_histogram(records: &[MosRecord], bins: usize) -> Result<Vec<usize>> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    let width = 4.0 / bins as f64;
    let mut counts = vec![0usize; bins];
    for r in records {
        let k = (((r.mos - 1.0) / width).floor().max(0.0) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(counts)
}

/// Lower edges of the histogram bins plus the final upper edge.
pub fn histogram_edges(bins: usize) -> Vec<f64> {
    (0..=bins)
        .map(|k| 1.0 + 4.0 * k as f64 / bins as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn matrix(rows: Vec<Vec<u8>>) -> SubjectScoreMatrix {
        let n = rows[0].len();
        let j = rows.len();
        SubjectScoreMatrix::new(ids("subject_", n), ids("s", j), rows).unwrap()
    }

    #[test]
    fn mos_arithmetic() {
        let r = mos(&matrix(vec![vec![5, 5, 4]]));
        assert!((r[0].mos - 4.6667).abs() < 1e-4);
    }

    #[test]
    fn ci_of_one_to_five() {
        let r = mos(&matrix(vec![vec![1, 2, 3, 4, 5]]));
        assert_eq!(r[0].mos, 3.0);
        assert!((t_quantile_975(4) - 2.776).abs() < 1e-3);
        let expected = 2.776445105 * 1.5811388300841898 / 5f64.sqrt();
        assert!((r[0].ci95 - expected).abs() < 1e-6);
        assert!((r[0].ci95 - 1.963).abs() < 1e-3);
    }

    #[test]
    fn all_identical_zero_ci() {
        let r = mos(&matrix(vec![vec![3; 6], vec![5; 6]]));
        assert!(r.iter().all(|m| m.ci95 == 0.0));
    }

    #[test]
    fn no_rejections_on_agreement() {
        let m = matrix(vec![vec![4; 10]; 12]);
        let out = screen_outliers(&m).unwrap();
        assert!(out.rejected.is_empty());
        assert_eq!(out.retained, m);
    }

    /// 18 subjects, 20 stimuli. Subject 18 sits above the crowd on five
    /// stimuli and below it on five others; everyone agrees elsewhere.
    pub(crate) fn planted_outlier(balanced: bool) -> SubjectScoreMatrix {
        let mut rows = Vec::new();
        for j in 0..20 {
            let row: Vec<u8> = if j < 5 || (!balanced && j < 10) {
                let mut r = [vec![1; 6], vec![2; 6], vec![3; 5]].concat();
                r.push(5);
                r
            } else if j < 10 {
                let mut r = [vec![5; 6], vec![4; 6], vec![3; 5]].concat();
                r.push(1);
                r
            } else {
                vec![3; 18]
            };
            rows.push(row);
        }
        matrix(rows)
    }

    #[test]
    fn planted_balanced_outlier_rejected() {
        let out = screen_outliers(&planted_outlier(true)).unwrap();
        assert_eq!(out.rejected, vec!["subject_18".to_string()]);
        let t = &out.tallies[17];
        assert_eq!((t.above, t.below), (5, 5));
        assert!(out.tallies[..17].iter().all(|t| t.above + t.below == 0));
        assert_eq!(out.retained.n_subjects(), 17);
        // Idempotent on the screened matrix.
        assert!(screen_outliers(&out.retained).unwrap().rejected.is_empty());
    }

    #[test]
    fn one_sided_deviation_is_not_rejected() {
        let out = screen_outliers(&planted_outlier(false)).unwrap();
        assert_eq!((out.tallies[17].above, out.tallies[17].below), (10, 0));
        assert!(out.rejected.is_empty());
    }

    #[test]
    fn screening_needs_three_subjects() {
        assert!(screen_outliers(&matrix(vec![vec![1, 2]])).is_err());
    }

    #[test]
    fn histogram_bins() {
        let rec = |m: f64| MosRecord {
            stimulus_id: String::new(),
            mos: m,
            ci95: 0.0,
            n_subjects: 1,
        };
        let all_top: Vec<_> = (0..7).map(|_| rec(5.0)).collect();
        assert_eq!(
            mos_histogram(&all_top, 8).unwrap(),
            vec![0, 0, 0, 0, 0, 0, 0, 7]
        );
        let spread: Vec<_> = [1.0, 1.49, 1.5, 3.0, 4.99, 5.0].map(rec).to_vec();
        assert_eq!(
            mos_histogram(&spread, 8).unwrap(),
            vec![2, 1, 0, 0, 1, 0, 0, 2]
        );
        assert!(mos_histogram(&spread, 1).is_err());
        assert_eq!(histogram_edges(4), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn csv_parsing() {
        let text = "stimulus_id,subject_1,subject_2,subject_3\na,5,5,4\nb,1,2,3\n";
        let m = SubjectScoreMatrix::from_csv(text.as_bytes()).unwrap();
        assert_eq!(m.n_subjects(), 3);
        assert_eq!(m.stimulus_ids(), &["a".to_string(), "b".to_string()]);
        assert_eq!(m.rating(2, 0), 4);

        let bad = "stimulus_id,subject_1,subject_2\na,5,6\n";
        let err = SubjectScoreMatrix::from_csv(bad.as_bytes())
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2") && err.contains("column 3"), "{err}");

        let missing = "stimulus_id,subject_1,subject_2\na,5\n";
        assert!(SubjectScoreMatrix::from_csv(missing.as_bytes()).is_err());
        let empty_cell = "stimulus_id,subject_1,subject_2\na,5,\n";
        assert!(SubjectScoreMatrix::from_csv(empty_cell.as_bytes()).is_err());
    }
}
