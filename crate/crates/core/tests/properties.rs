use advfid_core::metrics::{MetricId, MetricScore, ScoreValue};
use advfid_core::stats::{evaluate_metric, fit_logistic5, plcc, srocc, MosTarget, OrThreshold};
use advfid_core::subjective::{mos, mos_histogram, screen_outliers, SubjectScoreMatrix};
use proptest::prelude::*;

/// Values on a coarse grid so that ties are common.
fn tied_values(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-12i32..12).prop_map(|k| k as f64 / 4.0), n)
}

fn non_constant(v: &[f64]) -> bool {
    v.iter().any(|&a| a != v[0])
}

fn ratings(subjects: usize, stimuli: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(1u8..=5, subjects), stimuli)
}

fn matrix(rows: Vec<Vec<u8>>) -> SubjectScoreMatrix {
    let subjects = (0..rows[0].len()).map(|i| format!("u{i}")).collect();
    let stimuli = (0..rows.len()).map(|j| format!("s{j}")).collect();
    SubjectScoreMatrix::new(subjects, stimuli, rows).unwrap()
}

fn scores_for(metric: MetricId, targets: &[MosTarget], x: &[f64]) -> Vec<MetricScore> {
    targets
        .iter()
        .zip(x)
        .map(|(t, &v)| MetricScore {
            metric,
            value: ScoreValue::Finite(v),
            pair_id: t.stimulus_id.clone(),
            note: None,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn srocc_is_invariant_under_increasing_maps(
        (x, y) in (3usize..40).prop_flat_map(|n| (tied_values(n..n + 1), tied_values(n..n + 1))),
        a in 0.25f64..8.0,
        b in -10.0f64..10.0,
    ) {
        prop_assume!(non_constant(&x) && non_constant(&y));
        let base = srocc(&x, &y).unwrap();
        for g in [
            x.iter().map(|v| v.exp()).collect::<Vec<_>>(),
            x.iter().map(|v| v.powi(3)).collect(),
            x.iter().map(|v| a * v + b).collect(),
        ] {
            prop_assert_eq!(srocc(&g, &y).unwrap(), base);
        }
    }

    #[test]
    fn correlations_stay_in_range(
        (x, y) in (3usize..30).prop_flat_map(|n| (
            prop::collection::vec(-1e3f64..1e3, n),
            prop::collection::vec(-1e3f64..1e3, n),
        )),
    ) {
        prop_assume!(non_constant(&x) && non_constant(&y));
        let (p, s) = (plcc(&x, &y).unwrap(), srocc(&x, &y).unwrap());
        prop_assert!((-1.0..=1.0).contains(&p));
        prop_assert!((-1.0..=1.0).contains(&s));
    }

    #[test]
    fn logistic_mapping_never_lowers_linear_correlation(
        x in prop::collection::vec(0.0f64..100.0, 8..40),
        slope in -3.0f64..3.0,
        noise in prop::collection::vec(-1.0f64..1.0, 40),
    ) {
        prop_assume!(non_constant(&x));
        let y: Vec<f64> = x.iter().zip(&noise).map(|(v, e)| 3.0 + slope * (v / 40.0).tanh() + e).collect();
        prop_assume!(non_constant(&y));
        let raw = plcc(&x, &y).unwrap();
        let (params, _) = fit_logistic5(&x, &y).unwrap();
        let mapped = params.eval_all(&x);
        prop_assume!(non_constant(&mapped));
        prop_assert!(plcc(&mapped, &y).unwrap() >= raw.abs() - 1e-9);
    }

    #[test]
    fn fitting_is_deterministic(x in prop::collection::vec(-5.0f64..5.0, 6..30)) {
        prop_assume!(non_constant(&x));
        let y: Vec<f64> = x.iter().map(|v| 2.0 + v.sin()).collect();
        let a = fit_logistic5(&x, &y).unwrap();
        let b = fit_logistic5(&x, &y).unwrap();
        prop_assert_eq!(a.0, b.0);
    }

    #[test]
    fn evaluation_ignores_positive_affine_rescaling(
        raw in prop::collection::vec(0.0f64..1.0, 12..30),
        scale in 0.1f64..50.0,
        shift in -100.0f64..100.0,
    ) {
        prop_assume!(non_constant(&raw));
        let targets: Vec<MosTarget> = raw
            .iter()
            .enumerate()
            .map(|(i, &r)| MosTarget {
                stimulus_id: format!("s{i}"),
                mos: 1.0 + 4.0 / (1.0 + (-6.0 * (r - 0.5)).exp()) + 0.3 * ((i * 7) % 5) as f64 / 5.0,
                ci95: Some(0.25),
            })
            .collect();
        let shifted: Vec<f64> = raw.iter().map(|v| scale * v + shift).collect();
        let a = evaluate_metric(&scores_for(MetricId::Ssim, &targets, &raw), &targets, OrThreshold::default()).unwrap();
        let b = evaluate_metric(&scores_for(MetricId::Ssim, &targets, &shifted), &targets, OrThreshold::default()).unwrap();
        prop_assert!((a.plcc - b.plcc).abs() <= 1e-6, "{} {}", a.plcc, b.plcc);
        prop_assert_eq!(a.srocc, b.srocc);
        prop_assert!((a.rmse - b.rmse).abs() <= 1e-6, "{} {}", a.rmse, b.rmse);
        prop_assert!((a.outlier_ratio - b.outlier_ratio).abs() <= 1e-6);
    }

    #[test]
    fn mos_is_bounded_and_order_free(rows in (3usize..12, 1usize..10).prop_flat_map(|(s, j)| ratings(s, j))) {
        let m = matrix(rows.clone());
        let records = mos(&m);
        for (r, row) in records.iter().zip(&rows) {
            let lo = *row.iter().min().unwrap() as f64;
            let hi = *row.iter().max().unwrap() as f64;
            prop_assert!(r.mos >= lo && r.mos <= hi);
            prop_assert!(r.ci95 >= 0.0);
            prop_assert_eq!(r.n_subjects, row.len());
        }
        let reversed: Vec<Vec<u8>> = rows.iter().map(|r| r.iter().rev().copied().collect()).collect();
        for (a, b) in records.iter().zip(mos(&matrix(reversed))) {
            prop_assert!((a.mos - b.mos).abs() < 1e-12);
            prop_assert!((a.ci95 - b.ci95).abs() < 1e-12);
        }
    }

    #[test]
    fn histogram_conserves_counts(
        rows in (2usize..8, 1usize..30).prop_flat_map(|(s, j)| ratings(s, j)),
        bins in 2usize..12,
    ) {
        let records = mos(&matrix(rows));
        let counts = mos_histogram(&records, bins).unwrap();
        prop_assert_eq!(counts.len(), bins);
        prop_assert_eq!(counts.iter().sum::<usize>(), records.len());
    }

    #[test]
    fn unanimous_panels_keep_everyone(
        values in prop::collection::vec(1u8..=5, 1..20),
        subjects in 3usize..20,
    ) {
        let rows = values.iter().map(|&v| vec![v; subjects]).collect();
        let outcome = screen_outliers(&matrix(rows)).unwrap();
        prop_assert!(outcome.rejected.is_empty());
        prop_assert_eq!(outcome.retained.n_subjects(), subjects);
    }
}
