//! Whole-metric behaviour on synthetic contents: identical pairs, growing
//! Gaussian noise, argument order and tier gating.

use advfid_core::metrics::{csf_weight, wsnr};
use advfid_core::{Constants, Error, Image, MetricId, ScoreValue, Scorer};
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

const SIDE: usize = 192;
const SIGMAS: [f64; 5] = [2.0, 5.0, 10.0, 20.0, 40.0];

/// Smooth shading, an oriented grating and a disc-on-checker scene.
fn contents() -> Vec<(&'static str, Image)> {
    let gradient = Image::from_fn(SIDE, SIDE, 3, |x, y, c| {
        let v = 40.0 + 150.0 * (x + y) as f64 / (2 * SIDE) as f64 + 12.0 * c as f64;
        v as u8
    })
    .unwrap();
    let grating = Image::from_fn(SIDE, SIDE, 3, |x, y, c| {
        let t = (x as f64 * 0.21 + y as f64 * 0.09).sin() * (y as f64 * 0.05).cos();
        (128.0 + 70.0 * t + [10.0, 0.0, -10.0][c]) as u8
    })
    .unwrap();
    let scene = Image::from_fn(SIDE, SIDE, 3, |x, y, c| {
        let (dx, dy) = (x as f64 - 96.0, y as f64 - 80.0);
        let checker = ((x / 12 + y / 12) % 2) as f64;
        let disc = (dx * dx + dy * dy < 45.0 * 45.0) as u8 as f64;
        let base = 70.0 + 60.0 * checker;
        (base * (1.0 - disc) + disc * [210.0, 150.0, 60.0][c]) as u8
    })
    .unwrap();
    vec![
        ("gradient", gradient),
        ("grating", grating),
        ("scene", scene),
    ]
}

fn with_noise(img: &Image, sigma: f64, seed: u64) -> Image {
    let mut rng = StdRng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).unwrap();
    let samples = img
        .samples()
        .iter()
        .map(|&v| {
            (v as f64 + normal.sample(&mut rng))
                .round()
                .clamp(0.0, 255.0) as u8
        })
        .collect();
    Image::new(img.width(), img.height(), img.channels(), samples).unwrap()
}

#[test]
fn identical_pairs_score_perfect() {
    let scorer = Scorer::default();
    for (name, img) in contents() {
        for metric in MetricId::ALL {
            if !scorer.is_enabled(metric) {
                continue;
            }
            let s = scorer.score(name, metric, &img, &img).unwrap();
            assert_eq!(s.value, metric.perfect_value(), "{metric} on {name}");
        }
    }
}

#[test]
fn identical_grayscale_pairs_score_perfect() {
    let scorer = Scorer::default();
    let img = Image::from_fn(SIDE, SIDE, 1, |x, y, _| ((x * 7 + y * 3) % 251) as u8).unwrap();
    for metric in MetricId::ALL {
        if scorer.is_enabled(metric) {
            let s = scorer.score("gray", metric, &img, &img).unwrap();
            assert_eq!(s.value, metric.perfect_value(), "{metric}");
        }
    }
}

#[test]
fn tier1_strictly_decreases_with_noise() {
    let scorer = Scorer::default();
    let metrics = [
        MetricId::Ssim,
        MetricId::MsSsim,
        MetricId::Uqi,
        MetricId::Gsim,
        MetricId::Vifp,
        MetricId::Psnr,
        MetricId::Wsnr,
    ];
    for (name, img) in contents() {
        let noisy: Vec<Image> = SIGMAS.iter().map(|&s| with_noise(&img, s, 2024)).collect();
        for metric in metrics {
            let values: Vec<f64> = noisy
                .iter()
                .map(|n| {
                    scorer
                        .score(name, metric, &img, n)
                        .unwrap()
                        .value
                        .finite()
                        .unwrap()
                })
                .collect();
            assert!(
                values.windows(2).all(|w| w[1] < w[0]),
                "{metric} on {name}: {values:?}"
            );
        }
    }
}

#[cfg(feature = "tier2")]
#[test]
fn tier2_orders_weak_and_strong_noise() {
    let scorer = Scorer::default();
    let (_, img) = contents().swap_remove(2);
    let weak = with_noise(&img, 5.0, 7);
    let strong = with_noise(&img, 40.0, 7);
    for metric in MetricId::tier2() {
        // Sub-threshold error may leave an SNR-type metric unbounded.
        let value = |d: &Image| {
            scorer
                .score("scene", metric, &img, d)
                .unwrap()
                .value
                .finite()
                .unwrap_or(f64::INFINITY)
        };
        let (w, s) = (value(&weak), value(&strong));
        assert!(s.is_finite(), "{metric}");
        match metric.polarity() {
            advfid_core::metrics::Polarity::HigherIsBetter => assert!(s < w, "{metric}: {w} {s}"),
            advfid_core::metrics::Polarity::LowerIsBetter => assert!(s > w, "{metric}: {w} {s}"),
        }
    }
}

#[test]
fn norms_and_psnr_are_symmetric() {
    let scorer = Scorer::default();
    let (_, img) = contents().swap_remove(1);
    let other = with_noise(&img, 10.0, 3);
    for metric in [
        MetricId::Psnr,
        MetricId::L0,
        MetricId::L2,
        MetricId::Linf,
        MetricId::Ssim,
        MetricId::Uqi,
    ] {
        let ab = scorer.score("p", metric, &img, &other).unwrap().value;
        let ba = scorer.score("p", metric, &other, &img).unwrap().value;
        assert_eq!(ab, ba, "{metric}");
    }
}

#[test]
fn directional_metrics_depend_on_argument_order() {
    let scorer = Scorer::default();
    let (_, img) = contents().swap_remove(2);
    let other = with_noise(&img, 20.0, 5);
    for metric in [MetricId::Vifp, MetricId::Wsnr] {
        let ab = scorer.score("p", metric, &img, &other).unwrap().value;
        let ba = scorer.score("p", metric, &other, &img).unwrap().value;
        assert_ne!(ab, ba, "{metric}");
    }
}

#[test]
fn disabled_tier2_reports_not_enabled() {
    let scorer = Scorer {
        tier2_enabled: false,
        ..Scorer::default()
    };
    let (_, img) = contents().swap_remove(0);
    for metric in MetricId::tier2() {
        assert!(
            matches!(scorer.score("p", metric, &img, &img), Err(Error::NotEnabled(m)) if m == metric)
        );
    }
    assert!(scorer.score("p", MetricId::Psnr, &img, &img).is_ok());
}

#[test]
fn wsnr_penalizes_visible_frequencies_more() {
    // The Nyquist grating carries twice the error energy of the one near the
    // CSF peak, yet is far less visible.
    let c = Constants::default();
    let ppd = c.viewing.pixels_per_degree();
    let img = Image::from_fn(SIDE, SIDE, 1, |_, _, _| 128).unwrap();
    let grating = |cycles_per_px: f64| {
        Image::from_fn(SIDE, SIDE, 1, |x, _, _| {
            (128.0 + 20.0 * (2.0 * std::f64::consts::PI * cycles_per_px * x as f64).cos()).round()
                as u8
        })
        .unwrap()
    };
    let peak = advfid_core::metrics::csf_peak(&c.wsnr.csf).0;
    let visible = grating((peak / ppd * SIDE as f64).round() / SIDE as f64);
    let fine = grating(0.5);
    assert!(csf_weight(peak, &c) > csf_weight(0.5 * ppd, &c));
    let wv = wsnr(&img, &visible, &c).unwrap();
    let wf = wsnr(&img, &fine, &c).unwrap();
    match (wv, wf) {
        (ScoreValue::Finite(v), ScoreValue::Finite(f)) => assert!(v < f, "{v} {f}"),
        other => panic!("{other:?}"),
    }
}
