use serde::Serialize;

use super::csf::{centered_bin, mannos_sakrison};
use super::log_gabor::{LogGaborBank, LogGaborParams};
use super::{luma_pair, Constants, MadConstants};
use crate::image::dft2;
use crate::{Error, Image, LumaPlane, Result};

/// Most apparent distortion (lower is better) with its two stage scores.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MadResult {
    pub value: f64,
    /// Visibility-weighted local error for near-threshold distortions.
    pub detection: f64,
    /// Change of log-Gabor subband statistics for supra-threshold distortions.
    pub appearance: f64,
    /// Weight of the detection stage in the geometric blend.
    pub alpha: f64,
}

/// `detection^α · appearance^(1−α)` with `α = 1 / (1 + β₁·detection^β₂)`.
pub fn mad(reference: &Image, distorted: &Image, c: &Constants) -> Result<MadResult> {
    let (x, y) = luma_pair(reference, distorted)?;
    let p = &c.mad;
    if x.width() < p.block || x.height() < p.block {
        return Err(Error::TooSmall(format!(
            "{}x{} is smaller than one {}x{} block",
            x.width(),
            x.height(),
            p.block,
            p.block
        )));
    }
    if p.stride == 0 || p.block < 2 {
        return Err(Error::InvalidArgument(
            "MAD block must be ≥ 2 and stride ≥ 1".into(),
        ));
    }
    let detection = detection_stage(&x, &y, p, &c.wsnr.csf);
    let appearance = appearance_stage(&x, &y, p);
    let alpha = 1.0 / (1.0 + p.beta1 * detection.powf(p.beta2));
    Ok(MadResult {
        value: detection.powf(alpha) * appearance.powf(1.0 - alpha),
        detection,
        appearance,
        alpha,
    })
}

fn block_origins(n: usize, block: usize, stride: usize) -> Vec<usize> {
    (0..=n - block).step_by(stride).collect()
}

fn block_values(
    p: &LumaPlane,
    x0: usize,
    y0: usize,
    bw: usize,
    bh: usize,
) -> impl Iterator<Item = f64> + Clone + '_ {
    (y0..y0 + bh).flat_map(move |y| (x0..x0 + bw).map(move |x| p.get(x, y)))
}

fn mean_and_sample_std(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let ss: f64 = v.map(|a| (a - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Contrast sensitivity in the radial frequency plane, with the oblique
/// effect and a flat response below the peak.
fn csf_filter(w: usize, h: usize, nyquist_cpd: f64, params: &[f64; 4]) -> Vec<f64> {
    const OBLIQUE: f64 = 0.7;
    const FLAT_BELOW: f64 = 7.8909;
    const FLAT_VALUE: f64 = 0.9809;
    let mut out = vec![0.0; w * h];
    for v in 0..h {
        let fy = centered_bin(v, h) / h as f64;
        for u in 0..w {
            let fx = centered_bin(u, w) / w as f64;
            let radial = fx.hypot(fy) * 2.0 * nyquist_cpd;
            let s = (1.0 - OBLIQUE) / 2.0 * (4.0 * fy.atan2(fx)).cos() + (1.0 + OBLIQUE) / 2.0;
            let f = radial / s;
            out[v * w + u] = if f < FLAT_BELOW {
                FLAT_VALUE
            } else {
                mannos_sakrison(f, params)
            };
        }
    }
    out
}

fn detection_stage(x: &LumaPlane, y: &LumaPlane, p: &MadConstants, csf_params: &[f64; 4]) -> f64 {
    let lightness = |v: f64| (p.k * v).max(0.0).powf(p.gamma / 3.0);
    let lx = x.map(lightness);
    let ly = y.map(lightness);
    let err = lx.zip_map(&ly, |a, b| a - b);
    let (w, h) = (x.width(), x.height());
    let csf = csf_filter(w, h, p.csf_nyquist_cpd, csf_params);
    let ref_f = dft2(&lx).filtered(&csf).inverse_real();
    let err_f = dft2(&err).filtered(&csf).inverse_real();

    let (b, half) = (p.block, p.block / 2);
    let mut acc = 0.0;
    let mut count = 0usize;
    for &y0 in &block_origins(h, b, p.stride) {
        for &x0 in &block_origins(w, b, p.stride) {
            let (mu, _) = mean_and_sample_std(block_values(&ref_f, x0, y0, b, b));
            let sigma_mod = [(0, 0), (half, 0), (0, half), (half, half)]
                .iter()
                .map(|&(dx, dy)| {
                    mean_and_sample_std(block_values(&ref_f, x0 + dx, y0 + dy, half, half)).1
                })
                .fold(f64::INFINITY, f64::min);
            let (_, sigma_err) = mean_and_sample_std(block_values(&err_f, x0, y0, b, b));
            let (c_org, c_err) = if mu > 0.0 {
                ((sigma_mod / mu).ln(), (sigma_err / mu).ln())
            } else {
                (f64::NEG_INFINITY, f64::NEG_INFINITY)
            };
            let visibility = if c_err > c_org && c_org > p.delta {
                c_err - c_org
            } else if c_err > p.delta && c_org <= p.delta {
                c_err - p.delta
            } else {
                0.0
            };
            let lmse =
                block_values(&err, x0, y0, b, b).map(|e| e * e).sum::<f64>() / (b * b) as f64;
            acc += (visibility * lmse).powi(2);
            count += 1;
        }
    }
    200.0 * (acc / count as f64).sqrt()
}

/// Sample standard deviation, skewness and kurtosis (moment ratios); a
/// constant block yields zeros.
fn block_moments(v: impl Iterator<Item = f64> + Clone) -> [f64; 3] {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for a in v {
        let d = a - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    if m2 == 0.0 {
        return [0.0; 3];
    }
    let std = (m2 / (n - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    [std, m3 / m2.powf(1.5), m4 / (m2 * m2)]
}

fn appearance_stage(x: &LumaPlane, y: &LumaPlane, p: &MadConstants) -> f64 {
    let (w, h) = (x.width(), x.height());
    let bank = LogGaborBank::new(
        w,
        h,
        &LogGaborParams {
            scales: p.scale_weights.len(),
            orientations: p.orientations,
            min_wavelength: p.min_wavelength,
            mult: p.mult,
            sigma_on_f: p.sigma_on_f,
            d_theta_on_sigma: p.d_theta_on_sigma,
        },
    );
    let total: f64 = p.scale_weights.iter().sum();
    let (sx, sy) = (dft2(x), dft2(y));
    let xs = block_origins(w, p.block, p.stride);
    let ys = block_origins(h, p.block, p.stride);
    let mut eta = vec![0.0; xs.len() * ys.len()];
    for (s, &weight) in p.scale_weights.iter().enumerate() {
        let weight = weight / total;
        for o in 0..p.orientations {
            let mag = |spec| {
                let r = bank.respond(spec, s, o);
                LumaPlane::from_raw(w, h, r.iter().map(|c| c.norm()).collect())
            };
            let (mx, my) = (mag(&sx), mag(&sy));
            for (bi, &y0) in ys.iter().enumerate() {
                for (bj, &x0) in xs.iter().enumerate() {
                    let a = block_moments(block_values(&mx, x0, y0, p.block, p.block));
                    let b = block_moments(block_values(&my, x0, y0, p.block, p.block));
                    eta[bi * xs.len() + bj] += weight
                        * ((a[0] - b[0]).abs() + 2.0 * (a[1] - b[1]).abs() + (a[2] - b[2]).abs());
                }
            }
        }
    }
    (eta.iter().map(|v| v * v).sum::<f64>() / eta.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(n: usize) -> Image {
        Image::from_fn(n, n, 1, |x, y, _| {
            (110.0
                + 60.0 * ((x as f64 * 0.31).sin() * (y as f64 * 0.17).cos())
                + ((x * 13 + y * 7) % 19) as f64) as u8
        })
        .unwrap()
    }

    fn noisy(img: &Image, amp: i32) -> Image {
        let mut s = 11u64;
        Image::from_fn(img.width(), img.height(), 1, |x, y, _| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let n = ((s >> 33) % (2 * amp as u64 + 1)) as i32 - amp;
            (img.get(x, y, 0) as i32 + n).clamp(0, 255) as u8
        })
        .unwrap()
    }

    #[test]
    fn identical_is_zero() {
        let img = textured(48);
        let r = mad(&img, &img, &Constants::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!((r.detection, r.appearance, r.alpha), (0.0, 0.0, 1.0));
    }

    #[test]
    fn strong_texture_masks_noise() {
        let img = textured(48);
        let r = mad(&img, &noisy(&img, 40), &Constants::default()).unwrap();
        assert_eq!(r.detection, 0.0);
        assert!(r.appearance > 0.0);
    }

    #[test]
    fn more_noise_is_worse() {
        let c = Constants::default();
        let img = Image::from_fn(48, 48, 1, |x, y, _| {
            (110.0 + 30.0 * ((x as f64 * 0.11).sin() * (y as f64 * 0.07).cos())) as u8
        })
        .unwrap();
        let weak = mad(&img, &noisy(&img, 10), &c).unwrap();
        let strong = mad(&img, &noisy(&img, 40), &c).unwrap();
        assert!(
            weak.value > 0.0 && strong.value > weak.value,
            "{weak:?} {strong:?}"
        );
        assert!(strong.alpha < weak.alpha);
    }

    #[test]
    fn moments_of_known_block() {
        let m = block_moments([1.0, 2.0, 3.0, 4.0].into_iter());
        assert!((m[0] - 1.2909944487358056).abs() < 1e-12);
        assert!(m[1].abs() < 1e-12);
        assert!((m[2] - 1.64).abs() < 1e-12);
        assert_eq!(block_moments([5.0; 4].into_iter()), [0.0; 3]);
    }

    #[test]
    fn too_small() {
        let img = textured(12);
        assert!(mad(&img, &img, &Constants::default()).is_err());
    }
}
