//! SSIM and its multi-scale extension, on luminance, with valid-region pooling.

use crate::image::{correlate_valid, downsample2, gaussian_window, Kernel2D};
use crate::{Error, Image, LumaPlane, Result};

use super::{luma_pair, similarity, Constants};

/// Mean SSIM and mean contrast-structure term over the valid region.
pub(crate) struct SsimMeans {
    pub ssim: f64,
    pub cs: f64,
}

pub(crate) fn ssim_means(
    x: &LumaPlane,
    y: &LumaPlane,
    window: &Kernel2D,
    c1: f64,
    c2: f64,
) -> Result<SsimMeans> {
    let mu_x = correlate_valid(x, window)?;
    let mu_y = correlate_valid(y, window)?;
    let xx = correlate_valid(&x.zip_map(x, |a, b| a * b), window)?;
    let yy = correlate_valid(&y.zip_map(y, |a, b| a * b), window)?;
    let xy = correlate_valid(&x.zip_map(y, |a, b| a * b), window)?;

    let n = mu_x.len() as f64;
    let (mut ssim_sum, mut cs_sum) = (0.0, 0.0);
    for i in 0..mu_x.len() {
        let (m1, m2) = (mu_x.data()[i], mu_y.data()[i]);
        let s11 = xx.data()[i] - m1 * m1;
        let s22 = yy.data()[i] - m2 * m2;
        let s12 = xy.data()[i] - m1 * m2;
        let cs = (2.0 * s12 + c2) / (s11 + s22 + c2);
        ssim_sum += similarity(m1, m2, c1) * cs;
        cs_sum += cs;
    }
    Ok(SsimMeans {
        ssim: ssim_sum / n,
        cs: cs_sum / n,
    })
}

fn check_window(plane: &LumaPlane, window: usize) -> Result<()> {
    if plane.width() < window || plane.height() < window {
        return Err(Error::TooSmall(format!(
            "{}x{} is smaller than the {window}x{window} window",
            plane.width(),
            plane.height()
        )));
    }
    Ok(())
}

/// Mean SSIM with an 11×11 Gaussian window (σ = 1.5) by default.
pub fn ssim(reference: &Image, distorted: &Image, c: &Constants) -> Result<f64> {
    let (x, y) = luma_pair(reference, distorted)?;
    ssim_luma(&x, &y, c)
}

pub(crate) fn ssim_luma(x: &LumaPlane, y: &LumaPlane, c: &Constants) -> Result<f64> {
    let p = &c.ssim;
    check_window(x, p.window)?;
    let w = gaussian_window(p.window, p.sigma)?;
    Ok(ssim_means(x, y, &w, p.c1(), p.c2())?.ssim)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MsSsimResult {
    pub value: f64,
    /// Scales actually used; fewer than configured when the image is small.
    pub scales: usize,
}

/// Multi-scale SSIM: contrast-structure at every scale, luminance at the
/// coarsest. Small inputs fall back to the largest feasible scale count with
/// the leading weights renormalized to sum to one.
pub fn ms_ssim(reference: &Image, distorted: &Image, c: &Constants) -> Result<MsSsimResult> {
    let (x, y) = luma_pair(reference, distorted)?;
    ms_ssim_luma(&x, &y, c)
}

pub(crate) fn ms_ssim_luma(x: &LumaPlane, y: &LumaPlane, c: &Constants) -> Result<MsSsimResult> {
    let p = &c.ssim;
    check_window(x, p.window)?;
    let configured = c.ms_ssim.weights.len();
    if configured == 0 {
        return Err(Error::InvalidArgument(
            "MS-SSIM needs at least one weight".into(),
        ));
    }
    let mut scales = 1;
    let mut side = x.width().min(x.height());
    while scales < configured && side / 2 >= p.window {
        side /= 2;
        scales += 1;
    }
    let weights: Vec<f64> = if scales == configured {
        c.ms_ssim.weights.clone()
    } else {
        let s: f64 = c.ms_ssim.weights[..scales].iter().sum();
        c.ms_ssim.weights[..scales].iter().map(|w| w / s).collect()
    };

    let window = gaussian_window(p.window, p.sigma)?;
    let (mut x, mut y) = (x.clone(), y.clone());
    let mut value = 1.0;
    for (level, &w) in weights.iter().enumerate() {
        let means = ssim_means(&x, &y, &window, p.c1(), p.c2())?;
        if level + 1 == scales {
            value *= means.ssim.max(0.0).powf(w);
        } else {
            // A negative mean contrast-structure term has no real power.
            value *= means.cs.max(0.0).powf(w);
            x = downsample2(&x)?;
            y = downsample2(&y)?;
        }
    }
    Ok(MsSsimResult { value, scales })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c() -> Constants {
        Constants::default()
    }

    #[test]
    fn identical_is_one() {
        let p = LumaPlane::from_fn(40, 30, |x, y| ((x * 7 + y * 13) % 255) as f64);
        assert_eq!(ssim_luma(&p, &p, &c()).unwrap(), 1.0);
    }

    #[test]
    fn constant_shift() {
        let a = LumaPlane::constant(20, 20, 100.0);
        let b = LumaPlane::constant(20, 20, 102.0);
        let c1 = (0.01f64 * 255.0).powi(2);
        let expected = (2.0 * 100.0 * 102.0 + c1) / (100f64.powi(2) + 102f64.powi(2) + c1);
        let v = ssim_luma(&a, &b, &c()).unwrap();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.999804).abs() < 1e-6);
    }

    #[test]
    fn too_small() {
        let p = LumaPlane::constant(10, 30, 1.0);
        assert!(matches!(ssim_luma(&p, &p, &c()), Err(Error::TooSmall(_))));
    }

    #[test]
    fn ms_ssim_on_constants_is_luminance_power() {
        let a = LumaPlane::constant(200, 180, 90.0);
        let b = LumaPlane::constant(200, 180, 120.0);
        let k = c();
        let l = similarity(90.0, 120.0, k.ssim.c1());
        let r = ms_ssim_luma(&a, &b, &k).unwrap();
        assert_eq!(r.scales, 5);
        assert!((r.value - l.powf(0.1333)).abs() < 1e-12);
    }

    #[test]
    fn ms_ssim_fallback_is_flagged() {
        let a = LumaPlane::from_fn(64, 64, |x, y| ((x * y) % 200) as f64);
        let b = a.map(|v| v * 0.9 + 5.0);
        let r = ms_ssim_luma(&a, &b, &c()).unwrap();
        // 64 -> 32 -> 16; 8 would be below the window.
        assert_eq!(r.scales, 3);
        assert!(r.value > 0.0 && r.value <= 1.0);
        assert_eq!(ms_ssim_luma(&a, &a, &c()).unwrap().value, 1.0);
    }
}
