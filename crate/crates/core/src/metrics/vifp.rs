use crate::image::{correlate_valid, gaussian_window};
use crate::{Error, Image, LumaPlane, Result};

use super::{luma_pair, Constants};

const VARIANCE_FLOOR: f64 = 1e-10;

/// Pixel-domain visual information fidelity over a 4-scale Gaussian pyramid.
///
/// At scale `s` (1-based) the window has `2^(S−s+1)+1` taps with σ = taps/5;
/// coarser scales are obtained by filtering with the window (valid region)
/// and keeping every second sample. Ranges over (0, 1] for degradations and
/// may exceed 1 for contrast enhancement.
pub fn vifp(reference: &Image, distorted: &Image, c: &Constants) -> Result<f64> {
    let (x, y) = luma_pair(reference, distorted)?;
    vifp_luma(&x, &y, c)
}

fn window_taps(scales: usize, s: usize) -> usize {
    (1usize << (scales - s + 1)) + 1
}

/// Smallest square side for which every scale keeps a non-empty valid region.
pub(crate) fn min_side(scales: usize) -> usize {
    (1..)
        .find(|&side| {
            let mut n = side;
            for s in 1..=scales {
                let taps = window_taps(scales, s);
                if s > 1 {
                    if n < taps {
                        return false;
                    }
                    n = (n - taps + 1).div_ceil(2);
                }
                if n < taps {
                    return false;
                }
            }
            true
        })
        .expect("finite minimum")
}

pub(crate) fn vifp_luma(x: &LumaPlane, y: &LumaPlane, c: &Constants) -> Result<f64> {
    let scales = c.vifp.scales;
    let min = min_side(scales);
    if x.width() < min || x.height() < min {
        return Err(Error::TooSmall(format!(
            "VIFp needs at least {min}x{min}, got {}x{}",
            x.width(),
            x.height()
        )));
    }
    let sigma_nsq = c.vifp.sigma_nsq;
    let (mut x, mut y) = (x.clone(), y.clone());
    let (mut num, mut den) = (0.0, 0.0);
    for s in 1..=scales {
        let taps = window_taps(scales, s);
        let win = gaussian_window(taps, taps as f64 / 5.0)?;
        if s > 1 {
            x = correlate_valid(&x, &win)?.decimate(2, 0);
            y = correlate_valid(&y, &win)?.decimate(2, 0);
        }
        let mu1 = correlate_valid(&x, &win)?;
        let mu2 = correlate_valid(&y, &win)?;
        let xx = correlate_valid(&x.zip_map(&x, |a, b| a * b), &win)?;
        let yy = correlate_valid(&y.zip_map(&y, |a, b| a * b), &win)?;
        let xy = correlate_valid(&x.zip_map(&y, |a, b| a * b), &win)?;
        for i in 0..mu1.len() {
            let (m1, m2) = (mu1.data()[i], mu2.data()[i]);
            let mut s1 = (xx.data()[i] - m1 * m1).max(0.0);
            let s2 = (yy.data()[i] - m2 * m2).max(0.0);
            let s12 = xy.data()[i] - m1 * m2;

            let mut g = if s1 >= VARIANCE_FLOOR { s12 / s1 } else { 0.0 };
            let mut sv = s2 - g * s12;
            if s1 < VARIANCE_FLOOR {
                sv = s2;
                s1 = 0.0;
            }
            if s2 < VARIANCE_FLOOR {
                g = 0.0;
                sv = 0.0;
            }
            if g < 0.0 {
                sv = s2;
                g = 0.0;
            }
            // Noise-free regions keep sv = 0 so that identical inputs score 1.
            let sv = sv.max(0.0);
            num += (1.0 + g * g * s1 / (sv + sigma_nsq)).log10();
            den += (1.0 + s1 / sigma_nsq).log10();
        }
    }
    if den == 0.0 {
        return if x == y {
            Ok(1.0)
        } else {
            Err(Error::Degenerate(
                "reference carries no information (flat image)".into(),
            ))
        };
    }
    Ok(num / den)
}
