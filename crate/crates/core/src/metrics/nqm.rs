use std::f64::consts::PI;

use super::csf::{radial_frequency, NormalizedCsf};
use super::{luma_pair, Constants, NqmConstants, ScoreValue};
use crate::image::{dft2, Spectrum};
use crate::{Error, Image, LumaPlane, Result};

/// Noise quality measure: SNR between contrast-pyramid restorations of the
/// reference and the distorted image.
///
/// Both images are split into octave bands with raised-cosine (log-frequency)
/// windows that sum to one. Band components whose local contrast falls below
/// the CSF detection threshold are removed; a distorted component whose
/// contrast stays within the masked threshold of the reference is replaced by
/// the reference component. The score is the SNR of the restored reference
/// against the restoration difference, in dB.
pub fn nqm(reference: &Image, distorted: &Image, c: &Constants) -> Result<ScoreValue> {
    let (x, y) = luma_pair(reference, distorted)?;
    let csf = NormalizedCsf::new(c.wsnr.csf);
    nqm_luma(&x, &y, &c.nqm, &csf, c.viewing.pixels_per_degree())
}

/// Band window weights for radial frequency `f` (cycles/pixel): index 0 is the
/// low-pass residual, `k ≥ 1` the band centred at `0.5 / 2^(bands − k)`.
pub(crate) fn band_weights(f: f64, bands: usize) -> Vec<f64> {
    let mut w = vec![0.0; bands + 1];
    let top = 0.5f64.log2();
    let lowest = top - (bands - 1) as f64;
    if f <= 0.0 {
        w[0] = 1.0;
        return w;
    }
    let t = f.log2();
    if t >= top {
        w[bands] = 1.0;
    } else if t <= lowest - 1.0 {
        w[0] = 1.0;
    } else {
        // Position between adjacent centres; centre k sits at lowest + (k − 1).
        let pos = t - (lowest - 1.0);
        let k = pos.floor() as usize;
        let frac = pos - k as f64;
        let rising = 0.5 * (1.0 - (PI * frac).cos());
        w[k] = 1.0 - rising;
        w[k + 1] = rising;
    }
    w
}

pub(crate) fn band_centre(k: usize, bands: usize) -> f64 {
    0.5 / 2f64.powi((bands - k) as i32)
}

fn decompose(s: &Spectrum, windows: &[Vec<f64>]) -> Vec<LumaPlane> {
    windows
        .iter()
        .map(|w| s.filtered(w).inverse_real())
        .collect()
}

pub(crate) fn nqm_luma(
    x: &LumaPlane,
    y: &LumaPlane,
    p: &NqmConstants,
    csf: &NormalizedCsf,
    ppd: f64,
) -> Result<ScoreValue> {
    if p.bands == 0 {
        return Err(Error::InvalidArgument("NQM needs at least one band".into()));
    }
    let (w, h) = (x.width(), x.height());
    let n = w * h;
    let mut windows = vec![vec![0.0; n]; p.bands + 1];
    for v in 0..h {
        for u in 0..w {
            let bw = band_weights(radial_frequency(u, v, w, h), p.bands);
            for (k, b) in bw.into_iter().enumerate() {
                windows[k][v * w + u] = b;
            }
        }
    }
    let xs = decompose(&dft2(x), &windows);
    let ys = decompose(&dft2(y), &windows);
    let thresholds: Vec<f64> = (1..=p.bands)
        .map(|k| 1.0 / (p.peak_sensitivity * csf.weight(band_centre(k, p.bands) * ppd)))
        .collect();

    let mut sig = 0.0;
    let mut err = 0.0;
    for i in 0..n {
        let mut base_x = xs[0].data()[i];
        let mut base_y = ys[0].data()[i];
        let mut out_x = base_x;
        let mut out_y = base_y;
        for k in 1..=p.bands {
            let (ax, ay) = (xs[k].data()[i], ys[k].data()[i]);
            let cx = ax / base_x.max(p.luminance_floor);
            let cy = ay / base_y.max(p.luminance_floor);
            let th = thresholds[k - 1];
            let rx = if cx.abs() > th { ax } else { 0.0 };
            let masked = th * (cx.abs() / th).max(1.0).powf(p.masking_exponent);
            let ry = if (cy - cx).abs() < masked {
                rx
            } else if cy.abs() > th {
                ay
            } else {
                0.0
            };
            out_x += rx;
            out_y += ry;
            base_x += ax;
            base_y += ay;
        }
        sig += out_x * out_x;
        err += (out_x - out_y).powi(2);
    }
    if err == 0.0 {
        return Ok(ScoreValue::UnboundedPerfect);
    }
    ScoreValue::from_f64(10.0 * (sig / err).log10())
}
