use super::csf::NormalizedCsf;
use super::dwt::dwt97;
use super::{luma_pair, Constants, ScoreValue, VsnrConstants};
use crate::{Error, Image, LumaPlane, Result};

/// Visual SNR. Returns the unbounded marker when no wavelet level of the
/// error reaches its (masked) detection threshold.
///
/// Luminance is modelled as `(b + k·I)^γ`. Per-level RMS contrasts come from
/// a 9/7 wavelet decomposition. Supra-threshold errors are scored from the
/// total error contrast and its deviation from a global-precedence
/// allocation proportional to `f^precedence_exponent`.
pub fn vsnr(reference: &Image, distorted: &Image, c: &Constants) -> Result<ScoreValue> {
    let (x, y) = luma_pair(reference, distorted)?;
    let csf = NormalizedCsf::new(c.wsnr.csf);
    vsnr_luma(&x, &y, &c.vsnr, &csf, c.viewing.pixels_per_degree())
}

fn level_contrasts(plane: &LumaPlane, levels: usize, mean_lum: f64) -> Vec<f64> {
    let (bands, _) = dwt97(plane, levels);
    bands
        .iter()
        .enumerate()
        .map(|(l, band)| {
            let (sum, n) = band
                .coefficients()
                .fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
            (sum / n.max(1) as f64).sqrt() / 2f64.powi(l as i32 + 1) / mean_lum
        })
        .collect()
}

pub(crate) fn vsnr_luma(
    x: &LumaPlane,
    y: &LumaPlane,
    p: &VsnrConstants,
    csf: &NormalizedCsf,
    ppd: f64,
) -> Result<ScoreValue> {
    let min_side = 1usize << p.levels;
    if x.width() < min_side || x.height() < min_side {
        return Err(Error::TooSmall(format!(
            "{}x{} is below {min_side}x{min_side} for {} wavelet levels",
            x.width(),
            x.height(),
            p.levels
        )));
    }
    let lum = |v: f64| (p.b + p.k * v).max(0.0).powf(p.gamma);
    let lx = x.map(lum);
    let ly = y.map(lum);
    let mean = lx.mean();
    if mean <= 0.0 {
        return Err(Error::Degenerate(
            "reference has zero mean luminance".into(),
        ));
    }
    let err = lx.zip_map(&ly, |a, b| a - b);

    let ce = level_contrasts(&err, p.levels, mean);
    let cr = level_contrasts(&lx, p.levels, mean);
    let freqs: Vec<f64> = (1..=p.levels)
        .map(|l| ppd / 2f64.powf(l as f64 + 0.5))
        .collect();
    let visible = (0..p.levels).any(|l| {
        let ct0 = 1.0 / (p.peak_sensitivity * csf.weight(freqs[l]));
        let ct = ct0 * (cr[l] / ct0).max(1.0).powf(p.masking_exponent);
        ce[l] >= ct
    });
    if !visible {
        return Ok(ScoreValue::UnboundedPerfect);
    }

    let total = ce.iter().map(|v| v * v).sum::<f64>().sqrt();
    let alloc: Vec<f64> = freqs
        .iter()
        .map(|f| f.powf(p.precedence_exponent))
        .collect();
    let norm = alloc.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d_gp = ce
        .iter()
        .zip(&alloc)
        .map(|(e, a)| (e - a * total / norm).powi(2))
        .sum::<f64>()
        .sqrt();
    let c_ref = lx.std_dev() / mean;
    let distance = p.alpha * total + (1.0 - p.alpha) * d_gp / 2f64.sqrt();
    ScoreValue::from_f64(20.0 * (c_ref / distance).log10())
}
