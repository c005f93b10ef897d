use crate::image::dft2;
use crate::{Image, Result};

use super::csf::{radial_frequency, NormalizedCsf};
use super::{luma_pair, Constants, ScoreValue};

/// Peak-normalized Mannos–Sakrison weight at `f` cycles/degree.
pub fn csf_weight(f: f64, c: &Constants) -> f64 {
    NormalizedCsf::new(c.wsnr.csf).weight(f)
}

/// CSF-weighted SNR in dB: signal and error spectra of the luminance are
/// both weighted by the peak-normalized CSF at the configured viewing
/// geometry.
pub fn wsnr(reference: &Image, distorted: &Image, c: &Constants) -> Result<ScoreValue> {
    let (x, y) = luma_pair(reference, distorted)?;
    let err = x.zip_map(&y, |a, b| a - b);
    let sx = dft2(&x);
    let se = dft2(&err);
    let csf = NormalizedCsf::new(c.wsnr.csf);
    let ppd = c.viewing.pixels_per_degree();
    let (w, h) = (x.width(), x.height());
    let (mut signal, mut noise) = (0.0, 0.0);
    for v in 0..h {
        for u in 0..w {
            let wt = csf.weight(radial_frequency(u, v, w, h) * ppd);
            let wt2 = wt * wt;
            signal += sx.get(u, v).norm_sqr() * wt2;
            noise += se.get(u, v).norm_sqr() * wt2;
        }
    }
    if noise == 0.0 {
        return Ok(ScoreValue::UnboundedPerfect);
    }
    ScoreValue::from_f64(10.0 * (signal / noise).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csf_endpoints() {
        let c = Constants::default();
        let at_zero = csf_weight(0.0, &c);
        assert!(at_zero < 0.06, "{at_zero}");
        let peak = super::super::csf::peak(&c.wsnr.csf).0;
        assert!((csf_weight(peak, &c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_is_unbounded() {
        let a = Image::from_fn(16, 16, 3, |x, y, c| (x * 9 + y * 3 + c) as u8).unwrap();
        assert_eq!(
            wsnr(&a, &a, &Constants::default()).unwrap(),
            ScoreValue::UnboundedPerfect
        );
    }
}
