use crate::image::{correlate_valid, Kernel2D};
use crate::{Error, Image, LumaPlane, Result};

use super::{luma_pair, Constants};

/// Universal quality index: SSIM without stabilizers over a sliding uniform
/// window, averaged over windows where the index is defined.
///
/// Windows with a zero denominator are skipped. If no window is defined at
/// all (e.g. both images flat), every window falls back to the limiting
/// forms: `2μxμy / (μx² + μy²)` for flat windows and 1 when both means are 0.
pub fn uqi(reference: &Image, distorted: &Image, c: &Constants) -> Result<f64> {
    let (x, y) = luma_pair(reference, distorted)?;
    uqi_luma(&x, &y, c.uqi.window)
}

pub(crate) fn uqi_luma(x: &LumaPlane, y: &LumaPlane, window: usize) -> Result<f64> {
    if x.width() < window || x.height() < window {
        return Err(Error::TooSmall(format!(
            "{}x{} is smaller than the {window}x{window} window",
            x.width(),
            x.height()
        )));
    }
    // Unnormalized window sums stay exact for integer-valued planes, so the
    // zero-denominator test below is exact for 8-bit input.
    let ones = vec![1.0; window];
    let k = Kernel2D::separable(ones.clone(), ones)?;
    let n = (window * window) as f64;
    let sx = correlate_valid(x, &k)?;
    let sy = correlate_valid(y, &k)?;
    let sxx = correlate_valid(&x.zip_map(x, |a, b| a * b), &k)?;
    let syy = correlate_valid(&y.zip_map(y, |a, b| a * b), &k)?;
    let sxy = correlate_valid(&x.zip_map(y, |a, b| a * b), &k)?;

    let mut defined = 0usize;
    let mut sum = 0.0;
    let mut fallback_sum = 0.0;
    for i in 0..sx.len() {
        let (s1, s2) = (sx.data()[i], sy.data()[i]);
        let v1 = n * sxx.data()[i] - s1 * s1;
        let v2 = n * syy.data()[i] - s2 * s2;
        let cov = n * sxy.data()[i] - s1 * s2;
        let var_sum = v1 + v2;
        let mean_sq = s1 * s1 + s2 * s2;
        if var_sum != 0.0 && mean_sq != 0.0 {
            // Factored so that identical windows give exactly 1.
            sum += (2.0 * cov / var_sum) * (2.0 * s1 * s2 / mean_sq);
            defined += 1;
        } else if mean_sq != 0.0 {
            fallback_sum += 2.0 * s1 * s2 / mean_sq;
        } else {
            fallback_sum += if var_sum == 0.0 { 1.0 } else { 0.0 };
        }
    }
    if defined > 0 {
        Ok(sum / defined as f64)
    } else {
        Ok(fallback_sum / sx.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_textured_is_one() {
        let p = LumaPlane::from_fn(16, 16, |x, y| ((x * 37 + y * 11) % 200) as f64 + 10.0);
        assert_eq!(uqi_luma(&p, &p, 8).unwrap(), 1.0);
    }

    #[test]
    fn mean_shift_lowers_score() {
        let p = LumaPlane::from_fn(16, 16, |x, y| ((x * 37 + y * 11) % 200) as f64 + 10.0);
        let q = p.map(|v| v + 10.0);
        let v = uqi_luma(&p, &q, 8).unwrap();
        assert!(v < 1.0 && v > 0.9, "{v}");
    }

    #[test]
    fn flat_images_use_limiting_form() {
        let a = LumaPlane::constant(10, 10, 100.0);
        let b = LumaPlane::constant(10, 10, 50.0);
        let v = uqi_luma(&a, &b, 8).unwrap();
        assert!((v - 2.0 * 100.0 * 50.0 / (100f64.powi(2) + 50f64.powi(2))).abs() < 1e-12);
        assert_eq!(uqi_luma(&a, &a, 8).unwrap(), 1.0);
    }

    #[test]
    fn window_larger_than_image() {
        let a = LumaPlane::constant(7, 10, 1.0);
        assert!(uqi_luma(&a, &a, 8).is_err());
    }
}
