use crate::image::{convolve, gradient_magnitude, BorderMode, GradientOperator, Kernel2D};
use crate::{Image, LumaPlane, Result};

use super::{luma_pair, similarity, Constants};

/// Gradient similarity: per-pixel `(2·G₁·G₂ + C)/(G₁² + G₂² + C)` on
/// unit-gain gradient magnitudes, multiplied by a local-mean luminance
/// similarity, then mean-pooled.
pub fn gsim(reference: &Image, distorted: &Image, c: &Constants) -> Result<f64> {
    Ok(gsim_map(reference, distorted, c)?.mean())
}

/// Per-pixel GSIM quality map (same size as the input).
pub fn gsim_map(reference: &Image, distorted: &Image, c: &Constants) -> Result<LumaPlane> {
    let (x, y) = luma_pair(reference, distorted)?;
    gsim_map_luma(&x, &y, c)
}

fn operator_gain(op: GradientOperator) -> f64 {
    match op {
        GradientOperator::Sobel => 4.0,
        GradientOperator::Scharr => 16.0,
        GradientOperator::Prewitt => 3.0,
    }
}

pub(crate) fn gsim_map_luma(x: &LumaPlane, y: &LumaPlane, c: &Constants) -> Result<LumaPlane> {
    let p = &c.gsim;
    let gain = operator_gain(p.operator);
    let g1 = gradient_magnitude(x, p.operator)?.map(|v| v / gain);
    let g2 = gradient_magnitude(y, p.operator)?.map(|v| v / gain);
    let k = Kernel2D::box_filter(p.luminance_window)?;
    let m1 = convolve(x, &k, BorderMode::Symmetric)?;
    let m2 = convolve(y, &k, BorderMode::Symmetric)?;
    let grad = g1.zip_map(&g2, |a, b| similarity(a, b, p.c));
    let lum = m1.zip_map(&m2, |a, b| similarity(a, b, p.luminance_c));
    Ok(grad.zip_map(&lum, |g, l| g * l))
}
