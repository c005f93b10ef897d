//! L0, L2 and L∞ perturbation distances between an original image and its
//! adversarial counterpart.
//!
//! L2 and L∞ are measured on intensities rescaled to `[0, 1]`; L0 counts
//! altered pixels (a pixel is altered when any of its channels differs).

use serde::{Deserialize, Serialize};

use crate::{Image, Result};

/// Intensity scale a distance was computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntensityScale {
    /// Samples divided by 255 before differencing.
    Unit,
    /// Raw 8-bit values.
    Byte,
}

/// Flattened per-sample difference `x − x′` over all pixels and channels.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationVector {
    values: Vec<f64>,
    channels: usize,
    scale: IntensityScale,
}

impl PerturbationVector {
    pub fn between(original: &Image, adversarial: &Image, scale: IntensityScale) -> Result<Self> {
        original.check_same_shape(adversarial)?;
        let div = match scale {
            IntensityScale::Unit => 255.0,
            IntensityScale::Byte => 1.0,
        };
        let values = original
            .samples()
            .iter()
            .zip(adversarial.samples())
            .map(|(&a, &b)| (f64::from(a) - f64::from(b)) / div)
            .collect();
        Ok(Self {
            values,
            channels: original.channels(),
            scale,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&self) -> IntensityScale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of pixels with at least one nonzero channel difference.
    pub fn altered_pixels(&self) -> usize {
        self.values
            .chunks_exact(self.channels)
            .filter(|p| p.iter().any(|&d| d != 0.0))
            .count()
    }

    pub fn altered_samples(&self) -> usize {
        self.values.iter().filter(|&&d| d != 0.0).count()
    }

    pub fn euclidean(&self) -> f64 {
        self.values.iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// Number of altered pixels, in `[0, width · height]`.
pub fn l0_norm(original: &Image, adversarial: &Image) -> Result<usize> {
    Ok(PerturbationVector::between(original, adversarial, IntensityScale::Unit)?.altered_pixels())
}

/// Per-sample variant of [`l0_norm`], counting altered channel values.
pub fn l0_norm_samples(original: &Image, adversarial: &Image) -> Result<usize> {
    Ok(PerturbationVector::between(original, adversarial, IntensityScale::Unit)?.altered_samples())
}

/// Euclidean distance on the `[0, 1]` scale. No averaging.
pub fn l2_norm(original: &Image, adversarial: &Image) -> Result<f64> {
    Ok(PerturbationVector::between(original, adversarial, IntensityScale::Unit)?.euclidean())
}

/// Largest absolute sample difference on the `[0, 1]` scale.
pub fn linf_norm(original: &Image, adversarial: &Image) -> Result<f64> {
    Ok(PerturbationVector::between(original, adversarial, IntensityScale::Unit)?.max_abs())
}
