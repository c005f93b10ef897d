use crate::{Image, Result};

use super::ScoreValue;

/// Peak signal-to-noise ratio in dB over all samples (all channels), peak 255.
pub fn psnr(reference: &Image, distorted: &Image) -> Result<ScoreValue> {
    reference.check_same_shape(distorted)?;
    let sse: f64 = reference
        .samples()
        .iter()
        .zip(distorted.samples())
        .map(|(&a, &b)| {
            let d = f64::from(a) - f64::from(b);
            d * d
        })
        .sum();
    if sse == 0.0 {
        return Ok(ScoreValue::UnboundedPerfect);
    }
    let mse = sse / reference.samples().len() as f64;
    Ok(ScoreValue::Finite(10.0 * (255.0 * 255.0 / mse).log10()))
}
