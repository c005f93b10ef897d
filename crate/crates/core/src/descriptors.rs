//! Content-characterization descriptors: spatial information and colourfulness.

use serde::{Deserialize, Serialize};

use crate::image::{gradient_magnitude, to_luminance, GradientOperator, Image, LumaPlane};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContentDescriptor {
    pub stimulus_id: String,
    pub si: f64,
    /// `None` for single-channel content, where colourfulness is undefined.
    pub cf: Option<f64>,
}

impl ContentDescriptor {
    pub fn compute(stimulus_id: impl Into<String>, img: &Image) -> Result<Self> {
        let cf = match colorfulness(img) {
            Ok(v) => Some(v),
            Err(Error::UnsupportedChannels(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            stimulus_id: stimulus_id.into(),
            si: spatial_information(img)?,
            cf,
        })
    }
}

/// Standard deviation of the Sobel gradient magnitude of the luminance plane.
pub fn spatial_information(img: &Image) -> Result<f64> {
    spatial_information_luma(&to_luminance(img)?)
}

pub fn spatial_information_luma(plane: &LumaPlane) -> Result<f64> {
    Ok(gradient_magnitude(plane, GradientOperator::Sobel)?.std_dev())
}

/// Hasler–Süsstrunk colourfulness with population statistics over all pixels.
pub fn colorfulness(img: &Image) -> Result<f64> {
    if img.channels() != 3 {
        return Err(Error::UnsupportedChannels(img.channels()));
    }
    let n = img.pixel_count() as f64;
    let (mut s_rg, mut s_yb) = (0.0, 0.0);
    let opponents = img.samples().chunks_exact(3).map(|p| {
        let (r, g, b) = (f64::from(p[0]), f64::from(p[1]), f64::from(p[2]));
        (r - g, 0.5 * (r + g) - b)
    });
    for (rg, yb) in opponents.clone() {
        s_rg += rg;
        s_yb += yb;
    }
    let (m_rg, m_yb) = (s_rg / n, s_yb / n);
    let (mut v_rg, mut v_yb) = (0.0, 0.0);
    for (rg, yb) in opponents {
        v_rg += (rg - m_rg).powi(2);
        v_yb += (yb - m_yb).powi(2);
    }
    let (v_rg, v_yb) = (v_rg / n, v_yb / n);
    Ok((v_rg + v_yb).sqrt() + 0.3 * (m_rg * m_rg + m_yb * m_yb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rgb(w: usize, h: usize, f: impl Fn(usize, usize) -> [u8; 3]) -> Image {
        let mut s = Vec::with_capacity(w * h * 3);
        for y in 0..h {
            for x in 0..w {
                s.extend(f(x, y));
            }
        }
        Image::new(w, h, 3, s).unwrap()
    }

    #[test]
    fn constant_content() {
        let gray = rgb(9, 7, |_, _| [90, 90, 90]);
        assert_eq!(spatial_information(&gray).unwrap(), 0.0);
        assert_eq!(colorfulness(&gray).unwrap(), 0.0);
    }

    #[test]
    fn pure_red() {
        let red = rgb(5, 5, |_, _| [255, 0, 0]);
        let expected = 0.3 * (255f64.powi(2) + 127.5f64.powi(2)).sqrt();
        assert!((colorfulness(&red).unwrap() - expected).abs() < 1e-9);
        assert!((expected - 85.53).abs() < 5e-3);
    }

    #[test]
    fn grayscale_has_no_cf() {
        let img = Image::new(4, 4, 1, (0..16).map(|v| v as u8 * 10).collect()).unwrap();
        assert!(matches!(
            colorfulness(&img),
            Err(Error::UnsupportedChannels(1))
        ));
        let d = ContentDescriptor::compute("c", &img).unwrap();
        assert!(d.cf.is_none() && d.si > 0.0);
    }

    #[test]
    fn too_small_for_si() {
        let img = Image::new(2, 2, 1, vec![0; 4]).unwrap();
        assert!(spatial_information(&img).is_err());
    }

    #[test]
    fn si_ignores_luminance_offset() {
        let base = LumaPlane::from_fn(12, 10, |x, y| ((x * 7 + y * 3) % 11) as f64 * 9.0);
        let shifted = base.map(|v| v + 37.0);
        let a = spatial_information_luma(&base).unwrap();
        let b = spatial_information_luma(&shifted).unwrap();
        assert!((a - b).abs() < 1e-9 * a.max(1.0));
    }
}
