use crate::{Error, Result};

use super::Image;

/// BT.601 luma weights for (R, G, B). One constant for the whole project.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Real-valued single-channel plane on the 0–255 scale, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LumaPlane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl LumaPlane {
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions(format!("{width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::InvalidDimensions(format!(
                "{} samples for a {width}x{height} plane",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("plane samples".into()));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    // Internal constructor for arithmetic results; skips the finiteness scan.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn same_dims(&self, other: &LumaPlane) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> LumaPlane {
        Self::from_raw(
            self.width,
            self.height,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Elementwise combination of two planes of equal size.
    pub fn zip_map(&self, other: &LumaPlane, f: impl Fn(f64, f64) -> f64) -> LumaPlane {
        assert!(self.same_dims(other), "zip_map on planes of different size");
        Self::from_raw(
            self.width,
            self.height,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.data.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.data.len() as f64
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Sub-rectangle starting at `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> LumaPlane {
        assert!(x0 + width <= self.width && y0 + height <= self.height);
        Self::from_fn(width, height, |x, y| self.get(x0 + x, y0 + y))
    }

    /// Keeps every `step`-th sample in both directions, starting at `(offset, offset)`.
    pub fn decimate(&self, step: usize, offset: usize) -> LumaPlane {
        let w = (self.width - offset).div_ceil(step);
        let h = (self.height - offset).div_ceil(step);
        Self::from_fn(w, h, |x, y| self.get(offset + x * step, offset + y * step))
    }

    pub fn transpose(&self) -> LumaPlane {
        Self::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }
}

/// Converts to luminance with [`LUMA_WEIGHTS`]; single-channel input is copied.
pub fn to_luminance(img: &Image) -> Result<LumaPlane> {
    let data = match img.channels() {
        1 => img.samples().iter().map(|&v| f64::from(v)).collect(),
        3 => img
            .samples()
            .chunks_exact(3)
            .map(|p| {
                LUMA_WEIGHTS[0] * f64::from(p[0])
                    + LUMA_WEIGHTS[1] * f64::from(p[1])
                    + LUMA_WEIGHTS[2] * f64::from(p[2])
            })
            .collect(),
        n => return Err(Error::UnsupportedChannels(n)),
    };
    Ok(LumaPlane::from_raw(img.width(), img.height(), data))
}

/// Halves both dimensions by 2×2 block averaging; an odd trailing row or
/// column is dropped.
pub fn downsample2(plane: &LumaPlane) -> Result<LumaPlane> {
    if plane.width() < 2 || plane.height() < 2 {
        return Err(Error::TooSmall(format!(
            "downsample2 needs at least 2x2, got {}x{}",
            plane.width(),
            plane.height()
        )));
    }
    let (w, h) = (plane.width() / 2, plane.height() / 2);
    Ok(LumaPlane::from_fn(w, h, |x, y| {
        let (sx, sy) = (2 * x, 2 * y);
        0.25 * (plane.get(sx, sy)
            + plane.get(sx + 1, sy)
            + plane.get(sx, sy + 1)
            + plane.get(sx + 1, sy + 1))
    }))
}
