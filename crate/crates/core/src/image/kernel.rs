use crate::{Error, Result};

/// 2-D filter kernel, row-major. Same-size convolution needs odd sides;
/// valid-region correlation accepts any size.
///
/// Kernels built from an outer product keep their 1-D factors so that
/// filtering can run as two passes.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel2D {
    width: usize,
    height: usize,
    weights: Vec<f64>,
    factors: Option<(Vec<f64>, Vec<f64>)>,
}

impl Kernel2D {
    pub fn new(width: usize, height: usize, weights: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidKernel(format!(
                "empty {width}x{height} kernel"
            )));
        }
        if weights.len() != width * height {
            return Err(Error::InvalidKernel(format!(
                "{} weights for {width}x{height}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidKernel("non-finite weight".into()));
        }
        Ok(Self {
            width,
            height,
            weights,
            factors: None,
        })
    }

    /// Outer product `column ⊗ row`: weight(x, y) = column[y] · row[x].
    pub fn separable(column: Vec<f64>, row: Vec<f64>) -> Result<Self> {
        let weights = column
            .iter()
            .flat_map(|&c| row.iter().map(move |&r| c * r))
            .collect();
        let mut k = Self::new(row.len(), column.len(), weights)?;
        k.factors = Some((column, row));
        Ok(k)
    }

    pub fn identity() -> Self {
        Self::separable(vec![1.0], vec![1.0]).expect("1x1 kernel")
    }

    /// Normalized `size × size` box filter.
    pub fn box_filter(size: usize) -> Result<Self> {
        let w = vec![1.0 / size as f64; size];
        Self::separable(w.clone(), w)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.weights[y * self.width + x]
    }

    pub(crate) fn factors(&self) -> Option<(&[f64], &[f64])> {
        self.factors
            .as_ref()
            .map(|(c, r)| (c.as_slice(), r.as_slice()))
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Same kernel scaled by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            weights: self.weights.iter().map(|w| w * s).collect(),
            factors: self
                .factors
                .as_ref()
                .map(|(c, r)| (c.iter().map(|v| v * s).collect(), r.clone())),
        }
    }

    pub fn transpose(&self) -> Self {
        let weights = (0..self.width)
            .flat_map(|x| (0..self.height).map(move |y| (x, y)))
            .map(|(x, y)| self.get(x, y))
            .collect();
        Self {
            width: self.height,
            height: self.width,
            weights,
            factors: self.factors.as_ref().map(|(c, r)| (r.clone(), c.clone())),
        }
    }
}

/// Normalized circular Gaussian window of odd `size` taps.
pub fn gaussian_window(size: usize, sigma: f64) -> Result<Kernel2D> {
    if size.is_multiple_of(2) {
        return Err(Error::InvalidKernel(format!("window size {size} is even")));
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidKernel(format!(
            "sigma {sigma} must be positive"
        )));
    }
    let r = (size / 2) as f64;
    let g: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - r;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = g.iter().sum();
    let g: Vec<f64> = g.into_iter().map(|v| v / s).collect();
    Kernel2D::separable(g.clone(), g)
}
