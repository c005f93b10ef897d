use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::LumaPlane;

/// Unnormalized 2-D spectrum, row-major, DC at index 0.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub width: usize,
    pub height: usize,
    pub data: Vec<Complex64>,
}

impl Spectrum {
    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Complex64 {
        self.data[v * self.width + u]
    }

    /// Inverse transform scaled by `1 / (width · height)`; the imaginary
    /// residue is discarded.
    pub fn inverse_real(&self) -> LumaPlane {
        let mut buf = self.data.clone();
        ifft2_complex(self.width, self.height, &mut buf);
        LumaPlane::from_raw(
            self.width,
            self.height,
            buf.into_iter().map(|c| c.re).collect(),
        )
    }

    /// Pointwise product with a real frequency response of the same layout.
    pub fn filtered(&self, response: &[f64]) -> Spectrum {
        assert_eq!(response.len(), self.data.len());
        Spectrum {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(response).map(|(c, r)| c * r).collect(),
        }
    }
}

/// Forward 2-D DFT of a real plane, no normalization.
pub fn dft2(plane: &LumaPlane) -> Spectrum {
    let mut data: Vec<Complex64> = plane
        .data()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft2_complex(plane.width(), plane.height(), &mut data);
    Spectrum {
        width: plane.width(),
        height: plane.height(),
        data,
    }
}

/// In-place forward 2-D FFT of row-major complex data.
pub fn fft2_complex(width: usize, height: usize, data: &mut [Complex64]) {
    transform(width, height, data, false);
}

/// In-place inverse 2-D FFT including the `1 / (width · height)` factor.
pub fn ifft2_complex(width: usize, height: usize, data: &mut [Complex64]) {
    transform(width, height, data, true);
    let s = 1.0 / (width * height) as f64;
    for c in data.iter_mut() {
        *c *= s;
    }
}

fn transform(width: usize, height: usize, data: &mut [Complex64], inverse: bool) {
    assert_eq!(data.len(), width * height);
    let mut planner = FftPlanner::new();
    let (row_fft, col_fft) = if inverse {
        (
            planner.plan_fft_inverse(width),
            planner.plan_fft_inverse(height),
        )
    } else {
        (
            planner.plan_fft_forward(width),
            planner.plan_fft_forward(height),
        )
    };
    for row in data.chunks_exact_mut(width) {
        row_fft.process(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); height];
    for x in 0..width {
        for (y, c) in column.iter_mut().enumerate() {
            *c = data[y * width + x];
        }
        col_fft.process(&mut column);
        for (y, c) in column.iter().enumerate() {
            data[y * width + x] = *c;
        }
    }
}
