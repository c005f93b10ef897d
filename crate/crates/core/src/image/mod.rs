//! Raster decoding, luminance conversion and shared DSP primitives.

mod filter;
mod gradient;
mod kernel;
mod luma;
mod raster;
mod spectrum;

pub use filter::{convolve, correlate_valid, BorderMode};
pub use gradient::{gradient_magnitude, GradientOperator};
pub use kernel::{gaussian_window, Kernel2D};
pub use luma::{downsample2, to_luminance, LumaPlane, LUMA_WEIGHTS};
pub use raster::{decode_image, load_image, Image};
pub use spectrum::{dft2, fft2_complex, ifft2_complex, Spectrum};
