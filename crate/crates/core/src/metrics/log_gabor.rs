//! Frequency-domain log-Gabor filter bank with Gaussian angular spread.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::csf::centered_bin;
use crate::image::{ifft2_complex, Spectrum};

#[derive(Clone, Copy, Debug)]
pub(crate) struct LogGaborParams {
    pub scales: usize,
    pub orientations: usize,
    pub min_wavelength: f64,
    pub mult: f64,
    pub sigma_on_f: f64,
    pub d_theta_on_sigma: f64,
}

/// Filters in unshifted DFT layout, indexed `[orientation][scale]`.
pub(crate) struct LogGaborBank {
    pub width: usize,
    pub height: usize,
    filters: Vec<Vec<Vec<f64>>>,
}

/// Normalized frequency coordinates in `[-0.5, 0.5]`; odd axes are divided by
/// `n − 1` so both ends reach ±0.5.
fn axis_coord(k: usize, n: usize) -> f64 {
    let denom = if n % 2 == 1 { (n - 1).max(1) } else { n } as f64;
    centered_bin(k, n) / denom
}

impl LogGaborBank {
    pub fn new(width: usize, height: usize, p: &LogGaborParams) -> Self {
        let n = width * height;
        let mut radius = vec![0.0; n];
        let mut sin_t = vec![0.0; n];
        let mut cos_t = vec![0.0; n];
        let mut lowpass = vec![0.0; n];
        for v in 0..height {
            let y = axis_coord(v, height);
            for u in 0..width {
                let x = axis_coord(u, width);
                let i = v * width + u;
                let r = x.hypot(y);
                // Butterworth low-pass, cutoff 0.45, order 15.
                lowpass[i] = 1.0 / (1.0 + (r / 0.45).powi(30));
                let theta = (-y).atan2(x);
                sin_t[i] = theta.sin();
                cos_t[i] = theta.cos();
                radius[i] = r;
            }
        }
        radius[0] = 1.0;

        let log_sigma2 = 2.0 * p.sigma_on_f.ln().powi(2);
        let radial: Vec<Vec<f64>> = (0..p.scales)
            .map(|s| {
                let fo = 1.0 / (p.min_wavelength * p.mult.powi(s as i32));
                let mut g: Vec<f64> = radius
                    .iter()
                    .zip(&lowpass)
                    .map(|(&r, &lp)| (-(r / fo).ln().powi(2) / log_sigma2).exp() * lp)
                    .collect();
                g[0] = 0.0;
                g
            })
            .collect();

        let theta_sigma = PI / p.orientations as f64 / p.d_theta_on_sigma;
        let filters = (0..p.orientations)
            .map(|o| {
                let angle = o as f64 * PI / p.orientations as f64;
                let (sa, ca) = angle.sin_cos();
                let spread: Vec<f64> = (0..n)
                    .map(|i| {
                        let ds = sin_t[i] * ca - cos_t[i] * sa;
                        let dc = cos_t[i] * ca + sin_t[i] * sa;
                        let dtheta = ds.atan2(dc).abs();
                        (-dtheta * dtheta / (2.0 * theta_sigma * theta_sigma)).exp()
                    })
                    .collect();
                radial
                    .iter()
                    .map(|g| g.iter().zip(&spread).map(|(a, b)| a * b).collect())
                    .collect()
            })
            .collect();
        Self {
            width,
            height,
            filters,
        }
    }

    pub fn filter(&self, scale: usize, orientation: usize) -> &[f64] {
        &self.filters[orientation][scale]
    }

    /// Complex spatial response (even part real, odd part imaginary).
    pub fn respond(&self, spectrum: &Spectrum, scale: usize, orientation: usize) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = spectrum
            .data
            .iter()
            .zip(self.filter(scale, orientation))
            .map(|(c, &f)| c * f)
            .collect();
        ifft2_complex(self.width, self.height, &mut buf);
        buf
    }
}
