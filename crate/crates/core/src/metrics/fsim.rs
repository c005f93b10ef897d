use std::f64::consts::PI;

use serde::Serialize;

use super::color::{mix, rgb_planes, YIQ_I, YIQ_Q, YIQ_Y};
use super::log_gabor::{LogGaborBank, LogGaborParams};
use super::{similarity, Constants, FsimConstants};
use crate::image::{convolve, dft2, ifft2_complex, BorderMode, Kernel2D};
use crate::{Error, Image, LumaPlane, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FsimResult {
    pub fsim: f64,
    pub fsimc: f64,
}

/// Feature similarity: phase congruency and gradient magnitude similarity,
/// pooled with the larger phase congruency as weight. `fsimc` multiplies in
/// the YIQ chroma similarities.
pub fn fsim(reference: &Image, distorted: &Image, c: &Constants) -> Result<FsimResult> {
    reference.check_same_shape(distorted)?;
    let p = &c.fsim;
    let f = downsample_factor(reference.width(), reference.height());
    let prep = |img: &Image| -> Result<[LumaPlane; 3]> {
        let rgb = rgb_planes(img)?;
        Ok([YIQ_Y, YIQ_I, YIQ_Q].map(|w| box_decimate(&mix(&rgb, w), f)))
    };
    let [y1, i1, q1] = prep(reference)?;
    let [y2, i2, q2] = prep(distorted)?;
    if y1.width() < 3 || y1.height() < 3 {
        return Err(Error::TooSmall(format!(
            "{}x{} after downsampling; FSIM needs 3x3",
            y1.width(),
            y1.height()
        )));
    }

    let pc1 = phase_congruency(&y1, p);
    let pc2 = phase_congruency(&y2, p);
    let g1 = scharr_magnitude(&y1)?;
    let g2 = scharr_magnitude(&y2)?;

    let (mut num, mut num_c, mut den) = (0.0, 0.0, 0.0);
    let (mut plain, mut plain_c) = (0.0, 0.0);
    for k in 0..pc1.len() {
        let (a, b) = (pc1[k], pc2[k]);
        let s = similarity(a, b, p.t1) * similarity(g1.data()[k], g2.data()[k], p.t2);
        let chroma = similarity(i1.data()[k], i2.data()[k], p.t3)
            * similarity(q1.data()[k], q2.data()[k], p.t4);
        // Negative chroma products have no real power; keep the real part.
        let chroma = if chroma >= 0.0 {
            chroma.powf(p.lambda)
        } else {
            (-chroma).powf(p.lambda) * (PI * p.lambda).cos()
        };
        let w = a.max(b);
        num += s * w;
        num_c += s * chroma * w;
        den += w;
        plain += s;
        plain_c += s * chroma;
    }
    let (fsim, fsimc) = if den > 0.0 {
        (num / den, num_c / den)
    } else {
        let n = pc1.len() as f64;
        (plain / n, plain_c / n)
    };
    Ok(FsimResult { fsim, fsimc })
}

pub(crate) fn downsample_factor(width: usize, height: usize) -> usize {
    ((width.min(height) as f64 / 256.0).round() as usize).max(1)
}

/// `f × f` mean filter with zero padding ("same" alignment) followed by
/// keeping every `f`-th sample from the origin.
pub(crate) fn box_decimate(plane: &LumaPlane, f: usize) -> LumaPlane {
    if f == 1 {
        return plane.clone();
    }
    let (w, h) = (plane.width(), plane.height());
    let half = f / 2;
    let at = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            plane.get(x as usize, y as usize)
        }
    };
    let (ow, oh) = (w.div_ceil(f), h.div_ceil(f));
    LumaPlane::from_fn(ow, oh, |ox, oy| {
        let (cx, cy) = ((ox * f + half) as isize, (oy * f + half) as isize);
        let mut s = 0.0;
        for dy in 0..f as isize {
            for dx in 0..f as isize {
                s += at(cx - dx, cy - dy);
            }
        }
        s / (f * f) as f64
    })
}

/// Scharr gradient magnitude with taps scaled by 1/16 and zero padding.
pub(crate) fn scharr_magnitude(plane: &LumaPlane) -> Result<LumaPlane> {
    let kx = Kernel2D::new(
        3,
        3,
        [3.0, 0.0, -3.0, 10.0, 0.0, -10.0, 3.0, 0.0, -3.0]
            .iter()
            .map(|v| v / 16.0)
            .collect(),
    )?;
    let ky = kx.transpose();
    let gx = convolve(plane, &kx, BorderMode::Zero)?;
    let gy = convolve(plane, &ky, BorderMode::Zero)?;
    Ok(gx.zip_map(&gy, f64::hypot))
}

fn median(mut v: Vec<f64>) -> f64 {
    let n = v.len();
    let mid = n / 2;
    let (_, &mut upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let lower = v[..mid].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Phase congruency with per-orientation noise compensation.
///
/// The noise energy threshold is estimated from the median response of the
/// smallest scale, assuming Rayleigh-distributed noise amplitude.
pub(crate) fn phase_congruency(plane: &LumaPlane, p: &FsimConstants) -> Vec<f64> {
    let (w, h) = (plane.width(), plane.height());
    let n = w * h;
    let bank = LogGaborBank::new(
        w,
        h,
        &LogGaborParams {
            scales: p.scales,
            orientations: p.orientations,
            min_wavelength: p.min_wavelength,
            mult: p.mult,
            sigma_on_f: p.sigma_on_f,
            d_theta_on_sigma: p.d_theta_on_sigma,
        },
    );
    let spectrum = dft2(plane);
    let mut energy_all = vec![0.0; n];
    let mut an_all = vec![0.0; n];

    for o in 0..p.orientations {
        let responses: Vec<_> = (0..p.scales)
            .map(|s| bank.respond(&spectrum, s, o))
            .collect();
        let mut sum_e = vec![0.0; n];
        let mut sum_o = vec![0.0; n];
        for eo in &responses {
            for i in 0..n {
                sum_e[i] += eo[i].re;
                sum_o[i] += eo[i].im;
                an_all[i] += eo[i].norm();
            }
        }
        let mut energy = vec![0.0; n];
        for i in 0..n {
            let x = sum_e[i].hypot(sum_o[i]) + p.epsilon;
            let (me, mo) = (sum_e[i] / x, sum_o[i] / x);
            for eo in &responses {
                let (e, od) = (eo[i].re, eo[i].im);
                energy[i] += e * me + od * mo - (e * mo - od * me).abs();
            }
        }

        // Noise statistics.
        let em_n: f64 = bank.filter(0, o).iter().map(|f| f * f).sum();
        let median_e2n = median(responses[0].iter().map(|c| c.norm_sqr()).collect());
        let mean_e2n = -median_e2n / 0.5f64.ln();
        let noise_power = mean_e2n / em_n;

        let spatial: Vec<Vec<f64>> = (0..p.scales)
            .map(|s| {
                let mut buf: Vec<_> = bank
                    .filter(s, o)
                    .iter()
                    .map(|&f| rustfft::num_complex::Complex64::new(f, 0.0))
                    .collect();
                ifft2_complex(w, h, &mut buf);
                let k = (n as f64).sqrt();
                buf.iter().map(|c| c.re * k).collect()
            })
            .collect();
        let mut sum_an2 = 0.0;
        let mut sum_aiaj = 0.0;
        for i in 0..n {
            for (si, band) in spatial.iter().enumerate() {
                let a = band[i];
                sum_an2 += a * a;
                sum_aiaj += a * spatial[si + 1..].iter().map(|b| b[i]).sum::<f64>();
            }
        }
        let noise_energy2 = 2.0 * noise_power * sum_an2 + 4.0 * noise_power * sum_aiaj;
        let tau = (noise_energy2 / 2.0).max(0.0).sqrt();
        let noise_mean = tau * (PI / 2.0).sqrt();
        let noise_sigma = ((2.0 - PI / 2.0) * tau * tau).sqrt();
        let t = (noise_mean + p.noise_k * noise_sigma) / 1.7;
        for i in 0..n {
            energy_all[i] += (energy[i] - t).max(0.0);
        }
    }
    energy_all
        .iter()
        .zip(&an_all)
        .map(|(&e, &a)| if a > 0.0 { e / a } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: usize, h: usize, seed: u64) -> Image {
        let mut s = seed;
        Image::from_fn(w, h, 3, |x, y, c| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let noise = (s >> 59) as f64;
            let base = 128.0 + 60.0 * ((x as f64 / 5.0).sin() * (y as f64 / 7.0).cos());
            (base + noise * 2.0 + c as f64 * 9.0).clamp(0.0, 255.0) as u8
        })
        .unwrap()
    }

    #[test]
    fn identical_is_one() {
        let img = textured(40, 36, 1);
        let r = fsim(&img, &img, &Constants::default()).unwrap();
        assert_eq!(r.fsim, 1.0);
        assert_eq!(r.fsimc, 1.0);
    }

    #[test]
    fn distortion_lowers_score() {
        let a = textured(48, 48, 2);
        let b = Image::from_fn(48, 48, 3, |x, y, c| {
            let v = a.get(x, y, c) as i32 + if (x / 3 + y / 3) % 2 == 0 { 25 } else { -25 };
            v.clamp(0, 255) as u8
        })
        .unwrap();
        let r = fsim(&a, &b, &Constants::default()).unwrap();
        assert!(r.fsim < 0.99 && r.fsim > 0.0, "{r:?}");
        assert!(r.fsimc <= r.fsim + 1e-12);
    }

    #[test]
    fn phase_congruency_in_unit_range() {
        let img = textured(32, 32, 3);
        let y = mix(&rgb_planes(&img).unwrap(), YIQ_Y);
        let pc = phase_congruency(&y, &Constants::default().fsim);
        assert!(pc.iter().all(|&v| (0.0..=1.0 + 1e-9).contains(&v)));
        assert!(pc.iter().any(|&v| v > 0.0));
    }

    #[test]
    fn box_decimate_matches_direct_average() {
        let p = LumaPlane::from_fn(7, 5, |x, y| (x * 3 + y * 11) as f64);
        let d = box_decimate(&p, 2);
        assert_eq!((d.width(), d.height()), (4, 3));
        // Output (0,0) averages input rows/cols 0..=1.
        assert_eq!(d.get(0, 0), (0.0 + 3.0 + 11.0 + 14.0) / 4.0);
        // Last column reaches past the edge and averages in zeros.
        assert_eq!(d.get(3, 0), (18.0 + 29.0) / 4.0);
        assert_eq!(downsample_factor(299, 299), 1);
        assert_eq!(downsample_factor(512, 700), 2);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 3.0, 2.0]), 2.5);
    }
}
