//! Real steerable pyramid built in the frequency domain.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::csf::centered_bin;
use crate::image::{dft2, ifft2_complex};
use crate::LumaPlane;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Raised-cosine radial transition of one octave width centred at `pos`
/// (log2 frequency): returns `(high, low)` with `high² + low² = 1`.
fn transition(log_rad: f64, pos: f64) -> (f64, f64) {
    let t = (log_rad - pos).clamp(-0.5, 0.5);
    let x = PI / 2.0 * t - PI / 4.0;
    (x.cos(), x.sin().abs())
}

/// Oriented band-pass subbands, `[level][orientation]`, finest level first.
///
/// Level `l` (0-based) has sides `⌈n / 2^l⌉`. Frequencies are measured on the
/// grid of the input, normalized so that the Nyquist limit sits at 1.
pub(crate) fn steerable_bands(
    plane: &LumaPlane,
    levels: usize,
    orientations: usize,
) -> Vec<Vec<LumaPlane>> {
    let (w0, h0) = (plane.width(), plane.height());
    let order = orientations - 1;
    let amp = (2f64.powi(2 * order as i32) * factorial(order).powi(2)
        / (orientations as f64 * factorial(2 * order)))
    .sqrt();
    let phase = Complex64::new(0.0, -1.0).powu(order as u32);
    let dc_log_rad = (1.0 / (w0 as f64 / 2.0)).log2();

    // Polar coordinates of a bin, relative to the input grid.
    let polar = |u: usize, v: usize, w: usize, h: usize| {
        let x = centered_bin(u, w) / (w0 as f64 / 2.0);
        let y = centered_bin(v, h) / (h0 as f64 / 2.0);
        let r = x.hypot(y);
        let lr = if r == 0.0 { dc_log_rad } else { r.log2() };
        (lr, y.atan2(x))
    };

    let mut dft = dft2(plane).data;
    for v in 0..h0 {
        for u in 0..w0 {
            let (lr, _) = polar(u, v, w0, h0);
            dft[v * w0 + u] *= transition(lr, -0.5).1;
        }
    }
    let (mut w, mut h) = (w0, h0);
    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        let pos = -1.5 - level as f64;
        let mut bands = Vec::with_capacity(orientations);
        for o in 0..orientations {
            let theta = PI * o as f64 / orientations as f64;
            let mut buf: Vec<Complex64> = (0..w * h)
                .map(|i| {
                    let (lr, angle) = polar(i % w, i / w, w, h);
                    let mask =
                        transition(lr, pos).0 * amp * (angle - theta).cos().powi(order as i32);
                    dft[i] * mask * phase
                })
                .collect();
            ifft2_complex(w, h, &mut buf);
            bands.push(LumaPlane::from_raw(
                w,
                h,
                buf.iter().map(|c| c.re).collect(),
            ));
        }
        out.push(bands);

        let (nw, nh) = (w.div_ceil(2), h.div_ceil(2));
        let mut next = vec![Complex64::new(0.0, 0.0); nw * nh];
        for v in 0..nh {
            let sy = centered_bin(v, nh) as isize;
            let ov = sy.rem_euclid(h as isize) as usize;
            for u in 0..nw {
                let sx = centered_bin(u, nw) as isize;
                let ou = sx.rem_euclid(w as isize) as usize;
                let (lr, _) = polar(u, v, nw, nh);
                next[v * nw + u] = dft[ov * w + ou] * transition(lr, pos).1;
            }
        }
        dft = next;
        w = nw;
        h = nh;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_is_power_complementary() {
        for i in 0..50 {
            let t = -2.0 + i as f64 * 0.08;
            let (hi, lo) = transition(t, -0.5);
            assert!((hi * hi + lo * lo - 1.0).abs() < 1e-12);
        }
        assert_eq!(transition(0.5, -0.5), (1.0, 0.0));
        assert!(transition(-1.0, -0.5).0.abs() < 1e-12);
    }

    #[test]
    fn shapes_and_orientation_selectivity() {
        // Vertical stripes: energy along x only.
        let p = LumaPlane::from_fn(64, 64, |x, _| (2.0 * PI * x as f64 / 8.0).sin());
        let bands = steerable_bands(&p, 3, 6);
        assert_eq!(bands.len(), 3);
        assert_eq!((bands[1][0].width(), bands[2][0].height()), (32, 16));
        let energy = |b: &LumaPlane| b.data().iter().map(|v| v * v).sum::<f64>();
        // Period 8 is 0.25 of Nyquist: level 1 (0-based) band.
        let e0 = energy(&bands[1][0]);
        let e3 = energy(&bands[1][3]);
        assert!(e0 > 100.0 * (e3 + 1e-12), "{e0} vs {e3}");
    }

    #[test]
    fn constant_input_has_no_band_energy() {
        let p = LumaPlane::constant(64, 48, 5.0);
        for level in steerable_bands(&p, 4, 6) {
            for b in level {
                assert!(b.data().iter().all(|v| v.abs() < 1e-9));
            }
        }
    }
}
