use crate::{Error, Result};

use super::{Kernel2D, LumaPlane};

/// How samples outside the plane are synthesized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BorderMode {
    /// Mirror including the edge sample: `x[-1] = x[0]`, `x[-2] = x[1]`.
    #[default]
    Symmetric,
    /// Out-of-range samples are zero.
    Zero,
    /// Clamp to the nearest edge sample.
    Replicate,
    /// Periodic wrap-around.
    Circular,
}

#[inline]
fn resolve(i: isize, n: usize, mode: BorderMode) -> Option<usize> {
    let n_i = n as isize;
    if (0..n_i).contains(&i) {
        return Some(i as usize);
    }
    match mode {
        BorderMode::Zero => None,
        BorderMode::Replicate => Some(i.clamp(0, n_i - 1) as usize),
        BorderMode::Circular => Some(i.rem_euclid(n_i) as usize),
        BorderMode::Symmetric => {
            let period = 2 * n_i;
            let m = i.rem_euclid(period);
            Some(if m < n_i { m } else { period - 1 - m } as usize)
        }
    }
}

/// Same-size 2-D convolution (kernel flipped) with the given border mode.
///
/// The kernel must have odd sides and may not exceed twice the smaller plane
/// dimension.
pub fn convolve(plane: &LumaPlane, k: &Kernel2D, border: BorderMode) -> Result<LumaPlane> {
    if k.width().is_multiple_of(2) || k.height().is_multiple_of(2) {
        return Err(Error::InvalidKernel(format!(
            "same-size convolution needs odd sides, got {}x{}",
            k.width(),
            k.height()
        )));
    }
    let limit = 2 * plane.width().min(plane.height());
    if k.width().max(k.height()) > limit {
        return Err(Error::InvalidKernel(format!(
            "{}x{} kernel does not fit a {}x{} plane",
            k.width(),
            k.height(),
            plane.width(),
            plane.height()
        )));
    }
    if let Some((col, row)) = k.factors() {
        let row_flipped: Vec<f64> = row.iter().rev().copied().collect();
        let col_flipped: Vec<f64> = col.iter().rev().copied().collect();
        let tmp = pass_same(plane, &row_flipped, Axis::X, border);
        return Ok(pass_same(&tmp, &col_flipped, Axis::Y, border));
    }

    let (w, h) = (plane.width(), plane.height());
    let (kw, kh) = (k.width(), k.height());
    let (cx, cy) = ((kw / 2) as isize, (kh / 2) as isize);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for j in 0..kh {
                let Some(sy) = resolve(y as isize + cy - j as isize, h, border) else {
                    continue;
                };
                for i in 0..kw {
                    if let Some(sx) = resolve(x as isize + cx - i as isize, w, border) {
                        acc += k.get(i, j) * plane.get(sx, sy);
                    }
                }
            }
            out.push(acc);
        }
    }
    Ok(LumaPlane::from_raw(w, h, out))
}

/// Correlation restricted to positions where the kernel lies fully inside the
/// plane (the "valid" region). Output is `(w - kw + 1) × (h - kh + 1)`.
pub fn correlate_valid(plane: &LumaPlane, k: &Kernel2D) -> Result<LumaPlane> {
    let (w, h) = (plane.width(), plane.height());
    let (kw, kh) = (k.width(), k.height());
    if kw > w || kh > h {
        return Err(Error::TooSmall(format!(
            "{kw}x{kh} window on a {w}x{h} plane"
        )));
    }
    let (ow, oh) = (w - kw + 1, h - kh + 1);
    if let Some((col, row)) = k.factors() {
        let mut tmp = Vec::with_capacity(ow * h);
        for y in 0..h {
            let line = &plane.data()[y * w..(y + 1) * w];
            for x in 0..ow {
                tmp.push(dot(&line[x..x + kw], row));
            }
        }
        let mut out = vec![0.0; ow * oh];
        for (j, &cj) in col.iter().enumerate() {
            for y in 0..oh {
                let src = &tmp[(y + j) * ow..(y + j + 1) * ow];
                let dst = &mut out[y * ow..(y + 1) * ow];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += cj * s;
                }
            }
        }
        return Ok(LumaPlane::from_raw(ow, oh, out));
    }
    let mut out = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for j in 0..kh {
                let line = &plane.data()[(y + j) * w + x..(y + j) * w + x + kw];
                acc += dot(line, &k.weights()[j * kw..(j + 1) * kw]);
            }
            out.push(acc);
        }
    }
    Ok(LumaPlane::from_raw(ow, oh, out))
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

// One-dimensional correlation with `taps` along `axis`, same-size output.
fn pass_same(plane: &LumaPlane, taps: &[f64], axis: Axis, border: BorderMode) -> LumaPlane {
    let (w, h) = (plane.width(), plane.height());
    let r = (taps.len() / 2) as isize;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &tap) in taps.iter().enumerate() {
                let off = t as isize - r;
                let v = match axis {
                    Axis::X => resolve(x as isize + off, w, border).map(|sx| plane.get(sx, y)),
                    Axis::Y => resolve(y as isize + off, h, border).map(|sy| plane.get(x, sy)),
                };
                if let Some(v) = v {
                    acc += tap * v;
                }
            }
            out.push(acc);
        }
    }
    LumaPlane::from_raw(w, h, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::gaussian_window;

    #[test]
    fn identity_kernel() {
        let p = LumaPlane::from_fn(4, 3, |x, y| (x * 10 + y) as f64);
        let out = convolve(&p, &Kernel2D::identity(), BorderMode::Symmetric).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn dc_preserved() {
        let p = LumaPlane::constant(9, 6, 37.5);
        let k = gaussian_window(5, 1.0).unwrap();
        for mode in [
            BorderMode::Symmetric,
            BorderMode::Replicate,
            BorderMode::Circular,
        ] {
            let out = convolve(&p, &k, mode).unwrap();
            assert!(out.data().iter().all(|v| (v - 37.5).abs() < 1e-12));
        }
    }

    #[test]
    fn symmetric_reflection_indices() {
        assert_eq!(resolve(-1, 5, BorderMode::Symmetric), Some(0));
        assert_eq!(resolve(-2, 5, BorderMode::Symmetric), Some(1));
        assert_eq!(resolve(5, 5, BorderMode::Symmetric), Some(4));
        assert_eq!(resolve(6, 5, BorderMode::Symmetric), Some(3));
        assert_eq!(resolve(-1, 5, BorderMode::Zero), None);
        assert_eq!(resolve(-1, 5, BorderMode::Circular), Some(4));
    }

    #[test]
    fn oversized_kernel_rejected() {
        let p = LumaPlane::constant(3, 3, 1.0);
        let k = gaussian_window(7, 1.0).unwrap();
        assert!(convolve(&p, &k, BorderMode::Symmetric).is_err());
    }

    #[test]
    fn valid_region_size() {
        let p = LumaPlane::constant(20, 15, 2.0);
        let out = correlate_valid(&p, &gaussian_window(11, 1.5).unwrap()).unwrap();
        assert_eq!((out.width(), out.height()), (10, 5));
        assert!(out.data().iter().all(|v| (v - 2.0).abs() < 1e-12));
        assert!(correlate_valid(
            &LumaPlane::constant(5, 20, 0.0),
            &gaussian_window(11, 1.5).unwrap()
        )
        .is_err());
    }
}
