//! Colour transforms shared by the chroma-aware metrics.

use crate::{Error, Image, LumaPlane, Result};

/// R, G, B planes; single-channel input is replicated.
pub(crate) fn rgb_planes(img: &Image) -> Result<[LumaPlane; 3]> {
    match img.channels() {
        1 => {
            let p = img.channel_plane(0);
            Ok([p.clone(), p.clone(), p])
        }
        3 => Ok([
            img.channel_plane(0),
            img.channel_plane(1),
            img.channel_plane(2),
        ]),
        n => Err(Error::UnsupportedChannels(n)),
    }
}

/// Per-pixel `w[0]·R + w[1]·G + w[2]·B`.
pub(crate) fn mix(rgb: &[LumaPlane; 3], w: [f64; 3]) -> LumaPlane {
    let [r, g, b] = rgb;
    let data = r
        .data()
        .iter()
        .zip(g.data())
        .zip(b.data())
        .map(|((&r, &g), &b)| w[0] * r + w[1] * g + w[2] * b)
        .collect();
    LumaPlane::from_raw(r.width(), r.height(), data)
}

pub(crate) const YIQ_Y: [f64; 3] = [0.299, 0.587, 0.114];
pub(crate) const YIQ_I: [f64; 3] = [0.596, -0.274, -0.322];
pub(crate) const YIQ_Q: [f64; 3] = [0.211, -0.523, 0.312];

pub(crate) const LMN_L: [f64; 3] = [0.06, 0.63, 0.27];
pub(crate) const LMN_M: [f64; 3] = [0.30, 0.04, -0.35];
pub(crate) const LMN_N: [f64; 3] = [0.34, -0.60, 0.17];

fn srgb_linear(v: f64) -> f64 {
    let c = v / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const EPSILON: f64 = 0.008856;
    const KAPPA: f64 = 903.3;
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

/// 8-bit sRGB to CIELAB against the D50 white point.
pub(crate) fn srgb_to_lab(r: f64, g: f64, b: f64) -> [f64; 3] {
    let (r, g, b) = (srgb_linear(r), srgb_linear(g), srgb_linear(b));
    let x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    let (fx, fy, fz) = (lab_f(x / 0.9642), lab_f(y), lab_f(z / 0.8251));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lab_endpoints() {
        let black = srgb_to_lab(0.0, 0.0, 0.0);
        assert!(black.iter().all(|v| v.abs() < 1e-12));
        let white = srgb_to_lab(255.0, 255.0, 255.0);
        assert!((white[0] - 100.0).abs() < 0.05);
        let red = srgb_to_lab(255.0, 0.0, 0.0);
        assert!(red[1] > 60.0 && red[2] > 40.0);
    }

    #[test]
    fn gray_has_no_yiq_chroma() {
        let img = Image::new(2, 1, 1, vec![40, 200]).unwrap();
        let rgb = rgb_planes(&img).unwrap();
        let i = mix(&rgb, YIQ_I);
        assert!(i.data().iter().all(|v| v.abs() < 1e-12));
        assert!((mix(&rgb, YIQ_Y).data()[1] - 200.0).abs() < 1e-12);
    }
}
