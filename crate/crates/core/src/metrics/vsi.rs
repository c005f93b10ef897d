use super::color::{mix, rgb_planes, srgb_to_lab, LMN_L, LMN_M, LMN_N};
use super::csf::centered_bin;
use super::fsim::{box_decimate, downsample_factor, scharr_magnitude};
use super::{similarity, Constants, VsiConstants};
use crate::image::dft2;
use crate::{Error, Image, LumaPlane, Result};

/// Visual-saliency-induced index: saliency, gradient and LMN chroma
/// similarities, pooled with the larger saliency as weight.
pub fn vsi(reference: &Image, distorted: &Image, c: &Constants) -> Result<f64> {
    reference.check_same_shape(distorted)?;
    let p = &c.vsi;
    let f = downsample_factor(reference.width(), reference.height());
    let prep = |img: &Image| -> Result<[LumaPlane; 4]> {
        let rgb = rgb_planes(img)?;
        let vs = saliency(&rgb, p);
        Ok([
            box_decimate(&vs, f),
            box_decimate(&mix(&rgb, LMN_L), f),
            box_decimate(&mix(&rgb, LMN_M), f),
            box_decimate(&mix(&rgb, LMN_N), f),
        ])
    };
    let [vs1, l1, m1, n1] = prep(reference)?;
    let [vs2, l2, m2, n2] = prep(distorted)?;
    if l1.width() < 3 || l1.height() < 3 {
        return Err(Error::TooSmall(
            "VSI needs at least 3x3 after downsampling".into(),
        ));
    }
    let g1 = scharr_magnitude(&l1)?;
    let g2 = scharr_magnitude(&l2)?;

    let (mut num, mut den, mut plain) = (0.0, 0.0, 0.0);
    for k in 0..l1.len() {
        let (s1, s2) = (vs1.data()[k], vs2.data()[k]);
        let chroma = similarity(m1.data()[k], m2.data()[k], p.c_chroma)
            * similarity(n1.data()[k], n2.data()[k], p.c_chroma);
        let chroma = if chroma >= 0.0 {
            chroma.powf(p.lambda)
        } else {
            (-chroma).powf(p.lambda) * (std::f64::consts::PI * p.lambda).cos()
        };
        let s = similarity(s1, s2, p.c_vs)
            * similarity(g1.data()[k], g2.data()[k], p.c_gm).powf(p.alpha)
            * chroma;
        let w = s1.max(s2);
        num += s * w;
        den += w;
        plain += s;
    }
    Ok(if den > 0.0 {
        num / den
    } else {
        plain / l1.len() as f64
    })
}

/// Bilinear resampling with pixel-centre alignment and edge clamping.
fn resize_bilinear(plane: &LumaPlane, width: usize, height: usize) -> LumaPlane {
    let (w, h) = (plane.width(), plane.height());
    let map = |o: usize, n_in: usize, n_out: usize| {
        let u = ((o as f64 + 0.5) * n_in as f64 / n_out as f64 - 0.5).clamp(0.0, (n_in - 1) as f64);
        let i0 = u.floor() as usize;
        let i1 = (i0 + 1).min(n_in - 1);
        (i0, i1, u - i0 as f64)
    };
    let cols: Vec<_> = (0..width).map(|x| map(x, w, width)).collect();
    let rows: Vec<_> = (0..height).map(|y| map(y, h, height)).collect();
    LumaPlane::from_fn(width, height, |x, y| {
        let (x0, x1, fx) = cols[x];
        let (y0, y1, fy) = rows[y];
        let top = plane.get(x0, y0) * (1.0 - fx) + plane.get(x1, y0) * fx;
        let bottom = plane.get(x0, y1) * (1.0 - fx) + plane.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    })
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Saliency from frequency, centre and warm-colour priors, rescaled to [0, 1].
///
/// A map without any spread (e.g. achromatic content, where the colour prior
/// vanishes) becomes uniformly 1 so pooling degenerates to a plain mean.
pub(crate) fn saliency(rgb: &[LumaPlane; 3], p: &VsiConstants) -> LumaPlane {
    let (ow, oh) = (rgb[0].width(), rgb[0].height());
    let s = p.saliency_size;
    let small = rgb.clone().map(|c| resize_bilinear(&c, s, s));
    let n = s * s;
    let mut lab = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let v = srgb_to_lab(small[0].data()[i], small[1].data()[i], small[2].data()[i]);
        for (plane, value) in lab.iter_mut().zip(v) {
            plane[i] = value;
        }
    }

    // Band-pass log-Gabor response, isotropic, zero outside radius 0.5.
    let denom = |n: usize| (n - n % 2) as f64;
    let lg: Vec<f64> = (0..n)
        .map(|i| {
            let (u, v) = (i % s, i / s);
            let fx = centered_bin(u, s) / denom(s);
            let fy = centered_bin(v, s) / denom(s);
            let r = fx.hypot(fy);
            if i == 0 || r * r > 0.25 {
                0.0
            } else {
                (-(r / p.omega0).ln().powi(2) / (2.0 * p.sigma_f * p.sigma_f)).exp()
            }
        })
        .collect();
    let mut sf = vec![0.0; n];
    for chan in &lab {
        let plane = LumaPlane::from_raw(s, s, chan.clone());
        let resp = dft2(&plane).filtered(&lg).inverse_real();
        for (acc, v) in sf.iter_mut().zip(resp.data()) {
            *acc += v * v;
        }
    }

    let normalize = |v: &[f64]| -> Vec<f64> {
        let (lo, hi) = min_max(v);
        if hi > lo {
            v.iter().map(|x| (x - lo) / (hi - lo)).collect()
        } else {
            vec![0.0; v.len()]
        }
    };
    let na = normalize(&lab[1]);
    let nb = normalize(&lab[2]);
    let centre = s as f64 / 2.0;
    let vs: Vec<f64> = (0..n)
        .map(|i| {
            let (x, y) = ((i % s + 1) as f64, (i / s + 1) as f64);
            let sd =
                (-((x - centre).powi(2) + (y - centre).powi(2)) / (p.sigma_d * p.sigma_d)).exp();
            let sc = 1.0 - (-(na[i] * na[i] + nb[i] * nb[i]) / (p.sigma_c * p.sigma_c)).exp();
            sf[i].sqrt() * sd * sc
        })
        .collect();
    let full = resize_bilinear(&LumaPlane::from_raw(s, s, vs), ow, oh);
    let (lo, hi) = (full.min(), full.max());
    if hi > lo {
        full.map(|v| (v - lo) / (hi - lo))
    } else {
        LumaPlane::constant(ow, oh, 1.0)
    }
}
