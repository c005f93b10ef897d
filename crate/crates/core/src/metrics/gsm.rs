//! Information-fidelity metrics over a Gaussian scale mixture model of
//! steerable-pyramid coefficients: VIF and IFC.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::steerable::steerable_bands;
use super::{luma_pair, Constants, GsmPyramidConstants, ScoreValue};
use crate::{Error, Image, LumaPlane, Result};

const TOL: f64 = 1e-15;

/// Visual information fidelity: information the distorted image carries about
/// the reference, relative to the information in the reference itself.
pub fn vif(reference: &Image, distorted: &Image, c: &Constants) -> Result<f64> {
    let (x, y) = luma_pair(reference, distorted)?;
    let terms = subband_terms(&x, &y, &c.vif)?;
    let (mut num, mut den) = (0.0, 0.0);
    for t in &terms {
        for i in 0..t.g.len() {
            for &l in &t.eigenvalues {
                num += (1.0 + t.g[i] * t.g[i] * t.s[i] * l / (t.vv[i].max(0.0) + c.vif.sigma_nsq))
                    .log2();
                den += (1.0 + t.s[i] * l / c.vif.sigma_nsq).log2();
            }
        }
    }
    if den > 0.0 {
        Ok(num / den)
    } else if x == y {
        Ok(1.0)
    } else {
        Err(Error::Degenerate(
            "reference carries no information (flat subbands)".into(),
        ))
    }
}

/// Information fidelity criterion: the unnormalized VIF numerator without
/// visual noise. Unbounded when the distortion channel is noise-free everywhere.
pub fn ifc(reference: &Image, distorted: &Image, c: &Constants) -> Result<ScoreValue> {
    let (x, y) = luma_pair(reference, distorted)?;
    let terms = subband_terms(&x, &y, &c.ifc)?;
    if terms.iter().all(|t| t.vv.iter().all(|&v| v <= 0.0)) {
        return Ok(ScoreValue::UnboundedPerfect);
    }
    let mut sum = 0.0;
    for t in &terms {
        for i in 0..t.g.len() {
            let vv = t.vv[i].max(TOL);
            for &l in &t.eigenvalues {
                sum += (1.0 + t.g[i] * t.g[i] * t.s[i] * l / vv).log2();
            }
        }
    }
    ScoreValue::from_f64(sum)
}

/// Per-block model parameters of one subband after border removal.
struct SubbandTerms {
    g: Vec<f64>,
    /// Distortion-channel noise variance before any flooring.
    vv: Vec<f64>,
    s: Vec<f64>,
    eigenvalues: Vec<f64>,
}

fn subband_terms(
    x: &LumaPlane,
    y: &LumaPlane,
    p: &GsmPyramidConstants,
) -> Result<Vec<SubbandTerms>> {
    let min_side = 1usize << (p.levels + 2);
    if x.width() < min_side || x.height() < min_side {
        return Err(Error::TooSmall(format!(
            "{}x{} is below {min_side}x{min_side} for a {}-level pyramid",
            x.width(),
            x.height(),
            p.levels
        )));
    }
    if let Some(&o) = p.used_orientations.iter().find(|&&o| o >= p.orientations) {
        return Err(Error::InvalidArgument(format!(
            "orientation {o} out of range for {} orientations",
            p.orientations
        )));
    }
    let m = p.block;
    let px = steerable_bands(x, p.levels, p.orientations);
    let py = steerable_bands(y, p.levels, p.orientations);
    let mut out = Vec::new();
    for level in 0..p.levels {
        let win = (1usize << (level + 1)) + 1;
        let border = ((win - 1) / 2).div_ceil(m);
        for &o in &p.used_orientations {
            let (a, b) = (&px[level][o], &py[level][o]);
            let (w, h) = ((a.width() / m) * m, (a.height() / m) * m);
            let a = a.crop(0, 0, w, h);
            let b = b.crop(0, 0, w, h);
            let (bw, bh) = (w / m, h / m);
            if bw <= 2 * border || bh <= 2 * border {
                return Err(Error::TooSmall(format!(
                    "subband at level {} is {w}x{h}, too small for {m}x{m} blocks",
                    level + 1
                )));
            }
            let (g, vv) = channel_estimates(&a, &b, m, win);
            let (s, eigenvalues) = gsm_field(&a, m);
            let keep = |v: &[f64]| -> Vec<f64> {
                (border..bh - border)
                    .flat_map(|r| (border..bw - border).map(move |c| (r, c)))
                    .map(|(r, c)| v[r * bw + c])
                    .collect()
            };
            out.push(SubbandTerms {
                g: keep(&g),
                vv: keep(&vv),
                s: keep(&s),
                eigenvalues,
            });
        }
    }
    Ok(out)
}

/// Sum over a `win × win` window centred on `(cx, cy)`, mirrored at the edges
/// without repeating the edge sample.
fn window_sum(
    p: &LumaPlane,
    cx: usize,
    cy: usize,
    win: usize,
    f: impl Fn(usize, usize) -> f64,
) -> f64 {
    let r = (win / 2) as isize;
    let reflect = |i: isize, n: usize| -> usize {
        if n == 1 {
            return 0;
        }
        let n = n as isize;
        let period = 2 * (n - 1);
        let m = i.rem_euclid(period);
        (if m < n { m } else { period - m }) as usize
    };
    let mut s = 0.0;
    for dy in -r..=r {
        let y = reflect(cy as isize + dy, p.height());
        for dx in -r..=r {
            s += f(reflect(cx as isize + dx, p.width()), y);
        }
    }
    s
}

/// Gain `g` and additive noise variance `vv` of the distortion channel,
/// estimated at every `m`-th sample.
fn channel_estimates(a: &LumaPlane, b: &LumaPlane, m: usize, win: usize) -> (Vec<f64>, Vec<f64>) {
    let n = (win * win) as f64;
    let (bw, bh) = (a.width() / m, a.height() / m);
    let mut g = Vec::with_capacity(bw * bh);
    let mut vv = Vec::with_capacity(bw * bh);
    for r in 0..bh {
        for c in 0..bw {
            let (cx, cy) = (c * m, r * m);
            let mx = window_sum(a, cx, cy, win, |x, y| a.get(x, y)) / n;
            let my = window_sum(b, cx, cy, win, |x, y| b.get(x, y)) / n;
            let cov = window_sum(a, cx, cy, win, |x, y| a.get(x, y) * b.get(x, y)) - n * mx * my;
            let sx =
                (window_sum(a, cx, cy, win, |x, y| a.get(x, y).powi(2)) - n * mx * mx).max(0.0);
            let sy =
                (window_sum(b, cx, cy, win, |x, y| b.get(x, y).powi(2)) - n * my * my).max(0.0);
            let (mut gi, mut vi) = if sx < TOL {
                (0.0, sy)
            } else {
                let gi = cov / sx;
                (gi, (sy - gi * cov) / n)
            };
            if sy < TOL {
                gi = 0.0;
                vi = 0.0;
            }
            if gi < 0.0 {
                vi = sy;
                gi = 0.0;
            }
            g.push(gi);
            vv.push(vi);
        }
    }
    (g, vv)
}

/// Covariance eigenvalues of `m × m` neighbourhoods and the per-block
/// multiplier field `s = xᵀ C⁻¹ x / m²` over non-overlapping blocks.
fn gsm_field(a: &LumaPlane, m: usize) -> (Vec<f64>, Vec<f64>) {
    let d = m * m;
    let (w, h) = (a.width(), a.height());
    let vector = |x0: usize, y0: usize| DVector::from_fn(d, |k, _| a.get(x0 + k % m, y0 + k / m));
    let mut mean = DVector::zeros(d);
    let mut count = 0.0;
    for y0 in 0..=h - m {
        for x0 in 0..=w - m {
            mean += vector(x0, y0);
            count += 1.0;
        }
    }
    mean /= count;
    let mut cov = DMatrix::zeros(d, d);
    for y0 in 0..=h - m {
        for x0 in 0..=w - m {
            let v = vector(x0, y0) - &mean;
            cov += &v * v.transpose();
        }
    }
    cov /= count;
    let eig = SymmetricEigen::new(cov);
    let scale = eig.eigenvalues.amax();
    let (bw, bh) = (w / m, h / m);
    let mut s = Vec::with_capacity(bw * bh);
    for r in 0..bh {
        for c in 0..bw {
            let v = vector(c * m, r * m);
            let proj = eig.eigenvectors.transpose() * v;
            let q: f64 = proj
                .iter()
                .zip(eig.eigenvalues.iter())
                .filter(|(_, &l)| l > 1e-12 * scale)
                .map(|(p, l)| p * p / l)
                .sum();
            s.push(q / d as f64);
        }
    }
    let eigenvalues = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    (s, eigenvalues)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(n: usize) -> Image {
        Image::from_fn(n, n, 1, |x, y, _| {
            let v = 128.0
                + 50.0 * ((x as f64 * 0.37).sin() + (y as f64 * 0.23).cos())
                + ((x * 31 + y * 17) % 23) as f64;
            v.clamp(0.0, 255.0) as u8
        })
        .unwrap()
    }

    fn distort(img: &Image, amp: i32) -> Image {
        let mut s = 7u64;
        Image::from_fn(img.width(), img.height(), 1, |x, y, _| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let n = ((s >> 33) % (2 * amp as u64 + 1)) as i32 - amp;
            (img.get(x, y, 0) as i32 + n).clamp(0, 255) as u8
        })
        .unwrap()
    }

    #[test]
    fn identical_pair() {
        let c = Constants::default();
        let img = textured(176);
        assert_eq!(vif(&img, &img, &c).unwrap(), 1.0);
        assert_eq!(ifc(&img, &img, &c).unwrap(), ScoreValue::UnboundedPerfect);
    }

    #[test]
    fn noise_ordering() {
        let c = Constants::default();
        let img = textured(176);
        let (weak, strong) = (distort(&img, 5), distort(&img, 40));
        let (vw, vs) = (
            vif(&img, &weak, &c).unwrap(),
            vif(&img, &strong, &c).unwrap(),
        );
        assert!(vw < 1.0 && vs < vw, "{vw} {vs}");
        let iw = ifc(&img, &weak, &c).unwrap().finite().unwrap();
        let is = ifc(&img, &strong, &c).unwrap().finite().unwrap();
        assert!(is < iw);
    }

    #[test]
    fn too_small() {
        let img = textured(96);
        assert!(matches!(
            vif(&img, &img, &Constants::default()),
            Err(Error::TooSmall(_))
        ));
    }

    #[test]
    fn reflect_window() {
        let p = LumaPlane::from_vec(3, 1, vec![1.0, 2.0, 4.0]).unwrap();
        // Window of 3 at x = 0 covers x = 1, 0, 1 horizontally and y mirrored the same row.
        let s = window_sum(&p, 0, 0, 3, |x, y| p.get(x, y));
        assert_eq!(s, 3.0 * (2.0 + 1.0 + 2.0));
    }
}
