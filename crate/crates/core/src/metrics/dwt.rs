//! CDF 9/7 lifting wavelet with whole-sample symmetric extension.

use crate::LumaPlane;

const ALPHA: f64 = -1.586_134_342_059_924;
const BETA: f64 = -0.052_980_118_572_961;
const GAMMA: f64 = 0.882_911_075_530_934;
const DELTA: f64 = 0.443_506_852_043_971;
const K: f64 = 1.149_604_398_860_241;

/// One analysis step on a line; returns (lowpass, highpass) of lengths
/// ⌈n/2⌉ and ⌊n/2⌋.
fn analyze(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut s: Vec<f64> = x.iter().step_by(2).copied().collect();
    let mut d: Vec<f64> = x.iter().skip(1).step_by(2).copied().collect();
    if !d.is_empty() {
        predict(&mut d, &s, ALPHA);
        update(&mut s, &d, BETA);
        predict(&mut d, &s, GAMMA);
        update(&mut s, &d, DELTA);
    }
    s.iter_mut().for_each(|v| *v *= K);
    d.iter_mut().for_each(|v| *v /= K);
    (s, d)
}

#[cfg(test)]
fn synthesize(s: &[f64], d: &[f64]) -> Vec<f64> {
    let mut s: Vec<f64> = s.iter().map(|v| v / K).collect();
    let mut d: Vec<f64> = d.iter().map(|v| v * K).collect();
    if !d.is_empty() {
        update(&mut s, &d, -DELTA);
        predict(&mut d, &s, -GAMMA);
        update(&mut s, &d, -BETA);
        predict(&mut d, &s, -ALPHA);
    }
    let mut out = Vec::with_capacity(s.len() + d.len());
    for i in 0..s.len() {
        out.push(s[i]);
        if i < d.len() {
            out.push(d[i]);
        }
    }
    out
}

// d[i] sits between s[i] and s[i+1]; past the end the mirror gives s[i].
fn predict(d: &mut [f64], s: &[f64], c: f64) {
    for i in 0..d.len() {
        let right = if i + 1 < s.len() { s[i + 1] } else { s[i] };
        d[i] += c * (s[i] + right);
    }
}

// s[i] sits between d[i-1] and d[i]; both ends mirror onto the nearest d.
fn update(s: &mut [f64], d: &[f64], c: f64) {
    for i in 0..s.len() {
        let left = if i > 0 { d[i - 1] } else { d[0] };
        let right = if i < d.len() { d[i] } else { d[i - 1] };
        s[i] += c * (left + right);
    }
}

/// Detail bands of one decomposition level.
pub(crate) struct Level {
    pub lh: LumaPlane,
    pub hl: LumaPlane,
    pub hh: LumaPlane,
}

impl Level {
    pub fn coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.lh
            .data()
            .iter()
            .chain(self.hl.data())
            .chain(self.hh.data())
            .copied()
    }
}

fn split2d(p: &LumaPlane) -> [LumaPlane; 4] {
    let (w, h) = (p.width(), p.height());
    let (wl, wh) = (w.div_ceil(2), w / 2);
    let mut lo_rows = Vec::with_capacity(wl * h);
    let mut hi_rows = Vec::with_capacity(wh * h);
    for row in p.data().chunks_exact(w) {
        let (s, d) = analyze(row);
        lo_rows.extend(s);
        hi_rows.extend(d);
    }
    let columns = |data: &[f64], cw: usize| -> (LumaPlane, LumaPlane) {
        let (hl_, hh_) = (h.div_ceil(2), h / 2);
        let mut lo = vec![0.0; cw * hl_];
        let mut hi = vec![0.0; cw * hh_];
        for x in 0..cw {
            let col: Vec<f64> = (0..h).map(|y| data[y * cw + x]).collect();
            let (s, d) = analyze(&col);
            for (y, v) in s.into_iter().enumerate() {
                lo[y * cw + x] = v;
            }
            for (y, v) in d.into_iter().enumerate() {
                hi[y * cw + x] = v;
            }
        }
        (
            LumaPlane::from_raw(cw, hl_, lo),
            LumaPlane::from_raw(cw, hh_, hi),
        )
    };
    let (ll, lh) = columns(&lo_rows, wl);
    let (hl, hh) = columns(&hi_rows, wh);
    [ll, lh, hl, hh]
}

#[cfg(test)]
fn merge2d(ll: &LumaPlane, lh: &LumaPlane, hl: &LumaPlane, hh: &LumaPlane) -> LumaPlane {
    let (wl, wh) = (ll.width(), hl.width());
    let h = ll.height() + lh.height();
    let columns = |lo: &LumaPlane, hi: &LumaPlane, cw: usize| -> Vec<f64> {
        let mut out = vec![0.0; cw * h];
        for x in 0..cw {
            let s: Vec<f64> = (0..lo.height()).map(|y| lo.get(x, y)).collect();
            let d: Vec<f64> = (0..hi.height()).map(|y| hi.get(x, y)).collect();
            for (y, v) in synthesize(&s, &d).into_iter().enumerate() {
                out[y * cw + x] = v;
            }
        }
        out
    };
    let lo_rows = columns(ll, lh, wl);
    let hi_rows = columns(hl, hh, wh);
    let w = wl + wh;
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        data.extend(synthesize(
            &lo_rows[y * wl..(y + 1) * wl],
            &hi_rows[y * wh..(y + 1) * wh],
        ));
    }
    LumaPlane::from_raw(w, h, data)
}

/// `levels`-deep decomposition: detail bands finest first, then the final approximation.
pub(crate) fn dwt97(plane: &LumaPlane, levels: usize) -> (Vec<Level>, LumaPlane) {
    let mut ll = plane.clone();
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        let [a, lh, hl, hh] = split2d(&ll);
        out.push(Level { lh, hl, hh });
        ll = a;
    }
    (out, ll)
}

#[cfg(test)]
pub(crate) fn idwt97(levels: &[Level], approx: &LumaPlane) -> LumaPlane {
    levels
        .iter()
        .rev()
        .fold(approx.clone(), |ll, l| merge2d(&ll, &l.lh, &l.hl, &l.hh))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_reconstruction() {
        for (w, h) in [(37, 29), (64, 64), (33, 50)] {
            let p = LumaPlane::from_fn(w, h, |x, y| {
                ((x * 31 + y * 17) % 97) as f64 + 0.25 * x as f64
            });
            let (levels, approx) = dwt97(&p, 4);
            let r = idwt97(&levels, &approx);
            let err = p
                .data()
                .iter()
                .zip(r.data())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-9, "{w}x{h}: {err}");
        }
    }

    #[test]
    fn constant_has_no_detail() {
        let p = LumaPlane::constant(40, 24, 7.0);
        let (levels, approx) = dwt97(&p, 3);
        for l in &levels {
            assert!(l.coefficients().all(|c| c.abs() < 1e-9));
        }
        // Lowpass DC gain is 2 per level.
        assert!((approx.get(0, 0) - 7.0 * 8.0).abs() < 1e-9);
    }
}
