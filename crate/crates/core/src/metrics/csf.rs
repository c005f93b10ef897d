//! Mannos–Sakrison contrast sensitivity function.

/// `a·(b + c·f)·exp(−(c·f)^d)` at radial frequency `f` in cycles/degree.
pub fn mannos_sakrison(f: f64, params: &[f64; 4]) -> f64 {
    let [a, b, c, d] = *params;
    a * (b + c * f) * (-(c * f).powf(d)).exp()
}

/// Location (cycles/degree) and value of the CSF maximum.
pub fn peak(params: &[f64; 4]) -> (f64, f64) {
    // Coarse scan, then golden-section refinement on the bracketing interval.
    let step = 0.05;
    let (mut best_f, mut best_v) = (0.0, mannos_sakrison(0.0, params));
    for i in 1..=2000 {
        let f = i as f64 * step;
        let v = mannos_sakrison(f, params);
        if v > best_v {
            best_f = f;
            best_v = v;
        }
    }
    let (mut lo, mut hi) = ((best_f - step).max(0.0), best_f + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if mannos_sakrison(a, params) > mannos_sakrison(b, params) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let f = 0.5 * (lo + hi);
    (f, mannos_sakrison(f, params))
}

/// Peak-normalized CSF evaluator.
pub(crate) struct NormalizedCsf {
    params: [f64; 4],
    peak_value: f64,
}

impl NormalizedCsf {
    pub fn new(params: [f64; 4]) -> Self {
        let (_, peak_value) = peak(&params);
        Self { params, peak_value }
    }

    pub fn weight(&self, f: f64) -> f64 {
        mannos_sakrison(f, &self.params) / self.peak_value
    }
}

/// Radial frequency in cycles/pixel of DFT bin `(u, v)`.
#[inline]
pub(crate) fn radial_frequency(u: usize, v: usize, width: usize, height: usize) -> f64 {
    let fu = signed_bin(u, width) / width as f64;
    let fv = signed_bin(v, height) / height as f64;
    fu.hypot(fv)
}

/// Bin offset in the `fftshift` convention: the Nyquist bin of an even-length
/// axis is negative.
#[cfg(feature = "tier2")]
#[inline]
pub(crate) fn centered_bin(k: usize, n: usize) -> f64 {
    if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

#[inline]
pub(crate) fn signed_bin(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}
