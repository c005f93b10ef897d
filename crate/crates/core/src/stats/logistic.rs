use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// β₁..β₅ of `Q(x) = β₁(½ − 1/(1+exp(β₂(x−β₃)))) + β₄x + β₅`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub beta: [f64; 5],
}

impl LogisticParams {
    pub fn eval(&self, x: f64) -> f64 {
        let [b1, b2, b3, b4, b5] = self.beta;
        b1 * half_tanh(b2 * (x - b3)) + b4 * x + b5
    }

    pub fn eval_all(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| self.eval(v)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub residual_rmse: f64,
    pub converged: bool,
    /// A Levenberg-damped step was needed at least once.
    pub damping_used: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop once the relative decrease of the residual sum of squares drops below this.
    pub tolerance: f64,
    pub max_halvings: u32,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            tolerance: 1e-10,
            max_halvings: 32,
        }
    }
}

/// `½ − 1/(1+eᶻ)`, written as `½·tanh(z/2)` to avoid cancellation near 0.
#[inline]
fn half_tanh(z: f64) -> f64 {
    0.5 * (0.5 * z).tanh()
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (
        m,
        (v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / n).sqrt(),
    )
}

/// Smallest |β₂| allowed on standardized abscissae. As β₂ → 0 with β₁β₂³
/// held fixed the curve tends to a cubic and the residual can keep falling
/// without a minimizer; below this floor the sigmoid term is already cubic
/// to about 1e-4 relative over ±6σ, so the floor only makes the optimum attainable.
const MIN_SLOPE: f64 = 1e-2;

/// Largest |β₂| on standardized abscissae. The best steep fits run the
/// transition through a single sample and sharpen without bound; past this
/// the width is under 1e-4σ and converting β₃ back to raw units would round
/// away the offset that positions it.
const MAX_SLOPE: f64 = 1e4;

/// Largest |a·u − b| allowed at the sample nearest the centre. A centre
/// drifting away from the data leaves only the sigmoid's exponential tail in
/// view and, again, no minimizer; at this reach the tail is exponential to
/// about 6e-6 while β₁ amplifies rounding by only e¹².
const MAX_REACH: f64 = 12.0;

fn lstsq(a: DMatrix<f64>, r: &DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let svd = a.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max();
    let sol = svd.solve(r, eps).ok()?;
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > eps)
        .collect();
    Some((sol, svd.u?.select_columns(&keep)))
}

/// State of the reduced problem. The sigmoid argument is iterated as
/// `a·u − b` (so `β₂ = a`, `β₃ = b/a`), which straightens the curved valley
/// that steep fits otherwise crawl along; the linear coefficients are the
/// optimal ones for that argument.
struct Point {
    theta: [f64; 2],
    beta: [f64; 5],
    resid: DVector<f64>,
    sse: f64,
    /// Orthonormal basis of the design's column space.
    basis: DMatrix<f64>,
}

fn project(theta: [f64; 2], u: &[f64], v: &[f64]) -> Option<Point> {
    let [slope, offset] = theta;
    let a = DMatrix::from_fn(u.len(), 3, |i, k| match k {
        0 => half_tanh(slope * u[i] - offset),
        1 => u[i],
        _ => 1.0,
    });
    let target = DVector::from_column_slice(v);
    let (c, basis) = lstsq(a.clone(), &target)?;
    let resid = target - a * &c;
    let sse = resid.norm_squared();
    let beta = [c[0], slope, offset / slope, c[1], c[2]];
    (sse.is_finite() && beta.iter().all(|b| b.is_finite())).then_some(Point {
        theta,
        beta,
        resid,
        sse,
        basis,
    })
}

/// Jacobian of the projected residual with respect to (a, b), in the
/// Kaufman form `−(I − P)·∂A/∂θ·c`.
fn reduced_jacobian(p: &Point, u: &[f64]) -> DMatrix<f64> {
    let [slope, offset] = p.theta;
    let b1 = p.beta[0];
    let raw = DMatrix::from_fn(u.len(), 2, |i, k| {
        let t = (0.5 * (slope * u[i] - offset)).tanh();
        let dh = 0.25 * (1.0 - t * t);
        match k {
            0 => -b1 * dh * u[i],
            _ => b1 * dh,
        }
    });
    let along = &p.basis * (p.basis.transpose() * &raw);
    raw - along
}

/// Feasible region for the sigmoid argument `(a, b)`: `MIN_SLOPE ≤ sign·a ≤
/// MAX_SLOPE` and `lo(a) ≤ b ≤ hi(a)`, with `lo(a) = a·lo_edge − MAX_REACH` and
/// `hi(a) = a·hi_edge + MAX_REACH`.
struct Bounds {
    sign: f64,
    lo_edge: f64,
    hi_edge: f64,
}

impl Bounds {
    fn new(u: &[f64], sign: f64) -> Self {
        let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo_edge, hi_edge) = if sign > 0.0 { (lo, hi) } else { (hi, lo) };
        Self {
            sign,
            lo_edge,
            hi_edge,
        }
    }

    fn lo(&self, a: f64) -> f64 {
        a * self.lo_edge - MAX_REACH
    }

    fn hi(&self, a: f64) -> f64 {
        a * self.hi_edge + MAX_REACH
    }

    fn clamp(&self, [a, b]: [f64; 2]) -> [f64; 2] {
        let a = self.sign * (a * self.sign).clamp(MIN_SLOPE, MAX_SLOPE);
        [a, b.clamp(self.lo(a), self.hi(a))]
    }

    /// Direction sets to try from `[a, b]`: the unconstrained plane first,
    /// then a slide along each bound the point sits on.
    fn direction_sets(&self, [a, b]: [f64; 2]) -> Vec<DMatrix<f64>> {
        let slope = a * self.sign;
        let mut sets = vec![DMatrix::identity(2, 2)];
        if slope <= MIN_SLOPE || slope >= MAX_SLOPE {
            sets.push(DMatrix::from_column_slice(2, 1, &[0.0, 1.0]));
        }
        if b <= self.lo(a) {
            sets.push(DMatrix::from_column_slice(2, 1, &[1.0, self.lo_edge]));
        }
        if b >= self.hi(a) {
            sets.push(DMatrix::from_column_slice(2, 1, &[1.0, self.hi_edge]));
        }
        sets
    }
}

struct Run {
    beta: [f64; 5],
    sse: f64,
    iterations: usize,
    converged: bool,
    damping_used: bool,
}

/// Outcome of one attempted move.
struct Move {
    point: Point,
    /// The undamped, unshortened Gauss-Newton step was taken.
    full: bool,
    damped: bool,
}

/// One Gauss-Newton move restricted to the span of `dirs`, with step halving
/// and then Levenberg damping. `None` when nothing lowers the residual.
fn descend(
    cur: &Point,
    jac: &DMatrix<f64>,
    dirs: &DMatrix<f64>,
    bounds: &Bounds,
    u: &[f64],
    v: &[f64],
    opt: &FitOptions,
) -> Option<Move> {
    let j = jac * dirs;
    let try_step = |d: &DVector<f64>, t: f64| {
        let delta = dirs * d;
        let theta = bounds.clamp([cur.theta[0] - t * delta[0], cur.theta[1] - t * delta[1]]);
        project(theta, u, v).filter(|p| p.sse < cur.sse)
    };
    if let Some((d, _)) = lstsq(j.clone(), &cur.resid) {
        let mut t = 1.0;
        for _ in 0..=opt.max_halvings {
            if let Some(point) = try_step(&d, t) {
                return Some(Move {
                    point,
                    full: t == 1.0,
                    damped: false,
                });
            }
            t *= 0.5;
        }
    }
    let g = j.transpose() * &cur.resid;
    let jtj = j.transpose() * &j;
    let scale = jtj.diagonal().max().max(1e-300);
    let mut mu = 1e-3;
    for _ in 0..40 {
        let mut a = jtj.clone();
        for k in 0..a.nrows() {
            a[(k, k)] += mu * (jtj[(k, k)] + 1e-12 * scale);
        }
        if let Some(point) = a.cholesky().and_then(|c| try_step(&c.solve(&g), 1.0)) {
            return Some(Move {
                point,
                full: false,
                damped: true,
            });
        }
        mu *= 10.0;
    }
    None
}

/// Gauss-Newton on the sigmoid argument with the linear parameters
/// eliminated, kept inside [`Bounds`].
fn gauss_newton(start: [f64; 2], u: &[f64], v: &[f64], opt: &FitOptions) -> Option<Run> {
    let bounds = Bounds::new(u, if start[0] < 0.0 { -1.0 } else { 1.0 });
    let mut cur = project(bounds.clamp(start), u, v)?;
    let mut run = Run {
        beta: cur.beta,
        sse: cur.sse,
        iterations: 0,
        converged: false,
        damping_used: false,
    };
    while run.iterations < opt.max_iterations {
        run.iterations += 1;
        if cur.sse == 0.0 {
            run.converged = true;
            break;
        }
        let jac = reduced_jacobian(&cur, u);
        let mut best: Option<Move> = None;
        for dirs in bounds.direction_sets(cur.theta) {
            if let Some(m) = descend(&cur, &jac, &dirs, &bounds, u, v, opt) {
                if best.as_ref().is_none_or(|b| m.point.sse < b.point.sse) {
                    best = Some(m);
                }
            }
        }
        let Some(m) = best else {
            // No feasible descent left: stationary to working precision.
            run.converged = true;
            break;
        };
        run.damping_used |= m.damped;
        let rel = (cur.sse - m.point.sse) / cur.sse;
        cur = m.point;
        // A shortened step that barely helps means crawling, not convergence.
        if rel < opt.tolerance && m.full {
            run.converged = true;
            break;
        }
    }
    run.beta = cur.beta;
    run.sse = cur.sse;
    Some(run)
}

/// Residual sum of squares after the exact linear solve, for standardized
/// `u` (mean 0, unit variance) and centred `v`. O(n), no factorization.
fn projected_sse(arg: [f64; 2], u: &[f64], v: &[f64], corr: f64, base: f64, h: &mut [f64]) -> f64 {
    let n = u.len() as f64;
    for (hi, &ui) in h.iter_mut().zip(u) {
        *hi = half_tanh(arg[0] * ui - arg[1]);
    }
    let mean = h.iter().sum::<f64>() / n;
    let along = h.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / n;
    let (mut hh, mut hv, mut raw) = (0.0, 0.0, 0.0);
    for ((&hi, &ui), &vi) in h.iter().zip(u).zip(v) {
        let p = hi - mean - along * ui;
        hh += p * p;
        hv += p * (vi - corr * ui);
        raw += hi * hi;
    }
    if hh <= 1e-24 * raw.max(f64::MIN_POSITIVE) {
        base
    } else {
        base - hv * hv / hh
    }
}

/// Starting arguments for the sigmoid taken from a scan over slopes
/// 10^(k/4), k = −8..=12, and centres at and between ranked samples.
/// The best cells are kept, skipping any that lies within two slope steps
/// and two transition widths of a better one, so the starts reach
/// different basins instead of crowding into one.
fn scan_starts(u: &[f64], v: &[f64], sign: f64) -> Vec<[f64; 2]> {
    const KEEP: usize = 6;
    const MAX_ANCHORS: usize = 128;
    let n = u.len() as f64;
    let corr = u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / n;
    let base: f64 = u.iter().zip(v).map(|(a, b)| (b - corr * a).powi(2)).sum();

    let mut sorted = u.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let m = sorted.len().min(MAX_ANCHORS);
    let anchors: Vec<f64> = (0..m)
        .map(|k| sorted[(k * (sorted.len() - 1)).div_ceil((m - 1).max(1))])
        .collect();
    let mids: Vec<f64> = anchors.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();

    struct Cell {
        sse: f64,
        level: i32,
        width: f64,
        centre: f64,
    }
    let mut h = vec![0.0; u.len()];
    let mut cells = Vec::new();
    for level in -8..=12 {
        let width = 10f64.powf(-level as f64 / 4.0);
        let slope = sign / width;
        for &centre in anchors.iter().chain(&mids) {
            let sse = projected_sse([slope, slope * centre], u, v, corr, base, &mut h);
            cells.push(Cell {
                sse,
                level,
                width,
                centre,
            });
        }
    }
    cells.sort_by(|a, b| a.sse.total_cmp(&b.sse));
    let mut kept: Vec<&Cell> = Vec::with_capacity(KEEP);
    for c in &cells {
        let crowded = kept.iter().any(|k| {
            (k.level - c.level).abs() <= 2
                && (k.centre - c.centre).abs() <= 2.0 * k.width.max(c.width)
        });
        if !crowded {
            kept.push(c);
            if kept.len() == KEEP {
                break;
            }
        }
    }
    kept.iter()
        .map(|c| [sign / c.width, sign * c.centre / c.width])
        .collect()
}

/// Starts for steep fits. As the slope grows, the best fits run the
/// transition through one sample: samples on either side saturate at ±½
/// and the sigmoid's value at that sample is free. The residual of that
/// limit is an exact four-column least-squares problem per distinct sample,
/// so the best few samples are found directly and seeded with a slope of
/// 10³ and the centre that reproduces the solved value.
fn step_starts(u: &[f64], v: &[f64], sign: f64) -> Vec<[f64; 2]> {
    const KEEP: usize = 3;
    const SLOPE: f64 = 1e3;
    let n = u.len() as f64;
    let corr = u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / n;
    // Part of a column orthogonal to the constant and to `u`.
    let perp = |col: &mut Vec<f64>| {
        let mean = col.iter().sum::<f64>() / n;
        let along = col.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / n;
        for (c, &ui) in col.iter_mut().zip(u) {
            *c -= mean + along * ui;
        }
    };
    let resid: Vec<f64> = u.iter().zip(v).map(|(a, b)| b - corr * a).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut sorted = u.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut found = Vec::with_capacity(sorted.len());
    for &at in &sorted {
        let mut step: Vec<f64> = u
            .iter()
            .map(|&x| {
                if x == at {
                    0.0
                } else {
                    0.5 * (sign * (x - at)).signum()
                }
            })
            .collect();
        let mut spot: Vec<f64> = u.iter().map(|&x| if x == at { 1.0 } else { 0.0 }).collect();
        perp(&mut step);
        perp(&mut spot);
        let gram = nalgebra::Matrix2::new(
            dot(&step, &step),
            dot(&step, &spot),
            dot(&spot, &step),
            dot(&spot, &spot),
        );
        let rhs = nalgebra::Vector2::new(dot(&step, &resid), dot(&spot, &resid));
        let Some(inv) = gram
            .try_inverse()
            .filter(|_| gram.determinant() > 1e-12 * gram.trace().powi(2))
        else {
            continue;
        };
        let coef = inv * rhs;
        if coef[0].abs() <= f64::EPSILON {
            continue;
        }
        let gain = rhs.dot(&coef);
        let value = (coef[1] / coef[0]).clamp(-0.499, 0.499);
        found.push((gain, at, value));
    }
    found.sort_by(|a, b| b.0.total_cmp(&a.0));
    found
        .into_iter()
        .take(KEEP)
        .map(|(_, at, value)| {
            let a = sign * SLOPE;
            [a, a * at - 2.0 * (2.0 * value).atanh()]
        })
        .collect()
}

/// Least-squares fit of the 5-parameter logistic with [`FitOptions::default`].
pub fn fit_logistic5(x: &[f64], y: &[f64]) -> Result<(LogisticParams, FitDiagnostics)> {
    fit_logistic5_with(x, y, &FitOptions::default())
}

/// Gauss-Newton fit with step halving and a Levenberg fallback.
///
/// Abscissae and ordinates are standardized internally so the result is
/// invariant to affine rescaling of `x`. β₁, β₄ and β₅ enter linearly and are
/// solved exactly at every iterate, so the iteration runs over β₂ and β₃ only.
/// The conventional start, the best cells of a coarse scan over slope and
/// centre, and the best steep limits are refined; the lowest residual wins.
pub fn fit_logistic5_with(
    x: &[f64],
    y: &[f64],
    opt: &FitOptions,
) -> Result<(LogisticParams, FitDiagnostics)> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} scores for {} targets",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 6 {
        return Err(Error::InvalidArgument(format!(
            "logistic fit needs at least 6 samples, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logistic fit input".into()));
    }
    let (mx, sx) = mean_std(x);
    if sx == 0.0 || !x.iter().any(|&v| v != x[0]) {
        return Err(Error::Degenerate("all scores are equal".into()));
    }
    let (my, sy) = mean_std(y);
    let sy = if sy > 0.0 { sy } else { 1.0 };
    let u: Vec<f64> = x.iter().map(|&a| (a - mx) / sx).collect();
    let v: Vec<f64> = y.iter().map(|&a| (a - my) / sy).collect();

    let n = u.len() as f64;
    let corr = u.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / n;
    let sign = if corr < 0.0 { -1.0 } else { 1.0 };

    // The conventional start (slope 4/σ at the mean) first, then the best
    // cells of a coarse scan and the best steep limits; ties keep the
    // earlier start.
    let mut best: Option<Run> = None;
    let starts = std::iter::once([4.0 * sign, 0.0])
        .chain(scan_starts(&u, &v, sign))
        .chain(step_starts(&u, &v, sign));
    for start in starts {
        if let Some(r) = gauss_newton(start, &u, &v, opt) {
            if best.as_ref().is_none_or(|b| r.sse < b.sse) {
                best = Some(r);
            }
        }
    }
    let best = best.ok_or_else(|| Error::NonFinite("logistic fit diverged".into()))?;

    let [c1, c2, c3, c4, c5] = best.beta;
    let beta = [
        c1 * sy,
        c2 / sx,
        mx + sx * c3,
        c4 * sy / sx,
        my + sy * (c5 - c4 * mx / sx),
    ];
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fitted logistic parameters".into()));
    }
    let params = LogisticParams { beta };
    let residual_rmse = (best.sse / n).sqrt() * sy;
    Ok((
        params,
        FitDiagnostics {
            iterations: best.iterations,
            residual_rmse,
            converged: best.converged,
            damping_used: best.damping_used,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rmse_of(p: &LogisticParams, x: &[f64], y: &[f64]) -> f64 {
        let s: f64 = x
            .iter()
            .zip(y)
            .map(|(&a, &b)| (p.eval(a) - b).powi(2))
            .sum();
        (s / x.len() as f64).sqrt()
    }

    #[test]
    fn noiseless_recovery() {
        let truth = LogisticParams {
            beta: [2.0, 1.0, 0.0, 0.5, 3.0],
        };
        let x: Vec<f64> = (0..50).map(|i| -5.0 + 10.0 * i as f64 / 49.0).collect();
        let y = truth.eval_all(&x);
        let (p, d) = fit_logistic5(&x, &y).unwrap();
        assert!(rmse_of(&p, &x, &y) < 1e-6, "{d:?} {p:?}");
        assert!(d.residual_rmse < 1e-6);
        assert!(d.converged && d.iterations <= 1000);
    }

    #[test]
    fn linear_data() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let (p, _) = fit_logistic5(&x, &y).unwrap();
        assert!(rmse_of(&p, &x, &y) < 1e-8);
    }

    #[test]
    fn preconditions() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(fit_logistic5(&x, &x).is_err());
        assert!(matches!(
            fit_logistic5(&[2.0; 8], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]),
            Err(Error::Degenerate(_))
        ));
        let mut y = [1.0; 6];
        y[2] = f64::NAN;
        assert!(fit_logistic5(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &y).is_err());
    }

    #[test]
    fn deterministic() {
        let x: Vec<f64> = (0..40).map(|i| ((i * 37) % 41) as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| 1.0 + 4.0 / (1.0 + (-(v - 20.0) / 5.0).exp()))
            .collect();
        assert_eq!(
            fit_logistic5(&x, &y).unwrap(),
            fit_logistic5(&x, &y).unwrap()
        );
    }
}
