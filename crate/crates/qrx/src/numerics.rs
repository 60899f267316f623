//! Quadrature, deterministic optimizers and special-function helpers.

use thiserror::Error;

/// Failure of a numerical routine to reach its tolerance.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("adaptive quadrature on [{a}, {b}] did not reach tolerance {tol:e} within depth {depth}")]
    Quadrature { a: f64, b: f64, tol: f64, depth: usize },
}

/// Natural log of `n!`.
pub fn ln_factorial(n: usize) -> f64 {
    statrs::function::factorial::ln_factorial(n as u64)
}

/// Natural log of the binomial coefficient `C(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Default recursion depth for adaptive Simpson.
pub const MAX_SIMPSON_DEPTH: usize = 48;

/// Adaptive Simpson quadrature of a scalar integrand with absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, NumericsError> {
    let g = |x: f64| vec![f(x)];
    adaptive_simpson_vec(g, a, b, tol).map(|v| v[0])
}

/// Adaptive Simpson quadrature of a vector-valued integrand; the error is measured in the max norm.
pub fn adaptive_simpson_vec(
    f: impl Fn(f64) -> Vec<f64>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Vec<f64>, NumericsError> {
    if a == b {
        return Ok(vec![0.0; f(a).len()]);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, &fa, &fm, &fb);
    let mut ctx = Simpson { f: &f, failed: None };
    let out = ctx.recurse(a, b, &fa, &fm, &fb, &whole, tol, MAX_SIMPSON_DEPTH);
    match ctx.failed {
        Some((fa_, fb_)) => Err(NumericsError::Quadrature { a: fa_, b: fb_, tol, depth: MAX_SIMPSON_DEPTH }),
        None => Ok(out),
    }
}

fn simpson(a: f64, b: f64, fa: &[f64], fm: &[f64], fb: &[f64]) -> Vec<f64> {
    let h = (b - a) / 6.0;
    fa.iter().zip(fm).zip(fb).map(|((x, y), z)| h * (x + 4.0 * y + z)).collect()
}

struct Simpson<'a, F> {
    f: &'a F,
    failed: Option<(f64, f64)>,
}

impl<F: Fn(f64) -> Vec<f64>> Simpson<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &mut self,
        a: f64,
        b: f64,
        fa: &[f64],
        fm: &[f64],
        fb: &[f64],
        whole: &[f64],
        tol: f64,
        depth: usize,
    ) -> Vec<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = simpson(a, m, fa, &flm, fm);
        let right = simpson(m, b, fm, &frm, fb);
        let err = left
            .iter()
            .zip(&right)
            .zip(whole)
            .map(|((l, r), w)| (l + r - w).abs())
            .fold(0.0, f64::max);
        let converged = err <= 15.0 * tol || (m - a) <= f64::EPSILON * m.abs().max(1.0);
        if converged || depth == 0 {
            if !converged && self.failed.is_none() {
                self.failed = Some((a, b));
            }
            return left
                .iter()
                .zip(&right)
                .zip(whole)
                .map(|((l, r), w)| l + r + (l + r - w) / 15.0)
                .collect();
        }
        let lv = self.recurse(a, m, fa, &flm, fm, &left, 0.5 * tol, depth - 1);
        let rv = self.recurse(m, b, fm, &frm, fb, &right, 0.5 * tol, depth - 1);
        lv.iter().zip(&rv).map(|(x, y)| x + y).collect()
    }
}

/// `∫_0^a e^{-x} f(a - x) dx`, equivalently `∫_{e^{-a}}^1 f(a + ln t) dt`.
///
/// The substitution `x = a (1 - u^2)` removes square-root behaviour of `f` at zero argument.
pub fn exp_weighted_integral(
    f: impl Fn(f64) -> Vec<f64>,
    a: f64,
    dim: usize,
    tol: f64,
) -> Result<Vec<f64>, NumericsError> {
    if a <= 0.0 {
        return Ok(vec![0.0; dim]);
    }
    adaptive_simpson_vec(
        |u| {
            let w = 2.0 * a * u * (-a * (1.0 - u * u)).exp();
            f(a * u * u).into_iter().map(|v| w * v).collect()
        },
        0.0,
        1.0,
        tol,
    )
}

/// Golden-section search for a maximum of a unimodal function on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(c, fc), (d, fd), (x, fx)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Uniform grid scan on `[a, b]` followed by golden-section refinement around the best node.
pub fn grid_golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, points: usize, tol: f64) -> (f64, f64) {
    let n = points.max(3);
    let h = (b - a) / (n - 1) as f64;
    let mut best = (a, f(a));
    for i in 1..n {
        let x = a + h * i as f64;
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    let lo = (best.0 - h).max(a);
    let hi = (best.0 + h).min(b);
    let refined = golden_max(&f, lo, hi, tol);
    if refined.1 >= best.1 {
        refined
    } else {
        best
    }
}

/// Settings for compass pattern search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternSearch {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_evaluations: usize,
}

impl Default for PatternSearch {
    fn default() -> Self {
        Self { initial_step: 0.05, min_step: 1e-10, max_evaluations: 20_000 }
    }
}

/// Outcome of a pattern search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl PatternSearch {
    /// Maximizes `f` over the box `[lower, upper]` starting from `start`; steps are relative to the box width.
    pub fn maximize(&self, f: impl Fn(&[f64]) -> f64, start: &[f64], lower: &[f64], upper: &[f64]) -> SearchResult {
        let dim = start.len();
        let width: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| (u - l).max(f64::MIN_POSITIVE)).collect();
        let mut x: Vec<f64> = start.to_vec();
        let mut fx = f(&x);
        let mut evals = 1;
        let mut step = self.initial_step;
        while step > self.min_step && evals < self.max_evaluations {
            let mut improved = false;
            for i in 0..dim {
                for sign in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[i] = (y[i] + sign * step * width[i]).clamp(lower[i], upper[i]);
                    if y[i] == x[i] {
                        continue;
                    }
                    let fy = f(&y);
                    evals += 1;
                    if fy > fx {
                        x = y;
                        fx = fy;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        SearchResult { point: x, value: fx, evaluations: evals, converged: step <= self.min_step }
    }
}
