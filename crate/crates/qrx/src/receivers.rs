//! Receivers for the binary coherent alphabet `{|α⟩, |-α⟩}`.
//!
//! Amplitudes and displacements are real. For the Kennedy-like family the signal is first displaced
//! by `D(α)`, which maps `|-α⟩` to the vacuum and `|α⟩` to `|2α⟩`; an optional channel acts next, and
//! the final displacement `D(-β)` is followed by on/off detection. "No click" is read as `|-α⟩`.

use std::fmt;

use libm::erfc;
use thiserror::Error;

use crate::fock::{auto_cutoff, coherent_amplitude, squeezed_displaced_overlap, FockError, FockOperator};
use crate::linalg::{CMatrix, C64};
use crate::numerics::{grid_golden_max, PatternSearch};

/// Relative tail threshold for the series sums in this module.
pub const SERIES_TOL: f64 = 1e-14;
/// Default largest gain on the NHPA search grid.
pub const GAIN_MAX: f64 = 200.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReceiverError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error(transparent)]
    Fock(#[from] FockError),
}

fn check(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<(), ReceiverError> {
    if cond {
        Ok(())
    } else {
        Err(ReceiverError::InvalidParameter { name, value, reason })
    }
}

/// Prior probabilities of `|α⟩` and `|-α⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priors {
    plus: f64,
}

impl Priors {
    pub fn new(plus: f64) -> Result<Self, ReceiverError> {
        check((0.0..=1.0).contains(&plus), "p_plus", plus, "must lie in [0, 1]")?;
        Ok(Self { plus })
    }

    pub fn equal() -> Self {
        Self { plus: 0.5 }
    }

    pub fn plus(&self) -> f64 {
        self.plus
    }

    pub fn minus(&self) -> f64 {
        1.0 - self.plus
    }
}

impl Default for Priors {
    fn default() -> Self {
        Self::equal()
    }
}

/// Click statistics of a Kennedy-like receiver and the resulting success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryOutcomeStats {
    pub p_click_plus: f64,
    pub p_click_minus: f64,
    pub p_succ: f64,
    pub p_err: f64,
}

impl BinaryOutcomeStats {
    /// Statistics from the no-click probabilities, with a click read as `|α⟩`.
    pub fn from_no_click(p0_plus: f64, p0_minus: f64, priors: Priors) -> Self {
        let p_succ = priors.minus() * p0_minus + priors.plus() * (1.0 - p0_plus);
        Self { p_click_plus: 1.0 - p0_plus, p_click_minus: 1.0 - p0_minus, p_succ, p_err: 1.0 - p_succ }
    }
}

/// Relative improvement `100 (p / p_ref - 1)` in percent.
pub fn gain_percent(p: f64, p_ref: f64) -> f64 {
    100.0 * (p / p_ref - 1.0)
}

/// Helstrom error probability for `|±α⟩` with prior `p_plus` on `|α⟩`.
pub fn helstrom_bpsk(alpha: f64, p_plus: f64) -> f64 {
    let p_minus = 1.0 - p_plus;
    let overlap = (-4.0 * alpha * alpha).exp();
    0.5 * (1.0 - (1.0 - 4.0 * p_plus * p_minus * overlap).max(0.0).sqrt())
}

/// Error probability of sign detection on the `q = (a + a†)/√2` quadrature.
pub fn homodyne_perr(alpha: f64) -> f64 {
    0.5 * erfc(std::f64::consts::SQRT_2 * alpha)
}

/// Success probability of the Kennedy measurement `{|β⟩⟨β|, 1 - |β⟩⟨β|}`, equal priors.
pub fn kennedy_psucc(alpha: f64, beta: f64) -> f64 {
    0.5 * (1.0 + (-(beta + alpha).powi(2)).exp() - (-(beta - alpha).powi(2)).exp())
}

/// Optimized success probability and the maximizing parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverOptimum {
    pub psucc: f64,
    pub beta: f64,
    /// Amplifier gain, `f64::INFINITY` for the projector limit, `1` when absent.
    pub gain: f64,
    /// Amplifier or dephaser cutoff, `0` when absent.
    pub cutoff: u32,
    /// Squeezing parameter, `0` when absent.
    pub squeezing: f64,
}

impl ReceiverOptimum {
    fn displacement(psucc: f64, beta: f64) -> Self {
        Self { psucc, beta, gain: 1.0, cutoff: 0, squeezing: 0.0 }
    }
}

const BETA_POINTS: usize = 301;
const GOLDEN_TOL: f64 = 1e-12;

/// Optimized Kennedy receiver; `beta` is the displacement in [`kennedy_psucc`].
pub fn optimized_kennedy(alpha: f64) -> ReceiverOptimum {
    let (beta, psucc) = grid_golden_max(|b| kennedy_psucc(alpha, b), -alpha - 3.0, 0.0, BETA_POINTS, GOLDEN_TOL);
    ReceiverOptimum::displacement(psucc, beta)
}

/// `e^x - Σ_{k≤n} x^k/k!`.
fn exp_tail(x: f64, n: u32) -> f64 {
    if x.abs() > 1.0 {
        let mut term = 1.0;
        let mut head = 1.0;
        for k in 1..=n {
            term *= x / k as f64;
            head += term;
        }
        return x.exp() - head;
    }
    let mut term = 1.0;
    for k in 1..=n {
        term *= x / k as f64;
    }
    let mut sum = 0.0;
    let mut k = n + 1;
    loop {
        term *= x / k as f64;
        sum += term;
        if term.abs() <= SERIES_TOL * sum.abs().max(f64::MIN_POSITIVE) || term == 0.0 {
            return sum;
        }
        k += 1;
    }
}

fn check_gain(g: f64, n: u32) -> Result<(), ReceiverError> {
    check(g >= 1.0, "g", g, "gain must be at least 1")?;
    check(n >= 1, "n", n as f64, "cutoff must be a positive integer")
}

/// No-click probability `⟨β|A_{g,n}(|2α⟩⟨2α|)|β⟩` of the NHPA branch; `g = ∞` gives the projector limit.
pub fn nhpa_no_click_plus(alpha: f64, beta: f64, g: f64, n: u32) -> Result<f64, ReceiverError> {
    check_gain(g, n)?;
    let x = 2.0 * alpha * beta;
    let mut term = 1.0;
    let mut kept = 0.0;
    let mut failed = 0.0;
    for k in 0..=n {
        if k > 0 {
            term *= x / k as f64;
        }
        let shrink = g.powi(-((n - k) as i32));
        kept += term * shrink;
        failed += term * (1.0 - shrink * shrink).max(0.0).sqrt();
    }
    let success = exp_tail(x, n) + kept;
    Ok((-(4.0 * alpha * alpha + beta * beta)).exp() * (success * success + failed * failed))
}

/// NHPA receiver success probability for equal priors.
pub fn nhpa_psucc(alpha: f64, beta: f64, g: f64, n: u32) -> Result<f64, ReceiverError> {
    let p0_plus = nhpa_no_click_plus(alpha, beta, g, n)?;
    Ok(BinaryOutcomeStats::from_no_click(p0_plus, (-beta * beta).exp(), Priors::equal()).p_succ)
}

/// Search grids for [`nhpa_optimize_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct NhpaSearch {
    pub cutoffs: Vec<u32>,
    pub gain_max: f64,
    pub gain_points: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_points: usize,
    pub include_infinite_gain: bool,
}

impl Default for NhpaSearch {
    fn default() -> Self {
        Self {
            cutoffs: vec![1, 2, 3],
            gain_max: GAIN_MAX,
            gain_points: 61,
            beta_min: -2.0,
            beta_max: 0.0,
            beta_points: 81,
            include_infinite_gain: true,
        }
    }
}

impl NhpaSearch {
    /// Fixed gain and cutoff, displacement only.
    pub fn fixed_gain(gain: f64, cutoff: u32) -> Self {
        Self { cutoffs: vec![cutoff], gain_max: gain, gain_points: 1, include_infinite_gain: false, ..Self::default() }
    }
}

/// Optimized NHPA receiver over the default grids.
pub fn nhpa_optimize(alpha: f64) -> Result<ReceiverOptimum, ReceiverError> {
    nhpa_optimize_with(alpha, &NhpaSearch::default())
}

/// Optimized NHPA receiver: grid over `(n, g, β)`, then refinement of `(β, ln g)` at each cutoff.
pub fn nhpa_optimize_with(alpha: f64, search: &NhpaSearch) -> Result<ReceiverOptimum, ReceiverError> {
    check(search.gain_max >= 1.0, "gain_max", search.gain_max, "must be at least 1")?;
    check(search.beta_min < search.beta_max, "beta_min", search.beta_min, "must be below beta_max")?;
    let ln_max = search.gain_max.ln();
    let mut best: Option<ReceiverOptimum> = None;
    let mut offer = |cand: ReceiverOptimum| {
        if best.as_ref().is_none_or(|b| cand.psucc > b.psucc) {
            best = Some(cand);
        }
    };
    for &n in &search.cutoffs {
        check_gain(1.0, n)?;
        let beta_opt = |g: f64| {
            grid_golden_max(
                |b| nhpa_psucc(alpha, b, g, n).unwrap_or(f64::NEG_INFINITY),
                search.beta_min,
                search.beta_max,
                search.beta_points,
                GOLDEN_TOL,
            )
        };
        let mut cell = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in 0..search.gain_points.max(1) {
            let t = if search.gain_points > 1 { ln_max * i as f64 / (search.gain_points - 1) as f64 } else { ln_max };
            let (b, p) = beta_opt(t.exp());
            if p > cell.0 {
                cell = (p, b, t);
            }
        }
        if ln_max > 0.0 && search.gain_points > 1 {
            let ps = PatternSearch { initial_step: 1.0 / search.gain_points as f64, min_step: 1e-10, max_evaluations: 20_000 };
            let r = ps.maximize(
                |x| nhpa_psucc(alpha, x[0], x[1].exp(), n).unwrap_or(f64::NEG_INFINITY),
                &[cell.1, cell.2],
                &[search.beta_min, 0.0],
                &[search.beta_max, ln_max],
            );
            if r.value > cell.0 {
                cell = (r.value, r.point[0], r.point[1]);
            }
        }
        offer(ReceiverOptimum { psucc: cell.0, beta: cell.1, gain: cell.2.exp(), cutoff: n, squeezing: 0.0 });
        if search.include_infinite_gain {
            let (b, p) = beta_opt(f64::INFINITY);
            offer(ReceiverOptimum { psucc: p, beta: b, gain: f64::INFINITY, cutoff: n, squeezing: 0.0 });
        }
    }
    Ok(best.expect("at least one cutoff"))
}

/// Displaced-vacuum amplitudes `b_k = ⟨β|k⟩⟨k|2α⟩` up to the coherent tail of `|2α⟩`.
fn overlap_terms(alpha: f64, beta: f64) -> Vec<f64> {
    let kmax = auto_cutoff(4.0 * alpha * alpha);
    let scale = (-(4.0 * alpha * alpha + beta * beta) / 2.0).exp();
    let x = 2.0 * alpha * beta;
    let mut out = Vec::with_capacity(kmax + 1);
    let mut term = 1.0;
    for k in 0..=kmax {
        if k > 0 {
            term *= x / k as f64;
        }
        out.push(scale * term);
    }
    out
}

/// Success probability with the infinite-gain NHPA `A_{∞,n}`, Kraus operators `Π_{<n}` and `Π_{≥n}`.
pub fn dephaser_psucc(alpha: f64, beta: f64, n: u32) -> Result<f64, ReceiverError> {
    check(n >= 1, "n", n as f64, "cutoff must be a positive integer")?;
    let b = overlap_terms(alpha, beta);
    let split = (n as usize).min(b.len());
    let low: f64 = b[..split].iter().sum();
    let high = (-(4.0 * alpha * alpha + beta * beta) / 2.0).exp() * exp_tail(2.0 * alpha * beta, n - 1);
    let p0_plus = low * low + high * high;
    Ok(BinaryOutcomeStats::from_no_click(p0_plus, (-beta * beta).exp(), Priors::equal()).p_succ)
}

/// Success probability with the partial dephaser `𝓓_n`, Kraus operators `Π_{<n}` and `|k⟩⟨k|` for `k ≥ n`.
pub fn partial_dephaser_psucc(alpha: f64, beta: f64, n: u32) -> Result<f64, ReceiverError> {
    check(n >= 1, "n", n as f64, "cutoff must be a positive integer")?;
    let b = overlap_terms(alpha, beta);
    let split = (n as usize).min(b.len());
    let low: f64 = b[..split].iter().sum();
    let high: f64 = b[split..].iter().map(|v| v * v).sum();
    let p0_plus = low * low + high;
    Ok(BinaryOutcomeStats::from_no_click(p0_plus, (-beta * beta).exp(), Priors::equal()).p_succ)
}

/// Optimizes a one-parameter displacement receiver over `β ∈ [-2, 0]`.
fn optimize_beta(f: impl Fn(f64) -> f64) -> (f64, f64) {
    grid_golden_max(f, -2.0, 0.0, 201, GOLDEN_TOL)
}

/// Optimized `A_{∞,n}` receiver.
pub fn dephaser_optimize(alpha: f64, n: u32) -> Result<ReceiverOptimum, ReceiverError> {
    dephaser_psucc(alpha, 0.0, n)?;
    let (beta, psucc) = optimize_beta(|b| dephaser_psucc(alpha, b, n).unwrap_or(f64::NEG_INFINITY));
    Ok(ReceiverOptimum { psucc, beta, gain: f64::INFINITY, cutoff: n, squeezing: 0.0 })
}

/// Optimized `𝓓_n` receiver.
pub fn partial_dephaser_optimize(alpha: f64, n: u32) -> Result<ReceiverOptimum, ReceiverError> {
    partial_dephaser_psucc(alpha, 0.0, n)?;
    let (beta, psucc) = optimize_beta(|b| partial_dephaser_psucc(alpha, b, n).unwrap_or(f64::NEG_INFINITY));
    Ok(ReceiverOptimum { psucc, beta, gain: f64::INFINITY, cutoff: n, squeezing: 0.0 })
}

/// Output field of the resonant atom-cavity partial dephaser for input `|α⟩`.
///
/// The atom starts in `|G⟩`. A first Jaynes-Cummings interaction with `γτ = π/2` is followed by a
/// random cavity phase, a second interaction with `γτ̃ = 3π/2` and a trace over the atom. Free
/// evolution over the total time `4τ` rotates the field by `e^{-4iωτ n̂}`.
pub fn cavity_output(alpha: C64, omega_tau: f64) -> Result<FockOperator, ReceiverError> {
    const MAX_PHOTONS: usize = 20_000;
    let mean = alpha.norm_sqr();
    let mut mmax = 0;
    let mut kept = 0.0;
    loop {
        kept += coherent_amplitude(alpha, mmax).norm_sqr();
        if (1.0 - kept) < SERIES_TOL && mmax as f64 > mean {
            break;
        }
        mmax += 1;
        if mmax > MAX_PHOTONS {
            return Err(FockError::Truncation { cutoff: MAX_PHOTONS, deficit: 1.0 - kept, tol: SERIES_TOL }.into());
        }
    }
    let dim = mmax + 3;
    let first = |m: usize| ((m as f64).sqrt() * std::f64::consts::FRAC_PI_2).sin_cos();
    let second = |m: usize| ((m as f64).sqrt() * 3.0 * std::f64::consts::FRAC_PI_2).sin_cos();
    let c = |m: usize| coherent_amplitude(alpha, m);
    let i = C64::i();
    let mut rho = CMatrix::zeros(dim, dim);
    for m in 0..=mmax {
        // Atom amplitudes with m photons after the first interaction.
        let g = c(m) * first(m).1;
        let e = -i * c(m + 1) * first(m + 1).0;
        let (s_m, co_m) = second(m);
        let (s_up, co_up) = second(m + 1);
        // Cavity vectors paired with |G⟩ and |E⟩ after the second interaction.
        let mut u = vec![(m, g * co_m), (m + 1, -i * e * s_up)];
        let mut w = vec![(m, e * co_up)];
        if m > 0 {
            w.push((m - 1, -i * g * s_m));
        }
        for vec in [&mut u, &mut w] {
            for &(j, a) in vec.iter() {
                for &(k, b) in vec.iter() {
                    rho[(j, k)] += a * b.conj();
                }
            }
        }
    }
    if omega_tau != 0.0 {
        for j in 0..dim {
            for k in 0..dim {
                rho[(j, k)] *= C64::from_polar(1.0, -4.0 * omega_tau * (j as f64 - k as f64));
            }
        }
    }
    Ok(FockOperator::from_matrix(rho))
}

/// No-click probability `⟨β|ρ|β⟩` for a cavity output with real displacement `β`.
fn displaced_vacuum_expectation(rho: &FockOperator, beta: f64) -> f64 {
    let v: Vec<C64> = (0..rho.dim()).map(|k| coherent_amplitude(C64::new(beta, 0.0), k)).collect();
    let m = rho.matrix();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..rho.dim() {
        for k in j.saturating_sub(1)..(j + 2).min(rho.dim()) {
            acc += v[j].conj() * m[(j, k)] * v[k];
        }
    }
    acc.re
}

/// Receiver with the cavity partial dephaser, phase compensated.
pub fn cavity_psucc(alpha: f64, beta: f64) -> Result<f64, ReceiverError> {
    let rho = cavity_output(C64::new(2.0 * alpha, 0.0), 0.0)?;
    Ok(cavity_psucc_from(&rho, beta))
}

fn cavity_psucc_from(rho: &FockOperator, beta: f64) -> f64 {
    let p0_plus = displaced_vacuum_expectation(rho, beta);
    BinaryOutcomeStats::from_no_click(p0_plus, (-beta * beta).exp(), Priors::equal()).p_succ
}

/// Optimized cavity receiver.
pub fn cavity_optimize(alpha: f64) -> Result<ReceiverOptimum, ReceiverError> {
    let rho = cavity_output(C64::new(2.0 * alpha, 0.0), 0.0)?;
    let (beta, psucc) = optimize_beta(|b| cavity_psucc_from(&rho, b));
    Ok(ReceiverOptimum { psucc, beta, gain: f64::INFINITY, cutoff: 2, squeezing: 0.0 })
}

/// Probe amplitudes `⟨k|β,r⟩` with `|β,r⟩ = U_sq(r) D(β)|0⟩`.
fn squeezed_probe(beta: f64, r: f64, kmax: usize) -> Result<Vec<C64>, ReceiverError> {
    (0..=kmax)
        .map(|k| squeezed_displaced_overlap(k, C64::new(beta, 0.0), r, SERIES_TOL, crate::fock::OVERLAP_MAX_TERMS).map_err(Into::into))
        .collect()
}

/// No-click probabilities `(p_{0|+}, p_{0|-})` of the squeezing-enhanced receiver.
///
/// The signal passes `U_sq(r)` and `D(-β)` before detection, so the no-click projector is
/// `|β,-r⟩⟨β,-r|`. With `n = 0` no dephaser is present, otherwise `A_{∞,n}` acts first.
pub fn ts_no_click(alpha: f64, beta: f64, r: f64, n: u32) -> Result<(f64, f64), ReceiverError> {
    let kmax = auto_cutoff(4.0 * alpha * alpha);
    let probe = squeezed_probe(beta, -r, kmax)?;
    let signal: Vec<C64> = (0..=kmax).map(|k| coherent_amplitude(C64::new(2.0 * alpha, 0.0), k)).collect();
    let terms: Vec<C64> = probe.iter().zip(&signal).map(|(p, s)| p.conj() * s).collect();
    let split = (n as usize).min(terms.len());
    let low: C64 = terms[..split].iter().sum();
    let high: C64 = terms[split..].iter().sum();
    Ok((low.norm_sqr() + high.norm_sqr(), probe[0].norm_sqr()))
}

/// Success probability of the squeezing-enhanced receiver, equal priors.
pub fn ts_psucc(alpha: f64, beta: f64, r: f64, n: u32) -> Result<f64, ReceiverError> {
    let (p0_plus, p0_minus) = ts_no_click(alpha, beta, r, n)?;
    Ok(BinaryOutcomeStats::from_no_click(p0_plus, p0_minus, Priors::equal()).p_succ)
}

/// Optimized squeezing-enhanced receiver over `β ∈ [-2, 0]`, `r ∈ [-1.5, 1.5]`.
pub fn ts_optimize(alpha: f64, n: u32) -> Result<ReceiverOptimum, ReceiverError> {
    ts_psucc(alpha, 0.0, 0.0, n)?;
    let f = |x: &[f64]| ts_psucc(alpha, x[0], x[1], n).unwrap_or(f64::NEG_INFINITY);
    let (lower, upper) = ([-2.0, -1.5], [0.0, 1.5]);
    let (x, value) = grid_then_pattern(&f, &lower, &upper, 21);
    Ok(ReceiverOptimum { psucc: value, beta: x[0], gain: f64::INFINITY, cutoff: n, squeezing: x[1] })
}

/// Uniform grid with `points` nodes per dimension, then pattern search from the best node.
fn grid_then_pattern(f: &dyn Fn(&[f64]) -> f64, lower: &[f64], upper: &[f64], points: usize) -> (Vec<f64>, f64) {
    let dim = lower.len();
    let total = points.pow(dim as u32);
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for idx in 0..total {
        let mut rest = idx;
        let x: Vec<f64> = (0..dim)
            .map(|d| {
                let i = rest % points;
                rest /= points;
                lower[d] + (upper[d] - lower[d]) * i as f64 / (points - 1) as f64
            })
            .collect();
        let v = f(&x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let ps = PatternSearch { initial_step: 1.0 / (points - 1) as f64, min_step: 1e-10, max_evaluations: 20_000 };
    let r = ps.maximize(f, &best.0, lower, upper);
    if r.value > best.1 {
        (r.point, r.value)
    } else {
        best
    }
}

/// Receiver family used at each step of [`dolinar_multistep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseReceiver {
    Kennedy,
    Nhpa { cutoff: u32 },
    Dephaser { cutoff: u32 },
    PartialDephaser { cutoff: u32 },
    Cavity,
    Ts { cutoff: u32 },
}

impl fmt::Display for BaseReceiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Kennedy => write!(f, "opt_kennedy"),
            Self::Nhpa { cutoff } => write!(f, "nhpa(n={cutoff})"),
            Self::Dephaser { cutoff } => write!(f, "dephaser(n={cutoff})"),
            Self::PartialDephaser { cutoff } => write!(f, "partial_dephaser(n={cutoff})"),
            Self::Cavity => write!(f, "cavity"),
            Self::Ts { cutoff } => write!(f, "ts(n={cutoff})"),
        }
    }
}

/// One step of the adaptive receiver at fixed amplitude, as no-click probabilities of the nulled
/// hypothesis and of the other one.
enum StepModel {
    Kennedy { a: f64 },
    Nhpa { a: f64, n: u32 },
    Dephaser { a: f64, n: u32 },
    PartialDephaser { a: f64, n: u32 },
    Cavity { rho: FockOperator },
    Ts { a: f64, n: u32 },
}

impl StepModel {
    fn new(base: BaseReceiver, a: f64) -> Result<Self, ReceiverError> {
        Ok(match base {
            BaseReceiver::Kennedy => Self::Kennedy { a },
            BaseReceiver::Nhpa { cutoff } => Self::Nhpa { a, n: cutoff },
            BaseReceiver::Dephaser { cutoff } => Self::Dephaser { a, n: cutoff },
            BaseReceiver::PartialDephaser { cutoff } => Self::PartialDephaser { a, n: cutoff },
            BaseReceiver::Cavity => Self::Cavity { rho: cavity_output(C64::new(2.0 * a, 0.0), 0.0)? },
            BaseReceiver::Ts { cutoff } => Self::Ts { a, n: cutoff },
        })
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Nhpa { .. } => (vec![-3.0, 0.0], vec![3.0, GAIN_MAX.ln()]),
            Self::Ts { .. } => (vec![-3.0, -1.5], vec![3.0, 1.5]),
            _ => (vec![-3.0], vec![3.0]),
        }
    }

    /// `(q_null, q_other)` for parameters `x`.
    fn no_click(&self, x: &[f64]) -> Result<(f64, f64), ReceiverError> {
        let beta = x[0];
        let null = (-beta * beta).exp();
        let other = match self {
            Self::Kennedy { a } => (-(2.0 * a - beta).powi(2)).exp(),
            Self::Nhpa { a, n } => nhpa_no_click_plus(*a, beta, x[1].exp(), *n)?,
            Self::Dephaser { a, n } => 1.0 - 2.0 * dephaser_psucc(*a, beta, *n)? + null,
            Self::PartialDephaser { a, n } => 1.0 - 2.0 * partial_dephaser_psucc(*a, beta, *n)? + null,
            Self::Cavity { rho } => displaced_vacuum_expectation(rho, beta),
            Self::Ts { a, n } => return ts_no_click(*a, beta, x[1], *n).map(|(p, m)| (m, p)),
        };
        Ok((null, other))
    }
}

/// MAP success of one binary measurement with no-click probabilities `q` and priors `w`.
fn map_success(w: (f64, f64), q: (f64, f64)) -> f64 {
    (w.0 * q.0).max(w.1 * q.1) + (w.0 * (1.0 - q.0)).max(w.1 * (1.0 - q.1))
}

/// Best single step for priors `(p_plus, p_minus)`: returns no-click probabilities of `(+, -)`.
fn greedy_step(model: &StepModel, p_plus: f64) -> (f64, f64) {
    let (lower, upper) = model.bounds();
    let points = if lower.len() == 1 { 121 } else { 25 };
    let mut best = (f64::NEG_INFINITY, (1.0, 1.0));
    // Nulling |-a⟩ (weights (p_-, p_+)) or, by mirror symmetry, nulling |a⟩.
    for null_minus in [true, false] {
        let w = if null_minus { (1.0 - p_plus, p_plus) } else { (p_plus, 1.0 - p_plus) };
        let f = |x: &[f64]| model.no_click(x).map(|q| map_success(w, q)).unwrap_or(f64::NEG_INFINITY);
        let (x, value) = grid_then_pattern(&f, &lower, &upper, points);
        if value > best.0 {
            let q = model.no_click(&x).expect("feasible optimum");
            best = (value, if null_minus { (q.1, q.0) } else { q });
        }
    }
    best.1
}

/// Success probability of `N` sequential measurements on copies `|±α/√N⟩`.
///
/// Priors are updated by Bayes' rule after each outcome, each step is re-optimized for the current
/// priors and the final decision is MAP.
pub fn dolinar_multistep(alpha: f64, steps: usize, base: BaseReceiver) -> Result<f64, ReceiverError> {
    check(steps >= 1, "steps", steps as f64, "at least one step")?;
    let model = StepModel::new(base, alpha / (steps as f64).sqrt())?;
    model.no_click(&model.bounds().0)?;
    Ok(dolinar_node(&model, 0.5, steps))
}

fn dolinar_node(model: &StepModel, p_plus: f64, left: usize) -> f64 {
    if left == 0 {
        return p_plus.max(1.0 - p_plus);
    }
    let (q_plus, q_minus) = greedy_step(model, p_plus);
    let mut total = 0.0;
    for (lp, lm) in [(q_plus, q_minus), (1.0 - q_plus, 1.0 - q_minus)] {
        let wp = p_plus * lp;
        let wm = (1.0 - p_plus) * lm;
        let w = wp + wm;
        if w > 0.0 {
            total += w * dolinar_node(model, wp / w, left - 1);
        }
    }
    total
}

/// Optimized single-step receiver of the given family, equal priors.
pub fn optimize_base(alpha: f64, base: BaseReceiver) -> Result<ReceiverOptimum, ReceiverError> {
    match base {
        BaseReceiver::Kennedy => Ok(optimized_kennedy(alpha)),
        BaseReceiver::Nhpa { cutoff } => nhpa_optimize_with(alpha, &NhpaSearch { cutoffs: vec![cutoff], ..NhpaSearch::default() }),
        BaseReceiver::Dephaser { cutoff } => dephaser_optimize(alpha, cutoff),
        BaseReceiver::PartialDephaser { cutoff } => partial_dephaser_optimize(alpha, cutoff),
        BaseReceiver::Cavity => cavity_optimize(alpha),
        BaseReceiver::Ts { cutoff } => ts_optimize(alpha, cutoff),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helstrom_limits() {
        assert!((helstrom_bpsk(0.0, 0.3) - 0.3).abs() < 1e-15);
        assert!(helstrom_bpsk(5.0, 0.5) < 1e-20);
    }

    #[test]
    fn homodyne_at_zero() {
        assert!((homodyne_perr(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn homodyne_matches_high_precision_normal_tail() {
        // Φ(-2α) from 30-digit arithmetic.
        for (alpha, tail) in [(0.5, 0.158_655_253_931_457_05), (1.0, 0.022_750_131_948_179_21), (2.0, 3.167_124_183_311_992e-5)] {
            assert!((homodyne_perr(alpha) / tail - 1.0).abs() < 1e-14, "alpha={alpha}");
        }
    }

    #[test]
    fn kennedy_perfect_nulling() {
        let a: f64 = 0.4;
        let expected = 0.5 * (2.0 - (-4.0 * a * a).exp());
        assert!((kennedy_psucc(a, -a) - expected).abs() < 1e-15);
        assert!((expected - 0.736_354).abs() < 1e-6);
        assert!((kennedy_psucc(0.0, 0.7) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unit_gain_is_kennedy() {
        for &(a, b) in &[(0.3, -0.4), (0.8, -1.1), (0.1, 0.2)] {
            let p = nhpa_psucc(a, b, 1.0, 2).unwrap();
            assert!((p - kennedy_psucc(a, b - a)).abs() < 1e-14);
        }
    }

    #[test]
    fn exp_tail_branches_agree() {
        for &x in &[-0.99f64, -0.3, 0.5, 0.999] {
            let direct = x.exp() - 1.0 - x - x * x / 2.0;
            assert!((exp_tail(x, 2) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn nhpa_rejects_invalid() {
        assert!(nhpa_psucc(0.3, -0.4, 0.5, 2).is_err());
        assert!(nhpa_psucc(0.3, -0.4, 2.0, 0).is_err());
    }

    #[test]
    fn infinite_gain_limit() {
        let d = dephaser_psucc(0.3, -0.45, 2).unwrap();
        let g = nhpa_psucc(0.3, -0.45, 1e6, 2).unwrap();
        let inf = nhpa_psucc(0.3, -0.45, f64::INFINITY, 2).unwrap();
        assert!((d - g).abs() < 1e-5);
        assert!((d - inf).abs() < 1e-14);
    }

    #[test]
    fn cavity_vacuum_and_trace() {
        let vac = cavity_output(C64::new(0.0, 0.0), 0.0).unwrap();
        assert!((vac.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        let rho = cavity_output(C64::new(0.5, 0.0), 0.3).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn single_step_equals_base() {
        let a = 0.5;
        let d = dolinar_multistep(a, 1, BaseReceiver::Kennedy).unwrap();
        assert!((d - optimized_kennedy(a).psucc).abs() < 1e-9);
    }
}
