//! Truncated Fock-space states, operators, channels and Wigner functions.
//!
//! A cutoff `n` means the basis `|0⟩, …, |n⟩`, so vectors have `n + 1` entries.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg::{exp_anti_hermitian, C64, CMatrix, CVector};
use crate::numerics::{ln_binomial, ln_factorial};

/// Default bound on the norm discarded by truncation.
pub const TRUNCATION_TOL: f64 = 1e-12;

/// Errors raised by Fock-space constructions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("cutoff {cutoff} discards norm {deficit:e}, above tolerance {tol:e}")]
    Truncation { cutoff: usize, deficit: f64, tol: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },
}

/// Cutoff large enough for a state of mean photon number `energy`: `ceil(E + 10 sqrt(E) + 20)`.
pub fn auto_cutoff(energy: f64) -> usize {
    let e = energy.max(0.0);
    (e + 10.0 * e.sqrt() + 20.0).ceil() as usize
}

/// State vector in a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amplitudes: CVector,
}

impl FockVector {
    pub fn from_amplitudes(amplitudes: CVector) -> Self {
        Self { amplitudes }
    }

    /// Number state `|n⟩` in a basis with the given cutoff.
    pub fn number(n: usize, cutoff: usize) -> Result<Self, FockError> {
        if n > cutoff {
            return Err(FockError::InvalidParameter(format!("level {n} exceeds cutoff {cutoff}")));
        }
        let mut v = CVector::zeros(cutoff + 1);
        v[n] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn cutoff(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Projector `|ψ⟩⟨ψ|`.
    pub fn to_density(&self) -> FockOperator {
        FockOperator::from_matrix(&self.amplitudes * self.amplitudes.adjoint())
    }
}

/// Operator on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: CMatrix,
}

impl FockOperator {
    pub fn from_matrix(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn cutoff(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn identity(cutoff: usize) -> Self {
        Self::from_matrix(CMatrix::identity(cutoff + 1, cutoff + 1))
    }

    /// Annihilation operator `a`.
    pub fn annihilation(cutoff: usize) -> Self {
        let d = cutoff + 1;
        Self::from_matrix(CMatrix::from_fn(d, d, |r, c| {
            if c == r + 1 {
                C64::new((c as f64).sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Number operator `a†a`.
    pub fn number(cutoff: usize) -> Self {
        diagonal(cutoff, |n| n as f64)
    }

    /// Parity operator `(-1)^{a†a}`.
    pub fn parity(cutoff: usize) -> Self {
        diagonal(cutoff, |n| if n % 2 == 0 { 1.0 } else { -1.0 })
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn dagger(&self) -> Self {
        Self::from_matrix(self.matrix.adjoint())
    }

    pub fn apply(&self, v: &FockVector) -> FockVector {
        FockVector::from_amplitudes(&self.matrix * v.amplitudes())
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, v: &FockVector) -> C64 {
        v.amplitudes().dotc(&(&self.matrix * v.amplitudes()))
    }

    /// `O ρ O†`.
    pub fn conjugate(&self, rho: &FockOperator) -> FockOperator {
        Self::from_matrix(&self.matrix * &rho.matrix * self.matrix.adjoint())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_matrix(&self.matrix * &other.matrix)
    }

    /// Restriction to a smaller cutoff.
    pub fn truncate(&self, cutoff: usize) -> Self {
        let d = (cutoff + 1).min(self.dim());
        Self::from_matrix(self.matrix.view((0, 0), (d, d)).into_owned())
    }
}

fn diagonal(cutoff: usize, f: impl Fn(usize) -> f64) -> FockOperator {
    let d = cutoff + 1;
    FockOperator::from_matrix(CMatrix::from_fn(d, d, |r, c| if r == c { C64::new(f(r), 0.0) } else { C64::new(0.0, 0.0) }))
}

/// Probability mass of a Poisson law with mean `mean` above `cutoff`.
fn poisson_tail(mean: f64, cutoff: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut tail = 0.0;
    let mut n = cutoff + 1;
    loop {
        let term = (-mean + n as f64 * ln_mean - ln_factorial(n)).exp();
        tail += term;
        if (n as f64 > mean && term < 1e-18 * tail.max(1e-300)) || term == 0.0 {
            break;
        }
        n += 1;
    }
    tail
}

/// Coherent amplitude `⟨n|α⟩ = e^{-|α|²/2} α^n / sqrt(n!)`.
pub fn coherent_amplitude(alpha: C64, n: usize) -> C64 {
    let x = alpha.norm_sqr();
    if alpha == C64::new(0.0, 0.0) {
        return if n == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let ln_mag = -0.5 * x + n as f64 * alpha.norm().ln() - 0.5 * ln_factorial(n);
    C64::from_polar(ln_mag.exp(), n as f64 * alpha.arg())
}

/// Coherent state with the default truncation tolerance.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<FockVector, FockError> {
    coherent_state_with_tol(alpha, cutoff, TRUNCATION_TOL)
}

/// Coherent state `|α⟩`; fails when the discarded norm exceeds `tol`.
pub fn coherent_state_with_tol(alpha: C64, cutoff: usize, tol: f64) -> Result<FockVector, FockError> {
    let deficit = poisson_tail(alpha.norm_sqr(), cutoff);
    if deficit > tol {
        return Err(FockError::Truncation { cutoff, deficit, tol });
    }
    let v = CVector::from_fn(cutoff + 1, |n, _| coherent_amplitude(alpha, n));
    Ok(FockVector::from_amplitudes(v))
}

/// Generalized Laguerre values `L_0^{(a)}(x), …, L_n^{(a)}(x)` by the three-term recurrence.
fn laguerre_sequence(n: usize, a: usize, x: f64) -> Vec<f64> {
    let a = a as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(1.0 + a - x);
    }
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - x) * out[j] - (jf + a) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// Matrix element `⟨m|D(β)|n⟩` of the displacement operator.
pub fn displacement_element(m: usize, n: usize, beta: C64) -> C64 {
    let x = beta.norm_sqr();
    if x == 0.0 {
        return if m == n { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
    let d = hi - lo;
    let lag = laguerre_sequence(lo, d, x)[lo];
    let ln_mag = 0.5 * (ln_factorial(lo) - ln_factorial(hi)) + d as f64 * x.sqrt().ln() - 0.5 * x;
    let base = if m >= n { beta } else { -beta.conj() };
    C64::from_polar(ln_mag.exp(), d as f64 * base.arg()) * lag
}

/// Displacement operator `D(β)` restricted to levels `0..=cutoff`; entries are exact matrix elements.
pub fn displacement_operator(beta: C64, cutoff: usize) -> FockOperator {
    let d = cutoff + 1;
    let x = beta.norm_sqr();
    let mut m = CMatrix::zeros(d, d);
    if x == 0.0 {
        return FockOperator::identity(cutoff);
    }
    let ln_abs = x.sqrt().ln();
    for lo in 0..d {
        for hi in lo..d {
            let diff = hi - lo;
            let lag = laguerre_sequence(lo, diff, x)[lo];
            let mag = (0.5 * (ln_factorial(lo) - ln_factorial(hi)) + diff as f64 * ln_abs - 0.5 * x).exp() * lag;
            m[(hi, lo)] = C64::from_polar(mag, diff as f64 * beta.arg());
            if diff > 0 {
                m[(lo, hi)] = C64::from_polar(mag, diff as f64 * (-beta.conj()).arg());
            }
        }
    }
    FockOperator::from_matrix(m)
}

/// Squeezing operator `exp(-(r/2)(a†² - a²))` restricted to `0..=cutoff`.
///
/// The exponential is taken in an enlarged space and then cropped.
pub fn squeezing_operator(r: f64, cutoff: usize) -> FockOperator {
    let work = cutoff + 1 + (cutoff + 1).max(60) + (40.0 * r.abs()).ceil() as usize;
    let a = FockOperator::annihilation(work).into_matrix();
    let ad = a.adjoint();
    let gen = (&ad * &ad - &a * &a).scale(-0.5 * r);
    FockOperator::from_matrix(exp_anti_hermitian(&gen)).truncate(cutoff)
}

/// Squeezed-vacuum amplitude on `|2ℓ⟩`.
pub fn squeezed_amplitude(r: f64, l: usize) -> f64 {
    let t = -r.tanh();
    let sign = if t < 0.0 && l % 2 == 1 { -1.0 } else { 1.0 };
    if t == 0.0 {
        return if l == 0 { 1.0 / r.cosh().sqrt() } else { 0.0 };
    }
    let ln_mag = 0.5 * ln_factorial(2 * l) - l as f64 * 2f64.ln() - ln_factorial(l) + l as f64 * t.abs().ln()
        - 0.5 * r.cosh().ln();
    sign * ln_mag.exp()
}

/// Squeezed vacuum `exp(-(r/2)(a†² - a²))|0⟩` with the default truncation tolerance.
pub fn squeezed_state(r: f64, cutoff: usize) -> Result<FockVector, FockError> {
    let mut v = CVector::zeros(cutoff + 1);
    for l in 0..=cutoff / 2 {
        let a = squeezed_amplitude(r, l);
        v[2 * l] = C64::new(a, 0.0);
    }
    let mut tail = 0.0;
    let mut l = cutoff / 2 + 1;
    loop {
        let a = squeezed_amplitude(r, l);
        tail += a * a;
        if a * a < 1e-20 * tail.max(1e-300) || a == 0.0 || l > 100_000 {
            break;
        }
        l += 1;
    }
    if tail > TRUNCATION_TOL {
        return Err(FockError::Truncation { cutoff, deficit: tail, tol: TRUNCATION_TOL });
    }
    Ok(FockVector::from_amplitudes(v))
}

/// Default cap on the number of squeezing terms in [`squeezed_displaced_overlap`].
pub const OVERLAP_MAX_TERMS: usize = 10_000;

/// `⟨k|U_sq(r) D(β)|0⟩` summed as a series over the squeezed-vacuum components.
///
/// Uses `U_sq(r) D(β) |0⟩ = D(β cosh r - β* sinh r) U_sq(r) |0⟩` and the Laguerre form of
/// `⟨k|D|2ℓ⟩`; the sum stops once the bound on the remaining terms drops below `tol`.
pub fn squeezed_displaced_overlap(k: usize, beta: C64, r: f64, tol: f64, max_terms: usize) -> Result<C64, FockError> {
    let bt = beta * r.cosh() - beta.conj() * r.sinh();
    let t = r.tanh().abs();
    let mut sum = C64::new(0.0, 0.0);
    for l in 0..max_terms {
        let amp = squeezed_amplitude(r, l);
        let inner = displacement_element(k, 2 * l, bt);
        sum += inner * amp;
        let bound = if t < 1.0 { amp.abs() * t / (1.0 - t) } else { f64::INFINITY };
        if bound < tol {
            return Ok(sum);
        }
    }
    Err(FockError::NonConvergence { terms: max_terms })
}

/// Hermite function `ψ_n(q) = π^{-1/4} e^{-q²/2} H_n(q) / sqrt(2^n n!)` for `n = 0..=cutoff`.
fn hermite_functions(q: f64, cutoff: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    out.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * q * q).exp());
    if cutoff >= 1 {
        out.push(2f64.sqrt() * q * out[0]);
    }
    for n in 1..cutoff {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * q * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Components `⟨n|q_φ⟩` of the eigenvector of `q cos φ + p sin φ` with eigenvalue `q`.
pub fn quadrature_eigenvector(q: f64, phi: f64, cutoff: usize) -> FockVector {
    let h = hermite_functions(q, cutoff);
    FockVector::from_amplitudes(CVector::from_fn(cutoff + 1, |n, _| C64::from_polar(h[n], phi * n as f64)))
}

/// Thermal state with mean photon number `nbar`.
pub fn thermal_state(nbar: f64, cutoff: usize) -> Result<FockOperator, FockError> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(FockError::InvalidParameter(format!("mean photon number {nbar} must be non-negative")));
    }
    let ratio = nbar / (nbar + 1.0);
    let deficit = ratio.powi(cutoff as i32 + 1);
    if deficit > TRUNCATION_TOL {
        return Err(FockError::Truncation { cutoff, deficit, tol: TRUNCATION_TOL });
    }
    Ok(diagonal(cutoff, |n| ratio.powi(n as i32) / (nbar + 1.0)))
}

/// Pure-loss channel of transmissivity `eta`.
pub fn apply_loss(rho: &FockOperator, eta: f64) -> Result<FockOperator, FockError> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(FockError::InvalidParameter(format!("transmissivity {eta} outside [0, 1]")));
    }
    let d = rho.dim();
    let weight = |n: usize, l: usize| -> f64 {
        // ⟨n-l|K_l|n⟩
        if eta == 1.0 {
            return if l == 0 { 1.0 } else { 0.0 };
        }
        if eta == 0.0 {
            return if l == n { 1.0 } else { 0.0 };
        }
        (0.5 * (ln_binomial(n, l) + (n - l) as f64 * eta.ln() + l as f64 * (1.0 - eta).ln())).exp()
    };
    let src = rho.matrix();
    let out = CMatrix::from_fn(d, d, |a, b| {
        let mut acc = C64::new(0.0, 0.0);
        let mut l = 0;
        while a + l < d && b + l < d {
            acc += src[(a + l, b + l)] * (weight(a + l, l) * weight(b + l, l));
            l += 1;
        }
        acc
    });
    Ok(FockOperator::from_matrix(out))
}

/// Quantum-limited amplifier of gain `kappa`; the output is cropped to the input cutoff.
pub fn apply_amplifier(rho: &FockOperator, kappa: f64) -> Result<FockOperator, FockError> {
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(FockError::InvalidParameter(format!("amplifier gain {kappa} must be at least 1")));
    }
    let d = rho.dim();
    let weight = |n: usize, k: usize| -> f64 {
        // ⟨n+k|B_k|n⟩
        if kappa == 1.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        (0.5 * (ln_binomial(n + k, k) + k as f64 * (kappa - 1.0).ln() - (k + 1 + n) as f64 * kappa.ln())).exp()
    };
    let src = rho.matrix();
    let out = CMatrix::from_fn(d, d, |a, b| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..=a.min(b) {
            acc += src[(a - k, b - k)] * (weight(a - k, k) * weight(b - k, k));
        }
        acc
    });
    Ok(FockOperator::from_matrix(out))
}

/// Wigner function sampled on a rectangular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub q_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    /// Rows follow `q_axis`, columns follow `p_axis`.
    pub values: DMatrix<f64>,
}

impl WignerGrid {
    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let wq = trapezoid_weights(&self.q_axis);
        let wp = trapezoid_weights(&self.p_axis);
        let mut s = 0.0;
        for (i, a) in wq.iter().enumerate() {
            for (j, b) in wp.iter().enumerate() {
                s += a * b * self.values[(i, j)];
            }
        }
        s
    }
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let h = axis[i] - axis[i - 1];
        w[i - 1] += 0.5 * h;
        w[i] += 0.5 * h;
    }
    w
}

/// Wigner function at one phase-space point, `W = (1/π) Tr[ρ D(α) Π D(α)†]` with `α = (q + ip)/sqrt 2`.
pub fn wigner_point(rho: &FockOperator, q: f64, p: f64) -> f64 {
    let alpha = C64::new(q, p) / 2f64.sqrt();
    let d2 = displacement_operator(alpha * 2.0, rho.cutoff());
    let m = rho.matrix();
    let mut acc = C64::new(0.0, 0.0);
    for col in 0..rho.dim() {
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        for row in 0..rho.dim() {
            // Tr[ρ D(2α) Π] = Σ ρ_{col,row} ⟨row|D(2α)|col⟩ (-1)^col
            acc += m[(col, row)] * d2.matrix()[(row, col)] * sign;
        }
    }
    acc.re / std::f64::consts::PI
}

/// Wigner function on the grid `q_axis × p_axis`.
pub fn wigner(rho: &FockOperator, q_axis: &[f64], p_axis: &[f64]) -> WignerGrid {
    let values = DMatrix::from_fn(q_axis.len(), p_axis.len(), |i, j| wigner_point(rho, q_axis[i], p_axis[j]));
    WignerGrid { q_axis: q_axis.to_vec(), p_axis: p_axis.to_vec(), values }
}
