//! PSK Hadamard codes: optimal rates, Vacuum-or-Pulse detection and achievable-rate tables.
//!
//! Energies written `energy` are per codeword (`N·E`); energies written `e` are per mode.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::info::{spectrum_entropy, thermal_entropy, InfoError};
use crate::linalg::{CMatrix, CVector, C64};
use crate::numerics::{exp_weighted_integral, ln_factorial, NumericsError};

/// Absolute tolerance of the outer detection quadratures.
pub const QUAD_TOL: f64 = 1e-10;
/// Absolute tolerance of quadratures nested inside another integrand.
pub const INNER_QUAD_TOL: f64 = 1e-13;
/// Terms of the Poisson series below this relative size are dropped.
const SERIES_CUTOFF: f64 = 1e-18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HadamardError {
    #[error("code length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("number of phases must be at least 1, got {0}")]
    InvalidPhases(usize),
    #[error("energy must be finite and nonnegative, got {0}")]
    InvalidEnergy(f64),
    #[error("realistic detection is defined for M in 1..=4, got {0}")]
    UnsupportedRealistic(usize),
    #[error("splitting steps must be positive")]
    ZeroSplitting,
    #[error("outcome index {index} out of range for M = {m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("empty set of code lengths")]
    EmptyLengths,
    #[error(transparent)]
    Quadrature(#[from] NumericsError),
    #[error(transparent)]
    Info(#[from] InfoError),
}

fn check_length(n: usize) -> Result<(), HadamardError> {
    if n == 0 || !n.is_power_of_two() {
        return Err(HadamardError::NotPowerOfTwo(n));
    }
    Ok(())
}

fn check_phases(m: usize) -> Result<(), HadamardError> {
    if m == 0 {
        return Err(HadamardError::InvalidPhases(m));
    }
    Ok(())
}

fn check_energy(energy: f64) -> Result<(), HadamardError> {
    if !(energy.is_finite() && energy >= 0.0) {
        return Err(HadamardError::InvalidEnergy(energy));
    }
    Ok(())
}

/// Sylvester Hadamard matrix `(−1)^{popcount(j & k)}`.
pub fn hadamard_matrix(n: usize) -> Result<DMatrix<i64>, HadamardError> {
    check_length(n)?;
    Ok(DMatrix::from_fn(n, n, |j, k| if (j & k).count_ones() % 2 == 0 { 1 } else { -1 }))
}

/// Phase `α e^{2πi m/M}` of the `m`-th constellation point.
pub fn psk_phase(alpha: C64, m: usize, phases: usize) -> C64 {
    alpha * C64::from_polar(1.0, 2.0 * PI * m as f64 / phases as f64)
}

/// PSK Hadamard code of length `N` over `M` phases.
#[derive(Debug, Clone, PartialEq)]
pub struct HadamardCode {
    n: usize,
    m: usize,
    alpha: C64,
    h: DMatrix<i64>,
}

impl HadamardCode {
    pub fn new(n: usize, m: usize, alpha: C64) -> Result<Self, HadamardError> {
        check_phases(m)?;
        let h = hadamard_matrix(n)?;
        Ok(Self { n, m, alpha, h })
    }

    pub fn length(&self) -> usize {
        self.n
    }

    pub fn phases(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    /// Mean photon number per mode.
    pub fn mode_energy(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn hadamard(&self) -> &DMatrix<i64> {
        &self.h
    }

    /// Amplitudes of codeword `k` with phase index `phase`.
    pub fn codeword(&self, k: usize, phase: usize) -> CVector {
        let a = psk_phase(self.alpha, phase, self.m);
        CVector::from_fn(self.n, |i, _| a * self.h[(i, k)] as f64)
    }

    /// `N × NM` amplitude matrix; column `phase·N + k` holds codeword `(k, phase)`.
    pub fn amplitude_matrix(&self) -> CMatrix {
        let n = self.n;
        CMatrix::from_fn(n, n * self.m, |i, col| {
            let (phase, k) = (col / n, col % n);
            psk_phase(self.alpha, phase, self.m) * self.h[(i, k)] as f64
        })
    }

    /// Applies `H_N/√N` to every codeword and returns the largest deviation from the PPM image.
    pub fn ppm_transform_check(&self) -> f64 {
        let n = self.n;
        let scale = 1.0 / (n as f64).sqrt();
        let h = CMatrix::from_fn(n, n, |i, j| C64::new(self.h[(i, j)] as f64 * scale, 0.0));
        let amps = self.amplitude_matrix();
        let image = &h * &amps;
        let mut worst: f64 = 0.0;
        for col in 0..n * self.m {
            let (phase, k) = (col / n, col % n);
            let pulse = psk_phase(self.alpha, phase, self.m) * (n as f64).sqrt();
            for i in 0..n {
                let target = if i == k { pulse } else { C64::new(0.0, 0.0) };
                worst = worst.max((image[(i, col)] - target).norm());
            }
        }
        worst
    }

    /// Overlap matrix `⟨v_a|v_b⟩` of all `NM` codewords.
    pub fn gram_matrix(&self) -> CMatrix {
        let amps = self.amplitude_matrix();
        let size = amps.ncols();
        CMatrix::from_fn(size, size, |a, b| {
            let mut log = C64::new(0.0, 0.0);
            for i in 0..self.n {
                let (x, y) = (amps[(i, a)], amps[(i, b)]);
                log += x.conj() * y - 0.5 * (x.norm_sqr() + y.norm_sqr());
            }
            log.exp()
        })
    }
}

fn poisson_weight(k: usize, energy: f64) -> f64 {
    if energy == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * energy.ln() - energy - ln_factorial(k)).exp()
}

/// Poisson mass of `k ≡ ℓ (mod M)`, optionally skipping `k = 0`.
fn residue_masses(m: usize, energy: f64, skip_zero: bool) -> Vec<f64> {
    let mut out = vec![0.0; m];
    if energy == 0.0 {
        if !skip_zero {
            out[0] = 1.0;
        }
        return out;
    }
    let mode = energy.floor() as usize;
    let start = usize::from(skip_zero);
    let mut k = start;
    loop {
        let w = poisson_weight(k, energy);
        out[k % m] += w;
        if k > mode && w < SERIES_CUTOFF {
            break;
        }
        k += 1;
    }
    out
}

/// Gram eigenvalues `λ_ℓ` of `M` symmetric coherent states of energy `energy`; they sum to `M`.
pub fn psk_eigenvalues(m: usize, energy: f64) -> Result<Vec<f64>, HadamardError> {
    check_phases(m)?;
    check_energy(energy)?;
    Ok(residue_masses(m, energy, false).into_iter().map(|w| m as f64 * w).collect())
}

/// The same eigenvalues from the complex exponential sum, returned with their imaginary parts.
pub fn psk_eigenvalues_direct(m: usize, energy: f64) -> Result<Vec<C64>, HadamardError> {
    check_phases(m)?;
    check_energy(energy)?;
    let mf = m as f64;
    Ok((0..m)
        .map(|l| {
            (0..m)
                .map(|h| {
                    let w = C64::from_polar(1.0, 2.0 * PI * h as f64 / mf);
                    (-(C64::new(1.0, 0.0) - w) * energy - C64::new(0.0, 2.0 * PI * (l * h) as f64 / mf)).exp()
                })
                .sum()
        })
        .collect())
}

/// Eigenvalue of the code ensemble with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub value: f64,
    pub multiplicity: usize,
}

/// Spectrum of the average code state at mode energy `e`.
pub fn optimal_rate_spectrum(n: usize, m: usize, e: f64) -> Result<Vec<SpectralLine>, HadamardError> {
    check_length(n)?;
    check_phases(m)?;
    check_energy(e)?;
    let energy = n as f64 * e;
    let (nf, mf) = (n as f64, m as f64);
    let lambda = psk_eigenvalues(m, energy)?;
    let vacuum = (-energy).exp();
    let nonzero_zero_residue = residue_masses(m, energy, true)[0];
    let mut lines = vec![
        SpectralLine { value: (lambda[0] + (nf - 1.0) * mf * vacuum) / (mf * nf), multiplicity: 1 },
        SpectralLine { value: nonzero_zero_residue / nf, multiplicity: n - 1 },
    ];
    lines.extend(lambda[1..].iter().map(|&l| SpectralLine { value: l / (mf * nf), multiplicity: n }));
    Ok(lines)
}

/// Holevo rate per mode of the PSK Hadamard code.
pub fn optimal_rate(n: usize, m: usize, e: f64) -> Result<f64, HadamardError> {
    let lines = optimal_rate_spectrum(n, m, e)?;
    let total: f64 = lines.iter().map(|l| l.multiplicity as f64 * spectrum_entropy(&[l.value])).sum();
    Ok(total / n as f64)
}

/// Capacity of the lossless bosonic channel at mode energy `e`.
pub fn classical_capacity(e: f64) -> f64 {
    thermal_entropy(e)
}

/// Square-root measurement statistics of `M` symmetric coherent states; rows are the sent index.
pub fn psk_helstrom_matrix(m: usize, energy: f64) -> Result<DMatrix<f64>, HadamardError> {
    let roots: Vec<f64> = psk_eigenvalues(m, energy)?.into_iter().map(|l| l.max(0.0).sqrt()).collect();
    let mf = m as f64;
    let row: Vec<f64> = (0..m)
        .map(|d| {
            let amp: C64 = roots
                .iter()
                .enumerate()
                .map(|(j, r)| C64::from_polar(*r, -2.0 * PI * (j * d) as f64 / mf))
                .sum();
            (amp / mf).norm_sqr()
        })
        .collect();
    Ok(DMatrix::from_fn(m, m, |sent, guess| row[(guess + m - sent) % m]))
}

pub fn psk_helstrom_prob(l: usize, m_sent: usize, m: usize, energy: f64) -> Result<f64, HadamardError> {
    check_index(l, m)?;
    check_index(m_sent, m)?;
    Ok(psk_helstrom_matrix(m, energy)?[(m_sent, l)])
}

fn check_index(index: usize, m: usize) -> Result<(), HadamardError> {
    if index >= m {
        return Err(HadamardError::IndexOutOfRange { index, m });
    }
    Ok(())
}

/// Energy argument of the binary Helstrom stage in the realistic cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyConvention {
    /// Arguments exactly as written in the cascade formulas.
    #[default]
    Literal,
    /// Per-state energy of the residual pair, half the literal argument.
    Physical,
}

/// Binary Helstrom success for `±√e`.
pub fn binary_helstrom_success(e: f64) -> f64 {
    0.5 * (1.0 + (-(-4.0 * e.max(0.0)).exp_m1()).sqrt())
}

/// Route used for the two-stage correct-detection term at `M = 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CascadeRoute {
    Nested,
    Reduced,
}

fn realistic_three_correct(energy: f64, conv: EnergyConvention) -> Result<f64, HadamardError> {
    let scale = match conv {
        EnergyConvention::Literal => 0.5,
        EnergyConvention::Physical => 0.25,
    };
    let v = exp_weighted_integral(|y| vec![binary_helstrom_success(scale * y)], 3.0 * energy, 1, INNER_QUAD_TOL)?;
    Ok(v[0])
}

fn realistic_four_correct(energy: f64, conv: EnergyConvention, route: CascadeRoute) -> Result<f64, HadamardError> {
    let scale = match conv {
        EnergyConvention::Literal => 1.0,
        EnergyConvention::Physical => 0.5,
    };
    let outer = 2.0 * energy;
    let v = match route {
        CascadeRoute::Nested => {
            let failure = std::cell::Cell::new(None);
            let v = exp_weighted_integral(
                |b| match exp_weighted_integral(|y| vec![binary_helstrom_success(scale * y)], b, 1, INNER_QUAD_TOL) {
                    Ok(inner) => inner,
                    Err(err) => {
                        failure.set(Some(err));
                        vec![0.0]
                    }
                },
                outer,
                1,
                INNER_QUAD_TOL,
            )?;
            if let Some(err) = failure.take() {
                return Err(err.into());
            }
            v
        }
        CascadeRoute::Reduced => exp_weighted_integral(
            |t| vec![(outer - t) * binary_helstrom_success(scale * t)],
            outer,
            1,
            INNER_QUAD_TOL,
        )?,
    };
    Ok(v[0])
}

fn realistic_matrix(m: usize, energy: f64, conv: EnergyConvention, route: CascadeRoute) -> Result<DMatrix<f64>, HadamardError> {
    check_energy(energy)?;
    match m {
        1 | 2 => psk_helstrom_matrix(m, energy),
        3 => {
            let miss = (-3.0 * energy).exp();
            let p11 = realistic_three_correct(energy, conv)?;
            let p21 = (1.0 - miss - p11).max(0.0);
            Ok(DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, miss, p11, p21, miss, p21, p11]))
        }
        4 => {
            let miss = (-2.0 * energy).exp();
            let p11 = realistic_four_correct(energy, conv, route)?;
            let p21 = 2.0 * energy * miss;
            let p31 = (1.0 - miss - p11 - p21).max(0.0);
            let far = (-4.0 * energy).exp();
            #[rustfmt::skip]
            let rows = [
                1.0, 0.0, 0.0, 0.0,
                miss, p11, p21, p31,
                far, 0.0, 1.0 - far, 0.0,
                miss, p31, p21, p11,
            ];
            Ok(DMatrix::from_row_slice(4, 4, &rows))
        }
        _ => Err(HadamardError::UnsupportedRealistic(m)),
    }
}

/// Realistic cascade probability of guessing `l` when `m_sent` was sent, evaluated with the nested quadrature.
pub fn realistic_psk(l: usize, m_sent: usize, m: usize, energy: f64, conv: EnergyConvention) -> Result<f64, HadamardError> {
    check_index(l, m)?;
    check_index(m_sent, m)?;
    Ok(realistic_matrix(m, energy, conv, CascadeRoute::Nested)?[(m_sent, l)])
}

/// Full realistic cascade matrix, evaluated with the nested quadrature.
pub fn realistic_psk_matrix(m: usize, energy: f64, conv: EnergyConvention) -> Result<DMatrix<f64>, HadamardError> {
    realistic_matrix(m, energy, conv, CascadeRoute::Nested)
}

/// PSK stage used after a Vacuum-or-Pulse click.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetectionKernel {
    #[default]
    Helstrom,
    Realistic(EnergyConvention),
}

impl DetectionKernel {
    pub fn matrix(&self, m: usize, energy: f64) -> Result<DMatrix<f64>, HadamardError> {
        match self {
            DetectionKernel::Helstrom => psk_helstrom_matrix(m, energy),
            DetectionKernel::Realistic(conv) => realistic_matrix(m, energy, *conv, CascadeRoute::Reduced),
        }
    }

    pub fn validate(&self, m: usize) -> Result<(), HadamardError> {
        check_phases(m)?;
        if matches!(self, DetectionKernel::Realistic(_)) && m > 4 {
            return Err(HadamardError::UnsupportedRealistic(m));
        }
        Ok(())
    }
}

impl fmt::Display for DetectionKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetectionKernel::Helstrom => write!(f, "helstrom"),
            DetectionKernel::Realistic(EnergyConvention::Literal) => write!(f, "realistic"),
            DetectionKernel::Realistic(EnergyConvention::Physical) => write!(f, "realistic-physical"),
        }
    }
}

impl FromStr for DetectionKernel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "helstrom" => Ok(DetectionKernel::Helstrom),
            "realistic" => Ok(DetectionKernel::Realistic(EnergyConvention::Literal)),
            "realistic-physical" => Ok(DetectionKernel::Realistic(EnergyConvention::Physical)),
            other => Err(format!("unknown kernel '{other}'")),
        }
    }
}

/// Number of beam-splitter extractions in the Vacuum-or-Pulse stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    Finite(usize),
    #[default]
    Infinite,
}

impl fmt::Display for Splitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Splitting::Finite(j) => write!(f, "{j}"),
            Splitting::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Splitting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "inf" {
            return Ok(Splitting::Infinite);
        }
        match s.parse::<usize>() {
            Ok(0) => Err("splitting steps must be positive".into()),
            Ok(j) => Ok(Splitting::Finite(j)),
            Err(_) => Err(format!("invalid splitting '{s}', expected a positive integer or 'inf'")),
        }
    }
}

/// Vacuum-or-Pulse conditional statistics for one pulsed mode.
#[derive(Debug, Clone, PartialEq)]
pub struct VpChannel {
    /// `detect[(m, l)]`: a click followed by the guess `l` when `m` was sent.
    pub detect: DMatrix<f64>,
    /// Probability that no click occurs.
    pub miss: f64,
}

pub fn vp_matrix(m: usize, energy: f64, kernel: DetectionKernel, splitting: Splitting) -> Result<VpChannel, HadamardError> {
    kernel.validate(m)?;
    check_energy(energy)?;
    let miss = (-energy).exp();
    let detect = match splitting {
        Splitting::Finite(0) => return Err(HadamardError::ZeroSplitting),
        Splitting::Finite(j) => {
            let step = energy / j as f64;
            let click = -(-step).exp_m1();
            let mut acc = DMatrix::zeros(m, m);
            for idx in 1..=j {
                let weight = (-step * (idx - 1) as f64).exp() * click;
                acc += kernel.matrix(m, step * (j - idx) as f64)? * weight;
            }
            acc
        }
        Splitting::Infinite => {
            let failure = std::cell::RefCell::new(None);
            let flat = exp_weighted_integral(
                |s| match kernel.matrix(m, s) {
                    Ok(mat) => mat.as_slice().to_vec(),
                    Err(err) => {
                        failure.borrow_mut().get_or_insert(err);
                        vec![0.0; m * m]
                    }
                },
                energy,
                m * m,
                QUAD_TOL,
            )?;
            if let Some(err) = failure.into_inner() {
                return Err(err);
            }
            DMatrix::from_column_slice(m, m, &flat)
        }
    };
    Ok(VpChannel { detect, miss })
}

pub fn vp_prob(
    l: usize,
    m_sent: usize,
    m: usize,
    energy: f64,
    splitting: Splitting,
    kernel: DetectionKernel,
) -> Result<f64, HadamardError> {
    check_index(l, m)?;
    check_index(m_sent, m)?;
    Ok(vp_matrix(m, energy, kernel, splitting)?.detect[(m_sent, l)])
}

/// Rate per mode of a PPM-like channel whose pulsed slot has conditional matrix `p` over `n` slots.
///
/// A miss outcome independent of the input carries no information and is omitted.
pub fn conditional_rate(p: &DMatrix<f64>, n: usize) -> f64 {
    let scale = (p.nrows() * n) as f64;
    let plogp = |v: f64| if v > 0.0 { v * v.log2() } else { 0.0 };
    let joint: f64 = p.iter().map(|&v| plogp(v)).sum();
    let outputs: f64 = p.column_iter().map(|c| plogp(c.sum())).sum();
    let total = p.sum();
    ((joint - outputs + total * scale.log2()) / scale).max(0.0)
}

/// Rate of the Hadamard code read out with Vacuum-or-Pulse detection.
pub fn had_rate(n: usize, m: usize, e: f64, kernel: DetectionKernel, splitting: Splitting) -> Result<f64, HadamardError> {
    check_length(n)?;
    check_energy(e)?;
    let channel = vp_matrix(m, n as f64 * e, kernel, splitting)?;
    Ok(conditional_rate(&channel.detect, n))
}

/// Rate of single-mode PSK read out with the square-root measurement.
pub fn separable_rate(m: usize, e: f64) -> Result<f64, HadamardError> {
    let p = psk_helstrom_matrix(m, e)?;
    Ok(conditional_rate(&p, 1))
}

/// Best rate over the code lengths in `lengths`, with the maximizing length.
pub fn envelope(
    lengths: &[usize],
    m: usize,
    e: f64,
    kernel: DetectionKernel,
    splitting: Splitting,
) -> Result<(f64, usize), HadamardError> {
    if lengths.is_empty() {
        return Err(HadamardError::EmptyLengths);
    }
    let rates: Vec<f64> = lengths
        .par_iter()
        .map(|&n| had_rate(n, m, e, kernel, splitting))
        .collect::<Result<_, _>>()?;
    let (idx, best) = rates
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc });
    Ok((best, lengths[idx]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Optimal,
    Helstrom,
    Realistic,
    Separable,
    Capacity,
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RateKind::Optimal => "optimal",
            RateKind::Helstrom => "helstrom",
            RateKind::Realistic => "realistic",
            RateKind::Separable => "separable",
            RateKind::Capacity => "capacity",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub energy: f64,
    pub n: usize,
    pub m: usize,
    pub kind: RateKind,
    pub rate: f64,
}

/// Grid of `(E, N, M)` rates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
}

impl RateTable {
    /// Largest excess of any rate over the capacity at its energy.
    pub fn max_capacity_excess(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.rate - classical_capacity(r.energy))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Parameters of a rate sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSweep {
    pub energies: Vec<f64>,
    pub lengths: Vec<usize>,
    pub phases: Vec<usize>,
    pub kinds: Vec<RateKind>,
    pub splitting: Splitting,
    pub convention: EnergyConvention,
}

fn rate_point(sweep: &RateSweep, e: f64, n: usize, m: usize, kind: RateKind) -> Result<f64, HadamardError> {
    match kind {
        RateKind::Optimal => optimal_rate(n, m, e),
        RateKind::Helstrom => had_rate(n, m, e, DetectionKernel::Helstrom, sweep.splitting),
        RateKind::Realistic => had_rate(n, m, e, DetectionKernel::Realistic(sweep.convention), sweep.splitting),
        RateKind::Separable => separable_rate(m, e),
        RateKind::Capacity => Ok(classical_capacity(e)),
    }
}

impl RateSweep {
    /// Evaluates every grid point in parallel; rows follow the order `E`, `N`, `M`, kind.
    pub fn run(&self) -> Result<RateTable, HadamardError> {
        let mut points = Vec::new();
        for &e in &self.energies {
            for &n in &self.lengths {
                for &m in &self.phases {
                    for &kind in &self.kinds {
                        points.push((e, n, m, kind));
                    }
                }
            }
        }
        let rows = points
            .par_iter()
            .map(|&(energy, n, m, kind)| {
                rate_point(self, energy, n, m, kind).map(|rate| RateRow { energy, n, m, kind, rate })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RateTable { rows })
    }
}
