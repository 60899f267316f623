//! Gaussian states and channels in the phase-space (mean, covariance) representation.
//!
//! Quadratures are ordered `(q_1, p_1, q_2, p_2, …)` with `q = (a + a†)/sqrt 2`; the vacuum
//! covariance is `I/2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{complexify, hermitian_eigenvalues, C64};

/// Tolerance for positivity checks on covariance matrices.
pub const PHYSICALITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussianError {
    #[error("dimension mismatch: expected {expected} modes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("covariance violates the uncertainty principle (min eigenvalue {min_eigenvalue:e})")]
    Unphysical { min_eigenvalue: f64 },
    #[error("unknown symplectic kind `{0}`")]
    UnknownKind(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Symplectic form `Ω = ⊕ [[0, 1], [-1, 0]]`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        m[(2 * k, 2 * k + 1)] = 1.0;
        m[(2 * k + 1, 2 * k)] = -1.0;
    }
    m
}

/// Gaussian state given by first moments and covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Validated constructor; the covariance must be symmetric and satisfy `V + iΩ/2 ≥ 0`.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self, GaussianError> {
        if cov.nrows() != cov.ncols() || !cov.nrows().is_multiple_of(2) || mean.len() != cov.nrows() {
            return Err(GaussianError::DimensionMismatch { expected: cov.nrows() / 2, found: mean.len() / 2 });
        }
        let sym = (&cov + cov.transpose()) * 0.5;
        let s = Self { mean, cov: sym };
        let min = s.uncertainty_min_eigenvalue();
        if min < -PHYSICALITY_TOL {
            return Err(GaussianError::Unphysical { min_eigenvalue: min });
        }
        Ok(s)
    }

    pub fn vacuum(modes: usize) -> Self {
        Self { mean: DVector::zeros(2 * modes), cov: DMatrix::identity(2 * modes, 2 * modes) * 0.5 }
    }

    pub fn coherent(alpha: Complex64) -> Self {
        let s2 = 2f64.sqrt();
        Self { mean: DVector::from_vec(vec![s2 * alpha.re, s2 * alpha.im]), cov: DMatrix::identity(2, 2) * 0.5 }
    }

    pub fn thermal(nbar: f64) -> Result<Self, GaussianError> {
        if !(nbar >= 0.0) {
            return Err(GaussianError::InvalidParameter(format!("mean photon number {nbar} must be non-negative")));
        }
        Ok(Self { mean: DVector::zeros(2), cov: DMatrix::identity(2, 2) * (nbar + 0.5) })
    }

    /// Squeezed vacuum with `⟨q²⟩ = e^{-2r}/2`.
    pub fn squeezed(r: f64) -> Self {
        Self {
            mean: DVector::zeros(2),
            cov: DMatrix::from_diagonal(&DVector::from_vec(vec![(-2.0 * r).exp() / 2.0, (2.0 * r).exp() / 2.0])),
        }
    }

    /// Two-mode squeezed vacuum.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let s = symplectic(&SymplecticKind::TwoModeSqueezer { r });
        let v = &s * (DMatrix::identity(4, 4) * 0.5) * s.transpose();
        Self { mean: DVector::zeros(4), cov: v }
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Mean photon number summed over modes.
    pub fn mean_photons(&self) -> f64 {
        0.5 * (self.cov.trace() + self.mean.norm_squared()) - 0.5 * self.modes() as f64
    }

    /// Smallest eigenvalue of `V + iΩ/2`.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let omega = symplectic_form(self.modes());
        let m = complexify(&self.cov) + complexify(&omega) * C64::new(0.0, 0.5);
        hermitian_eigenvalues(&m)[0]
    }

    pub fn is_physical(&self) -> bool {
        self.uncertainty_min_eigenvalue() >= -PHYSICALITY_TOL
    }

    /// Acts with a symplectic matrix: `V → S V Sᵀ`, `m → S m`.
    pub fn transform(&self, s: &DMatrix<f64>) -> Result<Self, GaussianError> {
        if s.nrows() != self.cov.nrows() {
            return Err(GaussianError::DimensionMismatch { expected: self.modes(), found: s.nrows() / 2 });
        }
        Ok(Self { mean: s * &self.mean, cov: s * &self.cov * s.transpose() })
    }

    /// Displaces mode `mode` by `alpha`.
    pub fn displace(&self, mode: usize, alpha: Complex64) -> Result<Self, GaussianError> {
        if mode >= self.modes() {
            return Err(GaussianError::DimensionMismatch { expected: self.modes(), found: mode + 1 });
        }
        let mut mean = self.mean.clone();
        mean[2 * mode] += 2f64.sqrt() * alpha.re;
        mean[2 * mode + 1] += 2f64.sqrt() * alpha.im;
        Ok(Self { mean, cov: self.cov.clone() })
    }
}

/// Elementary Gaussian unitaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymplecticKind {
    PhaseShift { phi: f64 },
    Squeezer { r: f64 },
    BeamSplitter { theta: f64 },
    TwoModeSqueezer { r: f64 },
}

impl SymplecticKind {
    /// Parses a kind name (`phase`, `squeezer`, `beam-splitter`, `two-mode-squeezer`) with its parameter.
    pub fn from_name(name: &str, parameter: f64) -> Result<Self, GaussianError> {
        match name {
            "phase" | "phase-shift" => Ok(Self::PhaseShift { phi: parameter }),
            "squeezer" | "sq" => Ok(Self::Squeezer { r: parameter }),
            "beam-splitter" | "bs" => Ok(Self::BeamSplitter { theta: parameter }),
            "two-mode-squeezer" | "2sq" => Ok(Self::TwoModeSqueezer { r: parameter }),
            other => Err(GaussianError::UnknownKind(other.to_string())),
        }
    }

    pub fn modes(&self) -> usize {
        match self {
            Self::PhaseShift { .. } | Self::Squeezer { .. } => 1,
            Self::BeamSplitter { .. } | Self::TwoModeSqueezer { .. } => 2,
        }
    }
}

/// Symplectic matrix of an elementary Gaussian unitary.
pub fn symplectic(kind: &SymplecticKind) -> DMatrix<f64> {
    match *kind {
        SymplecticKind::PhaseShift { phi } => {
            let (s, c) = phi.sin_cos();
            DMatrix::from_row_slice(2, 2, &[c, s, -s, c])
        }
        SymplecticKind::Squeezer { r } => {
            DMatrix::from_diagonal(&DVector::from_vec(vec![(-r).exp(), r.exp()]))
        }
        SymplecticKind::BeamSplitter { theta } => {
            let (s, c) = theta.sin_cos();
            DMatrix::from_row_slice(
                4,
                4,
                &[c, 0.0, s, 0.0, 0.0, c, 0.0, s, -s, 0.0, c, 0.0, 0.0, -s, 0.0, c],
            )
        }
        SymplecticKind::TwoModeSqueezer { r } => {
            let (ch, sh) = (r.cosh(), r.sinh());
            DMatrix::from_row_slice(
                4,
                4,
                &[ch, 0.0, sh, 0.0, 0.0, ch, 0.0, -sh, sh, 0.0, ch, 0.0, 0.0, -sh, 0.0, ch],
            )
        }
    }
}

/// Direct sum of two matrices.
pub fn direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows() + b.nrows();
    let mut m = DMatrix::zeros(n, n);
    m.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    m.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols())).copy_from(b);
    m
}

/// Largest entry of `|S Ω Sᵀ - Ω|`.
pub fn symplectic_defect(s: &DMatrix<f64>) -> f64 {
    let omega = symplectic_form(s.nrows() / 2);
    (s * &omega * s.transpose() - omega).amax()
}

/// Gaussian channel `V → A V Aᵀ + B`, `m → A m + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub d: DVector<f64>,
}

impl GaussianChannel {
    pub fn identity(modes: usize) -> Self {
        Self { a: DMatrix::identity(2 * modes, 2 * modes), b: DMatrix::zeros(2 * modes, 2 * modes), d: DVector::zeros(2 * modes) }
    }

    fn scalar(a: f64, b: f64) -> Self {
        Self { a: DMatrix::identity(2, 2) * a, b: DMatrix::identity(2, 2) * b, d: DVector::zeros(2) }
    }

    /// Thermal attenuator of transmissivity `eta` and environment photon number `nbar`.
    pub fn attenuator(eta: f64, nbar: f64) -> Result<Self, GaussianError> {
        if !(0.0..=1.0).contains(&eta) || !(nbar >= 0.0) {
            return Err(GaussianError::InvalidParameter(format!("attenuator needs 0 ≤ η ≤ 1, n̄ ≥ 0 (η = {eta}, n̄ = {nbar})")));
        }
        Ok(Self::scalar(eta.sqrt(), (1.0 - eta) * (nbar + 0.5)))
    }

    /// Thermal amplifier of gain `kappa` and environment photon number `nbar`.
    pub fn amplifier(kappa: f64, nbar: f64) -> Result<Self, GaussianError> {
        if !(kappa >= 1.0) || !(nbar >= 0.0) {
            return Err(GaussianError::InvalidParameter(format!("amplifier needs κ ≥ 1, n̄ ≥ 0 (κ = {kappa}, n̄ = {nbar})")));
        }
        Ok(Self::scalar(kappa.sqrt(), (kappa - 1.0) * (nbar + 0.5)))
    }

    /// Phase-insensitive channel: `A = sqrt(η) I`, `B = |1 - η| (n̄ + 1/2) I`.
    pub fn phase_insensitive(eta: f64, nbar: f64) -> Result<Self, GaussianError> {
        if !(eta >= 0.0) || !(nbar >= 0.0) {
            return Err(GaussianError::InvalidParameter(format!("phase-insensitive channel needs η ≥ 0, n̄ ≥ 0 (η = {eta}, n̄ = {nbar})")));
        }
        Ok(Self::scalar(eta.sqrt(), (1.0 - eta).abs() * (nbar + 0.5)))
    }

    pub fn modes(&self) -> usize {
        self.a.nrows() / 2
    }

    /// Channel obtained by applying `self` first and then `after`.
    pub fn then(&self, after: &GaussianChannel) -> Result<GaussianChannel, GaussianError> {
        if self.modes() != after.modes() {
            return Err(GaussianError::DimensionMismatch { expected: self.modes(), found: after.modes() });
        }
        Ok(GaussianChannel {
            a: &after.a * &self.a,
            b: &after.a * &self.b * after.a.transpose() + &after.b,
            d: &after.a * &self.d + &after.d,
        })
    }

    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState, GaussianError> {
        if self.modes() != state.modes() {
            return Err(GaussianError::DimensionMismatch { expected: self.modes(), found: state.modes() });
        }
        Ok(GaussianState {
            mean: &self.a * state.mean() + &self.d,
            cov: &self.a * state.cov() * self.a.transpose() + &self.b,
        })
    }

    /// Smallest eigenvalue of `B + (i/2)(Ω - A Ω Aᵀ)`.
    pub fn physicality_margin(&self) -> f64 {
        let omega = symplectic_form(self.modes());
        let skew = &omega - &self.a * &omega * self.a.transpose();
        let m = complexify(&self.b) + complexify(&skew) * C64::new(0.0, 0.5);
        hermitian_eigenvalues(&m)[0]
    }

    pub fn is_physical(&self) -> bool {
        self.physicality_margin() >= -PHYSICALITY_TOL
    }

    /// Single-mode determinant criterion `4 det B ≥ (1 - det A)²`.
    pub fn is_physical_single_mode(&self) -> Result<bool, GaussianError> {
        if self.modes() != 1 {
            return Err(GaussianError::DimensionMismatch { expected: 1, found: self.modes() });
        }
        let lhs = 4.0 * self.b.determinant();
        let rhs = (1.0 - self.a.determinant()).powi(2);
        Ok(lhs >= rhs - PHYSICALITY_TOL)
    }
}

/// Splits a phase-insensitive channel into a pure-loss attenuator followed by a quantum-limited amplifier.
///
/// Returns `(eta_loss, kappa)` with `kappa * eta_loss = eta`.
pub fn decompose_phase_insensitive(eta: f64, nbar: f64) -> Result<(f64, f64), GaussianError> {
    if !(eta >= 0.0) || !(nbar >= 0.0) {
        return Err(GaussianError::InvalidParameter(format!("η = {eta}, n̄ = {nbar}")));
    }
    let kappa = 0.5 * (1.0 + eta + (1.0 - eta).abs() * (2.0 * nbar + 1.0));
    Ok((eta / kappa, kappa))
}

/// Symplectic eigenvalues in ascending order, from the spectrum of `i V^{1/2} Ω V^{1/2}`.
pub fn williamson_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>, GaussianError> {
    let n = cov.nrows();
    if !n.is_multiple_of(2) || cov.ncols() != n {
        return Err(GaussianError::DimensionMismatch { expected: n / 2, found: cov.ncols() / 2 });
    }
    let eig = cov.clone().symmetric_eigen();
    if eig.eigenvalues.min() <= 0.0 {
        return Err(GaussianError::Unphysical { min_eigenvalue: eig.eigenvalues.min() });
    }
    let sqrt_d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let root = &eig.eigenvectors * sqrt_d * eig.eigenvectors.transpose();
    let omega = symplectic_form(n / 2);
    let m = complexify(&(&root * omega * &root)) * C64::new(0.0, 1.0);
    let mut vals: Vec<f64> = hermitian_eigenvalues(&m).into_iter().filter(|v| *v > 0.0).collect();
    vals.sort_by(f64::total_cmp);
    vals.truncate(n / 2);
    Ok(vals)
}

/// Overlap `Tr[ρ₁ρ₂] = exp(-½ δᵀ (V₁+V₂)⁻¹ δ) / sqrt(det(V₁+V₂))`.
pub fn gaussian_overlap(s1: &GaussianState, s2: &GaussianState) -> Result<f64, GaussianError> {
    if s1.modes() != s2.modes() {
        return Err(GaussianError::DimensionMismatch { expected: s1.modes(), found: s2.modes() });
    }
    let sum = s1.cov() + s2.cov();
    let delta = s1.mean() - s2.mean();
    let chol = sum
        .clone()
        .cholesky()
        .ok_or(GaussianError::Unphysical { min_eigenvalue: sum.symmetric_eigenvalues().min() })?;
    let x = chol.solve(&delta);
    Ok((-0.5 * delta.dot(&x)).exp() / sum.determinant().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_matrices_are_symplectic() {
        for k in [
            SymplecticKind::PhaseShift { phi: 0.7 },
            SymplecticKind::Squeezer { r: 0.4 },
            SymplecticKind::BeamSplitter { theta: 0.3 },
            SymplecticKind::TwoModeSqueezer { r: 0.8 },
        ] {
            assert!(symplectic_defect(&symplectic(&k)) < 1e-12, "{k:?}");
        }
    }

    #[test]
    fn unknown_kind_rejected() {
        assert!(matches!(SymplecticKind::from_name("shear", 0.1), Err(GaussianError::UnknownKind(_))));
    }

    #[test]
    fn coherent_photon_number() {
        let s = GaussianState::coherent(Complex64::new(0.6, -0.8));
        assert!((s.mean_photons() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn thermal_williamson() {
        let s = GaussianState::thermal(0.7).unwrap();
        let nu = williamson_eigenvalues(s.cov()).unwrap();
        assert!((nu[0] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn unphysical_covariance_rejected() {
        let cov = DMatrix::identity(2, 2) * 0.2;
        assert!(matches!(GaussianState::new(DVector::zeros(2), cov), Err(GaussianError::Unphysical { .. })));
    }

    #[test]
    fn attenuator_maps_coherent_amplitude() {
        let ch = GaussianChannel::attenuator(0.25, 0.0).unwrap();
        let out = ch.apply(&GaussianState::coherent(Complex64::new(2.0, 0.0))).unwrap();
        let expected = GaussianState::coherent(Complex64::new(1.0, 0.0));
        assert!((out.mean() - expected.mean()).amax() < 1e-14);
        assert!((out.cov() - expected.cov()).amax() < 1e-14);
    }

    #[test]
    fn pure_state_self_overlap() {
        let s = GaussianState::squeezed(0.6).transform(&symplectic(&SymplecticKind::PhaseShift { phi: 0.4 })).unwrap();
        assert!((gaussian_overlap(&s, &s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unphysical_channel_detected() {
        let mut ch = GaussianChannel::amplifier(2.0, 0.0).unwrap();
        ch.b *= 0.5;
        assert!(!ch.is_physical());
        assert!(!ch.is_physical_single_mode().unwrap());
    }
}
