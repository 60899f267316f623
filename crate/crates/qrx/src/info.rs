//! Classical and quantum information measures, in bits.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::fock::FockOperator;
use crate::linalg::{hermitian_eigenvalues, CMatrix};

/// Tolerance on the total weight of a distribution.
pub const NORMALIZATION_TOL: f64 = 1e-10;
/// Eigenvalues below this are dropped from entropy sums.
pub const ENTROPY_CLAMP: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoError {
    #[error("distribution is empty")]
    Empty,
    #[error("weight {index} is negative or not finite: {value}")]
    InvalidWeight { index: usize, value: f64 },
    #[error("weights sum to {total}, expected 1")]
    NotNormalized { total: f64 },
    #[error("ensemble states have mismatched dimensions")]
    DimensionMismatch,
    #[error("parameter {name} = {value} out of range")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(weights: Vec<f64>) -> Result<Self, InfoError> {
        if weights.is_empty() {
            return Err(InfoError::Empty);
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(InfoError::InvalidWeight { index, value });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(InfoError::NotNormalized { total });
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Result<Self, InfoError> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `-p log2 p`, zero at `p = 0`.
pub fn eta(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

pub fn shannon_entropy(dist: &Distribution) -> f64 {
    dist.weights().iter().map(|&p| eta(p)).sum()
}

/// Entropy of a spectrum, ignoring entries below [`ENTROPY_CLAMP`].
pub fn spectrum_entropy(values: &[f64]) -> f64 {
    values.iter().filter(|&&v| v > ENTROPY_CLAMP).map(|&v| eta(v)).sum()
}

/// Mutual information of a joint distribution given as a matrix `p(x, y)`.
pub fn mutual_information(joint: &DMatrix<f64>) -> Result<f64, InfoError> {
    let flat: Vec<f64> = joint.iter().copied().collect();
    Distribution::new(flat)?;
    let px: Vec<f64> = joint.row_iter().map(|r| r.sum()).collect();
    let py: Vec<f64> = joint.column_iter().map(|c| c.sum()).collect();
    let mut mi = 0.0;
    for (i, &pxi) in px.iter().enumerate() {
        for (j, &pyj) in py.iter().enumerate() {
            let p = joint[(i, j)];
            if p > 0.0 {
                mi += p * (p / (pxi * pyj)).log2();
            }
        }
    }
    Ok(mi.max(0.0))
}

pub fn matrix_entropy(rho: &CMatrix) -> f64 {
    spectrum_entropy(&hermitian_eigenvalues(rho))
}

pub fn von_neumann_entropy(rho: &FockOperator) -> f64 {
    matrix_entropy(rho.matrix())
}

/// `S(Σ p ρ) − Σ p S(ρ)`.
pub fn holevo_chi(ensemble: &[(FockOperator, f64)]) -> Result<f64, InfoError> {
    let priors = Distribution::new(ensemble.iter().map(|(_, p)| *p).collect())?;
    let dim = ensemble[0].0.dim();
    if ensemble.iter().any(|(rho, _)| rho.dim() != dim) {
        return Err(InfoError::DimensionMismatch);
    }
    let mut average = CMatrix::zeros(dim, dim);
    let mut conditional = 0.0;
    for ((rho, _), &p) in ensemble.iter().zip(priors.weights()) {
        average += rho.matrix().scale(p);
        conditional += p * von_neumann_entropy(rho);
    }
    Ok((matrix_entropy(&average) - conditional).max(0.0))
}

/// Entropy of a thermal state with mean photon number `nbar`.
pub fn thermal_entropy(nbar: f64) -> f64 {
    if nbar <= 0.0 {
        0.0
    } else {
        (nbar + 1.0) * (nbar + 1.0).log2() - nbar * nbar.log2()
    }
}

/// Mean output photon number of a phase-insensitive channel for input energy `energy`.
pub fn pi_output_energy(eta: f64, nbar: f64, energy: f64) -> f64 {
    eta * energy + (eta - 1.0).max(0.0) + nbar * (eta - 1.0).abs()
}

/// Classical capacity of a phase-insensitive Gaussian channel.
pub fn pi_capacity(eta: f64, nbar: f64, energy: f64) -> Result<f64, InfoError> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(InfoError::InvalidParameter { name: "eta", value: eta });
    }
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(InfoError::InvalidParameter { name: "nbar", value: nbar });
    }
    if !(energy.is_finite() && energy >= 0.0) {
        return Err(InfoError::InvalidParameter { name: "energy", value: energy });
    }
    Ok(thermal_entropy(pi_output_energy(eta, nbar, energy)) - thermal_entropy(pi_output_energy(eta, nbar, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, thermal_state};
    use crate::linalg::C64;

    #[test]
    fn uniform_four_is_two_bits() {
        assert!((shannon_entropy(&Distribution::uniform(4).unwrap()) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn distribution_rejects_bad_weights() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![1.2, -0.2]).is_err());
        assert!(Distribution::new(vec![]).is_err());
        assert!(Distribution::new(vec![1.0, 0.0]).is_ok());
    }

    #[test]
    fn independent_joint_has_zero_mi() {
        let joint = DMatrix::from_fn(2, 3, |i, j| [0.3, 0.7][i] * [0.2, 0.5, 0.3][j]);
        assert!(mutual_information(&joint).unwrap().abs() < 1e-14);
    }

    #[test]
    fn correlated_diagonal_mi_is_log3() {
        let joint = DMatrix::from_diagonal_element(3, 3, 1.0 / 3.0);
        assert!((mutual_information(&joint).unwrap() - 3f64.log2()).abs() < 1e-14);
    }

    #[test]
    fn entropy_examples() {
        let pure = coherent_state(C64::new(0.7, 0.2), 30).unwrap().to_density();
        assert!(von_neumann_entropy(&pure).abs() < 1e-9);
        let thermal = thermal_state(1.0, 120).unwrap();
        assert!((von_neumann_entropy(&thermal) - 2.0).abs() < 1e-8);
        assert!((thermal_entropy(1.0) - 2.0).abs() < 1e-15);
        let mixed = FockOperator::from_matrix(CMatrix::identity(2, 2).scale(0.5));
        assert!((von_neumann_entropy(&mixed) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holevo_examples() {
        let rho = coherent_state(C64::new(0.5, 0.0), 30).unwrap().to_density();
        assert!(holevo_chi(&[(rho, 1.0)]).unwrap().abs() < 1e-9);
        let zero = FockOperator::from_matrix(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)])));
        let one = FockOperator::from_matrix(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])));
        assert!((holevo_chi(&[(zero, 0.5), (one, 0.5)]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bpsk_holevo_matches_gram_spectrum() {
        let a = 0.5;
        let plus = coherent_state(C64::new(a, 0.0), 40).unwrap().to_density();
        let minus = coherent_state(C64::new(-a, 0.0), 40).unwrap().to_density();
        let chi = holevo_chi(&[(plus, 0.5), (minus, 0.5)]).unwrap();
        let overlap = (-2.0 * a * a).exp();
        let gram = spectrum_entropy(&[(1.0 + overlap) / 2.0, (1.0 - overlap) / 2.0]);
        assert!((chi - gram).abs() < 1e-8);
    }

    #[test]
    fn pi_capacity_examples() {
        let e = 1.3;
        let lossless = (e + 1.0) * (e + 1.0f64).log2() - e * e.log2();
        assert!((pi_capacity(1.0, 0.0, e).unwrap() - lossless).abs() < 1e-14);
        assert_eq!(pi_capacity(0.7, 0.4, 0.0).unwrap(), 0.0);
        let half = pi_capacity(0.5, 0.0, 1.0).unwrap();
        assert!((half - thermal_entropy(0.5)).abs() < 1e-15);
        assert!((half - 1.377_443_751).abs() < 1e-8);
    }
}
