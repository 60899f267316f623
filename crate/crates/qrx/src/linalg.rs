//! Dense complex linear algebra on Hermitian matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Eigenvalues below this magnitude are treated as zero.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// Entries this far below the largest one are flushed before diagonalization.
const FLUSH_RATIO: f64 = 1e-40;

/// Hermitian part `(m + m†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Hermitian part with negligible entries set to zero, so Householder norms cannot underflow.
fn flushed_hermitian_part(m: &CMatrix) -> CMatrix {
    let mut h = hermitian_part(m);
    let floor = h.iter().map(|z| z.norm()).fold(0.0, f64::max) * FLUSH_RATIO;
    for z in h.iter_mut() {
        if z.norm() < floor {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Eigenvalues (ascending) and unit eigenvectors (columns) of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = flushed_hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = flushed_hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let mut scaled = vectors.clone();
    for (c, &v) in values.iter().enumerate() {
        let fv = f(v);
        scaled.column_mut(c).scale_mut(fv);
    }
    scaled * vectors.adjoint()
}

/// Square root of a positive semidefinite matrix, clamping small eigenvalues to zero.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    hermitian_map(m, |v| if v < EIGEN_CLAMP { 0.0 } else { v.sqrt() })
}

/// Pseudo-inverse square root, zero on eigenvalues below `cutoff`.
pub fn pinv_sqrt_psd(m: &CMatrix, cutoff: f64) -> CMatrix {
    hermitian_map(m, |v| if v < cutoff { 0.0 } else { 1.0 / v.sqrt() })
}

/// Projector onto eigenvectors with eigenvalue at least `cutoff`.
pub fn support_projector(m: &CMatrix, cutoff: f64) -> CMatrix {
    hermitian_map(m, |v| if v < cutoff { 0.0 } else { 1.0 })
}

/// Absolute value `|m|` of a Hermitian matrix.
pub fn abs_hermitian(m: &CMatrix) -> CMatrix {
    hermitian_map(m, f64::abs)
}

/// Positive part `(m + |m|)/2` of a Hermitian matrix.
pub fn positive_part(m: &CMatrix) -> CMatrix {
    hermitian_map(m, |v| v.max(0.0))
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Real part of the trace.
pub fn trace_re(m: &CMatrix) -> f64 {
    m.trace().re
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `exp(g)` for an anti-Hermitian generator, computed through the spectrum of `i g`.
pub fn exp_anti_hermitian(g: &CMatrix) -> CMatrix {
    let h = g * C64::i();
    let (values, vectors) = hermitian_eigen(&h);
    let mut scaled = vectors.clone();
    for (c, &v) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -v);
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= phase;
        }
    }
    scaled * vectors.adjoint()
}

/// Complex matrix from a real one.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.7, 0.0), C64::new(0.1, -0.2), C64::new(0.1, 0.2), C64::new(0.3, 0.0)],
        )
    }

    #[test]
    fn sqrt_squares_back() {
        let m = sample();
        let s = sqrt_psd(&m);
        assert!(max_abs_diff(&(&s * &s), &m) < 1e-14);
    }

    #[test]
    fn pinv_sqrt_inverts_on_support() {
        let m = sample();
        let s = sqrt_psd(&m);
        let p = pinv_sqrt_psd(&m, EIGEN_CLAMP);
        assert!(max_abs_diff(&(&s * &p), &CMatrix::identity(2, 2)) < 1e-13);
    }

    #[test]
    fn trace_norm_of_pauli_z() {
        let z = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]));
        assert!((trace_norm(&z) - 2.0).abs() < 1e-15);
        assert!((trace_re(&positive_part(&z)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_of_rotation_generator() {
        // exp(-i theta sigma_y) is a real rotation by 2 theta.
        let theta = 0.3_f64;
        let g = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(-theta, 0.0), C64::new(theta, 0.0), C64::new(0.0, 0.0)]);
        let u = exp_anti_hermitian(&g);
        assert!((u[(0, 0)].re - theta.cos()).abs() < 1e-14);
        assert!((u[(1, 0)].re - theta.sin()).abs() < 1e-14);
    }
}
