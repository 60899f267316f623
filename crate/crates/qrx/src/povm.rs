//! POVMs, state distances, the binary Helstrom measurement and binary-tree decompositions.
//!
//! Leaf labels of a tree of depth `u` are `ℓ = Σ_j 2^{j-1} k_j`, so the first binary outcome
//! `k_1` is the least significant bit.

use thiserror::Error;

use crate::fock::FockOperator;
use crate::linalg::{
    hermitian_eigen, hermitian_eigenvalues, max_abs_diff, min_eigenvalue, pinv_sqrt_psd, sqrt_psd,
    support_projector, trace_norm, trace_re, CMatrix, C64, EIGEN_CLAMP,
};

/// Tolerance on positivity and completeness of POVM elements.
pub const POVM_TOL: f64 = 1e-9;
/// Upper edge of the band where support detection is ambiguous.
pub const GRAY_ZONE_UPPER: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PovmError {
    #[error("POVM has no elements")]
    Empty,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("element {index} is not positive (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { index: usize, min_eigenvalue: f64 },
    #[error("elements do not sum to the identity (max deviation {defect:e})")]
    Incomplete { defect: f64 },
    #[error("outcome {0} has zero probability")]
    ZeroProbability(usize),
    #[error("prior {0} outside [0, 1]")]
    InvalidPrior(f64),
    #[error("ambiguous support at tree level {level}, prefix {prefix}: eigenvalue {eigenvalue:e}")]
    GrayZone { level: usize, prefix: usize, eigenvalue: f64 },
}

/// Positive operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMatrix>,
    labels: Vec<String>,
    null: Vec<bool>,
}

impl Povm {
    /// Validated constructor with labels `0, 1, …`.
    pub fn new(elements: Vec<CMatrix>) -> Result<Self, PovmError> {
        let labels = (0..elements.len()).map(|i| i.to_string()).collect();
        Self::with_labels(elements, labels)
    }

    pub fn with_labels(elements: Vec<CMatrix>, labels: Vec<String>) -> Result<Self, PovmError> {
        let povm = Self::unchecked(elements, labels);
        povm.validate()?;
        Ok(povm)
    }

    pub fn from_fock(elements: Vec<FockOperator>) -> Result<Self, PovmError> {
        Self::new(elements.into_iter().map(FockOperator::into_matrix).collect())
    }

    fn unchecked(elements: Vec<CMatrix>, labels: Vec<String>) -> Self {
        let null = vec![false; elements.len()];
        Self { elements, labels, null }
    }

    fn validate(&self) -> Result<(), PovmError> {
        let d = self.elements.first().ok_or(PovmError::Empty)?.nrows();
        let mut sum = CMatrix::zeros(d, d);
        for (index, e) in self.elements.iter().enumerate() {
            if e.nrows() != d || e.ncols() != d {
                return Err(PovmError::DimensionMismatch { expected: d, found: e.nrows() });
            }
            let min = min_eigenvalue(e);
            if min < -1e-10 || max_abs_diff(e, &e.adjoint()) > 1e-10 {
                return Err(PovmError::NotPositive { index, min_eigenvalue: min });
            }
            sum += e;
        }
        let defect = max_abs_diff(&sum, &CMatrix::identity(d, d));
        if defect > POVM_TOL {
            return Err(PovmError::Incomplete { defect });
        }
        Ok(())
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Flags of zero-padding elements.
    pub fn null_flags(&self) -> &[bool] {
        &self.null
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    /// Outcome probabilities `Tr[E_k ρ]`.
    pub fn measure(&self, rho: &CMatrix) -> Result<Vec<f64>, PovmError> {
        if rho.nrows() != self.dim() {
            return Err(PovmError::DimensionMismatch { expected: self.dim(), found: rho.nrows() });
        }
        Ok(self.elements.iter().map(|e| trace_re(&(e * rho))).collect())
    }

    /// Normalized post-measurement state `√E_k ρ √E_k / p_k`.
    pub fn post_state(&self, rho: &CMatrix, k: usize) -> Result<CMatrix, PovmError> {
        let e = self.elements.get(k).ok_or(PovmError::DimensionMismatch { expected: self.len(), found: k + 1 })?;
        if rho.nrows() != self.dim() {
            return Err(PovmError::DimensionMismatch { expected: self.dim(), found: rho.nrows() });
        }
        let s = sqrt_psd(e);
        let out = &s * rho * &s;
        let p = trace_re(&out);
        if p <= 0.0 {
            return Err(PovmError::ZeroProbability(k));
        }
        Ok(out.unscale(p))
    }
}

/// Trace distance `½‖ρ - σ‖₁`.
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    0.5 * trace_norm(&(rho - sigma))
}

/// Fidelity `(Tr sqrt(sqrt ρ σ sqrt ρ))²`.
pub fn fidelity(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let s = sqrt_psd(rho);
    let inner = &s * sigma * &s;
    let values = hermitian_eigenvalues(&inner);
    let floor = EIGEN_CLAMP * values.iter().fold(0.0f64, |a, &v| a.max(v));
    let root: f64 = values.iter().filter(|&&v| v > floor).map(|v| v.sqrt()).sum();
    root * root
}

/// Minimum error probability and optimal POVM `{Π₀, Π₁}` for `{(ρ₀, p₀), (ρ₁, 1 - p₀)}`.
pub fn helstrom_binary(rho0: &CMatrix, rho1: &CMatrix, p0: f64) -> Result<(f64, Povm), PovmError> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(PovmError::InvalidPrior(p0));
    }
    if rho0.nrows() != rho1.nrows() {
        return Err(PovmError::DimensionMismatch { expected: rho0.nrows(), found: rho1.nrows() });
    }
    let gamma = rho0 * C64::new(p0, 0.0) - rho1 * C64::new(1.0 - p0, 0.0);
    let (values, vectors) = hermitian_eigen(&gamma);
    let d = rho0.nrows();
    let mut pi0 = CMatrix::zeros(d, d);
    for (c, v) in values.iter().enumerate() {
        if *v > 0.0 {
            let col = vectors.column(c);
            pi0 += col * col.adjoint();
        }
    }
    let pi1 = CMatrix::identity(d, d) - &pi0;
    let p_err = 0.5 * (1.0 - trace_norm(&gamma));
    let povm = Povm::unchecked(vec![pi0, pi1], vec!["0".into(), "1".into()]);
    Ok((p_err, povm))
}

/// Square-root measurement `E_x = S^{-1/2} Π_x S^{-1/2}` with `S = Σ Π_x`.
///
/// When `S` is rank deficient an extra element `1 - Π_S` labelled `null` completes the POVM.
pub fn srm(projectors: &[CMatrix]) -> Result<Povm, PovmError> {
    let d = projectors.first().ok_or(PovmError::Empty)?.nrows();
    let mut s = CMatrix::zeros(d, d);
    for p in projectors {
        if p.nrows() != d {
            return Err(PovmError::DimensionMismatch { expected: d, found: p.nrows() });
        }
        s += p;
    }
    let w = pinv_sqrt_psd(&s, EIGEN_CLAMP);
    let mut elements: Vec<CMatrix> = projectors.iter().map(|p| &w * p * &w).collect();
    let mut labels: Vec<String> = (0..projectors.len()).map(|i| i.to_string()).collect();
    let support = support_projector(&s, EIGEN_CLAMP);
    let rest = CMatrix::identity(d, d) - support;
    if trace_re(&rest) > 0.5 {
        elements.push(rest);
        labels.push("null".into());
    }
    Povm::with_labels(elements, labels)
}

/// Sequential measurement `E_ℓ = |Π_ℓ Ξ_{ℓ-1} ⋯ Ξ_1|²` with `Ξ = 1 - Π`, plus the error element last.
pub fn sequential_povm(projectors: &[CMatrix]) -> Result<Povm, PovmError> {
    let d = projectors.first().ok_or(PovmError::Empty)?.nrows();
    let id = CMatrix::identity(d, d);
    let mut chain = id.clone();
    let mut elements = Vec::with_capacity(projectors.len() + 1);
    for p in projectors {
        if p.nrows() != d {
            return Err(PovmError::DimensionMismatch { expected: d, found: p.nrows() });
        }
        let x = p * &chain;
        elements.push(x.adjoint() * x);
        chain = (&id - p) * chain;
    }
    elements.push(chain.adjoint() * chain);
    let mut labels: Vec<String> = (0..projectors.len()).map(|i| i.to_string()).collect();
    labels.push("err".into());
    Povm::with_labels(elements, labels)
}

/// Two-outcome node of a nested POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub b0: CMatrix,
    pub b1: CMatrix,
}

impl TreeNode {
    pub fn element(&self, k: usize) -> &CMatrix {
        if k == 0 {
            &self.b0
        } else {
            &self.b1
        }
    }
}

/// Support eigenvalue found inside the ambiguous band.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayZoneWarning {
    pub level: usize,
    pub prefix: usize,
    pub eigenvalue: f64,
}

/// Binary tree of conditional two-outcome POVMs.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedPovm {
    levels: Vec<Vec<TreeNode>>,
    outcomes: usize,
    dim: usize,
    warnings: Vec<GrayZoneWarning>,
}

impl NestedPovm {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Number of leaves after zero padding.
    pub fn padded_outcomes(&self) -> usize {
        1 << self.depth()
    }

    /// Number of outcomes of the original POVM.
    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Node at level `level` (1-based) reached after the outcomes encoded in `prefix`.
    pub fn node(&self, level: usize, prefix: usize) -> &TreeNode {
        &self.levels[level - 1][prefix]
    }

    pub fn is_null(&self, leaf: usize) -> bool {
        leaf >= self.outcomes
    }

    pub fn warnings(&self) -> &[GrayZoneWarning] {
        &self.warnings
    }

    /// Largest deviation of `B₀ + B₁` from the projector onto the parent element's support.
    pub fn weak_completeness_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (u, level) in self.levels.iter().enumerate() {
            for (prefix, node) in level.iter().enumerate() {
                let parent = if u == 0 {
                    CMatrix::identity(self.dim, self.dim)
                } else {
                    let half = 1 << (u - 1);
                    let pnode = &self.levels[u - 1][prefix % half];
                    support_projector(pnode.element(prefix / half), EIGEN_CLAMP)
                };
                worst = worst.max(max_abs_diff(&(&node.b0 + &node.b1), &parent));
            }
        }
        worst
    }

    /// Leaf probabilities from running the tree step by step with Lüders post-states.
    pub fn simulate(&self, rho: &CMatrix) -> Vec<f64> {
        let mut out = vec![0.0; self.padded_outcomes()];
        self.descend(rho.clone(), 0, 0, &mut out);
        out
    }

    fn descend(&self, sigma: CMatrix, level: usize, prefix: usize, out: &mut [f64]) {
        if level == self.depth() {
            out[prefix] = trace_re(&sigma);
            return;
        }
        let node = &self.levels[level][prefix];
        for k in 0..2 {
            let s = sqrt_psd(node.element(k));
            let next = &s * &sigma * &s;
            self.descend(next, level + 1, prefix + (k << level), out);
        }
    }
}

/// Builds the nested POVM; ambiguous support detection is reported as warnings.
pub fn binary_tree_decompose(povm: &Povm) -> Result<NestedPovm, PovmError> {
    decompose(povm, false)
}

/// As [`binary_tree_decompose`] but fails on ambiguous support detection.
pub fn binary_tree_decompose_strict(povm: &Povm) -> Result<NestedPovm, PovmError> {
    decompose(povm, true)
}

fn decompose(povm: &Povm, strict: bool) -> Result<NestedPovm, PovmError> {
    let m = povm.len();
    let d = povm.dim();
    let depth = (usize::BITS - (m.max(2) - 1).leading_zeros()) as usize;
    let padded = 1 << depth;
    let zero = CMatrix::zeros(d, d);
    let element = |l: usize| if l < m { &povm.elements[l] } else { &zero };
    // Sum of leaves sharing the low `u` bits `q`.
    let group = |u: usize, q: usize| -> CMatrix {
        let mut s = CMatrix::zeros(d, d);
        let mut l = q;
        while l < padded {
            s += element(l);
            l += 1 << u;
        }
        s
    };
    let mut warnings = Vec::new();
    let mut levels: Vec<Vec<TreeNode>> = Vec::with_capacity(depth);
    // Renormalizers W_p = (√B^{(1)})^+ ⋯ (√B^{(u-1)})^+ for each prefix of the current level.
    let mut renorm = vec![CMatrix::identity(d, d)];
    for u in 1..=depth {
        let count = 1 << (u - 1);
        let mut nodes = Vec::with_capacity(count);
        for (prefix, w) in renorm.iter().enumerate().take(count) {
            let b0 = w.adjoint() * group(u, prefix) * w;
            let b1 = w.adjoint() * group(u, prefix + count) * w;
            nodes.push(TreeNode { b0, b1 });
        }
        if u < depth {
            let mut next = Vec::with_capacity(2 * count);
            for k in 0..2 {
                for (prefix, node) in nodes.iter().enumerate() {
                    let b = node.element(k);
                    for v in hermitian_eigenvalues(b) {
                        if (EIGEN_CLAMP..GRAY_ZONE_UPPER).contains(&v) {
                            if strict {
                                return Err(PovmError::GrayZone { level: u, prefix, eigenvalue: v });
                            }
                            warnings.push(GrayZoneWarning { level: u, prefix, eigenvalue: v });
                        }
                    }
                    next.push(&renorm[prefix] * pinv_sqrt_psd(b, EIGEN_CLAMP));
                }
            }
            renorm = next;
        }
        levels.push(nodes);
    }
    Ok(NestedPovm { levels, outcomes: m, dim: d, warnings })
}

/// Leaf elements `|√B^{(u_F)} ⋯ √B^{(1)}|²`; padding leaves carry the null flag.
pub fn reconstruct(nested: &NestedPovm) -> Povm {
    let d = nested.dim;
    let padded = nested.padded_outcomes();
    let mut elements = Vec::with_capacity(padded);
    for leaf in 0..padded {
        let mut x = CMatrix::identity(d, d);
        for u in 0..nested.depth() {
            let prefix = leaf & ((1 << u) - 1);
            let k = (leaf >> u) & 1;
            x = sqrt_psd(nested.levels[u][prefix].element(k)) * x;
        }
        elements.push(x.adjoint() * x);
    }
    let labels = (0..padded).map(|l| l.to_string()).collect();
    let null = (0..padded).map(|l| nested.is_null(l)).collect();
    Povm { elements, labels, null }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CVector;

    fn ket(v: &[C64]) -> CMatrix {
        let k = CVector::from_column_slice(v);
        &k * k.adjoint()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn projective_measurement_on_vacuum() {
        let p0 = ket(&[c(1.0), c(0.0)]);
        let povm = Povm::new(vec![p0.clone(), CMatrix::identity(2, 2) - p0.clone()]).unwrap();
        assert_eq!(povm.measure(&p0).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn incomplete_povm_rejected() {
        let p0 = ket(&[c(1.0), c(0.0)]);
        assert!(matches!(Povm::new(vec![p0]), Err(PovmError::Incomplete { .. })));
    }

    #[test]
    fn helstrom_identical_and_orthogonal() {
        let a = ket(&[c(1.0), c(0.0)]);
        let b = ket(&[c(0.0), c(1.0)]);
        assert!((helstrom_binary(&a, &a, 0.5).unwrap().0 - 0.5).abs() < 1e-15);
        assert!(helstrom_binary(&a, &b, 0.5).unwrap().0.abs() < 1e-15);
    }

    #[test]
    fn sequential_single_projector() {
        let p = ket(&[c(1.0), c(0.0)]);
        let povm = sequential_povm(std::slice::from_ref(&p)).unwrap();
        assert!(max_abs_diff(&povm.elements()[0], &p) < 1e-15);
        assert!(max_abs_diff(&povm.elements()[1], &(CMatrix::identity(2, 2) - p)) < 1e-15);
    }

    #[test]
    fn depth_one_tree_is_input() {
        let p = ket(&[c(0.6), c(0.8)]);
        let povm = Povm::new(vec![p.clone(), CMatrix::identity(2, 2) - p]).unwrap();
        let tree = binary_tree_decompose(&povm).unwrap();
        assert_eq!(tree.depth(), 1);
        assert!(max_abs_diff(&tree.node(1, 0).b0, &povm.elements()[0]) < 1e-15);
    }
}
