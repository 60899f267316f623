//! Minimum-error discrimination of three or four qubit states.
//!
//! A weighted set `{σ_k = p_k ρ_k}` is arranged as `σ_{a,b}` with `a` the outcome of a first
//! binary measurement `{Q, 1 - Q}` and `b` the outcome of the Helstrom measurement that follows.
//! An ordering `o` assigns `σ_{a,b} = σ_{o[2a + b]}`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Vector3;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{CMatrix, CVector, C64};
use crate::numerics::{PatternSearch, SearchResult};

/// Sign-definiteness threshold on eigenvalues.
pub const SIGN_TOL: f64 = 1e-11;
/// Tolerance on the constraints `0 ≤ Q ≤ 1`.
pub const CONSTRAINT_TOL: f64 = 1e-12;
/// Grid points per scalar search dimension.
pub const GRID_POINTS: usize = 41;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QubitError {
    #[error("Q violates 0 ≤ Q ≤ 1 (c = {c}, |r| = {r})")]
    ConstraintViolated { c: f64, r: f64 },
    #[error("invalid state {index}: {reason}")]
    InvalidState { index: usize, reason: String },
    #[error("probabilities must be non-negative and sum to one (sum = {sum})")]
    InvalidPriors { sum: f64 },
    #[error("unsupported number of states {0}")]
    UnsupportedSize(usize),
    #[error("operator is not a Hermitian 2x2 matrix")]
    NotHermitian,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("U^M differs from the identity by {0:e}")]
    NotCyclic(f64),
}

/// Hermitian qubit operator `c·1 + r·σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochOperator {
    pub c: f64,
    pub r: Vector3<f64>,
}

impl BlochOperator {
    pub fn new(c: f64, r: Vector3<f64>) -> Self {
        Self { c, r }
    }

    pub fn zero() -> Self {
        Self::new(0.0, Vector3::zeros())
    }

    pub fn identity() -> Self {
        Self::new(1.0, Vector3::zeros())
    }

    /// Density operator `(1 + s·σ)/2` for a Bloch vector `s` with `|s| ≤ 1`.
    pub fn state(bloch: Vector3<f64>) -> Result<Self, QubitError> {
        if bloch.norm() > 1.0 + CONSTRAINT_TOL {
            return Err(QubitError::InvalidState { index: 0, reason: format!("Bloch vector norm {} > 1", bloch.norm()) });
        }
        Ok(Self::new(0.5, bloch * 0.5))
    }

    /// Pure state on the equator at azimuth `phi`.
    pub fn equatorial(phi: f64) -> Self {
        Self::new(0.5, Vector3::new(phi.cos(), phi.sin(), 0.0) * 0.5)
    }

    pub fn from_matrix(m: &CMatrix) -> Result<Self, QubitError> {
        if m.nrows() != 2 || m.ncols() != 2 || (m - m.adjoint()).iter().any(|z| z.norm() > 1e-10) {
            return Err(QubitError::NotHermitian);
        }
        let c = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
        let r = Vector3::new(m[(1, 0)].re, m[(1, 0)].im, 0.5 * (m[(0, 0)].re - m[(1, 1)].re));
        Ok(Self::new(c, r))
    }

    pub fn to_matrix(&self) -> CMatrix {
        let (c, r) = (self.c, self.r);
        CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(c + r.z, 0.0), C64::new(r.x, -r.y), C64::new(r.x, r.y), C64::new(c - r.z, 0.0)],
        )
    }

    pub fn norm_r(&self) -> f64 {
        self.r.norm()
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.c
    }

    /// Eigenvalues `(c - |r|, c + |r|)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        (self.c - self.norm_r(), self.c + self.norm_r())
    }

    pub fn trace_norm(&self) -> f64 {
        2.0 * self.c.abs().max(self.norm_r())
    }

    /// True when both eigenvalues share a sign (within [`SIGN_TOL`]).
    pub fn is_definite(&self) -> bool {
        let (lo, hi) = self.eigenvalues();
        lo >= -SIGN_TOL || hi <= SIGN_TOL
    }

    /// `|H|`.
    pub fn abs(&self) -> Self {
        let r = self.norm_r();
        if self.c.abs() >= r {
            if self.c >= 0.0 {
                *self
            } else {
                -*self
            }
        } else {
            Self::new(r, self.r * (self.c / r))
        }
    }

    /// Positive part `(H + |H|)/2`.
    pub fn positive_part(&self) -> Self {
        (*self + self.abs()) * 0.5
    }

    /// Projector onto the span of eigenvectors with eigenvalue above `tol`.
    pub fn support_projector(&self, tol: f64) -> Self {
        let (lo, hi) = self.eigenvalues();
        match (lo > tol, hi > tol) {
            (true, _) => Self::identity(),
            (false, true) => {
                let n = self.norm_r();
                Self::new(0.5, self.r * (0.5 / n))
            }
            _ => Self::zero(),
        }
    }

    /// Projector onto the span of eigenvectors with non-negligible eigenvalue of either sign.
    pub fn nonzero_support(&self, tol: f64) -> Self {
        let (lo, hi) = self.eigenvalues();
        let n = self.norm_r();
        match (lo.abs() > tol, hi.abs() > tol) {
            (true, true) => Self::identity(),
            (false, true) => Self::new(0.5, self.r * (0.5 / n)),
            (true, false) => Self::new(0.5, self.r * (-0.5 / n)),
            _ => Self::zero(),
        }
    }

    /// Tr[H K] = 2 (c_H c_K + r_H·r_K).
    pub fn trace_product(&self, other: &Self) -> f64 {
        2.0 * (self.c * other.c + self.r.dot(&other.r))
    }

    fn commutes_with(&self, other: &Self) -> bool {
        self.r.cross(&other.r).norm() <= SIGN_TOL
    }

    /// Whether `0 ≤ Q ≤ 1`.
    pub fn is_effect(&self) -> bool {
        let r = self.norm_r();
        self.c >= -CONSTRAINT_TOL && self.c <= 1.0 + CONSTRAINT_TOL && r <= self.c.min(1.0 - self.c) + CONSTRAINT_TOL
    }
}

impl Add for BlochOperator {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.c + o.c, self.r + o.r)
    }
}

impl Sub for BlochOperator {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.c - o.c, self.r - o.r)
    }
}

impl Mul<f64> for BlochOperator {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.c * s, self.r * s)
    }
}

impl Neg for BlochOperator {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.c, -self.r)
    }
}

/// Qubit states with prior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedStateSet {
    states: Vec<(BlochOperator, f64)>,
}

impl WeightedStateSet {
    pub fn new(states: Vec<(BlochOperator, f64)>) -> Result<Self, QubitError> {
        let sum: f64 = states.iter().map(|s| s.1).sum();
        if states.iter().any(|s| !(s.1 >= 0.0)) || (sum - 1.0).abs() > 1e-10 {
            return Err(QubitError::InvalidPriors { sum });
        }
        for (index, (rho, _)) in states.iter().enumerate() {
            if (rho.c - 0.5).abs() > CONSTRAINT_TOL {
                return Err(QubitError::InvalidState { index, reason: format!("trace {} ≠ 1", 2.0 * rho.c) });
            }
            if rho.norm_r() > 0.5 + CONSTRAINT_TOL {
                return Err(QubitError::InvalidState { index, reason: format!("|r| = {} > 1/2", rho.norm_r()) });
            }
        }
        Ok(Self { states })
    }

    /// Equiprobable states from Bloch vectors.
    pub fn equiprobable(bloch: &[Vector3<f64>]) -> Result<Self, QubitError> {
        let p = 1.0 / bloch.len() as f64;
        let states = bloch.iter().map(|b| BlochOperator::state(*b).map(|s| (s, p))).collect::<Result<Vec<_>, _>>()?;
        Self::new(states)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[(BlochOperator, f64)] {
        &self.states
    }

    /// Weighted state `p_k ρ_k`.
    pub fn weighted(&self, k: usize) -> BlochOperator {
        self.states[k].0 * self.states[k].1
    }

    /// Applies the same unitary to every state, given as a rotation of Bloch vectors.
    pub fn rotated(&self, rotation: &nalgebra::Rotation3<f64>) -> Self {
        let states = self.states.iter().map(|(s, p)| (BlochOperator::new(s.c, rotation * s.r), *p)).collect();
        Self { states }
    }

    /// Reorders the states.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self { states: order.iter().map(|&i| self.states[i]).collect() }
    }
}

/// Operators entering the reduced success probability, plus the additive constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcOperators {
    pub a: BlochOperator,
    pub b: BlochOperator,
    pub c: BlochOperator,
    /// `p_{1,0}` for three states, `(p_{1,0} + p_{1,1})/2` for four.
    pub offset: f64,
}

/// `A`, `B`, `C` for a set of three or four states under the ordering `order`.
pub fn abc_operators(set: &WeightedStateSet, order: &[usize]) -> Result<AbcOperators, QubitError> {
    let m = set.len();
    if order.len() != m {
        return Err(QubitError::DimensionMismatch { expected: m, found: order.len() });
    }
    let s = |a: usize, b: usize| set.weighted(order[2 * a + b]);
    let p = |a: usize, b: usize| set.states()[order[2 * a + b]].1;
    match m {
        3 => Ok(AbcOperators {
            a: (s(0, 0) + s(0, 1)) * 0.5 - s(1, 0),
            b: (s(0, 0) - s(0, 1)) * 0.5,
            c: BlochOperator::zero(),
            offset: p(1, 0),
        }),
        4 => Ok(AbcOperators {
            a: (s(0, 0) + s(0, 1) - s(1, 0) - s(1, 1)) * 0.5,
            b: (s(0, 0) - s(0, 1)) * 0.5,
            c: (s(1, 0) - s(1, 1)) * 0.5,
            offset: 0.5 * (p(1, 0) + p(1, 1)),
        }),
        other => Err(QubitError::UnsupportedSize(other)),
    }
}

/// `‖√Q X √Q‖₁` for qubits: linear when `X` is definite, otherwise the square-root form.
fn sandwiched_trace_norm(qc: f64, qr: &Vector3<f64>, x: &BlochOperator) -> f64 {
    let lin = qc * x.c + qr.dot(&x.r);
    if x.is_definite() {
        2.0 * lin.abs()
    } else {
        let disc = lin * lin + (x.r.norm_squared() - x.c * x.c) * (qc * qc - qr.norm_squared());
        2.0 * disc.max(0.0).sqrt()
    }
}

/// `𝓕_Q(A, B, C) = Tr[QA + |√Q B √Q| + |√(1-Q) C √(1-Q)|]`.
pub fn f_value(q: &BlochOperator, a: &BlochOperator, b: &BlochOperator, c: &BlochOperator) -> Result<f64, QubitError> {
    if !q.is_effect() {
        return Err(QubitError::ConstraintViolated { c: q.c, r: q.norm_r() });
    }
    Ok(f_value_unchecked(q, a, b, c))
}

fn f_value_unchecked(q: &BlochOperator, a: &BlochOperator, b: &BlochOperator, c: &BlochOperator) -> f64 {
    if b.is_definite() && c.is_definite() {
        let x = *a + b.abs() - c.abs();
        return 2.0 * (q.c * x.c + q.r.dot(&x.r) + c.abs().c);
    }
    let tb = sandwiched_trace_norm(q.c, &q.r, b);
    let tc = sandwiched_trace_norm(1.0 - q.c, &(-q.r), c);
    2.0 * (q.c * a.c + q.r.dot(&a.r)) + tb + tc
}

/// How the maximum of `𝓕_Q` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FMethod {
    ClosedForm,
    Numerical,
}

/// Maximum of `𝓕_Q` over `0 ≤ Q ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FOptimum {
    pub value: f64,
    pub q: BlochOperator,
    pub method: FMethod,
    pub evaluations: usize,
    pub converged: bool,
}

/// Search space used by [`f_optimize_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchSpace {
    /// `(c_Q, |r_Q|, θ, φ)` with `|r_Q| ≤ min(c_Q, 1 - c_Q)`.
    Full,
    /// `c_Q + |r_Q| = 1` with `r_Q` in the plane of `r_A`, `r_B`.
    ThreeStateReduced,
}

/// Whether any of the closed-form conditions holds for `(A, B, C)`.
pub fn closed_form_applies(a: &BlochOperator, b: &BlochOperator, c: &BlochOperator) -> bool {
    let definite = b.is_definite() && c.is_definite();
    let commuting = a.commutes_with(b) && a.commutes_with(c) && b.commutes_with(c);
    let nested = {
        let ap = a.positive_part().support_projector(SIGN_TOL);
        let an = (-*a).positive_part().support_projector(SIGN_TOL);
        contained(&b.nonzero_support(SIGN_TOL), &ap) && contained(&c.nonzero_support(SIGN_TOL), &an)
    };
    definite || commuting || nested
}

/// `P ≤ R` for projectors, i.e. `R P = P`.
fn contained(p: &BlochOperator, r: &BlochOperator) -> bool {
    let prod = r.to_matrix() * p.to_matrix();
    (prod - p.to_matrix()).iter().all(|z| z.norm() < 1e-9)
}

/// Closed form `Tr[(A + |B| - |C|)₊] + ‖C‖₁` with the projector that attains it.
pub fn closed_form(a: &BlochOperator, b: &BlochOperator, c: &BlochOperator) -> (f64, BlochOperator) {
    let x = *a + b.abs() - c.abs();
    let value = x.positive_part().trace() + c.trace_norm();
    (value, x.support_projector(0.0))
}

/// Maximizes `𝓕_Q` over the full constraint set.
pub fn f_optimize(a: &BlochOperator, b: &BlochOperator, c: &BlochOperator) -> FOptimum {
    f_optimize_with(a, b, c, SearchSpace::Full)
}

/// Maximizes `𝓕_Q`, trying the certified closed form first and otherwise searching `space`.
pub fn f_optimize_with(a: &BlochOperator, b: &BlochOperator, c: &BlochOperator, space: SearchSpace) -> FOptimum {
    if closed_form_applies(a, b, c) {
        let (value, q) = closed_form(a, b, c);
        let attained = f_value_unchecked(&q, a, b, c);
        if (attained - value).abs() < 1e-10 {
            return FOptimum { value, q, method: FMethod::ClosedForm, evaluations: 1, converged: true };
        }
    }
    let mut best = match space {
        SearchSpace::Full => search_full(a, b, c),
        SearchSpace::ThreeStateReduced => search_reduced(a, b, c),
    };
    for q in [BlochOperator::zero(), BlochOperator::identity()] {
        let v = f_value_unchecked(&q, a, b, c);
        if v > best.value {
            best.value = v;
            best.q = q;
        }
    }
    best
}

fn full_point(x: &[f64]) -> BlochOperator {
    let (c, rho, theta, phi) = (x[0], x[1], x[2], x[3]);
    let len = rho * c.min(1.0 - c).max(0.0);
    let dir = Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
    BlochOperator::new(c, dir * len)
}

fn search_full(a: &BlochOperator, b: &BlochOperator, c: &BlochOperator) -> FOptimum {
    let lower = [0.0, 0.0, 0.0, 0.0];
    let upper = [1.0, 1.0, std::f64::consts::PI, 2.0 * std::f64::consts::PI];
    let f = |x: &[f64]| f_value_unchecked(&full_point(x), a, b, c);
    refine_grid(&f, &lower, &upper, full_point)
}

/// Orthonormal pair spanning a plane that contains `u` and `v`.
fn plane_basis(u: &Vector3<f64>, v: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let pick = |w: &Vector3<f64>| w.norm() > SIGN_TOL;
    let e1 = if pick(u) {
        u.normalize()
    } else if pick(v) {
        v.normalize()
    } else {
        Vector3::x()
    };
    let w = v - e1 * e1.dot(v);
    let e2 = if w.norm() > SIGN_TOL {
        w.normalize()
    } else {
        let trial = if e1.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        (trial - e1 * e1.dot(&trial)).normalize()
    };
    (e1, e2)
}

fn search_reduced(a: &BlochOperator, b: &BlochOperator, c: &BlochOperator) -> FOptimum {
    let (e1, e2) = plane_basis(&a.r, &b.r);
    let point = move |x: &[f64]| {
        let (cq, phi) = (x[0], x[1]);
        BlochOperator::new(cq, (e1 * phi.cos() + e2 * phi.sin()) * (1.0 - cq))
    };
    let f = |x: &[f64]| f_value_unchecked(&point(x), a, b, c);
    refine_grid(&f, &[0.5, 0.0], &[1.0, 2.0 * std::f64::consts::PI], point)
}

/// Grid scan with [`GRID_POINTS`] nodes per dimension followed by pattern search from the best node.
fn refine_grid(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    lower: &[f64],
    upper: &[f64],
    point: impl Fn(&[f64]) -> BlochOperator,
) -> FOptimum {
    let dim = lower.len();
    let total = GRID_POINTS.pow(dim as u32);
    let node = |mut idx: usize| -> Vec<f64> {
        (0..dim)
            .map(|d| {
                let i = idx % GRID_POINTS;
                idx /= GRID_POINTS;
                lower[d] + (upper[d] - lower[d]) * i as f64 / (GRID_POINTS - 1) as f64
            })
            .collect()
    };
    let (best_idx, _) = (0..total)
        .into_par_iter()
        .map(|i| (i, f(&node(i))))
        .reduce(|| (usize::MAX, f64::NEG_INFINITY), |x, y| {
            if y.1 > x.1 || (y.1 == x.1 && y.0 < x.0) {
                y
            } else {
                x
            }
        });
    let search = PatternSearch { initial_step: 1.0 / (GRID_POINTS - 1) as f64, min_step: 1e-9, max_evaluations: 200_000 };
    let SearchResult { point: x, value, evaluations, converged } = search.maximize(f, &node(best_idx), lower, upper);
    FOptimum { value, q: point(&x), method: FMethod::Numerical, evaluations: evaluations + total, converged }
}

/// Optimal success probability with the maximizing ordering and first-step operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Discrimination {
    pub p_succ: f64,
    pub q: BlochOperator,
    pub ordering: Vec<usize>,
    pub method: FMethod,
}

const ORDERINGS_3: [[usize; 3]; 3] = [[0, 1, 2], [0, 2, 1], [1, 2, 0]];
const ORDERINGS_4: [[usize; 4]; 3] = [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]];

/// Best success probability for three states over all inequivalent orderings, using the reduced search.
pub fn psucc3(set: &WeightedStateSet) -> Result<Discrimination, QubitError> {
    psucc3_with(set, SearchSpace::ThreeStateReduced)
}

/// As [`psucc3`] with an explicit search space.
pub fn psucc3_with(set: &WeightedStateSet, space: SearchSpace) -> Result<Discrimination, QubitError> {
    if set.len() != 3 {
        return Err(QubitError::UnsupportedSize(set.len()));
    }
    best_over(set, ORDERINGS_3.iter().map(|o| o.to_vec()).collect(), space)
}

/// Best success probability for four states over the three pairings.
pub fn psucc4(set: &WeightedStateSet) -> Result<Discrimination, QubitError> {
    if set.len() != 4 {
        return Err(QubitError::UnsupportedSize(set.len()));
    }
    best_over(set, ORDERINGS_4.iter().map(|o| o.to_vec()).collect(), SearchSpace::Full)
}

fn best_over(set: &WeightedStateSet, orderings: Vec<Vec<usize>>, space: SearchSpace) -> Result<Discrimination, QubitError> {
    let mut best: Option<Discrimination> = None;
    for order in orderings {
        let abc = abc_operators(set, &order)?;
        let opt = f_optimize_with(&abc.a, &abc.b, &abc.c, space);
        let p = abc.offset + opt.value;
        if best.as_ref().is_none_or(|b| p > b.p_succ) {
            best = Some(Discrimination { p_succ: p, q: opt.q, ordering: order, method: opt.method });
        }
    }
    Ok(best.expect("at least one ordering"))
}

/// Success probability of two, three or four qubit states.
pub fn psucc(set: &WeightedStateSet) -> Result<Discrimination, QubitError> {
    match set.len() {
        2 => {
            let diff = set.weighted(0) - set.weighted(1);
            let p = 0.5 * (1.0 + diff.trace_norm());
            Ok(Discrimination { p_succ: p, q: diff.support_projector(0.0), ordering: vec![0, 1], method: FMethod::ClosedForm })
        }
        3 => psucc3(set),
        4 => psucc4(set),
        other => Err(QubitError::UnsupportedSize(other)),
    }
}

/// Smallest enclosing ball radius of a point set (exhaustive over support sets of up to four points).
pub fn min_enclosing_radius(points: &[Vector3<f64>]) -> f64 {
    let n = points.len();
    if n <= 1 {
        return 0.0;
    }
    let fits = |center: &Vector3<f64>, radius: f64| points.iter().all(|p| (p - center).norm() <= radius * (1.0 + 1e-12) + 1e-12);
    let mut best = f64::INFINITY;
    let mut consider = |center: Option<Vector3<f64>>, support: &Vector3<f64>| {
        if let Some(c) = center {
            let radius = (support - c).norm();
            if radius < best && fits(&c, radius) {
                best = radius;
            }
        }
    };
    for i in 0..n {
        for j in i + 1..n {
            consider(Some((points[i] + points[j]) * 0.5), &points[i]);
            for k in j + 1..n {
                consider(circumcenter3(&points[i], &points[j], &points[k]), &points[i]);
                for l in k + 1..n {
                    consider(circumcenter4(&points[i], &points[j], &points[k], &points[l]), &points[i]);
                }
            }
        }
    }
    best
}

fn circumcenter3(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> Option<Vector3<f64>> {
    let (u, v) = (b - a, c - a);
    let w = u.cross(&v);
    let denom = 2.0 * w.norm_squared();
    if denom < 1e-24 {
        return None;
    }
    Some(a + (w.cross(&u) * v.norm_squared() + v.cross(&w) * u.norm_squared()) / denom)
}

fn circumcenter4(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>, d: &Vector3<f64>) -> Option<Vector3<f64>> {
    let m = nalgebra::Matrix3::from_rows(&[(b - a).transpose(), (c - a).transpose(), (d - a).transpose()]);
    let rhs = Vector3::new(
        0.5 * (b.norm_squared() - a.norm_squared()),
        0.5 * (c.norm_squared() - a.norm_squared()),
        0.5 * (d.norm_squared() - a.norm_squared()),
    );
    if m.determinant().abs() < 1e-14 {
        return None;
    }
    m.lu().solve(&rhs)
}

/// `1/M + R` for equiprobable qubit states, `R` the ratio between the polytope of `r_ℓ/M`
/// and its largest similar copy inside the Bloch ball.
pub fn polytope_ratio_psucc(bloch: &[Vector3<f64>]) -> f64 {
    let m = bloch.len() as f64;
    (1.0 + min_enclosing_radius(bloch)) / m
}

/// Minimum error probability for the equiprobable cyclic set `{U^ℓ |ψ₀⟩}`, `U^M = 1`.
///
/// With `λ_k` the eigenvalues of `M ρ̄` and `|d_k⟩` the common eigenbasis of `U` and `ρ̄`,
/// `P_err = 1 - |Σ_k λ_k^{-1/2} |⟨d_k|ψ₀⟩|²|² / M`.
pub fn cyclic_symmetric_perr(psi0: &CVector, u: &CMatrix, m: usize) -> Result<f64, QubitError> {
    let d = psi0.len();
    if u.nrows() != d || u.ncols() != d {
        return Err(QubitError::DimensionMismatch { expected: d, found: u.nrows() });
    }
    if m == 0 {
        return Err(QubitError::UnsupportedSize(0));
    }
    let mut powers = Vec::with_capacity(m);
    let mut acc = CMatrix::identity(d, d);
    for _ in 0..m {
        powers.push(acc.clone());
        acc = u * acc;
    }
    let defect = (&acc - CMatrix::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > 1e-8 {
        return Err(QubitError::NotCyclic(defect));
    }
    let norm = psi0.norm();
    let psi = psi0 / C64::new(norm, 0.0);
    let mut sum = 0.0;
    for k in 0..m {
        // Spectral projector of U for eigenvalue e^{2πik/M}.
        let mut proj = CMatrix::zeros(d, d);
        for (j, p) in powers.iter().enumerate() {
            let w = C64::from_polar(1.0 / m as f64, -2.0 * std::f64::consts::PI * (k * j) as f64 / m as f64);
            proj += p * w;
        }
        let v = &proj * &psi;
        let weight = v.norm_squared();
        if weight < 1e-30 {
            continue;
        }
        let dk = &v / C64::new(weight.sqrt(), 0.0);
        let overlap = dk.dotc(&psi).norm_sqr();
        let lambda = m as f64 * weight;
        sum += overlap / lambda.sqrt();
    }
    Ok(1.0 - sum * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trine() -> WeightedStateSet {
        let b: Vec<_> = (0..3)
            .map(|k| {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                Vector3::new(phi.cos(), phi.sin(), 0.0)
            })
            .collect();
        WeightedStateSet::equiprobable(&b).unwrap()
    }

    #[test]
    fn bloch_matrix_round_trip() {
        let h = BlochOperator::new(0.3, Vector3::new(0.1, -0.2, 0.4));
        let back = BlochOperator::from_matrix(&h.to_matrix()).unwrap();
        assert!((back.c - h.c).abs() < 1e-15 && (back.r - h.r).norm() < 1e-15);
    }

    #[test]
    fn abs_of_indefinite() {
        let h = BlochOperator::new(0.1, Vector3::new(0.0, 0.0, 0.5));
        let a = h.abs();
        assert!((a.c - 0.5).abs() < 1e-15 && (a.r.z - 0.1).abs() < 1e-15);
    }

    #[test]
    fn f_value_endpoints() {
        let a = BlochOperator::new(0.1, Vector3::new(0.2, 0.0, 0.0));
        let b = BlochOperator::new(0.05, Vector3::new(0.0, 0.3, 0.0));
        let c = BlochOperator::new(-0.02, Vector3::new(0.0, 0.0, 0.1));
        let one = f_value(&BlochOperator::identity(), &a, &b, &c).unwrap();
        assert!((one - (a.trace() + b.trace_norm())).abs() < 1e-14);
        let zero = f_value(&BlochOperator::zero(), &a, &b, &c).unwrap();
        assert!((zero - c.trace_norm()).abs() < 1e-14);
    }

    #[test]
    fn f_value_rejects_infeasible_q() {
        let q = BlochOperator::new(0.5, Vector3::new(0.6, 0.0, 0.0));
        let z = BlochOperator::zero();
        assert!(matches!(f_value(&q, &z, &z, &z), Err(QubitError::ConstraintViolated { .. })));
    }

    #[test]
    fn trine_is_two_thirds() {
        let p = psucc3(&trine()).unwrap().p_succ;
        assert!((p - 2.0 / 3.0).abs() < 1e-9, "{p}");
        assert!((polytope_ratio_psucc(&trine().states().iter().map(|s| s.0.r * 2.0).collect::<Vec<_>>()) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn certain_state_is_found() {
        let s = |phi: f64| BlochOperator::equatorial(phi);
        let set = WeightedStateSet::new(vec![(s(0.0), 0.0), (s(1.0), 0.0), (s(2.0), 1.0)]).unwrap();
        assert!((psucc3(&set).unwrap().p_succ - 1.0).abs() < 1e-12);
    }

    #[test]
    fn antipodal_polytope() {
        let b = [Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.0, 0.0, -1.0)];
        assert!((polytope_ratio_psucc(&b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cyclic_trivial_cases() {
        let psi = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(cyclic_symmetric_perr(&psi, &CMatrix::identity(2, 2), 1).unwrap().abs() < 1e-15);
        let x = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(cyclic_symmetric_perr(&psi, &x, 2).unwrap().abs() < 1e-15);
    }
}
