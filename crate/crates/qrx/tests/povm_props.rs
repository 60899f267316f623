//! Measurement lemmas, Helstrom optimum and nested-POVM round trips on random instances.

use proptest::prelude::*;
use qrx::fock::coherent_state;
use qrx::linalg::{hermitian_eigen, max_abs_diff, min_eigenvalue, sqrt_psd, trace_re, CMatrix, CVector, C64};
use qrx::povm::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_density(rng: &mut impl Rng, d: usize) -> CMatrix {
    let rank = rng.random_range(1..=d);
    let g = random_matrix(rng, d, rank);
    let rho = &g * g.adjoint();
    let t = trace_re(&rho);
    rho.unscale(t)
}

/// Random effect `0 ≤ E ≤ 1`.
fn random_effect(rng: &mut impl Rng, d: usize) -> CMatrix {
    let g = random_matrix(rng, d, d);
    let h = &g * g.adjoint();
    let (values, _) = hermitian_eigen(&h);
    h.unscale(values[d - 1]).scale(rng.random_range(0.05..1.0))
}

/// Random POVM `S^{-1/2} G_k G_k† S^{-1/2}`; the first element has full rank so `S` is invertible.
fn random_povm(rng: &mut impl Rng, d: usize, m: usize) -> Povm {
    let raw: Vec<CMatrix> = (0..m)
        .enumerate()
        .map(|(k, _)| {
            let rank = if k == 0 { d } else { rng.random_range(1..=d) };
            let g = random_matrix(rng, d, rank);
            &g * g.adjoint()
        })
        .collect();
    let total = raw.iter().fold(CMatrix::zeros(d, d), |acc, e| acc + e);
    let w = qrx::linalg::pinv_sqrt_psd(&total, 1e-14);
    Povm::new(raw.iter().map(|e| &w * e * &w).collect()).unwrap()
}

fn sandwich(e: &CMatrix, rho: &CMatrix) -> CMatrix {
    e * rho * e
}

fn ket(v: &[C64]) -> CMatrix {
    let k = CVector::from_column_slice(v);
    &k * k.adjoint()
}

#[test]
fn measurement_lemmas_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let d = rng.random_range(2..=6);
        let (rho, sigma) = (random_density(&mut rng, d), random_density(&mut rng, d));
        let e = random_effect(&mut rng, d);
        let dist = trace_distance(&rho, &sigma);
        // Contractivity under E · E.
        assert!(trace_distance(&sandwich(&e, &rho), &sandwich(&e, &sigma)) <= dist + 1e-12);
        // Nearby states give nearby outcome probabilities.
        assert!(trace_re(&(&e * &rho)) >= trace_re(&(&e * &sigma)) - 2.0 * dist - 1e-12);
        // Gentle operator.
        for eps in [0.3, 0.1, 0.01] {
            let p: CMatrix = random_effect(&mut rng, d);
            let gentle = CMatrix::identity(d, d) - p.scale(rng.random_range(0.0..eps));
            let prob = trace_re(&(&gentle * &rho));
            assert!(prob >= 1.0 - eps);
            let root = sqrt_psd(&gentle);
            assert!(trace_distance(&sandwich(&root, &rho), &rho) <= eps.sqrt() + 1e-12);
        }
    }
}

#[test]
fn fuchs_van_de_graaf_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let d = rng.random_range(2..=6);
        let (rho, sigma) = (random_density(&mut rng, d), random_density(&mut rng, d));
        let (dist, f) = (trace_distance(&rho, &sigma), fidelity(&rho, &sigma));
        assert!((0.0..=1.0 + 1e-12).contains(&dist));
        assert!(1.0 - f.sqrt() <= dist + 1e-9);
        assert!(dist <= (1.0 - f).max(0.0).sqrt() + 1e-9, "d={d} dist={dist} f={f}");
    }
}

#[test]
fn distance_examples() {
    let zero = ket(&[c(1.0), c(0.0)]);
    let one = ket(&[c(0.0), c(1.0)]);
    assert!(trace_distance(&zero, &zero).abs() < 1e-15);
    assert!((fidelity(&zero, &zero) - 1.0).abs() < 1e-12);
    assert!((trace_distance(&zero, &one) - 1.0).abs() < 1e-12);
    assert!(fidelity(&zero, &one).abs() < 1e-12);
    let vac = coherent_state(c(0.0), 30).unwrap().to_density().into_matrix();
    let alpha = coherent_state(c(1.0), 30).unwrap().to_density().into_matrix();
    assert!((fidelity(&vac, &alpha) - (-1.0f64).exp()).abs() < 1e-9);
}

#[test]
fn measurement_examples() {
    let cutoff = 30;
    let alpha = coherent_state(c(0.8), cutoff).unwrap().to_density().into_matrix();
    let vac = ket(&(0..=cutoff).map(|n| c(if n == 0 { 1.0 } else { 0.0 })).collect::<Vec<_>>());
    let on_off = Povm::new(vec![vac.clone(), CMatrix::identity(cutoff + 1, cutoff + 1) - vac]).unwrap();
    let p = on_off.measure(&alpha).unwrap();
    assert!((p[0] - (-0.64f64).exp()).abs() < 1e-12);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);

    let trine: Vec<CMatrix> = (0..3)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            ket(&[c((th / 2.0).cos()), c((th / 2.0).sin())]).scale(2.0 / 3.0)
        })
        .collect();
    let povm = Povm::new(trine).unwrap();
    let probs = povm.measure(&CMatrix::identity(2, 2).scale(0.5)).unwrap();
    assert!(probs.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-12));
    for k in 0..3 {
        let post = povm.post_state(&CMatrix::identity(2, 2).scale(0.5), k).unwrap();
        assert!((trace_re(&post) - 1.0).abs() < 1e-12);
        assert!(min_eigenvalue(&post) > -1e-12);
    }
}

#[test]
fn helstrom_examples() {
    let overlap = (-2.0f64).exp();
    let (a, b) = ([c(1.0), c(0.0)], [c(overlap), c((1.0 - overlap * overlap).sqrt())]);
    let (rho0, rho1) = (ket(&a), ket(&b));
    let (p_err, povm) = helstrom_binary(&rho0, &rho1, 0.5).unwrap();
    assert!((p_err - 0.5 * (1.0 - (1.0 - overlap * overlap).sqrt())).abs() < 1e-12);
    assert!((p_err - 0.004600070).abs() < 5e-9);
    let achieved = 0.5 * povm.measure(&rho1).unwrap()[0] + 0.5 * povm.measure(&rho0).unwrap()[1];
    assert!((achieved - p_err).abs() < 1e-10);
    assert!((helstrom_binary(&rho0, &rho0, 0.5).unwrap().0 - 0.5).abs() < 1e-12);
    assert!(helstrom_binary(&rho0, &ket(&[c(0.0), c(1.0)]), 0.5).unwrap().0.abs() < 1e-12);
}

proptest! {
    #[test]
    fn helstrom_is_weighted_trace_distance(seed in 0u64..10_000, p0 in 0.05f64..0.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.random_range(2..=5);
        let (rho0, rho1) = (random_density(&mut rng, d), random_density(&mut rng, d));
        let (p_err, povm) = helstrom_binary(&rho0, &rho1, p0).unwrap();
        let weighted = trace_distance(&rho0.scale(p0), &rho1.scale(1.0 - p0));
        prop_assert!((p_err - (0.5 - weighted)).abs() < 1e-10);
        let achieved = p0 * povm.measure(&rho0).unwrap()[1] + (1.0 - p0) * povm.measure(&rho1).unwrap()[0];
        prop_assert!((achieved - p_err).abs() < 1e-10);
        let other = random_povm(&mut rng, d, 2);
        let guess = p0 * other.measure(&rho0).unwrap()[1] + (1.0 - p0) * other.measure(&rho1).unwrap()[0];
        prop_assert!(guess >= p_err - 1e-10);
    }

    #[test]
    fn tree_round_trip(seed in 0u64..100_000, d in 1usize..=8, m in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let povm = random_povm(&mut rng, d, m);
        let tree = binary_tree_decompose(&povm).unwrap();
        prop_assert!(tree.weak_completeness_defect() < 1e-9);
        let rebuilt = reconstruct(&tree);
        prop_assert_eq!(rebuilt.len(), tree.padded_outcomes());
        for (k, e) in povm.elements().iter().enumerate() {
            prop_assert!(max_abs_diff(e, &rebuilt.elements()[k]) < 1e-9);
        }
        for k in m..rebuilt.len() {
            prop_assert!(rebuilt.null_flags()[k]);
            prop_assert!(rebuilt.elements()[k].iter().all(|z| z.norm() < 1e-9));
        }
        // Operational equivalence with the step-by-step simulation.
        let rho = random_density(&mut rng, d);
        let direct = rebuilt.measure(&rho).unwrap();
        let simulated = tree.simulate(&rho);
        for (a, b) in direct.iter().zip(&simulated) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn projective_tree_is_exact() {
    let d = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = random_matrix(&mut rng, d, d);
    let (_, basis) = hermitian_eigen(&(&g + g.adjoint()));
    let projectors: Vec<CMatrix> = (0..d).map(|k| basis.column(k) * basis.column(k).adjoint()).collect();
    let povm = Povm::new(projectors.clone()).unwrap();
    let tree = binary_tree_decompose_strict(&povm).unwrap();
    let root = tree.node(1, 0);
    assert!(max_abs_diff(&root.b0, &(&projectors[0] + &projectors[2])) < 1e-12);
    assert!(max_abs_diff(&root.b1, &(&projectors[1] + &projectors[3])) < 1e-12);
    let rebuilt = reconstruct(&tree);
    for (k, projector) in projectors.iter().enumerate() {
        assert!(max_abs_diff(&rebuilt.elements()[k], projector) < 1e-12);
    }
}

#[test]
fn padded_three_outcome_tree_has_one_null_leaf() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let povm = random_povm(&mut rng, 3, 3);
    let tree = binary_tree_decompose(&povm).unwrap();
    assert_eq!((tree.depth(), tree.padded_outcomes(), tree.outcomes()), (2, 4, 3));
    let rebuilt = reconstruct(&tree);
    assert_eq!(rebuilt.null_flags(), &[false, false, false, true]);
    assert!(rebuilt.elements()[3].iter().all(|z| z.norm() < 1e-12));
    let rho = random_density(&mut rng, 3);
    assert!(tree.simulate(&rho)[3].abs() < 1e-12);
}

#[test]
fn srm_examples() {
    let zero = ket(&[c(1.0), c(0.0), c(0.0)]);
    let one = ket(&[c(0.0), c(1.0), c(0.0)]);
    let povm = srm(&[zero.clone(), one.clone()]).unwrap();
    assert!(max_abs_diff(&povm.elements()[0], &zero) < 1e-12);
    assert!(max_abs_diff(&povm.elements()[1], &one) < 1e-12);
    assert_eq!(povm.labels().last().unwrap(), "null");

    // Two pure qubit states at angle θ: pretty-good success equals Helstrom for equal priors.
    let th: f64 = 0.6;
    let a = ket(&[c(1.0), c(0.0)]);
    let b = ket(&[c(th.cos()), c(th.sin())]);
    let pgm = srm(&[a.clone(), b.clone()]).unwrap();
    let success = 0.5 * (pgm.measure(&a).unwrap()[0] + pgm.measure(&b).unwrap()[1]);
    let expected = 0.5 * (1.0 + (1.0 - th.cos().powi(2)).sqrt());
    assert!((success - expected).abs() < 1e-12);

    let trine: Vec<CMatrix> = (0..3)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            ket(&[c((t / 2.0).cos()), c((t / 2.0).sin())])
        })
        .collect();
    let pgm = srm(&trine).unwrap();
    let success: f64 = (0..3).map(|k| pgm.measure(&trine[k]).unwrap()[k] / 3.0).sum();
    assert!((success - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn sequential_examples() {
    let p = ket(&[c(1.0), c(0.0)]);
    let single = sequential_povm(std::slice::from_ref(&p)).unwrap();
    assert!(max_abs_diff(&single.elements()[1], &(CMatrix::identity(2, 2) - &p)) < 1e-15);

    let zero = ket(&[c(1.0), c(0.0), c(0.0)]);
    let one = ket(&[c(0.0), c(1.0), c(0.0)]);
    let ortho = sequential_povm(&[zero, one]).unwrap();
    assert!(max_abs_diff(&ortho.elements()[2], &ket(&[c(0.0), c(0.0), c(1.0)])) < 1e-15);

    let s = 0.5f64.sqrt();
    let overlapping = sequential_povm(&[ket(&[c(1.0), c(0.0), c(0.0)]), ket(&[c(s), c(s), c(0.0)])]).unwrap();
    assert!(overlapping.elements().iter().all(|e| min_eigenvalue(e) > -1e-12));
    assert!(min_eigenvalue(&overlapping.elements()[2]) > -1e-12);
}
