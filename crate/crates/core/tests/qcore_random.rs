use proptest::prelude::*;

use projens_core::permutations::haar_moment_oracle;
use projens_core::qcore::{
    evolve_unitary, hermitian_eig, kron, pauli_x, pauli_y, project_bath, schatten_norm, BathProjection, ComplexMatrix,
    QubitSplit, Statevector,
};
use projens_core::random::{
    haar_state, haar_unitary, sample_categorical, sample_disorder, sample_initial, ClassicalSource, RngStream,
};
use projens_core::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_hermitian(d: usize, rng: &mut RngStream) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| rng.complex_normal());
    g.hermitize()
}

#[test]
fn tilted_field_eigenvalues() {
    let mut h = pauli_x().scale_real(0.8090);
    h.add_scaled(&pauli_y(), c(0.9045, 0.0));
    let e = hermitian_eig(&h).unwrap();
    let r = (0.8090f64.powi(2) + 0.9045f64.powi(2)).sqrt();
    assert!((e.values[0] + r).abs() < 1e-12 && (e.values[1] - r).abs() < 1e-12);
    assert!((r - 1.2135).abs() < 1e-4);
}

#[test]
fn quarter_period_of_x_rotation() {
    let u = evolve_unitary(&pauli_x(), std::f64::consts::FRAC_PI_2).unwrap();
    let want = pauli_x().scale(c(0.0, -1.0));
    assert!(u.max_abs_diff(&want) < 1e-12);
}

#[test]
fn haar_state_projections_are_normalized() {
    let mut rng = RngStream::new(3, 0);
    let psi = haar_state(8, &mut rng).unwrap();
    let split = QubitSplit::new(2, 1).unwrap();
    let mut total = 0.0;
    for z in 0..2 {
        match project_bath(&psi, z, split).unwrap() {
            BathProjection::Branch { state, prob } => {
                assert!((state.norm() - 1.0).abs() < 1e-12);
                total += prob;
            }
            BathProjection::Negligible { .. } => panic!("Haar state has a negligible branch"),
        }
    }
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn first_haar_moment_by_sampling() {
    let mut rng = RngStream::new(11, 0);
    let n = 10_000;
    let mut acc = ComplexMatrix::zeros(4, 4);
    for _ in 0..n {
        let u = haar_unitary(4, &mut rng).unwrap();
        let col = u.column(0);
        acc.add_scaled(&ComplexMatrix::outer(&col, &col), c(1.0 / n as f64, 0.0));
    }
    assert!(acc.max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 5e-3);
}

#[test]
fn disorder_moments() {
    let mut rng = RngStream::new(5, 0);
    let xs: Vec<f64> = (0..10_000).flat_map(|_| sample_disorder(10, 1.0, &mut rng).unwrap()).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    assert!(mean.abs() < 0.01);
    assert!((var - 1.0 / 3.0).abs() < 0.01);
}

#[test]
fn uniform_source_frequencies() {
    let src = ClassicalSource::uniform_all(2).unwrap();
    let mut rng = RngStream::new(8, 1);
    let n = 100_000;
    let mut counts = [0usize; 4];
    for _ in 0..n {
        counts[sample_initial(&src, &mut rng)] += 1;
    }
    let sigma = (n as f64 * 0.25 * 0.75).sqrt();
    for k in counts {
        assert!((k as f64 - n as f64 / 4.0).abs() < 3.0 * sigma, "{counts:?}");
    }
}

#[test]
fn fair_coin_frequency() {
    let mut rng = RngStream::new(9, 2);
    let n = 100_000;
    let zeros = (0..n).filter(|_| sample_categorical(&[1.0, 1.0], &mut rng).unwrap() == 0).count();
    let sigma = (n as f64 * 0.25).sqrt();
    assert!((zeros as f64 - n as f64 / 2.0).abs() < 3.0 * sigma);
}

#[test]
fn streams_reproduce_bit_for_bit() {
    let a = haar_unitary(8, &mut RngStream::new(42, 7)).unwrap();
    let b = haar_unitary(8, &mut RngStream::new(42, 7)).unwrap();
    assert_eq!(a.data(), b.data());
    let c = haar_unitary(8, &mut RngStream::new(42, 8)).unwrap();
    assert_ne!(a.data(), c.data());
}

// V U and U V have the Haar first and second moments when U does.
#[test]
fn haar_invariance_of_low_moments() {
    let d = 2;
    let mut rng = RngStream::new(21, 0);
    let v = haar_unitary(d, &mut rng).unwrap();
    let psi = Statevector::basis(1, 0).unwrap();
    let a1 = psi.projector();
    let a2 = kron(&a1, &a1).unwrap();
    let want1 = haar_moment_oracle(&a1, 1, d).unwrap();
    let want2 = haar_moment_oracle(&a2, 2, d).unwrap();
    let n = 20_000;
    for left in [true, false] {
        let mut m1 = [0.0; 4];
        let mut m2 = vec![Vec::new(); 16];
        for _ in 0..n {
            let u = haar_unitary(d, &mut rng).unwrap();
            let w = if left { v.matmul(&u) } else { u.matmul(&v) };
            let phi = psi.apply(&w).unwrap();
            let p1 = phi.projector();
            let p2 = kron(&p1, &p1).unwrap();
            for (i, z) in p1.data().iter().enumerate() {
                m1[i] += z.re / n as f64;
            }
            for (i, z) in p2.data().iter().enumerate() {
                m2[i].push(z.re);
            }
        }
        for (i, m) in m1.iter().enumerate() {
            assert!((m - want1.data()[i].re).abs() < 0.02);
        }
        for (i, xs) in m2.iter().enumerate() {
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            let se = (var / n as f64).sqrt().max(1e-12);
            let want = want2.data()[i].re;
            assert!((mean - want).abs() <= 3.0 * se + 1e-12, "entry {i}: {mean} vs {want} (se {se})");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn propagators_are_unitary_and_compose(seed in any::<u64>(), t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
        let mut rng = RngStream::new(seed, 0);
        let h = random_hermitian(6, &mut rng);
        let u1 = evolve_unitary(&h, t1).unwrap();
        let u2 = evolve_unitary(&h, t2).unwrap();
        prop_assert!(u1.unitarity_defect() <= 1e-10);
        let u12 = evolve_unitary(&h, t1 + t2).unwrap();
        prop_assert!(u1.matmul(&u2).max_abs_diff(&u12) <= 1e-9);
    }

    #[test]
    fn bath_projection_partitions_probability(seed in any::<u64>(), n_a in 1usize..4, n_b in 1usize..4) {
        let split = QubitSplit::new(n_a, n_b).unwrap();
        let psi = haar_state(split.dim(), &mut RngStream::new(seed, 0)).unwrap();
        let total: f64 = (0..split.d_b()).map(|z| project_bath(&psi, z, split).unwrap().prob()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn schatten_norms_are_ordered(seed in any::<u64>(), dim in 1usize..7) {
        let mut rng = RngStream::new(seed, 0);
        let m = ComplexMatrix::from_fn(dim, dim, |_, _| rng.complex_normal());
        let n1 = schatten_norm(&m, 1.0).unwrap();
        let n2 = schatten_norm(&m, 2.0).unwrap();
        let ninf = schatten_norm(&m, f64::INFINITY).unwrap();
        prop_assert!(n1 >= n2 - 1e-12 && n2 >= ninf - 1e-12);
        prop_assert!((n2 - m.frobenius_norm()).abs() <= 1e-10 * n2.max(1.0));
    }
}
