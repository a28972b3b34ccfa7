use nalgebra::{DMatrix, Matrix3, Rotation3, Vector3};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qchain_core::chain::{
    build_hamiltonian_eigen, build_hamiltonian_lab, mixing_angles, sample_disorder, ChainSpec, DisorderSpec,
    DisorderTarget,
};
use qchain_core::lindblad::{evolve_with, rates_from_angles, EvolveOptions, LindbladGenerator, NoiseSpec};
use qchain_core::linalg::{hermiticity_defect, kron, max_abs, CMatrix};
use qchain_core::measures::{log_negativity, partial_transpose, reduce, trace_norm_hermitian, ReducedState};
use qchain_core::mps::MpsMixedState;
use qchain_core::state::{eigenbasis_bell_head, eigenbasis_product, fidelity, ground_state, thermal_state, DensityMatrix};
use qchain_core::witness::{bound_c1, bound_c2, bound_c2_optimized, correlation_matrix, CorrelationMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec_strategy(max_n: usize) -> impl Strategy<Value = ChainSpec> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(-0.2..0.2f64, n),
            prop::collection::vec(0.02..0.3f64, n),
            prop::collection::vec(0.0..0.1f64, n - 1),
        )
            .prop_map(move |(epsilon, delta, coupling)| ChainSpec {
                n_qubits: n,
                epsilon,
                delta,
                coupling,
                energy_unit_kelvin: 1.0,
            })
    })
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_density(n: usize, rank: usize, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_matrix(&mut rng, 1 << n, rank);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(n, m.unscale(tr)).unwrap()
}

fn random_unitary_2x2(rng: &mut ChaCha8Rng) -> CMatrix {
    let g = random_matrix(rng, 2, 2);
    let q = g.qr().q();
    q
}

fn two_site_e_n(m: &CMatrix) -> f64 {
    log_negativity(&ReducedState::new(vec![0, 1], m.clone()).unwrap(), &[0]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hamiltonians_are_hermitian_and_isospectral(spec in spec_strategy(4)) {
        let lab = build_hamiltonian_lab(&spec).unwrap();
        let eig = build_hamiltonian_eigen(&spec).unwrap();
        for h in [&lab, &eig] {
            prop_assert!(hermiticity_defect(h.matrix()) <= 1e-12 * max_abs(h.matrix()));
        }
        let (a, b) = (lab.spectrum(), eig.spectrum());
        let scale = a.iter().fold(1e-300f64, |m, e| m.max(e.abs()));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10 * scale, "{x} vs {y}");
        }
    }

    #[test]
    fn zero_bias_gives_pure_relaxation(delta in prop::collection::vec(0.01..1.0f64, 1..6)) {
        let n = delta.len();
        let spec = ChainSpec { n_qubits: n, epsilon: vec![0.0; n], delta, coupling: vec![0.02; n - 1], energy_unit_kelvin: 1.0 };
        let angles = mixing_angles(&spec).unwrap();
        for i in 0..n {
            prop_assert_eq!(angles.cos(i), 0.0);
            prop_assert_eq!(angles.sin(i), 1.0);
        }
    }

    #[test]
    fn disorder_stays_in_interval(seed in any::<u64>(), d in 0.0..0.5f64, spec in spec_strategy(6)) {
        let targets = vec![DisorderTarget::Epsilon, DisorderTarget::Delta, DisorderTarget::Coupling];
        let out = sample_disorder(&spec, &DisorderSpec::new(d, targets, seed).unwrap());
        let inside = |v: f64, a: f64| {
            let (lo, hi) = ((1.0 - d) * a, (1.0 + d) * a);
            v >= lo.min(hi) && v <= lo.max(hi)
        };
        for i in 0..spec.n_qubits {
            prop_assert!(inside(out.delta[i], spec.delta[i]));
            prop_assert!(inside(out.epsilon[i], spec.epsilon[i]));
        }
        for (k, k0) in out.coupling.iter().zip(&spec.coupling) {
            prop_assert!(inside(*k, *k0));
        }
    }

    #[test]
    fn thermal_states_are_physical_and_ordered(spec in spec_strategy(4), t in 1e-3..1.0f64) {
        let h = build_hamiltonian_eigen(&spec).unwrap();
        let rho = thermal_state(&h, t).unwrap();
        let diag = rho.diagnostics();
        prop_assert!(diag.hermiticity <= 1e-12);
        prop_assert!(diag.trace_error <= 1e-10);
        prop_assert!(diag.min_eigenvalue >= -1e-9);
        let g = ground_state(&h).unwrap();
        prop_assert!((g.state.amplitudes().norm() - 1.0).abs() <= 1e-12);
        let energy = rho.expectation(h.matrix()).re;
        prop_assert!(g.energy <= energy + 1e-12);
        let hotter = thermal_state(&h, 1.5 * t).unwrap();
        prop_assert!(fidelity(&g.state, &hotter).unwrap() <= fidelity(&g.state, &rho).unwrap() + 1e-12);
    }

    #[test]
    fn evolution_preserves_state_invariants(
        spec in spec_strategy(3),
        gamma in 0.0..0.05f64,
        n_thermal in 0.0..1.0f64,
        bell in any::<bool>(),
    ) {
        let n = spec.n_qubits;
        let h = build_hamiltonian_eigen(&spec).unwrap();
        let rates = rates_from_angles(&mixing_angles(&spec).unwrap(), &NoiseSpec { gamma, n_thermal });
        let gen = LindbladGenerator::new(&h, &rates).unwrap();
        let psi = if bell && n >= 2 { eigenbasis_bell_head(n).unwrap() } else { eigenbasis_product(n).unwrap() };
        let mut purity = 0.0f64;
        let drift = evolve_with(&psi.to_density(), &gen, &EvolveOptions::new(30.0, 0.05, 10), |_, rho| {
            purity = purity.max((rho.purity() - 1.0).abs());
            Ok(())
        }).unwrap();
        prop_assert!(drift.max_trace_drift <= 1e-8);
        prop_assert!(drift.max_hermiticity_drift < 1e-12);
        prop_assert!(drift.min_eigenvalue >= -1e-7);
        if gamma == 0.0 {
            prop_assert!(purity <= 1e-8);
        }
    }

    #[test]
    fn negativity_is_nonnegative_and_locally_invariant(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = random_density(2, rank, seed);
        let en = two_site_e_n(rho.matrix());
        prop_assert!(en >= 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let u = kron(&random_unitary_2x2(&mut rng), &random_unitary_2x2(&mut rng));
        let rotated = &u * rho.matrix() * u.adjoint();
        prop_assert!((two_site_e_n(&rotated) - en).abs() <= 1e-9);
        let pt = partial_transpose(&ReducedState::new(vec![0, 1], rho.matrix().clone()).unwrap(), &[0]).unwrap();
        let singular: f64 = pt.singular_values().iter().sum();
        prop_assert!((trace_norm_hermitian(&pt) - singular).abs() <= 1e-10);
    }

    #[test]
    fn separable_mixtures_have_zero_negativity(seed in any::<u64>(), terms in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = CMatrix::zeros(4, 4);
        for _ in 0..terms {
            let a = random_density_from(&mut rng);
            let b = random_density_from(&mut rng);
            m += kron(&a, &b) * C64::from(rng.gen_range(0.1..1.0));
        }
        let tr = m.trace().re;
        let rho = m.unscale(tr);
        prop_assert!(two_site_e_n(&rho) <= 1e-12);
        let x = correlation_matrix(&DensityMatrix::new(2, rho).unwrap(), 0, 1).unwrap();
        prop_assert!(bound_c1(&x) <= 1e-12 && bound_c2(&x) <= 1e-12);
    }

    #[test]
    fn optimized_bound_is_rotation_invariant(seed in any::<u64>(), axis in prop::array::uniform3(-1.0..1.0f64), angle in 0.0..6.3f64) {
        let rho = random_density(2, 2, seed);
        let x = correlation_matrix(&rho, 0, 1).unwrap();
        let sym = (x.entries() + x.entries().transpose()) * 0.5;
        let v = Vector3::from(axis);
        prop_assume!(v.norm() > 1e-3);
        let r = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(v), angle);
        let rotated: Matrix3<f64> = r.matrix() * sym * r.matrix().transpose();
        let a = bound_c2_optimized(&CorrelationMatrix::from_entries(0, 1, sym).unwrap()).unwrap().value;
        let b = bound_c2_optimized(&CorrelationMatrix::from_entries(0, 1, rotated).unwrap()).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-10);
        prop_assert!(bound_c2(&CorrelationMatrix::from_entries(0, 1, rotated).unwrap()) <= b + 1e-12);
    }

    #[test]
    fn mps_reduced_states_match_dense(seed in any::<u64>(), n in 2usize..=4, rank in 1usize..=3) {
        let rho = random_density(n, rank, seed);
        let mps = MpsMixedState::from_dense(&rho).unwrap();
        prop_assert!((mps.trace().re - 1.0).abs() <= 1e-10);
        for i in 0..n - 1 {
            let a = mps.reduced_pair_dm(i, i + 1).unwrap();
            let b = reduce(&rho, &[i, i + 1]).unwrap();
            prop_assert!((a.matrix() - b.matrix()).norm() <= 1e-8);
        }
    }
}

fn random_density_from(rng: &mut ChaCha8Rng) -> CMatrix {
    let g = random_matrix(rng, 2, 2);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    m.unscale(tr)
}
