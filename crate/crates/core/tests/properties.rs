use proptest::prelude::*;
use rand::Rng;
use steerlab::algebra::{broadcast_check, classical_broadcaster, clone_orthogonal_pair, AlgebraState, BlockAlgebra};
use steerlab::channels::{
    apply_nonselective, apply_selective, dephase, dilate_povm, DephasingChannel, ProjectiveMeasurement,
};
use steerlab::entangle::{
    epr_singlet, hjw_steering_measurement, negativity, purify, steer, teleport_branch, BipartiteState,
};
use steerlab::protocols::{no_signaling_trial, run_commitment, AttackStrategy, CommitmentScheme};
use steerlab::qmat::{partial_trace, tensor, ComplexMatrix, HermitianOperator, Subsystem, UnitVector};
use steerlab::random::{self, seeded};
use steerlab::worlds::{separate, World};
use steerlab::Complex64;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn tensor_is_associative(seed in any::<u64>(), d in 1usize..4) {
        let mut rng = seeded(seed);
        // Gaussian integers keep every product exact.
        let mut int = |r, c| {
            ComplexMatrix::from_fn(r, c, |_, _| Complex64::new(rng.random_range(-9..=9) as f64, rng.random_range(-9..=9) as f64))
        };
        let (a, b, c) = (int(d, 2), int(2, d), int(d, d));
        prop_assert_eq!(tensor(&tensor(&a, &b), &c), tensor(&a, &tensor(&b, &c)));

        let a = random::ginibre(d, 2, &mut rng);
        let b = random::ginibre(2, d, &mut rng);
        let c = random::ginibre(d, d, &mut rng);
        prop_assert!(tensor(&tensor(&a, &b), &c).max_abs_diff(&tensor(&a, &tensor(&b, &c))) < 1e-12);
    }

    #[test]
    fn partial_trace_keeps_trace(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let m = random::ginibre(da * db, da * db, &mut seeded(seed));
        for keep in [Subsystem::A, Subsystem::B] {
            let t = partial_trace(&m, (da, db), keep).unwrap().trace();
            prop_assert!((t - m.trace()).norm() < 1e-9);
        }
    }

    #[test]
    fn hermitian_closure(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let h = random::hermitian(2, &mut rng).into_matrix();
        let k = random::hermitian(2, &mut rng).into_matrix();
        let products = [&h.matmul(&k) + &k.matmul(&h), h.tensor(&k), &h + &k, h.matmul(&h)];
        for p in products {
            prop_assert!(p.hermiticity_defect() < 1e-9);
        }
    }

    #[test]
    fn eigh_reconstructs(seed in any::<u64>(), d in 1usize..7) {
        let h = random::hermitian(d, &mut seeded(seed));
        let e = h.eigh().unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(h.matrix()) < 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn channels_preserve_trace_and_positivity(seed in any::<u64>(), d in 2usize..4, n in 1usize..4) {
        let mut rng = seeded(seed);
        let ch = random::channel(d, n, &mut rng);
        let rho = random::density(d, 1 + n % d, &mut rng);
        let out = apply_nonselective(&ch, &rho).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-9);
        prop_assert!(HermitianOperator::symmetrized(&out).min_eigenvalue().unwrap() > -1e-9);
    }

    #[test]
    fn dephasing_composes(seed in any::<u64>(), l1 in 0.0f64..=1.0, l2 in 0.0f64..=1.0) {
        let mut rng = seeded(seed);
        let u = random::unitary(3, &mut rng);
        let basis: Vec<UnitVector> = (0..3).map(|k| UnitVector::basis(3, k).transformed(&u)).collect();
        let rho = random::density(3, 3, &mut rng);
        let first = DephasingChannel::new(basis.clone(), l1).unwrap();
        let second = DephasingChannel::new(basis.clone(), l2).unwrap();
        let combined = DephasingChannel::new(basis, 1.0 - (1.0 - l1) * (1.0 - l2)).unwrap();
        let twice = dephase(&second, &dephase(&first, &rho).unwrap()).unwrap();
        prop_assert!(twice.max_abs_diff(&dephase(&combined, &rho).unwrap()) < 1e-9);
    }

    #[test]
    fn naimark_matches_born(seed in any::<u64>(), d in 2usize..4, n in 2usize..5) {
        let mut rng = seeded(seed);
        let m = random::povm(d, n, &mut rng);
        let rho = random::density(d, d, &mut rng);
        let direct = m.probabilities(&rho).unwrap();
        let dilated = dilate_povm(&m).unwrap().probabilities(&rho).unwrap();
        for (a, b) in direct.iter().zip(&dilated) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn selective_probabilities_sum_to_one(seed in any::<u64>(), d in 2usize..4) {
        let mut rng = seeded(seed);
        let u = random::unitary(d, &mut rng);
        let basis: Vec<UnitVector> = (0..d).map(|k| UnitVector::basis(d, k).transformed(&u)).collect();
        let pm = ProjectiveMeasurement::from_basis(&basis).unwrap();
        let rho = random::density(d, d, &mut rng);
        let total: f64 = pm.projectors().iter().map(|p| apply_selective(p, &rho).unwrap().probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn commuting_states_broadcast(seed in any::<u64>(), points in 2usize..5) {
        let mut rng = seeded(seed);
        let algebra = BlockAlgebra::classical(points).unwrap();
        let caster = classical_broadcaster(
            &(0..points).map(|k| UnitVector::basis(points, k)).collect::<Vec<_>>(),
        ).unwrap();
        for _ in 0..2 {
            let state = AlgebraState::classical(&algebra, random::distribution(points, &mut rng)).unwrap();
            prop_assert!(broadcast_check(&caster, &state.to_matrix()).unwrap().ok);
        }
    }

    #[test]
    fn noncommuting_qubits_do_not_broadcast(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = random::density(2, 1 + (seed % 2) as usize, &mut rng);
        let b = random::density(2, 1, &mut rng);
        prop_assume!(a.commutator(&b).frobenius_norm() > 0.1);
        for basis_of in [&a, &b] {
            let basis = HermitianOperator::symmetrized(basis_of).eigh().unwrap().vectors;
            let caster = classical_broadcaster(&basis).unwrap();
            let both = broadcast_check(&caster, &a).unwrap().ok && broadcast_check(&caster, &b).unwrap().ok;
            prop_assert!(!both);
        }
    }

    #[test]
    fn overlapping_pairs_never_clone(seed in any::<u64>(), d in 2usize..4) {
        let mut rng = seeded(seed);
        let psi = random::unit_vector(d, &mut rng);
        let phi = random::unit_vector(d, &mut rng);
        let overlap = psi.inner(&phi).norm();
        prop_assume!(overlap > 1e-9 && overlap < 1.0 - 1e-9);
        prop_assert!(clone_orthogonal_pair(&psi, &phi).unwrap().unitary().is_none());
    }

    #[test]
    fn ensemble_average_is_marginal(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let mut rng = seeded(seed);
        let state = BipartiteState::new(random::density(da * db, 2, &mut rng), (da, db)).unwrap();
        let m = random::povm(da, 3, &mut rng);
        let ens = steer(&state, &m).unwrap();
        prop_assert!(ens.average().max_abs_diff(&state.marginal(Subsystem::B)) < 1e-9);
    }

    #[test]
    fn steering_round_trip(seed in any::<u64>(), db in 2usize..4, extra in 0usize..3) {
        let mut rng = seeded(seed);
        let rho = random::density(db, db, &mut rng);
        let target = random::pure_ensemble_with_average(&rho, db + extra, &mut rng);
        let psi = purify(&rho, db).unwrap();
        let m = hjw_steering_measurement(&psi, (db, db), &target).unwrap();
        let got = steer(&BipartiteState::from_pure(&psi, (db, db)).unwrap(), &m.measurement).unwrap();
        for (k, &i) in got.outcomes.iter().enumerate() {
            prop_assert!((got.probabilities[k] - target.probabilities()[i]).abs() < 1e-9);
            prop_assert!(got.members[k].max_abs_diff(&target.members()[i].projector()) < 1e-9);
        }
    }

    #[test]
    fn teleportation_is_exact(seed in any::<u64>(), outcome in 1usize..=4) {
        let input = random::unit_vector(2, &mut seeded(seed));
        let out = teleport_branch(&input, &epr_singlet(), outcome).unwrap();
        prop_assert!((out.fidelity - 1.0).abs() < 1e-9);
    }

    #[test]
    fn product_states_have_zero_negativity(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let s = BipartiteState::product(&random::density(2, 2, &mut rng), &random::density(3, 2, &mut rng)).unwrap();
        prop_assert!(negativity(&s).unwrap() < 1e-9);
    }

    #[test]
    fn no_signaling_holds(seed in any::<u64>(), db in 2usize..4, kraus in 1usize..4) {
        let mut rng = seeded(seed);
        let state = BipartiteState::new(random::density(2 * db, 3, &mut rng), (2, db)).unwrap();
        let ch = random::channel(2, kraus, &mut rng);
        prop_assert!(no_signaling_trial(&state, &ch).unwrap() < 1e-10);
    }

    #[test]
    fn honest_commitment_always_accepted(seed in any::<u64>(), dim in 2usize..4, bit in 0u8..2, world in 0usize..4) {
        let world = [World::Classical, World::Quantum, World::Dephased { strength: 0.5 }, World::Dephased { strength: 1.0 }][world];
        let scheme = CommitmentScheme::random(dim, &mut seeded(seed));
        let t = run_commitment(&scheme, AttackStrategy::Honest { bit }, world, seed).unwrap();
        prop_assert!((t.acceptance_probability().unwrap() - 1.0).abs() < 1e-9);
        prop_assert!(t.validate().is_ok());
    }

    #[test]
    fn quantum_epr_attack_is_undetected(seed in any::<u64>(), dim in 2usize..4, bit in 0u8..2) {
        let scheme = CommitmentScheme::random(dim, &mut seeded(seed));
        let t = run_commitment(&scheme, AttackStrategy::EprAttack { bit }, World::Quantum, seed).unwrap();
        prop_assert!((t.acceptance_probability().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn separation_preserves_marginals(seed in any::<u64>(), rank in 1usize..5, lambda in 0.0f64..=1.0) {
        let state = BipartiteState::new(random::density(4, rank, &mut seeded(seed)), (2, 2)).unwrap();
        let out = separate(&state, World::Dephased { strength: lambda }).unwrap();
        for side in [Subsystem::A, Subsystem::B] {
            prop_assert!(out.marginal(side).max_abs_diff(&state.marginal(side)) < 1e-9);
        }
    }

    #[test]
    fn dephasing_never_raises_negativity(seed in any::<u64>()) {
        let psi = random::unit_vector(4, &mut seeded(seed));
        let state = BipartiteState::from_pure(&psi, (2, 2)).unwrap();
        let mut last = f64::INFINITY;
        for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let n = negativity(&separate(&state, World::Dephased { strength: lambda }).unwrap()).unwrap();
            prop_assert!(n <= last + 1e-9);
            last = n;
        }
        prop_assert!(last < 1e-9);
    }
}
