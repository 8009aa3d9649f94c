//! Remote steering: the four-state example on the singlet and the general
//! construction of a steering measurement for any compatible pure ensemble.

use num_complex::Complex64;
use serde::Serialize;

use super::{BipartiteState, PureEnsemble};
use crate::channels::{dilate_povm, GeneralizedMeasurement, ProjectiveMeasurement};
use crate::qmat::{eigh, ComplexMatrix, HermitianOperator, UnitVector};
use crate::tol::tolerance;
use crate::{Error, Result};

/// Real amplitudes `α, β` with `α² + β² = 1` defining
/// `φ₁ = α|+⟩ + β|−⟩`, `φ₂ = α|+⟩ − β|−⟩`, `φ₃ = β|+⟩ + α|−⟩`,
/// `φ₄ = β|+⟩ − α|−⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteeringExampleConfig {
    pub alpha: f64,
    pub beta: f64,
}

impl SteeringExampleConfig {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let norm = alpha * alpha + beta * beta;
        if !alpha.is_finite() || !beta.is_finite() || (norm - 1.0).abs() > tolerance() {
            return Err(Error::InvalidParameter(format!(
                "α² + β² must equal 1, got {norm}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn targets(&self) -> [UnitVector; 4] {
        let (a, b) = (self.alpha, self.beta);
        [[a, b], [a, -b], [b, a], [b, -a]].map(|v| UnitVector::from_real(&v).expect("normalized"))
    }

    /// Equal-weight mixture of the four targets; it averages to `½I`.
    pub fn target_ensemble(&self) -> PureEnsemble {
        PureEnsemble::uniform(self.targets().to_vec()).expect("four members")
    }

    /// `|φ₁⟩_{A′} ⊗ |ψ⟩_{AB}` with Alice holding `A′ ⊗ A` (dimension 4).
    pub fn joint_state(&self) -> BipartiteState {
        self.joint_state_with(&super::epr_singlet())
            .expect("singlet is a valid 2⊗2 state")
    }

    /// Same construction over an arbitrary shared two-qubit state.
    pub fn joint_state_with(&self, shared: &BipartiteState) -> Result<BipartiteState> {
        if shared.dims() != (2, 2) {
            return Err(Error::DimensionMismatch("shared state must be 2⊗2".into()));
        }
        let ancilla = self.targets()[0].projector();
        BipartiteState::new(ancilla.tensor(shared.rho()), (4, 2))
    }
}

/// Bell basis on `A′ ⊗ A` in the order `|1⟩ … |4⟩`:
/// `(|+−⟩ − |−+⟩)/√2`, `(|+−⟩ + |−+⟩)/√2`, `(|++⟩ − |−−⟩)/√2`,
/// `(|++⟩ + |−−⟩)/√2`.
pub fn bell_basis() -> [UnitVector; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        [0.0, h, -h, 0.0],
        [0.0, h, h, 0.0],
        [h, 0.0, 0.0, -h],
        [h, 0.0, 0.0, h],
    ]
    .map(|v| UnitVector::from_real(&v).expect("normalized"))
}

pub fn bell_measurement() -> ProjectiveMeasurement {
    ProjectiveMeasurement::from_basis(&bell_basis()).expect("orthonormal Bell basis")
}

/// Measurement on Alice's side that steers Bob into a chosen ensemble.
#[derive(Debug, Clone)]
pub struct SteeringMeasurement {
    pub measurement: GeneralizedMeasurement,
    /// Every effect is a projector.
    pub projective: bool,
    /// Ancilla needed to realize it projectively (1 when already projective).
    pub ancilla_dim: usize,
}

/// Build a measurement on A such that outcome `i` occurs with probability
/// `pᵢ` and leaves B in `|ψᵢ⟩`.
///
/// Write the purification as `|Ψ⟩ = Σ Mᵢⱼ |i⟩|j⟩` and `N = Mᵀ`, so
/// `ρ_B = N N†` and `Tr_A[(E ⊗ I)|Ψ⟩⟨Ψ|] = N Eᵀ N†`. Taking
/// `xᵢ = √pᵢ N† ρ_B⁺ |ψᵢ⟩` and `Eᵢ = |x̄ᵢ⟩⟨x̄ᵢ|` gives
/// `N Eᵢᵀ N† = pᵢ |ψᵢ⟩⟨ψᵢ|`. The `Eᵢ` sum to the projector onto Alice's
/// support; its complement (which annihilates `|Ψ⟩`) is folded into the
/// first effect. For linearly independent targets the `xᵢ` are orthonormal
/// and the result is projective.
pub fn hjw_steering_measurement(
    purification: &UnitVector,
    dims: (usize, usize),
    target: &PureEnsemble,
) -> Result<SteeringMeasurement> {
    let (da, db) = dims;
    if purification.dim() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "purification of length {} is not {da}·{db}",
            purification.dim()
        )));
    }
    if target.dim() != db {
        return Err(Error::DimensionMismatch(format!(
            "targets live in dimension {}, Bob's side is {db}",
            target.dim()
        )));
    }
    let tol = tolerance();
    let amps = purification.amplitudes();
    // N[j][i] = M[i][j] = ψ[i·d_B + j]
    let n = ComplexMatrix::from_fn(db, da, |j, i| amps[i * db + j]);
    let rho_b = n.matmul(&n.dagger());

    let spectrum = eigh(&HermitianOperator::symmetrized(&rho_b))?;
    let mut pinv = ComplexMatrix::zeros(db, db);
    let mut support = ComplexMatrix::zeros(db, db);
    for (lambda, v) in spectrum.values.iter().zip(&spectrum.vectors) {
        if *lambda > tol {
            let p = v.projector();
            pinv = &pinv + &p.scale_real(1.0 / lambda);
            support = &support + &p;
        }
    }

    let support_tol = tol.sqrt();
    for (index, psi) in target.members().iter().enumerate() {
        let inside = support.apply(psi.amplitudes());
        let residual = psi
            .amplitudes()
            .iter()
            .zip(&inside)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > support_tol {
            return Err(Error::NotInSupport { index, residual });
        }
    }
    let gap = target.average().frobenius_distance(&rho_b);
    if gap > tol {
        return Err(Error::AverageMismatch(gap));
    }

    let n_dag_pinv = n.dagger().matmul(&pinv);
    let mut effects: Vec<ComplexMatrix> = target
        .probabilities()
        .iter()
        .zip(target.members())
        .map(|(p, psi)| {
            let x: Vec<Complex64> = n_dag_pinv
                .apply(psi.amplitudes())
                .into_iter()
                .map(|z| (z * p.sqrt()).conj())
                .collect();
            ComplexMatrix::outer(&x, &x)
        })
        .collect();
    let covered = effects
        .iter()
        .fold(ComplexMatrix::zeros(da, da), |acc, e| &acc + e);
    let complement = &ComplexMatrix::identity(da) - &covered;
    if complement.max_abs() > tol {
        effects[0] = &effects[0] + &complement;
    }
    // Clean rounding noise below the tolerance before validation.
    let effects = effects
        .iter()
        .map(|e| HermitianOperator::symmetrized(&e.chop(1e-15)))
        .collect();
    let measurement = GeneralizedMeasurement::new(effects)?;
    let projective = measurement.is_projective();
    let ancilla_dim = dilate_povm(&measurement)?.ancilla_dim;
    Ok(SteeringMeasurement {
        measurement,
        projective,
        ancilla_dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entangle::{epr_singlet, purify, schmidt, singlet_vector, steer};
    use crate::qmat::{inner, Subsystem, ZERO};
    use crate::random::{self, seeded};

    /// `½ Σ sᵢ |i⟩|φᵢ⟩` assembled term by term.
    fn expanded_joint_vector(cfg: &SteeringExampleConfig, signs: [f64; 4]) -> Vec<Complex64> {
        let mut v = vec![ZERO; 8];
        for ((bell, phi), s) in bell_basis().iter().zip(cfg.targets()).zip(signs) {
            for (x, y) in v.iter_mut().zip(bell.tensor(&phi).amplitudes()) {
                *x += y * (0.5 * s);
            }
        }
        v
    }

    #[test]
    fn targets_average_to_half_identity() {
        let cfg = SteeringExampleConfig::new(0.6, 0.8).unwrap();
        let avg = cfg.target_ensemble().average();
        assert!(avg.approx_eq(&ComplexMatrix::identity(2).scale_real(0.5), 1e-15));
        assert!(SteeringExampleConfig::new(0.6, 0.6).is_err());
    }

    #[test]
    fn displayed_expansion_matches_branch_by_branch() {
        let cfg = SteeringExampleConfig::new(0.6, 0.8).unwrap();
        let product = cfg.targets()[0].tensor(&singlet_vector());
        // Each Bell branch of the product state is ½|φᵢ⟩ up to sign.
        for (bell, phi) in bell_basis().iter().zip(cfg.targets()) {
            let bra = bell.projector().tensor(&ComplexMatrix::identity(2));
            let branch = bra.apply(product.amplitudes());
            let norm = crate::qmat::norm_sqr(&branch);
            assert!((norm - 0.25).abs() < 1e-15);
            let reduced = UnitVector::normalized(branch).unwrap();
            assert!(reduced.same_ray(&bell.tensor(&phi), 1e-14));
        }
        // As displayed (−, −, +, +) the fourth branch carries the opposite
        // sign; with (−, −, +, −) the sum is the product state exactly.
        let displayed = expanded_joint_vector(&cfg, [-1.0, -1.0, 1.0, 1.0]);
        assert!((inner(product.amplitudes(), &displayed).re - 0.5).abs() < 1e-14);
        let exact = expanded_joint_vector(&cfg, [-1.0, -1.0, 1.0, -1.0]);
        let overlap = inner(product.amplitudes(), &exact);
        assert!((overlap.re - 1.0).abs() < 1e-14 && overlap.im.abs() < 1e-14, "{overlap}");
    }

    #[test]
    fn bell_measurement_steers_into_the_four_states() {
        let cfg = SteeringExampleConfig::new(0.6, 0.8).unwrap();
        let ens = steer(&cfg.joint_state(), &bell_measurement().to_povm()).unwrap();
        assert_eq!(ens.outcomes, vec![0, 1, 2, 3]);
        for (k, phi) in cfg.targets().iter().enumerate() {
            assert!((ens.probabilities[k] - 0.25).abs() < 1e-10);
            let fid = ens.members[k].sandwich(phi.amplitudes(), phi.amplitudes()).re;
            assert!((fid - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn hjw_on_the_singlet_reproduces_the_four_state_mixture() {
        let cfg = SteeringExampleConfig::new(0.6, 0.8).unwrap();
        let sm = hjw_steering_measurement(&singlet_vector(), (2, 2), &cfg.target_ensemble()).unwrap();
        // Four linearly dependent qubit states need a POVM.
        assert!(!sm.projective);
        assert_eq!(sm.ancilla_dim, 4);
        let ens = steer(&epr_singlet(), &sm.measurement).unwrap();
        for (k, phi) in cfg.targets().iter().enumerate() {
            assert!((ens.probabilities[k] - 0.25).abs() < 1e-10);
            assert!((ens.members[k].sandwich(phi.amplitudes(), phi.amplitudes()).re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn eigen_ensemble_gives_schmidt_basis_measurement() {
        let mut rng = seeded(40);
        let rho = random::density(3, 3, &mut rng);
        let psi = purify(&rho, 3).unwrap();
        let e = eigh(&HermitianOperator::symmetrized(&rho)).unwrap();
        let target = PureEnsemble::new(e.values.clone(), e.vectors.clone()).unwrap();
        let sm = hjw_steering_measurement(&psi, (3, 3), &target).unwrap();
        assert!(sm.projective);
        assert_eq!(sm.ancilla_dim, 1);
        let sd = schmidt(&psi, (3, 3)).unwrap();
        for (eff, a) in sm.measurement.effects().iter().zip(&sd.a_basis) {
            assert!(eff.matrix().approx_eq(&a.projector(), 1e-10));
        }
    }

    #[test]
    fn random_three_member_qubit_ensemble_round_trip() {
        let mut rng = seeded(41);
        for _ in 0..10 {
            let rho = random::density(2, 2, &mut rng);
            let target = random::pure_ensemble_with_average(&rho, 3, &mut rng);
            let psi = purify(&rho, 3).unwrap();
            let sm = hjw_steering_measurement(&psi, (3, 2), &target).unwrap();
            let state = BipartiteState::from_pure(&psi, (3, 2)).unwrap();
            let ens = steer(&state, &sm.measurement).unwrap();
            assert_eq!(ens.len(), target.len());
            for (k, member) in target.members().iter().enumerate() {
                assert!((ens.probabilities[k] - target.probabilities()[k]).abs() < 1e-9);
                assert!(ens.members[k].approx_eq(&member.projector(), 1e-9));
            }
            assert!(ens.average().approx_eq(&state.marginal(Subsystem::B), 1e-12));
        }
    }

    #[test]
    fn rejects_mismatched_average_and_unsupported_member() {
        let cfg = SteeringExampleConfig::new(0.6, 0.8).unwrap();
        let biased = PureEnsemble::new(vec![0.7, 0.1, 0.1, 0.1], cfg.targets().to_vec()).unwrap();
        assert!(matches!(
            hjw_steering_measurement(&singlet_vector(), (2, 2), &biased),
            Err(Error::AverageMismatch(_))
        ));
        // Rank-one marginal |0⟩⟨0|; |1⟩ lies outside its support.
        let product = UnitVector::basis(2, 0).tensor(&UnitVector::basis(2, 0));
        let outside = PureEnsemble::new(vec![1.0], vec![UnitVector::basis(2, 1)]).unwrap();
        assert!(matches!(
            hjw_steering_measurement(&product, (2, 2), &outside),
            Err(Error::NotInSupport { index: 0, .. })
        ));
    }
}
