//! Two-party protocols: bit commitment with honest and EPR-attacking
//! senders, concealment, the classical unique-decomposition argument, and
//! the no-signaling harness.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{is_commutative, AlgebraState, BlockAlgebra};
use crate::channels::{dephase, draw_index, DephasingChannel, GeneralizedMeasurement, KrausChannel};
use crate::entangle::{hjw_steering_measurement, purify, steer, BipartiteState, PureEnsemble};
use crate::par::{self, Execution};
use crate::qmat::{partial_trace, ComplexMatrix, Subsystem};
use crate::random::{self, seeded};
use crate::tol::tolerance;
use crate::worlds::{separate, World};
use crate::{Error, Result};

/// Two pure-state ensembles on Bob's space with a common average `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommitmentScheme {
    ensemble_0: PureEnsemble,
    ensemble_1: PureEnsemble,
}

impl CommitmentScheme {
    /// Fails with [`Error::ConcealmentViolated`] when the averages differ.
    pub fn new(ensemble_0: PureEnsemble, ensemble_1: PureEnsemble) -> Result<Self> {
        let scheme = Self::unchecked(ensemble_0, ensemble_1)?;
        scheme.check_concealing()?;
        Ok(scheme)
    }

    /// Same shape checks as [`new`](Self::new) without requiring equal averages.
    pub fn unchecked(ensemble_0: PureEnsemble, ensemble_1: PureEnsemble) -> Result<Self> {
        if ensemble_0.dim() != ensemble_1.dim() {
            return Err(Error::DimensionMismatch("ensembles live on different spaces".into()));
        }
        Ok(Self { ensemble_0, ensemble_1 })
    }

    /// `{½, |0⟩, |1⟩}` for 0 and `{½, |+x⟩, |−x⟩}` for 1, both averaging to `½I`.
    pub fn bb84() -> Self {
        use crate::qmat::kets;
        Self::new(
            PureEnsemble::uniform(vec![kets::zero(), kets::one()]).expect("two members"),
            PureEnsemble::uniform(vec![kets::plus_x(), kets::minus_x()]).expect("two members"),
        )
        .expect("both average to ½I")
    }

    /// Random concealing scheme on `dim`: two independent pure
    /// decompositions of one random full-rank `ω`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let omega = random::density(dim, dim, rng);
        let n0 = dim + rng.random_range(0..=2);
        let n1 = dim + rng.random_range(0..=2);
        let e0 = random::pure_ensemble_with_average(&omega, n0, rng);
        let e1 = random::pure_ensemble_with_average(&omega, n1, rng);
        Self::new(e0, e1).expect("matched averages")
    }

    pub fn ensemble(&self, bit: u8) -> &PureEnsemble {
        if bit == 0 {
            &self.ensemble_0
        } else {
            &self.ensemble_1
        }
    }

    pub fn dim(&self) -> usize {
        self.ensemble_0.dim()
    }

    /// Average of the bit-0 ensemble.
    pub fn omega(&self) -> ComplexMatrix {
        self.ensemble_0.average()
    }

    pub fn concealment_gap(&self) -> f64 {
        self.ensemble_0.average().frobenius_distance(&self.ensemble_1.average())
    }

    pub fn is_concealing(&self) -> bool {
        self.concealment_gap() <= tolerance()
    }

    fn check_concealing(&self) -> Result<()> {
        let gap = self.concealment_gap();
        if gap > tolerance() {
            return Err(Error::ConcealmentViolated(gap));
        }
        Ok(())
    }

    /// Canonical purification of `ω` with Alice's copy first.
    pub fn attack_pair(&self) -> Result<BipartiteState> {
        let d = self.dim();
        BipartiteState::from_pure(&purify(&self.omega(), d)?, (d, d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackStrategy {
    Honest { bit: u8 },
    /// Keep a purification and choose the bit at opening.
    EprAttack { bit: u8 },
}

impl AttackStrategy {
    pub fn bit(&self) -> u8 {
        match self {
            Self::Honest { bit } | Self::EprAttack { bit } => *bit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum PhaseRecord {
    Commit { sent: String, bob_dim: usize },
    Hold,
    Open { claimed_bit: u8, claimed_index: usize },
    Verify { accept: bool, acceptance_probability: f64 },
}

impl PhaseRecord {
    fn rank(&self) -> usize {
        match self {
            Self::Commit { .. } => 0,
            Self::Hold => 1,
            Self::Open { .. } => 2,
            Self::Verify { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub strategy: AttackStrategy,
    pub world: World,
    pub rng_seed: u64,
    pub records: Vec<PhaseRecord>,
}

impl ProtocolTranscript {
    /// Phases appear at most once, in order, and `verify` is present
    /// exactly when `open` is.
    pub fn validate(&self) -> Result<()> {
        let ranks: Vec<usize> = self.records.iter().map(PhaseRecord::rank).collect();
        if ranks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidState("transcript phases out of order".into()));
        }
        if ranks.contains(&2) != ranks.contains(&3) {
            return Err(Error::InvalidState("open and verify must appear together".into()));
        }
        Ok(())
    }

    pub fn acceptance_probability(&self) -> Option<f64> {
        self.records.iter().find_map(|r| match r {
            PhaseRecord::Verify { acceptance_probability, .. } => Some(*acceptance_probability),
            _ => None,
        })
    }

    pub fn accepted(&self) -> Option<bool> {
        self.records.iter().find_map(|r| match r {
            PhaseRecord::Verify { accept, .. } => Some(*accept),
            _ => None,
        })
    }
}

/// One full commit, hold, open and verify round.
///
/// Bob accepts the claim `(b, i)` when the projective test onto member `i`
/// of ensemble `b` says yes. The recorded acceptance probability is exact;
/// the accept flag is a draw from the generator seeded with `rng_seed`.
pub fn run_commitment(
    scheme: &CommitmentScheme,
    strategy: AttackStrategy,
    world: World,
    rng_seed: u64,
) -> Result<ProtocolTranscript> {
    scheme.check_concealing()?;
    let bit = strategy.bit();
    if bit > 1 {
        return Err(Error::InvalidParameter(format!("bit {bit} is not 0 or 1")));
    }
    let mut rng = seeded(rng_seed);
    let d = scheme.dim();
    let ensemble = scheme.ensemble(bit);

    let (sent, claimed_index, probability, accept) = match strategy {
        AttackStrategy::Honest { .. } => {
            let index = draw_index(ensemble.probabilities(), &mut rng)?;
            let member = &ensemble.members()[index];
            let alone = BipartiteState::from_pure(member, (1, d))?;
            let bob = separate(&alone, world)?.marginal(Subsystem::B);
            let amps = member.amplitudes();
            let p = bob.sandwich(amps, amps).re.clamp(0.0, 1.0);
            (format!("member {index} of ensemble {bit}"), index, p, rng.random::<f64>() < p)
        }
        AttackStrategy::EprAttack { .. } => {
            let psi = purify(&scheme.omega(), d)?;
            let pair = BipartiteState::from_pure(&psi, (d, d))?;
            let held = separate(&pair, world)?;
            let steering = hjw_steering_measurement(&psi, (d, d), ensemble)?;
            let branches = verification_branches(&held, &steering.measurement, ensemble)?;
            let outcome_probs: Vec<f64> = branches.iter().map(|b| b.0).collect();
            let index = draw_index(&outcome_probs, &mut rng)?;
            let exact: f64 = branches.iter().map(|b| b.1).sum::<f64>().clamp(0.0, 1.0);
            let (p_i, joint_i) = branches[index];
            let conditional = if p_i > 0.0 { joint_i / p_i } else { 0.0 };
            (
                format!("half of a purification of ω, ancilla {d}"),
                index,
                exact,
                rng.random::<f64>() < conditional,
            )
        }
    };
    let transcript = ProtocolTranscript {
        strategy,
        world,
        rng_seed,
        records: vec![
            PhaseRecord::Commit { sent, bob_dim: d },
            PhaseRecord::Hold,
            PhaseRecord::Open {
                claimed_bit: bit,
                claimed_index,
            },
            PhaseRecord::Verify {
                accept,
                acceptance_probability: probability,
            },
        ],
    };
    transcript.validate()?;
    Ok(transcript)
}

/// Per steering outcome `i`: `(tr[(Eᵢ ⊗ I)ρ], tr[(Eᵢ ⊗ |mᵢ⟩⟨mᵢ|)ρ])`.
fn verification_branches(
    state: &BipartiteState,
    m: &GeneralizedMeasurement,
    claims: &PureEnsemble,
) -> Result<Vec<(f64, f64)>> {
    m.effects()
        .iter()
        .zip(claims.members())
        .map(|(e, member)| {
            let weighted = e.matrix().tensor(&ComplexMatrix::identity(state.dims().1)).matmul(state.rho());
            let bob = partial_trace(&weighted, state.dims(), Subsystem::B)?;
            let amps = member.amplitudes();
            Ok((bob.trace().re.max(0.0), bob.sandwich(amps, amps).re.max(0.0)))
        })
        .collect()
}

/// Compare Bob's pre-open states for the two bits as this world shows them.
///
/// Quantum leaves them alone, dephased(λ) dephases both in the
/// computational basis, and classical keeps only the diagonal.
pub fn concealment_check(scheme: &CommitmentScheme, world: World) -> Result<(bool, f64)> {
    let d = scheme.dim();
    let view = |rho: ComplexMatrix| -> Result<ComplexMatrix> {
        match world {
            World::Quantum => Ok(rho),
            World::Dephased { strength } => dephase(&DephasingChannel::computational(d, strength)?, &rho),
            World::Classical => Ok(world.local_state(&rho)),
        }
    };
    let r0 = view(scheme.ensemble(0).average())?;
    let r1 = view(scheme.ensemble(1).average())?;
    let distance = r0.frobenius_distance(&r1);
    Ok((distance <= tolerance(), distance))
}

/// Induced distributions of two point-mass ensembles on a commutative
/// algebra, with their averages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionComparison {
    pub averages_match: bool,
    pub identical: bool,
    pub distribution_0: Vec<f64>,
    pub distribution_1: Vec<f64>,
    /// First point where the distributions differ.
    pub distinguishing_point: Option<usize>,
}

fn induced_distribution(algebra: &BlockAlgebra, ensemble: &[(f64, AlgebraState)]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = algebra.block_dims().len();
    let tol = tolerance();
    let mut dist = vec![0.0; n];
    let mut average = ComplexMatrix::zeros(n, n);
    for (p, state) in ensemble {
        let w = state.block_weights();
        let point = w
            .iter()
            .position(|x| (x - 1.0).abs() <= tol)
            .ok_or_else(|| Error::InvalidState("ensemble member is not a point mass".into()))?;
        dist[point] += p;
        average = &average + &state.to_matrix().scale_real(*p);
    }
    let diag = (0..n).map(|k| average[(k, k)].re).collect();
    Ok((dist, diag))
}

/// Whether two point-mass ensembles on a commutative algebra induce the
/// same distribution over pure states. A simplex decomposes uniquely, so
/// matching averages always give `identical`.
pub fn classical_unique_decomposition(
    algebra: &BlockAlgebra,
    ensemble_0: &[(f64, AlgebraState)],
    ensemble_1: &[(f64, AlgebraState)],
) -> Result<DecompositionComparison> {
    if !is_commutative(algebra) {
        return Err(Error::NonCommutativeAlgebra);
    }
    let tol = tolerance();
    let (d0, avg0) = induced_distribution(algebra, ensemble_0)?;
    let (d1, avg1) = induced_distribution(algebra, ensemble_1)?;
    let averages_match = avg0.iter().zip(&avg1).all(|(a, b)| (a - b).abs() <= tol);
    let distinguishing_point = d0.iter().zip(&d1).position(|(a, b)| (a - b).abs() > tol);
    Ok(DecompositionComparison {
        averages_match,
        identical: distinguishing_point.is_none(),
        distribution_0: d0,
        distribution_1: d1,
        distinguishing_point,
    })
}

/// Frobenius distance between Bob's marginal before and after `local_op`
/// acts on A. Selective (trace-decreasing) operations are rejected.
pub fn no_signaling_trial(state: &BipartiteState, local_op: &KrausChannel) -> Result<f64> {
    if !local_op.is_trace_preserving() {
        return Err(Error::SelectiveChannel);
    }
    let before = state.marginal(Subsystem::B);
    let after = state.apply_local(local_op, Subsystem::A)?.marginal(Subsystem::B);
    Ok(before.frobenius_distance(&after))
}

/// Largest distance between a steered conditional and Bob's marginal.
pub fn selective_steering_contrast(state: &BipartiteState, m: &GeneralizedMeasurement) -> Result<f64> {
    let marginal = state.marginal(Subsystem::B);
    let ensemble = steer(state, m)?;
    Ok(ensemble
        .members
        .iter()
        .map(|c| c.frobenius_distance(&marginal))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub trials: usize,
    pub max_distance: f64,
    pub worst_trial: usize,
}

/// Random `(state, channel)` no-signaling trials; even trials are 2⊗2, odd
/// ones 2⊗3. Trial `i` draws from seed `base_seed + i` and separates the
/// state in `world` before the local channel acts.
pub fn no_signaling_sweep(trials: usize, world: World, base_seed: u64, exec: Execution) -> Result<SweepSummary> {
    let distances = par::map_indices(exec, trials, |i| {
        let mut rng = seeded(base_seed.wrapping_add(i as u64));
        let dims = if i % 2 == 0 { (2, 2) } else { (2, 3) };
        let n = dims.0 * dims.1;
        let rank = 1 + rng.random_range(0..n);
        let state = BipartiteState::new(random::density(n, rank, &mut rng), dims)?;
        let state = separate(&state, world)?;
        let channel = random::channel(dims.0, 1 + i % 3, &mut rng);
        no_signaling_trial(&state, &channel)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (worst_trial, max_distance) = distances
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
    Ok(SweepSummary {
        trials,
        max_distance,
        worst_trial,
    })
}
