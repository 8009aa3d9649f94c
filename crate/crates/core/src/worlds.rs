//! Classical, quantum and dephased physics, and the three-constraint battery.
//!
//! The dephased world erases phase relations between separated systems: on
//! separation the joint state is dephased with strength `λ` in the product
//! of its Schmidt bases (marginal eigenbases for mixed states). The
//! classical world is quantum with forced diagonality in the computational
//! basis.

use serde::{Deserialize, Serialize};

use crate::algebra::{broadcast_check, classical_broadcaster, AlgebraState, BlockAlgebra};
use crate::channels::{dephase, DephasingChannel};
use crate::entangle::{schmidt, BipartiteState};
use crate::par::{self, Execution};
use crate::protocols::{
    classical_unique_decomposition, concealment_check, no_signaling_sweep, run_commitment, AttackStrategy,
    CommitmentScheme, DecompositionComparison, SweepSummary,
};
use crate::qmat::{eigh, ComplexMatrix, HermitianOperator, Subsystem, UnitVector};
use crate::random::{self, seeded};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum World {
    Classical,
    Quantum,
    Dephased { strength: f64 },
}

impl World {
    pub fn dephased(strength: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&strength) {
            return Err(Error::InvalidParameter(format!("λ = {strength} is not in [0, 1]")));
        }
        Ok(World::Dephased { strength })
    }

    pub fn name(&self) -> &'static str {
        match self {
            World::Classical => "classical",
            World::Quantum => "quantum",
            World::Dephased { .. } => "dephased",
        }
    }

    /// A single system's state as this world admits it. Classical states
    /// are diagonal; the other worlds leave local states alone.
    pub fn local_state(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        match self {
            World::Classical => {
                let d = rho.rows();
                ComplexMatrix::from_fn(d, d, |r, c| if r == c { rho[(r, c)] } else { crate::qmat::ZERO })
            }
            _ => rho.clone(),
        }
    }
}

/// Product basis the dephased world uses for `state`, in A-major order.
pub fn separation_basis(state: &BipartiteState) -> Result<Vec<UnitVector>> {
    if let Some(psi) = state.pure_vector() {
        return Ok(schmidt(&psi, state.dims())?.product_basis());
    }
    let eig = |side| eigh(&HermitianOperator::symmetrized(&state.marginal(side))).map(|e| e.vectors);
    let a = eig(Subsystem::A)?;
    let b = eig(Subsystem::B)?;
    Ok(a.iter().flat_map(|x| b.iter().map(move |y| x.tensor(y))).collect())
}

/// The state after its two parts have separated in `world`. A system with
/// a trivial partner has nothing to separate from and passes unchanged.
pub fn separate(state: &BipartiteState, world: World) -> Result<BipartiteState> {
    let (da, db) = state.dims();
    if da == 1 || db == 1 {
        return Ok(state.clone());
    }
    let channel = match world {
        World::Quantum => return Ok(state.clone()),
        World::Dephased { strength: 0.0 } => return Ok(state.clone()),
        World::Dephased { strength } => DephasingChannel::new(separation_basis(state)?, strength)?,
        World::Classical => DephasingChannel::computational(da * db, 1.0)?,
    };
    BipartiteState::new(dephase(&channel, state.rho())?, state.dims())
}

/// Outcome of the no-signaling sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalingWitness {
    pub possible: bool,
    pub sweep: SweepSummary,
}

/// Outcome of running the measure-and-copy broadcaster over state pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BroadcastingWitness {
    /// Every tested pair was broadcast by one channel.
    pub possible: bool,
    pub commuting_pairs: usize,
    pub commuting_max_deviation: f64,
    pub noncommuting_pairs: usize,
    /// Commutator norm of the pairs after the world's local restriction.
    pub noncommuting_min_commutator: f64,
    pub noncommuting_min_deviation: f64,
    pub noncommuting_max_deviation: f64,
}

/// EPR attack on the BB84-style scheme, with the honest runs for contrast.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteeringWitness {
    pub succeeds: bool,
    /// Exact acceptance for unveil bits 0 and 1.
    pub acceptance: [f64; 2],
    pub min_acceptance: f64,
    pub honest_acceptance: [f64; 2],
    pub concealed: bool,
    pub concealment_distance: f64,
    /// Basis in which the attacker's pair was dephased, as `[re, im]` rows.
    pub separation_basis: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub world: World,
    pub signaling: SignalingWitness,
    pub broadcasting: BroadcastingWitness,
    pub steering_attack: SteeringWitness,
    /// Classical world only: equal averages force equal decompositions.
    pub classical_unique_decomposition: Option<DecompositionComparison>,
}

const BATTERY_SEED: u64 = 0x5EED;
const SIGNALING_TRIALS: usize = 200;
const BROADCAST_PAIRS: usize = 40;

fn common_basis(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Vec<UnitVector>> {
    let mix = a + &b.scale_real(std::f64::consts::PI);
    Ok(eigh(&HermitianOperator::symmetrized(&mix))?.vectors)
}

fn broadcast_pair(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let channel = classical_broadcaster(&common_basis(a, b)?)?;
    Ok(broadcast_check(&channel, a)?.deviation.max(broadcast_check(&channel, b)?.deviation))
}

fn broadcasting_battery(world: World, exec: Execution) -> Result<BroadcastingWitness> {
    let commuting = par::map_indices(exec, BROADCAST_PAIRS, |i| {
        let mut rng = seeded(BATTERY_SEED ^ (0xB0 + i as u64));
        let d = 2 + i % 2;
        let u = random::unitary(d, &mut rng);
        let a = world.local_state(&random::diagonal_density(d, &mut rng).conjugate_by(&u));
        let b = world.local_state(&random::diagonal_density(d, &mut rng).conjugate_by(&u));
        broadcast_pair(&a, &b)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let noncommuting = par::map_indices(exec, BROADCAST_PAIRS, |i| {
        let mut rng = seeded(BATTERY_SEED ^ (0xC0 + i as u64));
        let d = 2 + i % 2;
        let psi = random::unit_vector(d, &mut rng);
        let phi = random::unit_vector(d, &mut rng);
        let a = world.local_state(&psi.projector());
        let b = world.local_state(&phi.projector());
        let comm = a.commutator(&b).frobenius_norm();
        broadcast_pair(&a, &b).map(|dev| (comm, dev))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let tol = crate::tol::tolerance();
    let commuting_max_deviation = commuting.iter().copied().fold(0.0, f64::max);
    let noncommuting_min_commutator = noncommuting.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
    let noncommuting_min_deviation = noncommuting.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let noncommuting_max_deviation = noncommuting.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok(BroadcastingWitness {
        possible: commuting_max_deviation <= tol && noncommuting_max_deviation <= tol,
        commuting_pairs: commuting.len(),
        commuting_max_deviation,
        noncommuting_pairs: noncommuting.len(),
        noncommuting_min_commutator,
        noncommuting_min_deviation,
        noncommuting_max_deviation,
    })
}

fn steering_battery(world: World, exec: Execution) -> Result<SteeringWitness> {
    let scheme = CommitmentScheme::bb84();
    let strategies = [
        AttackStrategy::EprAttack { bit: 0 },
        AttackStrategy::EprAttack { bit: 1 },
        AttackStrategy::Honest { bit: 0 },
        AttackStrategy::Honest { bit: 1 },
    ];
    let runs = par::map_slice(exec, &strategies, |s| {
        run_commitment(&scheme, *s, world, BATTERY_SEED).map(|t| t.acceptance_probability().unwrap_or(0.0))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let acceptance = [runs[0], runs[1]];
    let min_acceptance = acceptance[0].min(acceptance[1]);
    let (concealed, concealment_distance) = concealment_check(&scheme, world)?;
    let separation_basis = match world {
        World::Dephased { strength } if strength > 0.0 => {
            let pair = scheme.attack_pair()?;
            let basis = separation_basis(&pair)?;
            Some(
                basis
                    .iter()
                    .map(|v| v.amplitudes().iter().map(|z| [z.re, z.im]).collect())
                    .collect(),
            )
        }
        _ => None,
    };
    Ok(SteeringWitness {
        succeeds: min_acceptance >= 1.0 - crate::tol::tolerance(),
        acceptance,
        min_acceptance,
        honest_acceptance: [runs[2], runs[3]],
        concealed,
        concealment_distance,
        separation_basis,
    })
}

fn unique_decomposition_demo() -> Result<DecompositionComparison> {
    let algebra = BlockAlgebra::classical(3)?;
    let pt = |k| AlgebraState::point_mass(&algebra, k);
    let e0 = vec![(0.5, pt(0)?), (0.25, pt(1)?), (0.25, pt(2)?)];
    let e1 = vec![(0.25, pt(2)?), (0.3, pt(0)?), (0.25, pt(1)?), (0.2, pt(0)?)];
    classical_unique_decomposition(&algebra, &e0, &e1)
}

impl ConstraintReport {
    /// Equal in every finding, ignoring which world produced them.
    pub fn same_findings(&self, other: &Self) -> bool {
        self.signaling == other.signaling
            && self.broadcasting == other.broadcasting
            && self.steering_attack == other.steering_attack
            && self.classical_unique_decomposition == other.classical_unique_decomposition
    }
}

/// Run the fixed battery in `world` on the default execution mode.
pub fn evaluate_constraints(world: World) -> Result<ConstraintReport> {
    evaluate_constraints_with(world, Execution::default())
}

pub fn evaluate_constraints_with(world: World, exec: Execution) -> Result<ConstraintReport> {
    let sweep = no_signaling_sweep(SIGNALING_TRIALS, world, BATTERY_SEED, exec)?;
    let signaling = SignalingWitness {
        possible: sweep.max_distance >= 1e-10,
        sweep,
    };
    Ok(ConstraintReport {
        world,
        signaling,
        broadcasting: broadcasting_battery(world, exec)?,
        steering_attack: steering_battery(world, exec)?,
        classical_unique_decomposition: match world {
            World::Classical => Some(unique_decomposition_demo()?),
            _ => None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entangle::{epr_singlet, negativity};
    use crate::qmat::kets;

    #[test]
    fn quantum_leaves_singlet_alone() {
        let s = epr_singlet();
        assert_eq!(separate(&s, World::Quantum).unwrap(), s);
        assert_eq!(separate(&s, World::dephased(0.0).unwrap()).unwrap(), s);
    }

    #[test]
    fn fully_dephased_singlet() {
        let s = separate(&epr_singlet(), World::dephased(1.0).unwrap()).unwrap();
        let up_down = kets::zero().tensor(&kets::one()).projector();
        let down_up = kets::one().tensor(&kets::zero()).projector();
        let expected = (&up_down + &down_up).scale_real(0.5);
        assert!(s.rho().approx_eq(&expected, 1e-14));
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(s.marginal(Subsystem::A).approx_eq(&half, 1e-14));
        assert!(s.marginal(Subsystem::B).approx_eq(&half, 1e-14));
        assert!(negativity(&s).unwrap().abs() < 1e-14);
        let anti = s.rho()[(1, 1)].re + s.rho()[(2, 2)].re;
        assert!((anti - 1.0).abs() < 1e-14);
    }

    #[test]
    fn separation_preserves_marginals() {
        let mut rng = seeded(17);
        for k in 0..20 {
            let dims = if k % 2 == 0 { (2, 2) } else { (2, 3) };
            let rank = 1 + k % 3;
            let rho = random::density(dims.0 * dims.1, rank, &mut rng);
            let state = BipartiteState::new(rho, dims).unwrap();
            for world in [World::Quantum, World::dephased(0.4).unwrap(), World::dephased(1.0).unwrap()] {
                let out = separate(&state, world).unwrap();
                for side in [Subsystem::A, Subsystem::B] {
                    assert!(out.marginal(side).approx_eq(&state.marginal(side), 1e-10), "{world:?} {k}");
                }
            }
            let classical = BipartiteState::new(World::Classical.local_state(state.rho()), dims).unwrap();
            let out = separate(&classical, World::Classical).unwrap();
            assert!(out.marginal(Subsystem::B).approx_eq(&classical.marginal(Subsystem::B), 1e-12));
        }
    }

    #[test]
    fn negativity_decreases_with_strength() {
        let mut last = f64::INFINITY;
        for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let s = separate(&epr_singlet(), World::dephased(lambda).unwrap()).unwrap();
            let n = negativity(&s).unwrap();
            assert!(n <= last + 1e-12);
            last = n;
        }
    }

    #[test]
    fn rejects_out_of_range_strength() {
        assert!(World::dephased(1.5).is_err());
        assert!(World::dephased(-0.1).is_err());
    }

    #[test]
    fn expectation_table() {
        let classical = evaluate_constraints(World::Classical).unwrap();
        assert!(!classical.signaling.possible);
        assert!(classical.broadcasting.possible);
        assert!(!classical.steering_attack.succeeds);
        assert!(classical.classical_unique_decomposition.as_ref().unwrap().identical);

        let quantum = evaluate_constraints(World::Quantum).unwrap();
        assert!(!quantum.signaling.possible);
        assert!(!quantum.broadcasting.possible);
        assert!(quantum.steering_attack.succeeds);

        let dephased = evaluate_constraints(World::dephased(1.0).unwrap()).unwrap();
        assert!(!dephased.signaling.possible);
        assert!(!dephased.broadcasting.possible);
        assert!(!dephased.steering_attack.succeeds);
        assert!(dephased.steering_attack.min_acceptance < 1.0);

        let zero = evaluate_constraints(World::dephased(0.0).unwrap()).unwrap();
        assert!(zero.same_findings(&quantum));
    }
}
