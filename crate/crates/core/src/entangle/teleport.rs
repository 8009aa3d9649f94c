//! Teleportation of a qubit through a shared two-qubit state.
//!
//! Ordering is `A′ ⊗ A ⊗ B`: the input sits on `A′`, the shared pair on
//! `A ⊗ B`. Alice measures `A′ ⊗ A` in the Bell basis of [`bell_basis`] and
//! Bob applies the correction for her outcome.

use serde::Serialize;

use super::{bell_basis, BipartiteState};
use crate::channels::draw_index;
use crate::par::{self, Execution};
use crate::qmat::{partial_trace, pauli, ComplexMatrix, Subsystem, UnitVector};
use crate::random;
use crate::tol::tolerance;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct TeleportOutcome {
    /// Bell outcome, 1 through 4.
    pub outcome: usize,
    pub probability: f64,
    #[serde(skip)]
    pub corrected_state: ComplexMatrix,
    /// `⟨input|corrected|input⟩`
    pub fidelity: f64,
}

/// Bob's corrections for outcomes 1..4: `I`, `σ_z`, `σ_x`, `−iσ_y`.
pub fn correction_table() -> [ComplexMatrix; 4] {
    let minus_i_y = ComplexMatrix::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]).expect("2×2");
    [pauli::identity(), pauli::z(), pauli::x(), minus_i_y]
}

fn check_inputs(input: &UnitVector, shared: &BipartiteState) -> Result<()> {
    if shared.dims() != (2, 2) {
        return Err(Error::DimensionMismatch(format!(
            "shared state must be 2⊗2, got {}⊗{}",
            shared.dims().0,
            shared.dims().1
        )));
    }
    if input.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "input must be a qubit, got dimension {}",
            input.dim()
        )));
    }
    Ok(())
}

/// Unnormalized Bob state for each Bell outcome.
fn branches(input: &UnitVector, shared: &BipartiteState) -> Result<Vec<ComplexMatrix>> {
    let joint = input.projector().tensor(shared.rho());
    let id_b = ComplexMatrix::identity(2);
    bell_basis()
        .iter()
        .map(|b| {
            let lifted = b.projector().tensor(&id_b);
            let projected = lifted.matmul(&joint).matmul(&lifted);
            partial_trace(&projected, (4, 2), Subsystem::B)
        })
        .collect()
}

/// Force outcome `outcome` and correct with the standard table.
pub fn teleport_branch(input: &UnitVector, shared: &BipartiteState, outcome: usize) -> Result<TeleportOutcome> {
    teleport_branch_with(input, shared, outcome, &correction_table())
}

/// Force outcome `outcome` and correct with `corrections[outcome - 1]`.
pub fn teleport_branch_with(
    input: &UnitVector,
    shared: &BipartiteState,
    outcome: usize,
    corrections: &[ComplexMatrix; 4],
) -> Result<TeleportOutcome> {
    check_inputs(input, shared)?;
    if !(1..=4).contains(&outcome) {
        return Err(Error::InvalidParameter(format!("Bell outcome {outcome} is not in 1..=4")));
    }
    let bob = branches(input, shared)?.swap_remove(outcome - 1);
    finish(input, outcome, bob, &corrections[outcome - 1])
}

fn finish(input: &UnitVector, outcome: usize, bob: ComplexMatrix, correction: &ComplexMatrix) -> Result<TeleportOutcome> {
    let probability = bob.trace().re;
    if probability <= tolerance() {
        return Err(Error::InvalidState(format!("outcome {outcome} has probability {probability}")));
    }
    let corrected_state = bob.scale_real(1.0 / probability).conjugate_by(correction);
    let amps = input.amplitudes();
    let fidelity = corrected_state.sandwich(amps, amps).re;
    Ok(TeleportOutcome {
        outcome,
        probability,
        corrected_state,
        fidelity,
    })
}

/// One run with the Bell outcome drawn from a generator seeded by `rng_seed`.
pub fn teleport(input: &UnitVector, shared: &BipartiteState, rng_seed: u64) -> Result<TeleportOutcome> {
    check_inputs(input, shared)?;
    let mut bobs = branches(input, shared)?;
    let probs: Vec<f64> = bobs.iter().map(|b| b.trace().re).collect();
    let index = draw_index(&probs, &mut random::seeded(rng_seed))?;
    let bob = bobs.swap_remove(index);
    finish(input, index + 1, bob, &correction_table()[index])
}

/// Run `teleport` on each input; trial `i` uses seed `base_seed + i`.
pub fn teleport_batch(
    inputs: &[UnitVector],
    shared: &BipartiteState,
    base_seed: u64,
    exec: Execution,
) -> Result<Vec<TeleportOutcome>> {
    par::map_indices(exec, inputs.len(), |i| {
        teleport(&inputs[i], shared, base_seed.wrapping_add(i as u64))
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entangle::epr_singlet;
    use crate::qmat::kets;
    use crate::random::seeded;

    #[test]
    fn every_branch_is_corrected() {
        let shared = epr_singlet();
        let mut rng = seeded(4);
        for _ in 0..50 {
            let input = random::unit_vector(2, &mut rng);
            for k in 1..=4 {
                let out = teleport_branch(&input, &shared, k).unwrap();
                assert!((out.probability - 0.25).abs() < 1e-12);
                assert!((out.fidelity - 1.0).abs() < 1e-12, "branch {k}");
            }
        }
    }

    #[test]
    fn plus_with_identity_branch() {
        let out = teleport_branch(&kets::zero(), &epr_singlet(), 1).unwrap();
        assert!(out.corrected_state.approx_eq(&kets::zero().density(), 1e-14));
    }

    #[test]
    fn identity_in_place_of_a_correction_breaks_it() {
        let shared = epr_singlet();
        let input = kets::plus_x();
        for k in 1..4 {
            let mut table = correction_table();
            table[k] = pauli::identity();
            let out = teleport_branch_with(&input, &shared, k + 1, &table).unwrap();
            let out_z = teleport_branch_with(&kets::zero(), &shared, k + 1, &table).unwrap();
            assert!(out.fidelity.min(out_z.fidelity) < 0.999);
        }
    }

    #[test]
    fn batch_is_deterministic_across_modes() {
        let mut rng = seeded(9);
        let inputs: Vec<_> = (0..64).map(|_| random::unit_vector(2, &mut rng)).collect();
        let shared = epr_singlet();
        let a = teleport_batch(&inputs, &shared, 100, Execution::Sequential).unwrap();
        let b = teleport_batch(&inputs, &shared, 100, Execution::Parallel).unwrap();
        let oa: Vec<_> = a.iter().map(|o| (o.outcome, o.fidelity)).collect();
        let ob: Vec<_> = b.iter().map(|o| (o.outcome, o.fidelity)).collect();
        assert_eq!(oa, ob);
    }

    #[test]
    fn rejects_bad_shapes() {
        let wide = BipartiteState::new(ComplexMatrix::identity(6).scale_real(1.0 / 6.0), (2, 3)).unwrap();
        assert!(teleport(&kets::zero(), &wide, 0).is_err());
        assert!(teleport_branch(&kets::zero(), &epr_singlet(), 5).is_err());
        assert!(teleport(&UnitVector::basis(3, 0), &epr_singlet(), 0).is_err());
    }
}
