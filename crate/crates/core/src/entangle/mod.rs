//! Bipartite states and what can be done with them from one side.
//!
//! Vectors are compared up to global phase throughout (`|⟨u|v⟩| = 1`),
//! since steering branches pick up outcome-dependent signs.

mod chsh;
mod steering;
mod teleport;

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::check_density;
use crate::channels::{GeneralizedMeasurement, KrausChannel};
use crate::qmat::{
    complete_basis, eigh, partial_trace, partial_transpose, ComplexMatrix, HermitianOperator,
    Subsystem, UnitVector, ZERO,
};
use crate::tol::tolerance;
use crate::{Error, Result};

pub use chsh::{chsh_grid_max, chsh_score, correlation, ChshSettings, GridMax};
pub use steering::{
    bell_basis, bell_measurement, hjw_steering_measurement, SteeringExampleConfig,
    SteeringMeasurement,
};
pub use teleport::{
    correction_table, teleport, teleport_batch, teleport_branch, teleport_branch_with,
    TeleportOutcome,
};

/// Density operator on `d_A ⊗ d_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    rho: ComplexMatrix,
    dims: (usize, usize),
}

impl BipartiteState {
    pub fn new(rho: ComplexMatrix, dims: (usize, usize)) -> Result<Self> {
        if rho.rows() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch(format!(
                "state side {} is not {}·{}",
                rho.rows(),
                dims.0,
                dims.1
            )));
        }
        check_density(&rho)?;
        Ok(Self { rho, dims })
    }

    pub fn from_pure(psi: &UnitVector, dims: (usize, usize)) -> Result<Self> {
        Self::new(psi.projector(), dims)
    }

    pub fn product(rho_a: &ComplexMatrix, rho_b: &ComplexMatrix) -> Result<Self> {
        Self::new(rho_a.tensor(rho_b), (rho_a.rows(), rho_b.rows()))
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn marginal(&self, keep: Subsystem) -> ComplexMatrix {
        partial_trace(&self.rho, self.dims, keep).expect("dims validated at construction")
    }

    pub fn purity(&self) -> f64 {
        self.rho.matmul(&self.rho).trace().re
    }

    /// The state vector when the state is pure within τ.
    pub fn pure_vector(&self) -> Option<UnitVector> {
        if (self.purity() - 1.0).abs() > tolerance() {
            return None;
        }
        let e = eigh(&HermitianOperator::symmetrized(&self.rho)).ok()?;
        e.vectors.into_iter().next()
    }

    /// Apply a channel to one side, identity on the other.
    pub fn apply_local(&self, channel: &KrausChannel, side: Subsystem) -> Result<Self> {
        let (da, db) = self.dims;
        let (lifted, dims) = match side {
            Subsystem::A => {
                if channel.input_dim() != da {
                    return Err(Error::DimensionMismatch("local channel on A".into()));
                }
                (channel.on_first_factor(db), (channel.output_dim(), db))
            }
            Subsystem::B => {
                if channel.input_dim() != db {
                    return Err(Error::DimensionMismatch("local channel on B".into()));
                }
                (channel.on_second_factor(da), (da, channel.output_dim()))
            }
        };
        let out = lifted.apply_raw(&self.rho)?;
        Self::new(HermitianOperator::symmetrized(&out).into_matrix(), dims)
    }
}

/// Mixture `Σ pᵢ ρᵢ`. `outcomes[k]` records which measurement outcome
/// produced member `k` when the ensemble comes from [`steer`].
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub probabilities: Vec<f64>,
    pub members: Vec<ComplexMatrix>,
    pub outcomes: Vec<usize>,
}

impl Ensemble {
    pub fn new(probabilities: Vec<f64>, members: Vec<ComplexMatrix>) -> Result<Self> {
        let outcomes = (0..members.len()).collect();
        Self::with_outcomes(probabilities, members, outcomes)
    }

    fn with_outcomes(probabilities: Vec<f64>, members: Vec<ComplexMatrix>, outcomes: Vec<usize>) -> Result<Self> {
        check_distribution(&probabilities)?;
        if members.len() != probabilities.len() || members.is_empty() {
            return Err(Error::DimensionMismatch("one probability per member".into()));
        }
        let dim = members[0].rows();
        for m in &members {
            if m.rows() != dim {
                return Err(Error::DimensionMismatch("members differ in dimension".into()));
            }
            check_density(m)?;
        }
        Ok(Self {
            probabilities,
            members,
            outcomes,
        })
    }

    pub fn dim(&self) -> usize {
        self.members[0].rows()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn average(&self) -> ComplexMatrix {
        let d = self.dim();
        self.probabilities
            .iter()
            .zip(&self.members)
            .fold(ComplexMatrix::zeros(d, d), |acc, (p, m)| &acc + &m.scale_real(*p))
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    let tol = tolerance();
    if p.iter().any(|x| !x.is_finite() || *x < -tol) {
        return Err(Error::InvalidState("negative probability".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::ProbabilitiesUnnormalized(total));
    }
    Ok(())
}

/// Ensemble of pure states `{pᵢ, |ψᵢ⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureEnsemble {
    probabilities: Vec<f64>,
    members: Vec<UnitVector>,
}

impl PureEnsemble {
    pub fn new(probabilities: Vec<f64>, members: Vec<UnitVector>) -> Result<Self> {
        check_distribution(&probabilities)?;
        if members.len() != probabilities.len() || members.is_empty() {
            return Err(Error::DimensionMismatch("one probability per member".into()));
        }
        let dim = members[0].dim();
        if members.iter().any(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch("members differ in dimension".into()));
        }
        Ok(Self {
            probabilities,
            members,
        })
    }

    /// Equal weights.
    pub fn uniform(members: Vec<UnitVector>) -> Result<Self> {
        let n = members.len().max(1);
        Self::new(vec![1.0 / n as f64; members.len()], members)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn members(&self) -> &[UnitVector] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn average(&self) -> ComplexMatrix {
        let d = self.dim();
        self.probabilities
            .iter()
            .zip(&self.members)
            .fold(ComplexMatrix::zeros(d, d), |acc, (p, m)| {
                &acc + &m.projector().scale_real(*p)
            })
    }

    pub fn to_ensemble(&self) -> Ensemble {
        Ensemble::new(
            self.probabilities.clone(),
            self.members.iter().map(UnitVector::projector).collect(),
        )
        .expect("pure members are valid densities")
    }
}

/// `|ψ⟩ = Σ cₖ |aₖ⟩|bₖ⟩` with `c₁ ≥ c₂ ≥ … ≥ 0`.
///
/// `a_basis` and `b_basis` are complete orthonormal bases of the two
/// factors; only the first `coefficients.len()` pairs carry weight.
#[derive(Debug, Clone, Serialize)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    #[serde(skip)]
    pub a_basis: Vec<UnitVector>,
    #[serde(skip)]
    pub b_basis: Vec<UnitVector>,
    pub dims: (usize, usize),
}

impl SchmidtDecomposition {
    /// Number of coefficients above τ.
    pub fn rank(&self) -> usize {
        let tol = tolerance();
        self.coefficients.iter().filter(|c| **c > tol).count()
    }

    pub fn reconstruct(&self) -> Vec<Complex64> {
        let (da, db) = self.dims;
        let mut v = vec![ZERO; da * db];
        for (k, c) in self.coefficients.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let term = self.a_basis[k].tensor(&self.b_basis[k]);
            for (x, y) in v.iter_mut().zip(term.amplitudes()) {
                *x += y * c;
            }
        }
        v
    }

    /// `{aᵢ ⊗ bⱼ}` in A-major order.
    pub fn product_basis(&self) -> Vec<UnitVector> {
        self.a_basis
            .iter()
            .flat_map(|a| self.b_basis.iter().map(move |b| a.tensor(b)))
            .collect()
    }
}

/// EPR singlet `(|+⟩|−⟩ − |−⟩|+⟩)/√2` with `|+⟩, |−⟩` the σ_z eigenstates.
pub fn singlet_vector() -> UnitVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    UnitVector::from_real(&[0.0, h, -h, 0.0]).expect("normalized")
}

pub fn epr_singlet() -> BipartiteState {
    BipartiteState::from_pure(&singlet_vector(), (2, 2)).expect("valid singlet")
}

/// Biorthogonal expansion of a bipartite pure vector.
///
/// `aₖ` are the eigenvectors of the A-marginal (descending), and
/// `bₖ = (⟨aₖ| ⊗ I)|ψ⟩ / cₖ`. The B basis is completed by Gram–Schmidt.
pub fn schmidt(psi: &UnitVector, dims: (usize, usize)) -> Result<SchmidtDecomposition> {
    let (da, db) = dims;
    if psi.dim() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} is not {da}·{db}",
            psi.dim()
        )));
    }
    let amps = psi.amplitudes();
    let rho_a = partial_trace(&psi.projector(), dims, Subsystem::A)?;
    let spectrum = eigh(&HermitianOperator::symmetrized(&rho_a))?;
    let n = da.min(db);
    let mut coefficients = Vec::with_capacity(n);
    let mut b_partial: Vec<UnitVector> = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = spectrum.values[k];
        if lambda <= 1e-14 {
            break;
        }
        let a = spectrum.vectors[k].amplitudes();
        let b: Vec<Complex64> = (0..db)
            .map(|j| (0..da).map(|i| a[i].conj() * amps[i * db + j]).sum())
            .collect();
        coefficients.push(lambda.sqrt());
        b_partial.push(UnitVector::normalized(b)?);
    }
    coefficients.resize(n, 0.0);
    Ok(SchmidtDecomposition {
        coefficients,
        a_basis: spectrum.vectors,
        b_basis: complete_basis(&b_partial, db),
        dims,
    })
}

/// Canonical purification `Σₖ √λₖ |k⟩_anc ⊗ |eₖ⟩` on `ancilla ⊗ system`,
/// from the eigendecomposition `ρ = Σ λₖ |eₖ⟩⟨eₖ|`.
pub fn purify(rho: &ComplexMatrix, ancilla_dim: usize) -> Result<UnitVector> {
    check_density(rho)?;
    let d = rho.rows();
    let spectrum = eigh(&HermitianOperator::symmetrized(rho))?;
    let tol = tolerance();
    let rank = spectrum.values.iter().filter(|l| **l > tol).count();
    if ancilla_dim < rank || ancilla_dim == 0 {
        return Err(Error::AncillaTooSmall {
            rank,
            ancilla: ancilla_dim,
        });
    }
    let mut v = vec![ZERO; ancilla_dim * d];
    for k in 0..rank {
        let w = spectrum.values[k].sqrt();
        for (s, e) in spectrum.vectors[k].amplitudes().iter().enumerate() {
            v[k * d + s] = e * w;
        }
    }
    UnitVector::normalized(v)
}

/// Bob's conditional states after Alice measures `m` on her side.
///
/// Outcome `i` occurs with `pᵢ = tr((Eᵢ ⊗ I)ρ)` and leaves B in
/// `Tr_A[(Eᵢ ⊗ I)ρ] / pᵢ`. Outcomes with `pᵢ ≤ τ` are dropped; the
/// returned ensemble's `outcomes` field keeps the original indices.
pub fn steer(state: &BipartiteState, m: &GeneralizedMeasurement) -> Result<Ensemble> {
    let (da, db) = state.dims;
    if m.dim() != da {
        return Err(Error::DimensionMismatch(format!(
            "measurement on dimension {} cannot act on A of dimension {da}",
            m.dim()
        )));
    }
    let tol = tolerance();
    let id_b = ComplexMatrix::identity(db);
    let mut probabilities = Vec::new();
    let mut members = Vec::new();
    let mut outcomes = Vec::new();
    for (i, e) in m.effects().iter().enumerate() {
        let weighted = e.matrix().tensor(&id_b).matmul(&state.rho);
        let unnormalized = partial_trace(&weighted, state.dims, Subsystem::B)?;
        let p = unnormalized.trace().re;
        if p > tol {
            probabilities.push(p);
            members.push(HermitianOperator::symmetrized(&unnormalized.scale_real(1.0 / p)).into_matrix());
            outcomes.push(i);
        }
    }
    // Renormalize over the kept branches; the dropped mass is at most n·τ.
    let total: f64 = probabilities.iter().sum();
    for p in &mut probabilities {
        *p /= total;
    }
    Ensemble::with_outcomes(probabilities, members, outcomes)
}

/// Sum of the absolute negative eigenvalues of the partial transpose on B.
pub fn negativity(state: &BipartiteState) -> Result<f64> {
    let pt = partial_transpose(&state.rho, state.dims, Subsystem::B)?;
    let spectrum = eigh(&HermitianOperator::symmetrized(&pt))?;
    Ok(spectrum.values.iter().filter(|l| **l < 0.0).map(|l| -l).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{dephase, DephasingChannel, ProjectiveMeasurement};
    use crate::qmat::kets;
    use crate::random::{self, seeded};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn singlet_basics() {
        let s = epr_singlet();
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(s.marginal(Subsystem::B).approx_eq(&half, 1e-15));
        assert!(s.marginal(Subsystem::A).approx_eq(&half, 1e-15));
        assert!((s.purity() - 1.0).abs() < 1e-15);
        let sd = schmidt(&singlet_vector(), (2, 2)).unwrap();
        assert!((sd.coefficients[0] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((sd.coefficients[1] - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn schmidt_of_product_vector() {
        let v = kets::zero().tensor(&kets::one());
        let sd = schmidt(&v, (2, 2)).unwrap();
        assert_eq!(sd.rank(), 1);
        assert!((sd.coefficients[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn schmidt_random_3x2_matches_marginal_spectrum() {
        let mut rng = seeded(31);
        for _ in 0..10 {
            let psi = random::unit_vector(6, &mut rng);
            let sd = schmidt(&psi, (3, 2)).unwrap();
            assert_eq!(sd.coefficients.len(), 2);
            let rho_b = partial_trace(&psi.projector(), (3, 2), Subsystem::B).unwrap();
            let eb = eigh(&HermitianOperator::symmetrized(&rho_b)).unwrap().values;
            for (c, l) in sd.coefficients.iter().zip(&eb) {
                assert!((c * c - l).abs() < 1e-10);
            }
            let back = UnitVector::normalized(sd.reconstruct()).unwrap();
            assert!(back.same_ray(&psi, 1e-12));
            assert!(crate::qmat::orthonormality_defect(&sd.b_basis) < 1e-12);
            assert!(crate::qmat::orthonormality_defect(&sd.a_basis) < 1e-12);
            let total: f64 = sd.coefficients.iter().map(|c| c * c).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn schmidt_rejects_bad_dims() {
        assert!(schmidt(&singlet_vector(), (3, 2)).is_err());
    }

    #[test]
    fn purification_cases() {
        let pure = kets::plus_x().density();
        let p = purify(&pure, 2).unwrap();
        assert_eq!(schmidt(&p, (2, 2)).unwrap().rank(), 1);

        let half = ComplexMatrix::identity(2).scale_real(0.5);
        let p = purify(&half, 2).unwrap();
        let sd = schmidt(&p, (2, 2)).unwrap();
        assert!((sd.coefficients[0] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((sd.coefficients[1] - FRAC_1_SQRT_2).abs() < 1e-15);

        let mut rng = seeded(2);
        let rho = random::density(2, 2, &mut rng);
        let p = purify(&rho, 2).unwrap();
        let back = partial_trace(&p.projector(), (2, 2), Subsystem::B).unwrap();
        assert!(back.approx_eq(&rho, 1e-10));

        assert!(matches!(
            purify(&half, 1),
            Err(Error::AncillaTooSmall { rank: 2, ancilla: 1 })
        ));
    }

    #[test]
    fn singlet_sigma_z_steering_is_anticorrelated() {
        let m = ProjectiveMeasurement::from_basis(&[kets::zero(), kets::one()]).unwrap();
        let ens = steer(&epr_singlet(), &m.to_povm()).unwrap();
        assert_eq!(ens.len(), 2);
        assert!((ens.probabilities[0] - 0.5).abs() < 1e-15);
        assert!(ens.members[0].approx_eq(&kets::one().density(), 1e-15));
        assert!(ens.members[1].approx_eq(&kets::zero().density(), 1e-15));
    }

    #[test]
    fn product_state_cannot_be_steered() {
        let mut rng = seeded(12);
        let ra = random::density(2, 2, &mut rng);
        let rb = random::density(3, 3, &mut rng);
        let state = BipartiteState::product(&ra, &rb).unwrap();
        let m = random::povm(2, 3, &mut rng);
        let ens = steer(&state, &m).unwrap();
        for member in &ens.members {
            assert!(member.approx_eq(&rb, 1e-12));
        }
    }

    #[test]
    fn ensemble_average_is_bob_marginal() {
        let mut rng = seeded(13);
        for _ in 0..20 {
            let rho = random::density(6, 3, &mut rng);
            let state = BipartiteState::new(rho, (2, 3)).unwrap();
            let m = random::povm(2, 4, &mut rng);
            let ens = steer(&state, &m).unwrap();
            assert!(ens.average().approx_eq(&state.marginal(Subsystem::B), 1e-12));
        }
    }

    #[test]
    fn steer_rejects_mismatched_measurement() {
        let m = random::povm(3, 2, &mut seeded(1));
        assert!(steer(&epr_singlet(), &m).is_err());
    }

    #[test]
    fn negativity_cases() {
        let product = BipartiteState::product(&kets::zero().density(), &kets::plus_x().density()).unwrap();
        assert!(negativity(&product).unwrap().abs() < 1e-15);
        assert!((negativity(&epr_singlet()).unwrap() - 0.5).abs() < 1e-14);
        let sd = schmidt(&singlet_vector(), (2, 2)).unwrap();
        let ch = DephasingChannel::new(sd.product_basis(), 1.0).unwrap();
        let dephased = BipartiteState::new(dephase(&ch, epr_singlet().rho()).unwrap(), (2, 2)).unwrap();
        assert!(negativity(&dephased).unwrap().abs() < 1e-15);
    }

    #[test]
    fn negativity_non_increasing_under_local_dephasing_on_b() {
        let mut rng = seeded(21);
        let psi = random::unit_vector(4, &mut rng);
        let state = BipartiteState::from_pure(&psi, (2, 2)).unwrap();
        let mut last = f64::INFINITY;
        for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let ch = DephasingChannel::computational(2, lambda).unwrap().to_kraus();
            let n = negativity(&state.apply_local(&ch, Subsystem::B).unwrap()).unwrap();
            assert!(n <= last + 1e-12, "negativity rose at λ = {lambda}");
            last = n;
        }
        assert!(last.abs() < 1e-12);
    }
}
