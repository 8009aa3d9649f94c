//! Completely positive maps in Kraus form, projective and generalized
//! measurements, Naimark dilation, and basis dephasing.

use rand::Rng;
use serde::Serialize;

use crate::qmat::{
    check_orthonormal, eigh, partial_trace, ComplexMatrix, HermitianOperator, Subsystem,
    UnitVector,
};
use crate::random;
use crate::tol::tolerance;
use crate::{Error, Result};

fn check_density_dim(rho: &ComplexMatrix, dim: usize) -> Result<()> {
    if !rho.is_square() || rho.rows() != dim {
        return Err(Error::DimensionMismatch(format!(
            "expected a {dim}x{dim} operator, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    Ok(())
}

/// CP map `ρ ↦ Σ K ρ K†` with `Σ K†K ≼ I`.
///
/// The map is nonselective when `Σ K†K = I`; otherwise it is a selective
/// (trace-decreasing) operation.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
    d_in: usize,
    d_out: usize,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::DimensionMismatch("channel needs at least one Kraus operator".into()))?;
        let (d_out, d_in) = (first.rows(), first.cols());
        if ops.iter().any(|k| k.rows() != d_out || k.cols() != d_in) {
            return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
        }
        let channel = Self { ops, d_in, d_out };
        let top = HermitianOperator::symmetrized(&channel.completeness()).max_eigenvalue()?;
        if top > 1.0 + tolerance() {
            return Err(Error::NotSubNormalized(top));
        }
        Ok(channel)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            ops: vec![ComplexMatrix::identity(dim)],
            d_in: dim,
            d_out: dim,
        }
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        let defect = u.unitarity_defect();
        if defect > tolerance() {
            return Err(Error::NotTracePreserving(defect));
        }
        Self::new(vec![u])
    }

    /// Nonselective Lüders channel `ρ ↦ Σ Pᵢ ρ Pᵢ`.
    pub fn luders(m: &ProjectiveMeasurement) -> Self {
        Self::new(m.projectors.iter().map(|p| p.matrix().clone()).collect())
            .expect("projectors of a complete measurement")
    }

    /// Selective operation `ρ ↦ P ρ P` for one projector.
    pub fn selective(p: &HermitianOperator) -> Result<Self> {
        Self::new(vec![p.matrix().clone()])
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn input_dim(&self) -> usize {
        self.d_in
    }

    pub fn output_dim(&self) -> usize {
        self.d_out
    }

    /// `Σ K†K`
    pub fn completeness(&self) -> ComplexMatrix {
        self.ops
            .iter()
            .fold(ComplexMatrix::zeros(self.d_in, self.d_in), |acc, k| {
                &acc + &k.dagger().matmul(k)
            })
    }

    pub fn trace_preservation_defect(&self) -> f64 {
        self.completeness()
            .max_abs_diff(&ComplexMatrix::identity(self.d_in))
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preservation_defect() <= tolerance()
    }

    /// `Σ K ρ K†` with no normalization and no trace-preservation check.
    pub fn apply_raw(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_density_dim(rho, self.d_in)?;
        Ok(self
            .ops
            .iter()
            .fold(ComplexMatrix::zeros(self.d_out, self.d_out), |acc, k| {
                &acc + &rho.conjugate_by(k)
            }))
    }

    /// `T ⊗ id` acting on the first factor of a `d_in ⊗ other_dim` space.
    pub fn on_first_factor(&self, other_dim: usize) -> Self {
        let id = ComplexMatrix::identity(other_dim);
        Self {
            ops: self.ops.iter().map(|k| k.tensor(&id)).collect(),
            d_in: self.d_in * other_dim,
            d_out: self.d_out * other_dim,
        }
    }

    /// `id ⊗ T` acting on the second factor.
    pub fn on_second_factor(&self, other_dim: usize) -> Self {
        let id = ComplexMatrix::identity(other_dim);
        Self {
            ops: self.ops.iter().map(|k| id.tensor(k)).collect(),
            d_in: self.d_in * other_dim,
            d_out: self.d_out * other_dim,
        }
    }

    /// `other ∘ self`
    pub fn then(&self, other: &Self) -> Result<Self> {
        if other.d_in != self.d_out {
            return Err(Error::DimensionMismatch("channel composition".into()));
        }
        let ops = other
            .ops
            .iter()
            .flat_map(|b| self.ops.iter().map(move |a| b.matmul(a)))
            .collect();
        Self::new(ops)
    }
}

/// Apply a trace-preserving channel.
pub fn apply_nonselective(t: &KrausChannel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let defect = t.trace_preservation_defect();
    if defect > tolerance() {
        return Err(Error::NotTracePreserving(defect));
    }
    t.apply_raw(rho)
}

/// Result of a selective projection.
#[derive(Debug, Clone)]
pub struct SelectiveOutcome {
    pub probability: f64,
    /// `PρP / tr(Pρ)`, absent when the outcome has probability ≤ τ.
    pub post_state: Option<ComplexMatrix>,
}

/// Selective operation `A ↦ PAP` in the Schrödinger picture, renormalized.
pub fn apply_selective(p: &HermitianOperator, rho: &ComplexMatrix) -> Result<SelectiveOutcome> {
    let defect = p.matrix().idempotency_defect();
    if defect > tolerance() {
        return Err(Error::NotIdempotent(defect));
    }
    check_density_dim(rho, p.dim())?;
    let pm = p.matrix();
    let projected = pm.matmul(rho).matmul(pm);
    let probability = projected.trace().re;
    let post_state = (probability > tolerance()).then(|| projected.scale_real(1.0 / probability));
    Ok(SelectiveOutcome {
        probability: probability.clamp(0.0, 1.0),
        post_state,
    })
}

/// Spectral measure: mutually orthogonal projectors summing to `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    projectors: Vec<HermitianOperator>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<HermitianOperator>) -> Result<Self> {
        let dim = projectors
            .first()
            .map(HermitianOperator::dim)
            .ok_or_else(|| Error::InvalidMeasurement("no projectors".into()))?;
        let tol = tolerance();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (i, p) in projectors.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch("projectors differ in dimension".into()));
            }
            let defect = p.matrix().idempotency_defect();
            if defect > tol {
                return Err(Error::NotIdempotent(defect));
            }
            for q in &projectors[i + 1..] {
                let overlap = p.matrix().matmul(q.matrix()).max_abs();
                if overlap > tol {
                    return Err(Error::InvalidMeasurement(format!(
                        "projectors are not mutually orthogonal (overlap {overlap:.3e})"
                    )));
                }
            }
            sum = &sum + p.matrix();
        }
        let gap = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if gap > tol {
            return Err(Error::InvalidMeasurement(format!(
                "projectors do not sum to the identity (gap {gap:.3e})"
            )));
        }
        Ok(Self { projectors })
    }

    /// Rank-one projectors onto a complete orthonormal basis.
    pub fn from_basis(basis: &[UnitVector]) -> Result<Self> {
        let dim = check_orthonormal(basis)?;
        if basis.len() != dim {
            return Err(Error::InvalidMeasurement(format!(
                "basis has {} vectors in dimension {dim}",
                basis.len()
            )));
        }
        Self::new(basis.iter().map(HermitianOperator::projector).collect())
    }

    /// Spectral measure of an observable: eigenvalues (descending, with
    /// degenerate ones merged within τ) and their eigenprojectors.
    pub fn spectral(observable: &HermitianOperator) -> Result<(Vec<f64>, Self)> {
        let e = eigh(observable)?;
        let dim = observable.dim();
        let tol = tolerance();
        let mut values: Vec<f64> = Vec::new();
        let mut projectors: Vec<ComplexMatrix> = Vec::new();
        for (lambda, v) in e.values.iter().zip(&e.vectors) {
            match values.last() {
                Some(last) if (last - lambda).abs() <= tol => {
                    let p = projectors.last_mut().expect("paired with values");
                    *p = &*p + &v.projector();
                }
                _ => {
                    values.push(*lambda);
                    projectors.push(v.projector());
                }
            }
        }
        debug_assert!(projectors.iter().all(|p| p.rows() == dim));
        let m = Self::new(projectors.iter().map(HermitianOperator::symmetrized).collect())?;
        Ok((values, m))
    }

    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn to_povm(&self) -> GeneralizedMeasurement {
        GeneralizedMeasurement {
            effects: self.projectors.clone(),
        }
    }
}

impl From<ProjectiveMeasurement> for GeneralizedMeasurement {
    fn from(m: ProjectiveMeasurement) -> Self {
        GeneralizedMeasurement {
            effects: m.projectors,
        }
    }
}

/// POVM: positive effects summing to `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedMeasurement {
    effects: Vec<HermitianOperator>,
}

impl GeneralizedMeasurement {
    pub fn new(effects: Vec<HermitianOperator>) -> Result<Self> {
        let dim = effects
            .first()
            .map(HermitianOperator::dim)
            .ok_or_else(|| Error::InvalidMeasurement("no effects".into()))?;
        let tol = tolerance();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (i, e) in effects.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch("effects differ in dimension".into()));
            }
            let lowest = e.min_eigenvalue()?;
            if lowest < -tol {
                return Err(Error::InvalidMeasurement(format!(
                    "effect {i} is not positive (eigenvalue {lowest:.3e})"
                )));
            }
            sum = &sum + e.matrix();
        }
        let gap = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if gap > tol {
            return Err(Error::InvalidMeasurement(format!(
                "effects do not sum to the identity (gap {gap:.3e})"
            )));
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// All effects idempotent within τ.
    pub fn is_projective(&self) -> bool {
        let tol = tolerance();
        self.effects
            .iter()
            .all(|e| e.matrix().idempotency_defect() <= tol)
    }

    /// Born probabilities `tr(Eᵢ ρ)`.
    pub fn probabilities(&self, rho: &ComplexMatrix) -> Result<Vec<f64>> {
        check_density_dim(rho, self.dim())?;
        Ok(self
            .effects
            .iter()
            .map(|e| e.matrix().matmul(rho).trace().re)
            .collect())
    }

    /// Lüders instrument element `√E ρ √E` (unnormalized).
    pub fn luders_branch(&self, index: usize, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_density_dim(rho, self.dim())?;
        let root = self.effects[index].map_spectrum(|x| x.max(0.0).sqrt())?;
        Ok(rho.conjugate_by(&root))
    }
}

/// Naimark dilation of a POVM onto `system ⊗ ancilla`.
#[derive(Debug, Clone)]
pub struct NaimarkDilation {
    pub ancilla_dim: usize,
    /// Projective measurement on the enlarged space.
    pub joint_projective: ProjectiveMeasurement,
    /// Isometry `system → system ⊗ ancilla`.
    pub embed: ComplexMatrix,
}

impl NaimarkDilation {
    pub fn system_dim(&self) -> usize {
        self.embed.cols()
    }

    /// `V ρ V†`
    pub fn embed_state(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_density_dim(rho, self.system_dim())?;
        Ok(rho.conjugate_by(&self.embed))
    }

    pub fn probabilities(&self, rho: &ComplexMatrix) -> Result<Vec<f64>> {
        let joint = self.embed_state(rho)?;
        Ok(self
            .joint_projective
            .projectors()
            .iter()
            .map(|p| p.matrix().matmul(&joint).trace().re)
            .collect())
    }

    /// Post-measurement system state for outcome `index`: projective update
    /// on the enlarged space, then the ancilla traced out.
    pub fn post_state(&self, rho: &ComplexMatrix, index: usize) -> Result<Option<ComplexMatrix>> {
        let joint = self.embed_state(rho)?;
        let p = self.joint_projective.projectors()[index].matrix();
        let projected = p.matmul(&joint).matmul(p);
        let prob = projected.trace().re;
        if prob <= tolerance() {
            return Ok(None);
        }
        let reduced = partial_trace(&projected, (self.system_dim(), self.ancilla_dim), Subsystem::A)?;
        Ok(Some(reduced.scale_real(1.0 / prob)))
    }
}

/// Standard Naimark dilation `V|ψ⟩ = Σᵢ √Eᵢ|ψ⟩ ⊗ |i⟩` with joint projectors
/// `I ⊗ |i⟩⟨i|`. A measurement that is already projective is returned
/// unchanged with a one-dimensional ancilla.
pub fn dilate_povm(m: &GeneralizedMeasurement) -> Result<NaimarkDilation> {
    let d = m.dim();
    if m.is_projective() {
        return Ok(NaimarkDilation {
            ancilla_dim: 1,
            joint_projective: ProjectiveMeasurement::new(m.effects.clone())?,
            embed: ComplexMatrix::identity(d),
        });
    }
    let k = m.len();
    let roots = m
        .effects
        .iter()
        .map(|e| e.map_spectrum(|x| x.max(0.0).sqrt()))
        .collect::<Result<Vec<_>>>()?;
    let embed = ComplexMatrix::from_fn(d * k, d, |row, col| {
        let (s, i) = (row / k, row % k);
        roots[i][(s, col)]
    });
    let defect = embed.dagger().matmul(&embed).max_abs_diff(&ComplexMatrix::identity(d));
    if defect > tolerance() {
        return Err(Error::InvalidMeasurement(format!(
            "effects do not complete to the identity (isometry defect {defect:.3e})"
        )));
    }
    let id = ComplexMatrix::identity(d);
    let projectors = (0..k)
        .map(|i| HermitianOperator::symmetrized(&id.tensor(&UnitVector::basis(k, i).projector())))
        .collect();
    Ok(NaimarkDilation {
        ancilla_dim: k,
        joint_projective: ProjectiveMeasurement::new(projectors)?,
        embed,
    })
}

/// Dephasing of strength `λ ∈ [0, 1]` in a fixed orthonormal basis: diagonal
/// entries in that basis are kept, off-diagonal ones are scaled by `1 − λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingChannel {
    basis: Vec<UnitVector>,
    strength: f64,
}

impl DephasingChannel {
    pub fn new(basis: Vec<UnitVector>, strength: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&strength) {
            return Err(Error::InvalidParameter(format!(
                "dephasing strength must lie in [0, 1], got {strength}"
            )));
        }
        let dim = check_orthonormal(&basis)?;
        if basis.len() != dim {
            return Err(Error::InvalidParameter("dephasing basis must be complete".into()));
        }
        Ok(Self { basis, strength })
    }

    pub fn computational(dim: usize, strength: f64) -> Result<Self> {
        Self::new((0..dim).map(|k| UnitVector::basis(dim, k)).collect(), strength)
    }

    pub fn basis(&self) -> &[UnitVector] {
        &self.basis
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Kraus form `{√(1−λ) I} ∪ {√λ |bᵢ⟩⟨bᵢ|}`.
    pub fn to_kraus(&self) -> KrausChannel {
        let mut ops = vec![ComplexMatrix::identity(self.dim()).scale_real((1.0 - self.strength).sqrt())];
        ops.extend(
            self.basis
                .iter()
                .map(|b| b.projector().scale_real(self.strength.sqrt())),
        );
        KrausChannel::new(ops).expect("dephasing Kraus set is complete")
    }
}

pub fn dephase(ch: &DephasingChannel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_density_dim(rho, ch.dim())?;
    if ch.strength == 0.0 {
        return Ok(rho.clone());
    }
    let u = ComplexMatrix::from_columns(&ch.basis);
    let mut in_basis = u.dagger().matmul(rho).matmul(&u);
    let keep = 1.0 - ch.strength;
    let n = ch.dim();
    for r in 0..n {
        for col in 0..n {
            if r != col {
                in_basis[(r, col)] *= keep;
            }
        }
    }
    Ok(in_basis.conjugate_by(&u))
}

/// One sampled measurement outcome.
#[derive(Debug, Clone, Serialize)]
pub struct SampledOutcome {
    pub index: usize,
    pub probability: f64,
    #[serde(skip)]
    pub post_state: ComplexMatrix,
}

/// Draw an outcome with probability `tr(Eᵢρ)` from a generator seeded with
/// `rng_seed`, and return the Lüders post-measurement state.
pub fn sample_outcome(m: &GeneralizedMeasurement, rho: &ComplexMatrix, rng_seed: u64) -> Result<SampledOutcome> {
    sample_outcome_with(m, rho, &mut random::seeded(rng_seed))
}

/// As [`sample_outcome`], drawing from a caller-owned generator.
pub fn sample_outcome_with<R: Rng + ?Sized>(
    m: &GeneralizedMeasurement,
    rho: &ComplexMatrix,
    rng: &mut R,
) -> Result<SampledOutcome> {
    let dilation = dilate_povm(m)?;
    let probs = dilation.probabilities(rho)?;
    let index = draw_index(&probs, rng)?;
    let post_state = dilation
        .post_state(rho, index)?
        .expect("sampled outcome has positive probability");
    Ok(SampledOutcome {
        index,
        probability: probs[index],
        post_state,
    })
}

/// Inverse-CDF draw from a probability vector summing to 1 within τ.
pub fn draw_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize> {
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tolerance() {
        return Err(Error::ProbabilitiesUnnormalized(total));
    }
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        last_positive = i;
        acc += p;
        if u < acc {
            return Ok(i);
        }
    }
    Ok(last_positive)
}
