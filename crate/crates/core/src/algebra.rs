//! Finite-dimensional *-algebras as direct sums of full matrix blocks, their
//! states, and the broadcasting/cloning checks.
//!
//! An algebra `⊕ᵢ M_{nᵢ}` is realized concretely as block-diagonal matrices
//! of side `Σ nᵢ`. It is commutative exactly when every block is 1×1, in
//! which case its pure states are point masses on a finite set.

use serde::Serialize;

use crate::channels::KrausChannel;
use crate::qmat::{
    check_orthonormal, complete_basis, partial_trace, ComplexMatrix, HermitianOperator, Subsystem,
    UnitVector,
};
use crate::tol::tolerance;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockAlgebra {
    block_dims: Vec<usize>,
}

impl BlockAlgebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() || block_dims.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "block dimensions must be a non-empty list of positive integers, got {block_dims:?}"
            )));
        }
        Ok(Self { block_dims })
    }

    /// Commutative algebra of functions on `points` points.
    pub fn classical(points: usize) -> Result<Self> {
        Self::new(vec![1; points])
    }

    /// Full matrix algebra `M_n`.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    /// Side of the concrete block-diagonal representation.
    pub fn dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    fn offsets(&self) -> Vec<usize> {
        self.block_dims
            .iter()
            .scan(0, |acc, d| {
                let start = *acc;
                *acc += d;
                Some(start)
            })
            .collect()
    }

    /// Block-diagonal element with the given blocks.
    pub fn element(&self, blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        if blocks.len() != self.block_dims.len()
            || blocks
                .iter()
                .zip(&self.block_dims)
                .any(|(b, d)| b.rows() != *d || b.cols() != *d)
        {
            return Err(Error::DimensionMismatch("blocks do not match the algebra".into()));
        }
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (start, b) in self.offsets().into_iter().zip(blocks) {
            for r in 0..b.rows() {
                for col in 0..b.cols() {
                    out[(start + r, start + col)] = b[(r, col)];
                }
            }
        }
        Ok(out)
    }

    /// Two elements that fail to commute, if any exist.
    pub fn noncommuting_witness(&self) -> Option<(ComplexMatrix, ComplexMatrix)> {
        let k = self.block_dims.iter().position(|&d| d >= 2)?;
        let d = self.block_dims[k];
        let unit = |i: usize, j: usize| {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(i, j)] = crate::qmat::ONE;
            m
        };
        let lift = |m: ComplexMatrix| {
            let blocks: Vec<ComplexMatrix> = self
                .block_dims
                .iter()
                .enumerate()
                .map(|(i, &di)| if i == k { m.clone() } else { ComplexMatrix::zeros(di, di) })
                .collect();
            self.element(&blocks).expect("shapes match")
        };
        Some((lift(unit(0, 1)), lift(unit(1, 0))))
    }
}

/// True iff every block is one-dimensional.
pub fn is_commutative(a: &BlockAlgebra) -> bool {
    a.block_dims.iter().all(|&d| d == 1)
}

/// Positive normalized functional on a [`BlockAlgebra`]: a probability per
/// block and a density operator within each block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgebraState {
    block_weights: Vec<f64>,
    #[serde(skip)]
    block_densities: Vec<ComplexMatrix>,
}

impl AlgebraState {
    pub fn new(algebra: &BlockAlgebra, block_weights: Vec<f64>, block_densities: Vec<ComplexMatrix>) -> Result<Self> {
        let tol = tolerance();
        if block_weights.len() != algebra.block_dims.len() || block_densities.len() != block_weights.len() {
            return Err(Error::DimensionMismatch("one weight and density per block".into()));
        }
        if block_weights.iter().any(|w| *w < -tol || !w.is_finite()) {
            return Err(Error::InvalidState("negative block weight".into()));
        }
        let total: f64 = block_weights.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("block weights sum to {total}")));
        }
        for (d, rho) in algebra.block_dims.iter().zip(&block_densities) {
            if rho.rows() != *d || rho.cols() != *d {
                return Err(Error::DimensionMismatch("block density shape".into()));
            }
            check_density(rho)?;
        }
        Ok(Self {
            block_weights,
            block_densities,
        })
    }

    /// Classical measure `μ` over the points of a commutative algebra.
    pub fn classical(algebra: &BlockAlgebra, mu: Vec<f64>) -> Result<Self> {
        if !is_commutative(algebra) {
            return Err(Error::NonCommutativeAlgebra);
        }
        let densities = vec![ComplexMatrix::identity(1); mu.len()];
        Self::new(algebra, mu, densities)
    }

    /// Point mass on block `index` of a commutative algebra.
    pub fn point_mass(algebra: &BlockAlgebra, index: usize) -> Result<Self> {
        let n = algebra.block_dims.len();
        if index >= n {
            return Err(Error::InvalidParameter(format!("point {index} out of range")));
        }
        let mut mu = vec![0.0; n];
        mu[index] = 1.0;
        Self::classical(algebra, mu)
    }

    pub fn block_weights(&self) -> &[f64] {
        &self.block_weights
    }

    pub fn block_densities(&self) -> &[ComplexMatrix] {
        &self.block_densities
    }

    /// Block-diagonal density operator `⊕ wᵢ Dᵢ`.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let dims: Vec<usize> = self.block_densities.iter().map(ComplexMatrix::rows).collect();
        let algebra = BlockAlgebra { block_dims: dims };
        let blocks: Vec<ComplexMatrix> = self
            .block_weights
            .iter()
            .zip(&self.block_densities)
            .map(|(w, d)| d.scale_real(*w))
            .collect();
        algebra.element(&blocks).expect("own blocks")
    }

    /// `ω(A) = tr(ρ A)`
    pub fn expect(&self, element: &ComplexMatrix) -> Result<f64> {
        let rho = self.to_matrix();
        if element.rows() != rho.rows() || !element.is_square() {
            return Err(Error::DimensionMismatch("element is not in this algebra".into()));
        }
        Ok(rho.matmul(element).trace().re)
    }
}

/// Fail unless `rho` is PSD with unit trace within τ.
pub fn check_density(rho: &ComplexMatrix) -> Result<()> {
    let tol = tolerance();
    let h = HermitianOperator::new(rho.clone())?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidState(format!("trace is {tr}")));
    }
    let lowest = h.min_eigenvalue()?;
    if lowest < -tol {
        return Err(Error::InvalidState(format!("negative eigenvalue {lowest:.3e}")));
    }
    Ok(())
}

/// A state together with whether it is pure.
#[derive(Debug, Clone, Serialize)]
pub struct PureStateFlag {
    pub state: AlgebraState,
    pub is_pure: bool,
}

impl PureStateFlag {
    /// Pure iff a single block carries all the weight and its density is
    /// idempotent.
    pub fn classify(state: AlgebraState) -> Self {
        let tol = tolerance();
        let is_pure = state
            .block_weights
            .iter()
            .position(|w| (w - 1.0).abs() <= tol)
            .is_some_and(|k| state.block_densities[k].idempotency_defect() <= tol);
        Self { state, is_pure }
    }
}

/// Whether every listed A-operator commutes with every listed B-operator.
pub fn kinematically_independent(a_embed: &[ComplexMatrix], b_embed: &[ComplexMatrix]) -> Result<bool> {
    let dim = a_embed
        .iter()
        .chain(b_embed)
        .map(ComplexMatrix::rows)
        .next()
        .unwrap_or(0);
    if a_embed
        .iter()
        .chain(b_embed)
        .any(|m| !m.is_square() || m.rows() != dim)
    {
        return Err(Error::DimensionMismatch(
            "operators must be square on a common joint space".into(),
        ));
    }
    let tol = tolerance();
    Ok(a_embed
        .iter()
        .all(|a| b_embed.iter().all(|b| a.commutator(b).max_abs() <= tol)))
}

/// Measure in `basis` and prepare two copies of the outcome:
/// `ρ ↦ Σᵢ ⟨i|ρ|i⟩ |i⟩⟨i| ⊗ |i⟩⟨i|`.
pub fn classical_broadcaster(basis: &[UnitVector]) -> Result<KrausChannel> {
    let dim = check_orthonormal(basis)?;
    if basis.len() != dim {
        return Err(Error::InvalidParameter("broadcast basis must be complete".into()));
    }
    let ops = basis
        .iter()
        .map(|b| ComplexMatrix::outer(b.tensor(b).amplitudes(), b.amplitudes()))
        .collect();
    KrausChannel::new(ops)
}

/// Outcome of a broadcasting test.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct BroadcastCheck {
    pub ok: bool,
    /// Largest Frobenius distance of either marginal from the input.
    pub deviation: f64,
}

/// Fixed ready state `|0⟩` for cloning and broadcasting.
pub fn ready_state(dim: usize) -> UnitVector {
    UnitVector::basis(dim, 0)
}

/// Run `channel` on `rho` (or on `rho ⊗ |0⟩⟨0|` for a two-input channel)
/// and compare both output marginals with `rho`.
pub fn broadcast_check(channel: &KrausChannel, rho: &ComplexMatrix) -> Result<BroadcastCheck> {
    let d = rho.rows();
    if !rho.is_square() || channel.output_dim() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "channel output {} is not the square of the input side {d}",
            channel.output_dim()
        )));
    }
    let input = if channel.input_dim() == d {
        rho.clone()
    } else if channel.input_dim() == d * d {
        rho.tensor(&ready_state(d).projector())
    } else {
        return Err(Error::DimensionMismatch("channel input size".into()));
    };
    let out = channel.apply_raw(&input)?;
    let ma = partial_trace(&out, (d, d), Subsystem::A)?;
    let mb = partial_trace(&out, (d, d), Subsystem::B)?;
    let deviation = ma.frobenius_distance(rho).max(mb.frobenius_distance(rho));
    Ok(BroadcastCheck {
        ok: deviation <= tolerance(),
        deviation,
    })
}

/// Result of a cloning request for two pure states.
#[derive(Debug, Clone, Serialize)]
pub enum CloneOutcome {
    /// Unitary `U` on `d ⊗ d` with `U(ψ⊗r) = ψ⊗ψ` and `U(φ⊗r) = φ⊗φ`.
    Unitary(#[serde(skip)] ComplexMatrix),
    /// Unitarity would require `|⟨ψ|φ⟩| = |⟨ψ|φ⟩|²`, which fails.
    Refused { overlap: f64, overlap_squared: f64 },
}

impl CloneOutcome {
    pub fn unitary(&self) -> Option<&ComplexMatrix> {
        match self {
            Self::Unitary(u) => Some(u),
            Self::Refused { .. } => None,
        }
    }
}

/// Find a cloning unitary for `ψ, φ`, or refuse with the inner-product
/// witness when they are neither orthogonal nor the same ray.
pub fn clone_orthogonal_pair(psi: &UnitVector, phi: &UnitVector) -> Result<CloneOutcome> {
    if psi.dim() != phi.dim() {
        return Err(Error::DimensionMismatch("states differ in dimension".into()));
    }
    let tol = tolerance();
    let d = psi.dim();
    let overlap = psi.inner(phi).norm();
    let ready = ready_state(d);
    let (inputs, outputs) = if overlap < tol {
        (
            vec![psi.tensor(&ready), phi.tensor(&ready)],
            vec![psi.tensor(psi), phi.tensor(phi)],
        )
    } else if overlap > 1.0 - tol {
        (vec![psi.tensor(&ready)], vec![psi.tensor(psi)])
    } else {
        return Ok(CloneOutcome::Refused {
            overlap,
            overlap_squared: overlap * overlap,
        });
    };
    let ins = complete_basis(&inputs, d * d);
    let outs = complete_basis(&outputs, d * d);
    let u = ins
        .iter()
        .zip(&outs)
        .fold(ComplexMatrix::zeros(d * d, d * d), |acc, (i, o)| {
            &acc + &ComplexMatrix::outer(o.amplitudes(), i.amplitudes())
        });
    Ok(CloneOutcome::Unitary(u))
}
