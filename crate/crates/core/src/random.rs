//! Seeded random instances: states, unitaries, channels, POVMs, ensembles.
//!
//! Every generator takes an explicit `Rng`. The crate-wide seeded generator
//! is [`Seeded`] (ChaCha8), which yields the same stream on every platform
//! for the same 64-bit seed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::{GeneralizedMeasurement, KrausChannel};
use crate::entangle::PureEnsemble;
use crate::qmat::{c, eigh, ComplexMatrix, HermitianOperator, UnitVector};

/// Deterministic generator used for every seeded operation.
pub type Seeded = ChaCha8Rng;

pub fn seeded(seed: u64) -> Seeded {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-random pure state.
pub fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitVector {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| complex_normal(rng)).collect();
        if let Ok(u) = UnitVector::normalized(v) {
            return u;
        }
    }
}

pub fn hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let g = ginibre(dim, dim, rng);
    HermitianOperator::symmetrized(&g)
}

/// Random density operator of the given rank (`G G† / tr`).
pub fn density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, rank.max(1), rng);
    let m = g.matmul(&g.dagger());
    let tr = m.trace().re;
    HermitianOperator::symmetrized(&m.scale_real(1.0 / tr)).into_matrix()
}

/// Random real diagonal density operator (a classical distribution).
pub fn diagonal_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let w: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    ComplexMatrix::diagonal_real(&w.iter().map(|x| x / total).collect::<Vec<_>>())
}

/// Random probability vector with strictly positive entries.
pub fn distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-2).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// `cols` orthonormal columns in dimension `rows` (Gram–Schmidt on a
/// Gaussian matrix).
pub fn isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(cols <= rows);
    loop {
        let g = ginibre(rows, cols, rng);
        let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
        let mut ok = true;
        for k in 0..cols {
            let mut v = g.column(k);
            for _ in 0..2 {
                for q in &columns {
                    let overlap: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (x, y) in v.iter_mut().zip(q) {
                        *x -= overlap * y;
                    }
                }
            }
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n < 1e-8 {
                ok = false;
                break;
            }
            columns.push(v.into_iter().map(|z| z / n).collect());
        }
        if ok {
            return ComplexMatrix::from_fn(rows, cols, |r, col| columns[col][r]);
        }
    }
}

pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    isometry(dim, dim, rng)
}

/// Trace-preserving channel on `dim` with `n_kraus` operators, read off a
/// random isometry `dim → dim·n_kraus`.
pub fn channel<R: Rng + ?Sized>(dim: usize, n_kraus: usize, rng: &mut R) -> KrausChannel {
    let v = isometry(dim * n_kraus, dim, rng);
    let ops = (0..n_kraus)
        .map(|k| ComplexMatrix::from_fn(dim, dim, |r, col| v[(k * dim + r, col)]))
        .collect();
    KrausChannel::new(ops).expect("isometry blocks form a channel")
}

/// Random POVM with `n` effects: `S^{-1/2} Aᵢ S^{-1/2}` for random
/// positive `Aᵢ` with `S = Σ Aᵢ`.
pub fn povm<R: Rng + ?Sized>(dim: usize, n: usize, rng: &mut R) -> GeneralizedMeasurement {
    let raw: Vec<ComplexMatrix> = (0..n).map(|_| density(dim, 1 + (n % dim), rng)).collect();
    let sum = raw
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, a| &acc + a);
    let inv_sqrt = HermitianOperator::symmetrized(&sum)
        .map_spectrum(|x| 1.0 / x.sqrt())
        .expect("eigh on a small positive matrix");
    let effects = raw
        .iter()
        .map(|a| HermitianOperator::symmetrized(&a.conjugate_by(&inv_sqrt)))
        .collect();
    GeneralizedMeasurement::new(effects).expect("normalized random POVM")
}

/// Random pure-state ensemble averaging to `rho`.
///
/// With `ρ = Σ λₖ |eₖ⟩⟨eₖ|` and a random `n × n` unitary `U` (n ≥ dim), the
/// vectors `vᵢ = Σₖ Uᵢₖ √λₖ |eₖ⟩` satisfy `Σ |vᵢ⟩⟨vᵢ| = ρ`; members are
/// `vᵢ/‖vᵢ‖` with weights `‖vᵢ‖²`.
pub fn pure_ensemble_with_average<R: Rng + ?Sized>(
    rho: &ComplexMatrix,
    n: usize,
    rng: &mut R,
) -> PureEnsemble {
    let dim = rho.rows();
    assert!(n >= dim);
    let spectrum = eigh(&HermitianOperator::symmetrized(rho)).expect("small eigh");
    let u = unitary(n, rng);
    // Eigenvalues at round-off level are zero; their square roots are not.
    let floor = 1e-14 * spectrum.values[0].abs();
    let mut probabilities = Vec::new();
    let mut members = Vec::new();
    for i in 0..n {
        let mut v = vec![c(0.0, 0.0); dim];
        for (k, (lambda, e)) in spectrum.values.iter().zip(&spectrum.vectors).enumerate() {
            let w = if *lambda > floor { u[(i, k)] * lambda.sqrt() } else { c(0.0, 0.0) };
            for (x, y) in v.iter_mut().zip(e.amplitudes()) {
                *x += w * y;
            }
        }
        let p: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if p > 1e-9 {
            probabilities.push(p);
            members.push(UnitVector::normalized(v).expect("nonzero member"));
        }
    }
    let total: f64 = probabilities.iter().sum();
    for p in &mut probabilities {
        *p /= total;
    }
    PureEnsemble::new(probabilities, members).expect("valid random ensemble")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let a = unit_vector(4, &mut seeded(9));
        let b = unit_vector(4, &mut seeded(9));
        assert_eq!(a, b);
    }

    #[test]
    fn generated_objects_satisfy_their_invariants() {
        let mut rng = seeded(1);
        let u = unitary(5, &mut rng);
        assert!(u.unitarity_defect() < 1e-13);
        let rho = density(4, 2, &mut rng);
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        let ch = channel(3, 4, &mut rng);
        assert!(ch.is_trace_preserving());
        let ens = pure_ensemble_with_average(&rho, 5, &mut rng);
        assert!(ens.average().approx_eq(&rho, 1e-12));
    }
}
