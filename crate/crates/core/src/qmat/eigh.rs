//! Cyclic Jacobi eigendecomposition for complex Hermitian matrices.

use num_complex::Complex64;

use super::{ComplexMatrix, HermitianOperator, UnitVector, ZERO};
use crate::{Error, Result};

/// Sweep budget. Jacobi converges quadratically; n ≤ 64 needs around ten.
pub const MAX_SWEEPS: usize = 100;

/// Spectrum in descending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Vec<UnitVector>,
}

impl Eigh {
    /// `Σ λᵢ |vᵢ⟩⟨vᵢ|`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.vectors.first().map_or(0, UnitVector::dim);
        self.values
            .iter()
            .zip(&self.vectors)
            .fold(ComplexMatrix::zeros(n, n), |acc, (l, v)| {
                &acc + &v.projector().scale_real(*l)
            })
    }
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            s += a[p * n + q].norm_sqr();
        }
    }
    (2.0 * s).sqrt()
}

/// Eigendecomposition of a Hermitian operator.
///
/// Eigenvalues come back in descending order; equal eigenvalues keep the
/// order in which Jacobi left them, which is deterministic for a given
/// input. Each eigenvector's first non-negligible component is made real
/// and positive.
pub fn eigh(h: &HermitianOperator) -> Result<Eigh> {
    let m = h.matrix();
    let n = m.rows();
    let mut a: Vec<Complex64> = m.entries().to_vec();
    // Symmetrize away rounding noise and force a real diagonal.
    for p in 0..n {
        a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
        for q in (p + 1)..n {
            let avg = (a[p * n + q] + a[q * n + p].conj()) * 0.5;
            a[p * n + q] = avg;
            a[q * n + p] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n).entries().to_vec();

    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let target = 1e-15 * scale;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, n) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a, n) > 1e-12 * scale {
        return Err(Error::ConvergenceFailure(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable: ties keep Jacobi's column order.
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));

    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &k in &order {
        values.push(a[k * n + k].re);
        let mut col: Vec<Complex64> = (0..n).map(|r| v[r * n + k]).collect();
        if let Some(lead) = col.iter().find(|z| z.norm() > 1e-10).copied() {
            let phase = lead.conj() / lead.norm();
            for z in &mut col {
                *z *= phase;
            }
        }
        vectors.push(UnitVector::normalized(col)?);
    }
    Ok(Eigh { values, vectors })
}

/// One complex Jacobi rotation zeroing `a[p][q]`.
///
/// With `a_pq = |a_pq| e^{iφ}` the rotation is
/// `J = [[c, s e^{iφ}], [−s e^{−iφ}, c]]` on rows/columns `p, q`, and the
/// update is `A ← J† A J`, `V ← V J`.
fn rotate(a: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let e = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;

    // Columns: A ← A J
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * cs - akq * e.conj() * sn;
        a[k * n + q] = akp * e * sn + akq * cs;
    }
    // Rows: A ← J† A
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * cs - aqk * e * sn;
        a[q * n + k] = apk * e.conj() * sn + aqk * cs;
    }
    a[p * n + q] = ZERO;
    a[q * n + p] = ZERO;
    a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
    a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * cs - vkq * e.conj() * sn;
        v[k * n + q] = vkp * e * sn + vkq * cs;
    }
}
