//! Dense complex linear algebra for small operators (side ≤ 64).
//!
//! Matrices are row-major. Tensor products use the A-major convention: the
//! joint index of `(i, j)` with `i` on the first factor and `j` on the second
//! is `i * d_b + j`. Every bipartite formula in the crate relies on this.

mod eigh;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::tol::tolerance;
use crate::{Error, Result};

pub use eigh::{eigh, Eigh, MAX_SWEEPS};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Which factor of a bipartite space an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Dense row-major complex matrix with finite entries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for col in 0..self.cols {
                let z = self[(r, col)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from real entries given row by row.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for col in 0..cols {
                data.push(f(r, col));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, col| if r == col { ONE } else { ZERO })
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |r, col| if r == col { values[r] } else { ZERO })
    }

    pub fn diagonal_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |r, col| if r == col { c(values[r], 0.0) } else { ZERO })
    }

    /// `|u⟩⟨v|`
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, col| u[r] * v[col].conj())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[UnitVector]) -> Self {
        let rows = columns.first().map_or(0, UnitVector::dim);
        Self::from_fn(rows, columns.len(), |r, col| columns[col].amplitudes()[r])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, col)]).collect()
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, col| self[(col, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, col| self[(col, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|k| self[(k, k)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_abs_diff(other) <= tol
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = vec![ZERO; self.rows * rhs.cols];
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Self {
            rows: self.rows,
            cols: rhs.cols,
            data: out,
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `A X A†`
    pub fn conjugate_by(&self, a: &Self) -> Self {
        a.matmul(self).matmul(&a.dagger())
    }

    /// `AB − BA`
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Max entry of `M − M†`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for col in r..self.cols {
                worst = worst.max((self[(r, col)] - self[(col, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Max entry of `U†U − I`.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.dagger()
            .matmul(self)
            .max_abs_diff(&Self::identity(self.rows))
    }

    /// Max entry of `P² − P`.
    pub fn idempotency_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.matmul(self).max_abs_diff(self)
    }

    /// `⟨u|M|v⟩`
    pub fn sandwich(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let mv = self.apply(v);
        u.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Kronecker product `self ⊗ other` (A-major).
    pub fn tensor(&self, other: &Self) -> Self {
        tensor(self, other)
    }

    /// Extract the `(i, j)` block of size `d × d`.
    fn block(&self, bi: usize, bj: usize, d: usize) -> Self {
        Self::from_fn(d, d, |r, col| self[(bi * d + r, bj * d + col)])
    }

    /// Zero out entries whose modulus is below `eps`, and tiny real or
    /// imaginary parts.
    pub fn chop(&self, eps: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| {
                    c(
                        if z.re.abs() < eps { 0.0 } else { z.re },
                        if z.im.abs() < eps { 0.0 } else { z.im },
                    )
                })
                .collect(),
        }
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, col): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && col < self.cols);
        &self.data[r * self.cols + col]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, col): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && col < self.cols);
        &mut self.data[r * self.cols + col]
    }
}

macro_rules! elementwise {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                assert_eq!(
                    (self.rows, self.cols),
                    (rhs.rows, rhs.cols),
                    "elementwise shape mismatch"
                );
                ComplexMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| a $op b).collect(),
                }
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Kronecker product with A-index major, B-index minor.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut data = Vec::with_capacity(rows * cols);
    for ar in 0..a.rows {
        for br in 0..b.rows {
            for ac in 0..a.cols {
                let x = a[(ar, ac)];
                for bc in 0..b.cols {
                    data.push(x * b[(br, bc)]);
                }
            }
        }
    }
    ComplexMatrix { rows, cols, data }
}

/// Tensor product of several factors, left to right.
pub fn tensor_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut iter = factors.iter();
    let first = (*iter.next().expect("at least one factor")).clone();
    iter.fold(first, |acc, m| tensor(&acc, m))
}

fn check_bipartite(m: &ComplexMatrix, (da, db): (usize, usize)) -> Result<()> {
    if !m.is_square() || m.rows != da * db || da == 0 || db == 0 {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix of side {da}·{db} = {}, got {}x{}",
            da * db,
            m.rows,
            m.cols
        )));
    }
    Ok(())
}

/// Reduced operator on `keep` after tracing out the other factor.
pub fn partial_trace(m: &ComplexMatrix, dims: (usize, usize), keep: Subsystem) -> Result<ComplexMatrix> {
    check_bipartite(m, dims)?;
    let (da, db) = dims;
    Ok(match keep {
        Subsystem::A => ComplexMatrix::from_fn(da, da, |i, k| {
            (0..db).map(|j| m[(i * db + j, k * db + j)]).sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(db, db, |j, l| {
            (0..da).map(|i| m[(i * db + j, i * db + l)]).sum()
        }),
    })
}

/// Partial transpose on the given factor.
pub fn partial_transpose(m: &ComplexMatrix, dims: (usize, usize), on: Subsystem) -> Result<ComplexMatrix> {
    check_bipartite(m, dims)?;
    let (da, db) = dims;
    let n = da * db;
    Ok(ComplexMatrix::from_fn(n, n, |r, col| {
        let (i, j) = (r / db, r % db);
        let (k, l) = (col / db, col % db);
        match on {
            Subsystem::A => m[(k * db + j, i * db + l)],
            Subsystem::B => m[(i * db + l, k * db + j)],
        }
    }))
}

/// Block of a bipartite operator `⟨i|_A M |k⟩_A`, an operator on B.
pub fn a_block(m: &ComplexMatrix, dims: (usize, usize), i: usize, k: usize) -> ComplexMatrix {
    let (_, db) = dims;
    m.block(i, k, db)
}

/// Self-adjoint operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let defect = m.hermiticity_defect();
        if defect > tolerance() {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self(m))
    }

    /// Replace `m` with `(m + m†)/2`; use only for matrices that are
    /// Hermitian up to rounding.
    pub fn symmetrized(m: &ComplexMatrix) -> Self {
        assert!(m.is_square());
        Self((m + &m.dagger()).scale_real(0.5))
    }

    pub fn projector(v: &UnitVector) -> Self {
        Self(v.projector())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn eigh(&self) -> Result<Eigh> {
        eigh(self)
    }

    /// Apply a real function to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
        let e = self.eigh()?;
        let mut out = ComplexMatrix::zeros(self.dim(), self.dim());
        for (lambda, v) in e.values.iter().zip(&e.vectors) {
            let w = f(*lambda);
            if w != 0.0 {
                out = &out + &v.projector().scale_real(w);
            }
        }
        Ok(out)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigh()?.values.last().expect("non-empty spectrum"))
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigh()?.values[0])
    }
}

impl From<HermitianOperator> for ComplexMatrix {
    fn from(h: HermitianOperator) -> Self {
        h.0
    }
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitVector {
    amplitudes: Vec<Complex64>,
}

impl UnitVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DimensionMismatch("empty vector".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n2 = norm_sqr(&amplitudes);
        if (n2 - 1.0).abs() > tolerance() {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { amplitudes })
    }

    /// Rescale to unit norm. Fails on the zero vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = norm_sqr(&amplitudes).sqrt();
        if !(n.is_finite() && n > f64::EPSILON) {
            return Err(Error::NotNormalized(n * n));
        }
        Self::new(amplitudes.into_iter().map(|z| z / n).collect())
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| c(x, 0.0)).collect())
    }

    /// Computational basis vector `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[k] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Complex64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Equality up to a global phase, judged by `|⟨u|v⟩| = 1`.
    pub fn same_ray(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && (1.0 - self.inner(other).norm()).abs() <= tol
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Self { amplitudes }
    }

    /// `U|v⟩`, renormalized against rounding. `u` must be unitary.
    pub fn transformed(&self, u: &ComplexMatrix) -> Self {
        Self::normalized(u.apply(&self.amplitudes)).expect("unitary image of a unit vector")
    }

    /// Density operator `|v⟩⟨v|`.
    pub fn density(&self) -> ComplexMatrix {
        self.projector()
    }
}

pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Max entry of the Gram matrix minus the identity.
pub fn orthonormality_defect(vectors: &[UnitVector]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, u) in vectors.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((u.inner(v) - target).norm());
        }
    }
    worst
}

/// Fail unless the vectors share a dimension and are orthonormal within τ.
pub fn check_orthonormal(vectors: &[UnitVector]) -> Result<usize> {
    let dim = vectors
        .first()
        .map(UnitVector::dim)
        .ok_or_else(|| Error::DimensionMismatch("empty basis".into()))?;
    if vectors.iter().any(|v| v.dim() != dim) || vectors.len() > dim {
        return Err(Error::DimensionMismatch(format!(
            "{} vectors cannot be orthonormal in dimension {dim}",
            vectors.len()
        )));
    }
    let defect = orthonormality_defect(vectors);
    if defect > tolerance() {
        return Err(Error::NotOrthonormal(defect));
    }
    Ok(dim)
}

/// Extend an orthonormal family to a full basis of `dim` by Gram–Schmidt
/// against the computational basis vectors, taken in index order.
pub fn complete_basis(partial: &[UnitVector], dim: usize) -> Vec<UnitVector> {
    let mut basis: Vec<UnitVector> = partial.to_vec();
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = UnitVector::basis(dim, k).amplitudes;
        // Two passes of modified Gram–Schmidt.
        for _ in 0..2 {
            for b in &basis {
                let overlap = inner(b.amplitudes(), &v);
                for (x, y) in v.iter_mut().zip(b.amplitudes()) {
                    *x -= overlap * y;
                }
            }
        }
        if norm_sqr(&v) > 1e-6 {
            basis.push(UnitVector::normalized(v).expect("nonzero residual"));
        }
    }
    basis
}

/// Pauli matrices and other fixed single-qubit operators.
pub mod pauli {
    use super::*;

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    /// Spin along angle θ in the x–z plane: `cos θ σ_z + sin θ σ_x`.
    pub fn spin_xz(theta: f64) -> ComplexMatrix {
        &z().scale_real(theta.cos()) + &x().scale_real(theta.sin())
    }
}

/// Common single-qubit kets. `plus`/`minus` are the σ_z eigenstates written
/// `|+⟩`, `|−⟩`; `plus_x`/`minus_x` are the σ_x eigenstates.
pub mod kets {
    use super::*;

    pub fn zero() -> UnitVector {
        UnitVector::basis(2, 0)
    }

    pub fn one() -> UnitVector {
        UnitVector::basis(2, 1)
    }

    pub fn plus_x() -> UnitVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        UnitVector::from_real(&[h, h]).unwrap()
    }

    pub fn minus_x() -> UnitVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        UnitVector::from_real(&[h, -h]).unwrap()
    }
}
