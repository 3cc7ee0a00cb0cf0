//! Dense complex linear algebra over tensor-factorized Hilbert spaces.
//!
//! Composite indices are row-major over the factors: the first factor varies
//! slowest, so for dims `[2, 3]` the basis order is
//! `|0,0⟩, |0,1⟩, |0,2⟩, |1,0⟩, |1,1⟩, |1,2⟩`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for construction-time checks (Hermiticity, normalization).
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance for numerical identities (trace, positivity, reconstruction).
pub const NUMERIC_TOL: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Ordered subsystem dimensions of a composite space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factorization {
    dims: Vec<usize>,
}

impl Factorization {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() {
            return Err(Error::InvalidArgument("factorization needs at least one factor".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidArgument(format!("factor dimension {d} must be >= 1")));
        }
        Ok(Factorization { dims })
    }

    /// A single factor of the given dimension.
    pub fn single(dim: usize) -> Self {
        Factorization { dims: vec![dim.max(1)] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn concat(&self, other: &Factorization) -> Factorization {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Factorization { dims }
    }

    fn check_slot(&self, slot: usize) -> Result<()> {
        if slot >= self.dims.len() {
            return Err(Error::InvalidFactor { index: slot, count: self.dims.len() });
        }
        Ok(())
    }

    /// Splits a composite index into per-factor digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (k, &d) in self.dims.iter().enumerate().rev() {
            out[k] = index % d;
            index /= d;
        }
        out
    }

    /// Inverse of [`Factorization::digits`].
    pub fn compose(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.dims).fold(0, |acc, (&x, &d)| acc * d + x)
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", parts.join("⊗"))
    }
}

/// A square complex matrix tagged with the tensor factorization of its space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: DMatrix<Complex64>,
    factorization: Factorization,
}

impl Operator {
    pub fn new(matrix: DMatrix<Complex64>, factorization: Factorization) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() != factorization.total() {
            return Err(Error::DimensionMismatch {
                expected: factorization.total(),
                found: matrix.nrows(),
            });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("operator has non-finite entries".into()));
        }
        Ok(Operator { matrix, factorization })
    }

    /// Wraps a matrix as an operator on a single factor.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        let f = Factorization::single(matrix.nrows());
        Operator::new(matrix, f)
    }

    /// Builds a single-factor operator from row-major real entries.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: rows.len() });
        }
        let m = DMatrix::from_row_iterator(dim, dim, rows.iter().map(|&x| Complex64::new(x, 0.0)));
        Operator::from_matrix(m)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&x| Complex64::new(x, 0.0)));
        Operator {
            matrix: DMatrix::from_diagonal(&d),
            factorization: Factorization::single(values.len()),
        }
    }

    pub fn identity(factorization: &Factorization) -> Self {
        let n = factorization.total();
        Operator { matrix: DMatrix::identity(n, n), factorization: factorization.clone() }
    }

    pub fn zeros(factorization: &Factorization) -> Self {
        let n = factorization.total();
        Operator { matrix: DMatrix::zeros(n, n), factorization: factorization.clone() }
    }

    /// `|ket⟩⟨bra|` on a single factor of dimension `dim`.
    pub fn matrix_unit(dim: usize, ket: usize, bra: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(ket, bra)] = ONE;
        Operator { matrix: m, factorization: Factorization::single(dim) }
    }

    pub fn outer(ket: &PureState, bra: &PureState) -> Result<Self> {
        if ket.factorization != bra.factorization {
            return Err(Error::FactorizationMismatch(
                ket.factorization.dims.clone(),
                bra.factorization.dims.clone(),
            ));
        }
        Ok(Operator {
            matrix: &ket.amplitudes * bra.amplitudes.adjoint(),
            factorization: ket.factorization.clone(),
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Re-tags the operator with a different factorization of the same total dimension.
    pub fn with_factorization(mut self, factorization: Factorization) -> Result<Self> {
        if factorization.total() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: factorization.total() });
        }
        self.factorization = factorization;
        Ok(self)
    }

    pub fn adjoint(&self) -> Operator {
        Operator { matrix: self.matrix.adjoint(), factorization: self.factorization.clone() }
    }

    pub fn scale(&self, factor: Complex64) -> Operator {
        Operator { matrix: &self.matrix * factor, factorization: self.factorization.clone() }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn max_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-norm of `A − A†`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= CONSTRUCTION_TOL * self.max_norm().max(1.0)
    }

    pub(crate) fn require_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NotHermitian { deviation: self.hermitian_deviation() })
        }
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Operator {
        Operator {
            matrix: (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0),
            factorization: self.factorization.clone(),
        }
    }

    /// `(A − A†)/(2i)`, so that `A = hermitian_part + i·anti_hermitian_part`.
    pub fn anti_hermitian_part(&self) -> Operator {
        Operator {
            matrix: (&self.matrix - self.matrix.adjoint()) * Complex64::new(0.0, -0.5),
            factorization: self.factorization.clone(),
        }
    }

    /// Lifts an operator acting on one factor of `factorization` to the
    /// whole space: `I ⊗ … ⊗ self ⊗ … ⊗ I`.
    pub fn embed(&self, factorization: &Factorization, slot: usize) -> Result<Operator> {
        factorization.check_slot(slot)?;
        let d = factorization.dims[slot];
        if self.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: self.dim() });
        }
        let before: usize = factorization.dims[..slot].iter().product();
        let after: usize = factorization.dims[slot + 1..].iter().product();
        let left = DMatrix::<Complex64>::identity(before, before);
        let right = DMatrix::<Complex64>::identity(after, after);
        let m = left.kronecker(&self.matrix).kronecker(&right);
        Operator::new(m, factorization.clone())
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator { matrix: &self.matrix * &other.matrix, factorization: self.factorization.clone() })
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator { matrix: &self.matrix + &other.matrix, factorization: self.factorization.clone() })
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator { matrix: &self.matrix - &other.matrix, factorization: self.factorization.clone() })
    }

    fn check_same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        if self.dim() != state.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: state.dim() });
        }
        PureState::new(&self.matrix * &state.amplitudes, state.factorization.clone())
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        self.try_add(rhs).expect("operator dimensions must agree")
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        self.try_sub(rhs).expect("operator dimensions must agree")
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        self.try_mul(rhs).expect("operator dimensions must agree")
    }
}

/// `[a, b] = ab − ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.try_mul(b)?.try_sub(&b.try_mul(a)?)
}

/// Pauli matrices; `sigma_z` has `|s₁⟩` (index 0) as its +1 eigenvector.
pub fn sigma_x() -> Operator {
    Operator::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
}

pub fn sigma_y() -> Operator {
    let m = DMatrix::from_row_slice(2, 2, &[ZERO, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), ZERO]);
    Operator::from_matrix(m).expect("2x2")
}

pub fn sigma_z() -> Operator {
    Operator::diagonal(&[1.0, -1.0])
}

/// Kronecker product; the factorization of the result is the concatenation.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator {
        matrix: a.matrix.kronecker(&b.matrix),
        factorization: a.factorization.concat(&b.factorization),
    }
}

/// Hilbert–Schmidt inner product `tr(a†·b)`.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(a.matrix.iter().zip(b.matrix.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Traces out every factor not listed in `keep`.
///
/// The kept factors retain their original relative order.
pub fn partial_trace(rho: &DensityState, keep: &[usize]) -> Result<DensityState> {
    let op = partial_trace_operator(rho.operator(), keep)?;
    Ok(DensityState { op })
}

pub(crate) fn partial_trace_operator(op: &Operator, keep: &[usize]) -> Result<Operator> {
    let fact = op.factorization();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("partial trace must keep at least one factor".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    for &k in &kept {
        fact.check_slot(k)?;
    }
    let traced: Vec<usize> = (0..fact.len()).filter(|k| !kept.contains(k)).collect();
    let kept_fact = Factorization::new(kept.iter().map(|&k| fact.dims[k]).collect::<Vec<_>>())?;
    let traced_fact = Factorization::single(1).concat(&Factorization {
        dims: traced.iter().map(|&k| fact.dims[k]).collect(),
    });

    let n = op.dim();
    let mut kept_idx = Vec::with_capacity(n);
    let mut traced_idx = Vec::with_capacity(n);
    for i in 0..n {
        let digits = fact.digits(i);
        let kd: Vec<usize> = kept.iter().map(|&k| digits[k]).collect();
        let mut td: Vec<usize> = vec![0];
        td.extend(traced.iter().map(|&k| digits[k]));
        kept_idx.push(kept_fact.compose(&kd));
        traced_idx.push(traced_fact.compose(&td));
    }

    let m = kept_fact.total();
    let mut out = DMatrix::<Complex64>::zeros(m, m);
    for i in 0..n {
        for j in 0..n {
            if traced_idx[i] == traced_idx[j] {
                out[(kept_idx[i], kept_idx[j])] += op.matrix[(i, j)];
            }
        }
    }
    Operator::new(out, kept_fact)
}

/// Spectral decomposition of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<Complex64>,
}

impl Eigen {
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let d = DVector::from_iterator(self.values.len(), self.values.iter().map(|&x| Complex64::new(x, 0.0)));
        &self.vectors * DMatrix::from_diagonal(&d) * self.vectors.adjoint()
    }

    /// Applies a real function to the spectrum: `V f(Λ) V†`.
    pub fn map_spectrum<F: Fn(f64) -> Complex64>(&self, f: F) -> DMatrix<Complex64> {
        let d = DVector::from_iterator(self.values.len(), self.values.iter().map(|&x| f(x)));
        &self.vectors * DMatrix::from_diagonal(&d) * self.vectors.adjoint()
    }

    /// Groups eigenvalues whose consecutive gap is at most `gap` and returns
    /// `(mean eigenvalue, spectral projector)` per group, ascending.
    pub fn spectral_projectors(&self, gap: f64) -> Vec<(f64, DMatrix<Complex64>)> {
        let n = self.values.len();
        let mut out = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && self.values[end] - self.values[end - 1] <= gap {
                end += 1;
            }
            let cols = self.vectors.columns(start, end - start);
            let proj = &cols * cols.adjoint();
            let mean = self.values[start..end].iter().sum::<f64>() / (end - start) as f64;
            out.push((mean, proj));
            start = end;
        }
        out
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// Each eigenvector is rephased so its first component of modulus above
/// `1e-8` is real and positive.
pub fn eig_hermitian(a: &Operator) -> Result<Eigen> {
    a.require_hermitian()?;
    Ok(eig_hermitian_matrix(&a.hermitian_part().matrix))
}

pub(crate) fn eig_hermitian_matrix(m: &DMatrix<Complex64>) -> Eigen {
    let n = m.nrows();
    let se = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let v = se.eigenvectors.column(src);
        let phase = v
            .iter()
            .find(|z| z.norm() > 1e-8)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(ONE);
        let norm = v.norm();
        for r in 0..n {
            vectors[(r, col)] = v[r] * phase / norm;
        }
    }
    Eigen { values, vectors }
}

/// A normalized state vector on a factorized space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<Complex64>,
    factorization: Factorization,
}

impl PureState {
    pub fn new(amplitudes: DVector<Complex64>, factorization: Factorization) -> Result<Self> {
        if amplitudes.len() != factorization.total() {
            return Err(Error::DimensionMismatch { expected: factorization.total(), found: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} differs from 1")));
        }
        Ok(PureState { amplitudes, factorization })
    }

    /// Normalizes `amplitudes`; fails on the zero vector.
    pub fn normalized(amplitudes: DVector<Complex64>, factorization: Factorization) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        PureState::new(amplitudes / Complex64::new(norm, 0.0), factorization)
    }

    pub fn from_slice(amplitudes: &[Complex64]) -> Result<Self> {
        PureState::new(DVector::from_column_slice(amplitudes), Factorization::single(amplitudes.len()))
    }

    /// The computational basis vector `index` of a single factor.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut v = DVector::zeros(dim);
        v[index] = ONE;
        Ok(PureState { amplitudes: v, factorization: Factorization::single(dim) })
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            factorization: self.factorization.concat(&other.factorization),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn expectation(&self, op: &Operator) -> Result<Complex64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.dim() });
        }
        Ok(self.amplitudes.dotc(&(&op.matrix * &self.amplitudes)))
    }

    pub fn density(&self) -> DensityState {
        DensityState {
            op: Operator {
                matrix: &self.amplitudes * self.amplitudes.adjoint(),
                factorization: self.factorization.clone(),
            },
        }
    }
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    op: Operator,
}

impl DensityState {
    pub fn new(op: Operator) -> Result<Self> {
        op.require_hermitian()?;
        let tr = op.trace();
        if (tr.re - 1.0).abs() > NUMERIC_TOL || tr.im.abs() > NUMERIC_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let eig = eig_hermitian(&op)?;
        if let Some(&min) = eig.values.first() {
            if min < -NUMERIC_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(DensityState { op })
    }

    /// Symmetrizes `op` and wraps it without the positivity check. Used for
    /// integrator output, whose truncation error can dip marginally below zero.
    pub(crate) fn from_evolved(op: Operator) -> Self {
        DensityState { op: op.hermitian_part() }
    }

    #[cfg(test)]
    pub(crate) fn from_trusted(op: Operator) -> Self {
        DensityState { op }
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.op.matrix
    }

    pub fn factorization(&self) -> &Factorization {
        &self.op.factorization
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// `tr(ρ·A)`.
    pub fn expectation(&self, a: &Operator) -> Result<Complex64> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.dim() });
        }
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.op.matrix[(i, j)] * a.matrix[(j, i)];
            }
        }
        Ok(acc)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian_matrix(&self.op.hermitian_part().matrix).values
    }

    pub fn purity(&self) -> f64 {
        hs_inner(&self.op, &self.op).map(|z| z.re).unwrap_or(0.0)
    }

    pub fn tensor(&self, other: &DensityState) -> DensityState {
        DensityState { op: tensor(&self.op, &other.op) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let i2 = Operator::identity(&Factorization::single(2));
        let i3 = Operator::identity(&Factorization::single(3));
        let t = tensor(&i2, &i3);
        assert_eq!(t.matrix(), &DMatrix::<Complex64>::identity(6, 6));
        assert_eq!(t.factorization().dims(), &[2, 3]);
    }

    #[test]
    fn tensor_first_factor_varies_slowest() {
        let t = tensor(&sigma_z(), &Operator::identity(&Factorization::single(3)));
        let expected = Operator::diagonal(&[1.0, 1.0, 1.0, -1.0, -1.0, -1.0]);
        assert_eq!(t.matrix(), expected.matrix());
    }

    #[test]
    fn tensor_matches_four_index_oracle() {
        let a = sigma_x();
        let b = sigma_z();
        let t = tensor(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert_eq!(t.matrix()[(i * 2 + k, j * 2 + l)], a.matrix()[(i, j)] * b.matrix()[(k, l)]);
                    }
                }
            }
        }
    }

    #[test]
    fn hs_inner_basics() {
        let i2 = Operator::identity(&Factorization::single(2));
        assert_eq!(hs_inner(&i2, &i2).unwrap(), c(2.0, 0.0));
        assert_eq!(hs_inner(&sigma_x(), &sigma_z()).unwrap(), ZERO);
        let a = Operator::from_matrix(DMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0), c(4.0, -1.0)],
        ))
        .unwrap();
        let sum: f64 = a.matrix().iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(hs_inner(&a, &a).unwrap().re, sum, epsilon = 1e-14);
        assert!(hs_inner(&i2, &Operator::identity(&Factorization::single(3))).is_err());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rs = PureState::from_slice(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap().density();
        let ro = DensityState::new(Operator::diagonal(&[0.2, 0.3, 0.5])).unwrap();
        let joint = rs.tensor(&ro);
        let back_s = partial_trace(&joint, &[0]).unwrap();
        let back_o = partial_trace(&joint, &[1]).unwrap();
        assert!((back_s.matrix() - rs.matrix()).iter().all(|z| z.norm() < 1e-15));
        assert!((back_o.matrix() - ro.matrix()).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn partial_trace_rejects_bad_indices() {
        let rho = PureState::basis(6, 0).unwrap().density();
        let rho = DensityState::from_trusted(
            rho.operator().clone().with_factorization(Factorization::new([2, 3]).unwrap()).unwrap(),
        );
        assert!(matches!(partial_trace(&rho, &[2]), Err(Error::InvalidFactor { .. })));
        assert!(partial_trace(&rho, &[]).is_err());
    }

    #[test]
    fn partial_trace_middle_factor() {
        // |0⟩⊗|1⟩⊗|2⟩ on [2,2,3]; keeping factors 0 and 2 gives |0,2⟩.
        let psi = PureState::basis(2, 0)
            .unwrap()
            .tensor(&PureState::basis(2, 1).unwrap())
            .tensor(&PureState::basis(3, 2).unwrap());
        let r = partial_trace(&psi.density(), &[2, 0]).unwrap();
        assert_eq!(r.factorization().dims(), &[2, 3]);
        assert_eq!(r.matrix()[(2, 2)], ONE);
        assert_abs_diff_eq!(r.operator().trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn eig_diagonal_and_pauli() {
        let e = eig_hermitian(&Operator::diagonal(&[0.0, 1.0, -1.0])).unwrap();
        assert_eq!(e.values, vec![-1.0, 0.0, 1.0]);

        let e = eig_hermitian(&sigma_x()).unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(e.vectors[(0, 0)].re, s, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[(1, 0)].re, -s, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[(0, 1)].re, s, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[(1, 1)].re, s, epsilon = 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = Operator::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eig_hermitian(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn embed_places_factor() {
        let f = Factorization::new([2, 3]).unwrap();
        let q = Operator::diagonal(&[0.0, 1.0, -1.0]);
        let lifted = q.embed(&f, 1).unwrap();
        let direct = tensor(&Operator::identity(&Factorization::single(2)), &q);
        assert_eq!(lifted.matrix(), direct.matrix());
        assert!(q.embed(&f, 0).is_err());
        assert!(q.embed(&f, 2).is_err());
    }

    #[test]
    fn density_validation() {
        assert!(DensityState::new(Operator::diagonal(&[0.5, 0.6])).is_err());
        assert!(DensityState::new(Operator::diagonal(&[1.5, -0.5])).is_err());
        assert!(DensityState::new(sigma_x()).is_err());
        assert!(DensityState::new(Operator::diagonal(&[0.25, 0.75])).is_ok());
    }

    #[test]
    fn pure_state_requires_unit_norm() {
        assert!(PureState::from_slice(&[c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        let n = PureState::normalized(DVector::from_column_slice(&[c(1.0, 0.0), c(1.0, 0.0)]), Factorization::single(2));
        assert!(n.is_ok());
    }
}
