//! Finite-dimensional unital *-subalgebras of operators.
//!
//! Every [`StarAlgebra`] stores a Hilbert–Schmidt orthonormal basis made of
//! Hermitian operators. A complex span of Hermitian elements is closed under
//! the adjoint, so *-closure holds by construction; multiplicative closure
//! is reached by iterating products until the span stops growing.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, commutator, hs_inner, Factorization, Operator, NUMERIC_TOL};

/// Default relative tolerance for span membership.
pub const DEFAULT_SPAN_TOL: f64 = 1e-10;
/// Default eigenvalue gap below which joint eigenspaces are merged.
pub const DEFAULT_DEGENERACY_GAP: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct StarAlgebra {
    basis: Vec<Operator>,
    generators: Vec<Operator>,
    factorization: Factorization,
    tol: f64,
}

impl StarAlgebra {
    pub fn basis(&self) -> &[Operator] {
        &self.basis
    }

    pub fn generators(&self) -> &[Operator] {
        &self.generators
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    /// Dimension of the underlying matrix space.
    pub fn dim_space(&self) -> usize {
        self.factorization.total()
    }

    /// Linear dimension of the algebra.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Hilbert–Schmidt coordinates `⟨b_k, x⟩` of `x`.
    pub fn coordinates(&self, x: &Operator) -> Result<Vec<Complex64>> {
        self.basis.iter().map(|b| hs_inner(b, x)).collect()
    }

    /// Orthogonal projection of `x` onto the span.
    pub fn project(&self, x: &Operator) -> Result<Operator> {
        let coords = self.coordinates(x)?;
        let mut acc = Operator::zeros(x.factorization());
        for (b, c) in self.basis.iter().zip(coords) {
            acc = &acc + &b.scale(c);
        }
        Ok(acc)
    }

    /// Frobenius norm of the component of `x` orthogonal to the span.
    pub fn residual(&self, x: &Operator) -> Result<f64> {
        let p = self.project(x)?;
        Ok(x.try_sub(&p)?.frobenius_norm())
    }

    /// Membership with relative tolerance `tol·‖x‖`.
    pub fn contains(&self, x: &Operator, tol: f64) -> Result<bool> {
        Ok(self.residual(x)? <= tol * x.frobenius_norm())
    }

    /// Largest `‖[b_i, b_j]‖_max` over basis pairs, with the offending pair.
    pub fn max_commutator(&self) -> (f64, Option<(usize, usize)>) {
        let mut worst = (0.0, None);
        for i in 0..self.basis.len() {
            for j in (i + 1)..self.basis.len() {
                let n = commutator(&self.basis[i], &self.basis[j]).map(|c| c.max_norm()).unwrap_or(f64::INFINITY);
                if n > worst.0 {
                    worst = (n, Some((i, j)));
                }
            }
        }
        worst
    }

    /// Whether two algebras have the same span (mutual residuals within `tol`).
    pub fn same_span(&self, other: &StarAlgebra, tol: f64) -> Result<bool> {
        if self.dim() != other.dim() {
            return Ok(false);
        }
        for b in &self.basis {
            if !other.contains(b, tol)? {
                return Ok(false);
            }
        }
        for b in &other.basis {
            if !self.contains(b, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Incremental Hermitian Gram–Schmidt builder.
struct SpanBuilder {
    basis: Vec<Operator>,
    tol: f64,
}

impl SpanBuilder {
    /// `scale` is the norm of the candidate the component was split from.
    fn push_hermitian(&mut self, x: Operator, scale: f64) -> Result<bool> {
        let norm = x.frobenius_norm();
        if norm == 0.0 || norm <= self.tol * scale {
            return Ok(false);
        }
        let mut v = x;
        // Two passes of classical Gram–Schmidt keep the basis orthonormal to
        // machine precision.
        for _ in 0..2 {
            for b in &self.basis {
                let c = hs_inner(b, &v)?.re;
                v = v.try_sub(&b.scale(Complex64::new(c, 0.0)))?;
            }
        }
        let rest = v.frobenius_norm();
        if rest <= self.tol * scale {
            return Ok(false);
        }
        let v = v.hermitian_part().scale(Complex64::new(1.0 / rest, 0.0));
        self.basis.push(v);
        Ok(true)
    }

    /// Adds both Hermitian components of an arbitrary operator.
    fn push(&mut self, x: &Operator) -> Result<bool> {
        self.push_scaled(x, x.frobenius_norm())
    }

    /// Like [`push`](Self::push), with the residual measured against `scale`
    /// instead of the norm of `x`. Products of basis elements use the product
    /// of the factor norms, which is 1.
    fn push_scaled(&mut self, x: &Operator, scale: f64) -> Result<bool> {
        let a = self.push_hermitian(x.hermitian_part(), scale)?;
        let b = self.push_hermitian(x.anti_hermitian_part(), scale)?;
        Ok(a || b)
    }
}

/// Smallest unital *-closed span containing `generators`.
pub fn generate_algebra(generators: &[Operator], tol: f64) -> Result<StarAlgebra> {
    let first = generators
        .first()
        .ok_or_else(|| Error::InvalidArgument("at least one generator is required".into()))?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let fact = first.factorization().clone();
    let d = fact.total();
    for g in generators {
        if g.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: g.dim() });
        }
    }

    let mut span = SpanBuilder { basis: Vec::new(), tol };
    span.push(&Operator::identity(&fact))?;
    for g in generators {
        span.push(&g.clone().with_factorization(fact.clone())?)?;
    }

    // Products with at least one factor from the newest layer.
    let mut frontier = 0;
    loop {
        let before = span.basis.len();
        for i in 0..before {
            for j in 0..before {
                if i < frontier && j < frontier {
                    continue;
                }
                let p = span.basis[i].try_mul(&span.basis[j])?;
                span.push_scaled(&p, 1.0)?;
            }
        }
        if span.basis.len() == before {
            break;
        }
        assert!(span.basis.len() <= d * d, "span dimension exceeded d² = {}", d * d);
        frontier = before;
    }

    Ok(StarAlgebra { basis: span.basis, generators: generators.to_vec(), factorization: fact, tol })
}

pub fn is_commutative(alg: &StarAlgebra, tol: f64) -> bool {
    alg.max_commutator().0 <= tol
}

/// One minimal joint eigenspace of a commutative algebra.
#[derive(Debug, Clone)]
pub struct SpectrumPoint {
    pub label: usize,
    /// Eigenvalue of each Hermitian generator (keyed by generator index) on this eigenspace.
    pub value_map: BTreeMap<usize, f64>,
    pub projector: Operator,
    pub rank: usize,
}

impl SpectrumPoint {
    /// Eigenvalue of `x` on this eigenspace, `tr(P·x)/rank`.
    pub fn value_of(&self, x: &Operator) -> Result<Complex64> {
        Ok(hs_inner(&self.projector, x)? / self.rank as f64)
    }
}

pub fn classical_spectrum(alg: &StarAlgebra) -> Result<Vec<SpectrumPoint>> {
    classical_spectrum_with_gap(alg, DEFAULT_DEGENERACY_GAP)
}

/// Simultaneous diagonalization by successive refinement: each basis element
/// is diagonalized inside every current joint eigenspace, splitting it where
/// eigenvalues differ by more than `gap`.
pub fn classical_spectrum_with_gap(alg: &StarAlgebra, gap: f64) -> Result<Vec<SpectrumPoint>> {
    let (worst, _) = alg.max_commutator();
    if worst > NUMERIC_TOL {
        return Err(Error::NotCommutative { norm: worst });
    }
    let d = alg.dim_space();
    let mut blocks: Vec<DMatrix<Complex64>> = vec![DMatrix::identity(d, d)];
    for b in alg.basis() {
        let mut next = Vec::with_capacity(blocks.len());
        for v in &blocks {
            let compressed = v.adjoint() * b.matrix() * v;
            let compressed = (&compressed + compressed.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = linalg::eig_hermitian_matrix(&compressed);
            let mut start = 0;
            let n = eig.values.len();
            while start < n {
                let mut end = start + 1;
                while end < n && eig.values[end] - eig.values[end - 1] <= gap {
                    end += 1;
                }
                next.push(v * eig.vectors.columns(start, end - start));
                start = end;
            }
        }
        blocks = next;
    }

    let mut points = Vec::with_capacity(blocks.len());
    for v in blocks {
        let projector = Operator::new(&v * v.adjoint(), alg.factorization().clone())?;
        let rank = v.ncols();
        let mut value_map = BTreeMap::new();
        for (k, g) in alg.generators().iter().enumerate() {
            if g.is_hermitian() {
                value_map.insert(k, (hs_inner(&projector, g)? / rank as f64).re);
            }
        }
        let first_support = (0..d).find(|&i| projector.matrix()[(i, i)].re > 0.5 / d as f64).unwrap_or(0);
        points.push((value_map, first_support, projector, rank));
    }
    points.sort_by(|a, b| {
        let va: Vec<f64> = a.0.values().copied().collect();
        let vb: Vec<f64> = b.0.values().copied().collect();
        for (x, y) in va.iter().zip(&vb) {
            if (x - y).abs() > gap {
                return x.total_cmp(y);
            }
        }
        a.1.cmp(&b.1)
    });
    Ok(points
        .into_iter()
        .enumerate()
        .map(|(label, (value_map, _, projector, rank))| SpectrumPoint { label, value_map, projector, rank })
        .collect())
}

/// Rebuilds `x` as `Σ_k c_k P_k` from the joint spectrum.
pub fn reconstruct(points: &[SpectrumPoint], x: &Operator) -> Result<Operator> {
    let mut acc = Operator::zeros(x.factorization());
    for p in points {
        acc = &acc + &p.projector.scale(p.value_of(x)?);
    }
    Ok(acc)
}

/// The algebra generated by a single Hermitian pointer observable; equal to
/// the span of its spectral projectors.
pub fn pointer_subalgebra(q: &Operator) -> Result<StarAlgebra> {
    q.require_hermitian()?;
    generate_algebra(std::slice::from_ref(q), DEFAULT_SPAN_TOL)
}

/// Hermitian orthonormal basis of all `d×d` matrices.
fn hermitian_matrix_basis(d: usize) -> Vec<Operator> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(Operator::matrix_unit(d, i, i));
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let eij = Operator::matrix_unit(d, i, j);
            let eji = Operator::matrix_unit(d, j, i);
            out.push((&eij + &eji).scale(Complex64::new(s, 0.0)));
            out.push((&eij - &eji).scale(Complex64::new(0.0, s)));
        }
    }
    out
}

/// All operators of the form `I ⊗ … ⊗ X ⊗ … ⊗ I` with `X` on `slot`.
pub fn local_subalgebra(factorization: &Factorization, slot: usize) -> Result<StarAlgebra> {
    if slot >= factorization.len() {
        return Err(Error::InvalidFactor { index: slot, count: factorization.len() });
    }
    let d = factorization.dims()[slot];
    let rest = (factorization.total() / d) as f64;
    let norm = Complex64::new(1.0 / rest.sqrt(), 0.0);
    let local = hermitian_matrix_basis(d);
    let basis = local
        .iter()
        .map(|x| x.embed(factorization, slot).map(|e| e.scale(norm)))
        .collect::<Result<Vec<_>>>()?;
    Ok(StarAlgebra {
        generators: basis.clone(),
        basis,
        factorization: factorization.clone(),
        tol: DEFAULT_SPAN_TOL,
    })
}

/// The algebra of every operator on the whole space.
pub fn full_algebra(factorization: &Factorization) -> StarAlgebra {
    let d = factorization.total();
    let basis: Vec<Operator> = hermitian_matrix_basis(d)
        .into_iter()
        .map(|b| b.with_factorization(factorization.clone()).expect("same total dimension"))
        .collect();
    StarAlgebra { generators: basis.clone(), basis, factorization: factorization.clone(), tol: DEFAULT_SPAN_TOL }
}

impl StarAlgebra {
    /// The membership tolerance this algebra was generated with.
    pub fn tolerance(&self) -> f64 {
        self.tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma_x, sigma_y, sigma_z, tensor};

    #[test]
    fn identity_generates_one_dimension() {
        let alg = generate_algebra(&[Operator::identity(&Factorization::single(2))], 1e-10).unwrap();
        assert_eq!(alg.dim(), 1);
        assert!(is_commutative(&alg, 1e-12));
    }

    #[test]
    fn pauli_algebras() {
        let z = generate_algebra(&[sigma_z()], 1e-10).unwrap();
        assert_eq!(z.dim(), 2);
        assert!(is_commutative(&z, 1e-12));

        let full = generate_algebra(&[sigma_x(), sigma_z()], 1e-10).unwrap();
        assert_eq!(full.dim(), 4);
        assert!(!is_commutative(&full, 1e-10));
        assert!(full.contains(&sigma_y(), 1e-10).unwrap());
    }

    #[test]
    fn generator_dimension_mismatch() {
        let r = generate_algebra(&[sigma_z(), Operator::diagonal(&[0.0, 1.0, 2.0])], 1e-10);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
        assert!(generate_algebra(&[], 1e-10).is_err());
    }

    #[test]
    fn pointer_spectrum() {
        let q = Operator::diagonal(&[0.0, 1.0, -1.0]);
        let alg = pointer_subalgebra(&q).unwrap();
        assert_eq!(alg.dim(), 3);
        let pts = classical_spectrum(&alg).unwrap();
        assert_eq!(pts.len(), 3);
        let values: Vec<f64> = pts.iter().map(|p| p.value_map[&0]).collect();
        for (v, e) in values.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((v - e).abs() < 1e-12);
        }
        assert!(pts.iter().all(|p| p.rank == 1));
    }

    #[test]
    fn degenerate_eigenvalues_merge() {
        let alg = pointer_subalgebra(&Operator::diagonal(&[1.0, 1.0, 0.0])).unwrap();
        let pts = classical_spectrum(&alg).unwrap();
        let mut ranks: Vec<usize> = pts.iter().map(|p| p.rank).collect();
        ranks.sort();
        assert_eq!(ranks, vec![1, 2]);
    }

    #[test]
    fn identity_spectrum_is_single_point() {
        let i3 = Operator::identity(&Factorization::single(3));
        let pts = classical_spectrum(&generate_algebra(&[i3.clone()], 1e-10).unwrap()).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].projector.matrix() - i3.matrix()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn spectrum_rejects_noncommutative() {
        let full = generate_algebra(&[sigma_x(), sigma_z()], 1e-10).unwrap();
        assert!(matches!(classical_spectrum(&full), Err(Error::NotCommutative { .. })));
    }

    #[test]
    fn pointer_subalgebra_requires_hermitian() {
        let a = Operator::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(pointer_subalgebra(&a), Err(Error::NotHermitian { .. })));
        assert_eq!(pointer_subalgebra(&Operator::identity(&Factorization::single(3))).unwrap().dim(), 1);
        assert_eq!(pointer_subalgebra(&sigma_z()).unwrap().dim(), 2);
    }

    #[test]
    fn local_algebras() {
        let f = Factorization::new([2, 3]).unwrap();
        let o = local_subalgebra(&f, 1).unwrap();
        assert_eq!(o.dim(), 9);
        let s = local_subalgebra(&Factorization::single(2), 0).unwrap();
        assert_eq!(s.dim(), 4);
        assert!(local_subalgebra(&f, 2).is_err());

        // An S⊗O product with nontrivial S part lies outside the O-local algebra.
        let x = tensor(&sigma_x(), &Operator::matrix_unit(3, 1, 2));
        assert!(o.residual(&x).unwrap() > 0.1);
        // The local basis is orthonormal.
        for (i, a) in o.basis().iter().enumerate() {
            for (j, b) in o.basis().iter().enumerate() {
                let ip = hs_inner(a, b).unwrap();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip.re - expected).abs() < 1e-12 && ip.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn full_algebra_dimension() {
        let f = Factorization::new([2, 3]).unwrap();
        assert_eq!(full_algebra(&f).dim(), 36);
    }
}
