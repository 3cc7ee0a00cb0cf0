//! Ensembles, restricted states and the indistinguishability check.

use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{classical_spectrum, pointer_subalgebra, StarAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, partial_trace, DensityState, Operator, PureState, CONSTRUCTION_TOL, NUMERIC_TOL};

/// A member of a gemenge.
#[derive(Debug, Clone)]
pub enum Member {
    Pure(PureState),
    Mixed(DensityState),
}

impl Member {
    pub fn density(&self) -> DensityState {
        match self {
            Member::Pure(p) => p.density(),
            Member::Mixed(d) => d.clone(),
        }
    }

    fn dims(&self) -> &[usize] {
        match self {
            Member::Pure(p) => p.factorization().dims(),
            Member::Mixed(d) => d.factorization().dims(),
        }
    }
}

impl From<PureState> for Member {
    fn from(p: PureState) -> Self {
        Member::Pure(p)
    }
}

impl From<DensityState> for Member {
    fn from(d: DensityState) -> Self {
        Member::Mixed(d)
    }
}

/// An explicit table of states and their probabilities.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<(Member, f64)>,
}

impl Ensemble {
    pub fn new(members: Vec<(Member, f64)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("ensemble has no members".into()));
        }
        if let Some((_, w)) = members.iter().find(|(_, w)| !(*w >= 0.0)) {
            return Err(Error::InvalidArgument(format!("negative ensemble weight {w}")));
        }
        let total: f64 = members.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidArgument(format!("ensemble weights sum to {total}, not 1")));
        }
        Ok(Ensemble { members })
    }

    pub fn members(&self) -> &[(Member, f64)] {
        &self.members
    }

    pub fn weights(&self) -> Vec<f64> {
        self.members.iter().map(|(_, w)| *w).collect()
    }
}

/// `Σ_l P_l ρ_l`.
pub fn ensemble_to_density(w: &Ensemble) -> Result<DensityState> {
    let first = &w.members[0].0;
    let fact = match first {
        Member::Pure(p) => p.factorization().clone(),
        Member::Mixed(d) => d.factorization().clone(),
    };
    let mut acc = Operator::zeros(&fact);
    for (m, weight) in &w.members {
        if m.dims() != fact.dims() {
            return Err(Error::FactorizationMismatch(fact.dims().to_vec(), m.dims().to_vec()));
        }
        acc = &acc + &m.density().operator().scale(Complex64::new(*weight, 0.0));
    }
    DensityState::new(acc)
}

/// A point of a classical distribution over pointer eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalPoint {
    pub value: f64,
    pub probability: f64,
}

/// A probability distribution on the joint spectrum of a commutative algebra.
#[derive(Debug, Clone)]
pub struct ClassicalState {
    points: Vec<ClassicalPoint>,
    source: Option<Arc<StarAlgebra>>,
}

impl ClassicalState {
    pub fn new(points: Vec<ClassicalPoint>) -> Result<Self> {
        Self::with_source(points, None)
    }

    fn with_source(points: Vec<ClassicalPoint>, source: Option<Arc<StarAlgebra>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidState("classical state has no points".into()));
        }
        if let Some(p) = points.iter().find(|p| !(p.probability >= 0.0)) {
            return Err(Error::InvalidState(format!("negative probability {}", p.probability)));
        }
        let total: f64 = points.iter().map(|p| p.probability).sum();
        if (total - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!("probabilities sum to {total}, not 1")));
        }
        Ok(ClassicalState { points, source })
    }

    /// Delta distribution at point `index` of `values`.
    pub fn delta(values: &[f64], index: usize) -> Result<Self> {
        if index >= values.len() {
            return Err(Error::InvalidArgument(format!("index {index} out of range")));
        }
        let points = values
            .iter()
            .enumerate()
            .map(|(k, &v)| ClassicalPoint { value: v, probability: if k == index { 1.0 } else { 0.0 } })
            .collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[ClassicalPoint] {
        &self.points
    }

    pub fn source_algebra(&self) -> Option<&StarAlgebra> {
        self.source.as_deref()
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().map(|p| p.value * p.probability).sum()
    }

    /// Probability of the point whose value is within `1e-9` of `value`.
    pub fn probability_of(&self, value: f64) -> f64 {
        self.points.iter().filter(|p| (p.value - value).abs() <= 1e-9).map(|p| p.probability).sum()
    }
}

/// Expectations of a global state on an orthonormal algebra basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedState {
    pub coefficients: Vec<Complex64>,
}

impl RestrictedState {
    /// `⟨φ; A⟩` for `A` in the algebra; operators outside the span are rejected.
    pub fn expectation(&self, alg: &StarAlgebra, a: &Operator) -> Result<Complex64> {
        if !alg.contains(a, alg.tolerance().max(NUMERIC_TOL))? {
            return Err(Error::InvalidArgument("operator is not an element of the algebra".into()));
        }
        let coords = alg.coordinates(a)?;
        Ok(coords.iter().zip(&self.coefficients).map(|(x, c)| x * c).sum())
    }

    /// Largest coefficientwise distance to another restriction on the same algebra.
    pub fn max_difference(&self, other: &RestrictedState) -> f64 {
        self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `c_k = tr(ρ·b_k)` for each basis element of `alg`.
pub fn restrict(rho: &DensityState, alg: &StarAlgebra) -> Result<RestrictedState> {
    if rho.dim() != alg.dim_space() {
        return Err(Error::DimensionMismatch { expected: alg.dim_space(), found: rho.dim() });
    }
    let coefficients = alg.basis().iter().map(|b| rho.expectation(b)).collect::<Result<Vec<_>>>()?;
    Ok(RestrictedState { coefficients })
}

/// Outcome distribution `p_i = tr(ρ·P_i)` over the spectral projectors of a
/// pointer observable already lifted to the space of `rho`.
///
/// Points are ordered by ascending pointer eigenvalue.
pub fn restrict_classical(rho: &DensityState, pointer: &Operator) -> Result<ClassicalState> {
    if rho.dim() != pointer.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: pointer.dim() });
    }
    let alg = pointer_subalgebra(pointer)?;
    let spectrum = classical_spectrum(&alg)?;
    let mut points = Vec::with_capacity(spectrum.len());
    for sp in &spectrum {
        let mut p = rho.expectation(&sp.projector)?.re;
        if p < 0.0 && p >= -NUMERIC_TOL {
            p = 0.0;
        }
        points.push(ClassicalPoint { value: sp.value_map[&0], probability: p });
    }
    ClassicalState::with_source(points, Some(Arc::new(alg)))
}

/// True iff exactly one probability is at least `1 − tol`.
pub fn is_extremal(c: &ClassicalState, tol: f64) -> bool {
    c.points.iter().filter(|p| p.probability >= 1.0 - tol).count() == 1
}

/// Outcome of comparing two states on an algebra.
#[derive(Debug, Clone)]
pub struct BreuerVerdict {
    pub indistinguishable: bool,
    /// `max_k |tr((ρ1 − ρ2)·b_k)|`.
    pub max_gap: f64,
    /// Projection of `ρ1 − ρ2` onto the algebra, scaled to unit operator norm.
    pub witness: Option<Operator>,
    /// `tr((ρ1 − ρ2)·witness)`.
    pub witness_gap: f64,
}

pub fn breuer_indistinguishable(
    rho1: &DensityState,
    rho2: &DensityState,
    alg: &StarAlgebra,
    tol: f64,
) -> Result<BreuerVerdict> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch { expected: rho1.dim(), found: rho2.dim() });
    }
    let delta = rho1.operator().try_sub(rho2.operator())?;
    let r = restrict(rho1, alg)?;
    let s = restrict(rho2, alg)?;
    let max_gap = r.max_difference(&s);
    if max_gap <= tol {
        return Ok(BreuerVerdict { indistinguishable: true, max_gap, witness: None, witness_gap: 0.0 });
    }
    let projected = alg.project(&delta)?.hermitian_part();
    let eig = eig_hermitian(&projected)?;
    let op_norm = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let witness = projected.scale(Complex64::new(1.0 / op_norm, 0.0));
    let witness_gap = rho1.expectation(&witness)?.re - rho2.expectation(&witness)?.re;
    Ok(BreuerVerdict { indistinguishable: false, max_gap, witness: Some(witness), witness_gap })
}

/// The phenomenological individual restriction: the partial trace onto the
/// kept factors. Exposed for comparison only; sampling never uses it.
pub fn breuer_restricted_state(rho: &DensityState, keep: &[usize]) -> Result<DensityState> {
    partial_trace(rho, keep)
}
