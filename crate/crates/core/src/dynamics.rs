//! Premeasurement, Liouville evolution, interference-term observables and the
//! system–pointer–environment triple.
//!
//! Units have `ħ = 1`; densities evolve as `dρ/dt = −i[H, ρ]`.
//!
//! Outcome indices are 1-based and name both the system eigenstate `|s_i⟩`
//! (stored at S index `i − 1`) and the pointer state `|O_i⟩` (O index `i`);
//! `|O_0⟩` is the pointer's rest state.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, partial_trace, sigma_z, DensityState, Factorization, Operator, PureState, NUMERIC_TOL, ONE, ZERO,
};

/// Amplitude norms within this band of 1 are silently renormalized.
pub const AMPLITUDE_NORM_TOL: f64 = 1e-6;

/// Normalizes incoming amplitudes, rejecting norms farther than
/// [`AMPLITUDE_NORM_TOL`] from 1.
pub fn normalize_amplitudes(a: &[Complex64]) -> Result<Vec<Complex64>> {
    let norm_sq: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    if !((norm_sq - 1.0).abs() <= AMPLITUDE_NORM_TOL) {
        return Err(Error::InvalidArgument(format!(
            "amplitudes have squared norm {norm_sq}, expected 1 within {AMPLITUDE_NORM_TOL:e}"
        )));
    }
    let norm = norm_sq.sqrt();
    Ok(a.iter().map(|z| z / norm).collect())
}

/// The system–observer measurement set-up.
#[derive(Debug, Clone)]
pub struct MeasurementModel {
    s_dim: usize,
    o_dim: usize,
    pointer_values: Vec<f64>,
    pointer: Operator,
    s_observable: Operator,
    premeasurement: Operator,
}

impl MeasurementModel {
    /// Two-level system measured in the `S_z` basis by a pointer with the
    /// given eigenvalues `(q₀, q₁, …)`.
    pub fn new(pointer_values: &[f64]) -> Result<Self> {
        Self::with_observable(sigma_z(), pointer_values)
    }

    /// A system of dimension `s_observable.dim()`, measured in the
    /// computational basis, which must diagonalize `s_observable`.
    pub fn with_observable(s_observable: Operator, pointer_values: &[f64]) -> Result<Self> {
        s_observable.require_hermitian()?;
        let s_dim = s_observable.dim();
        let o_dim = pointer_values.len();
        for i in 0..pointer_values.len() {
            for j in (i + 1)..pointer_values.len() {
                if (pointer_values[i] - pointer_values[j]).abs() <= 1e-8 {
                    return Err(Error::InvalidArgument(format!(
                        "pointer eigenvalues must be distinct, got {pointer_values:?}"
                    )));
                }
            }
        }
        let premeasurement = build_premeasurement(s_dim, o_dim)?;
        Ok(MeasurementModel {
            s_dim,
            o_dim,
            pointer_values: pointer_values.to_vec(),
            pointer: Operator::diagonal(pointer_values),
            s_observable,
            premeasurement,
        })
    }

    pub fn s_dim(&self) -> usize {
        self.s_dim
    }

    pub fn o_dim(&self) -> usize {
        self.o_dim
    }

    pub fn outcomes(&self) -> usize {
        self.s_dim
    }

    /// Pointer eigenvalue `q_i` of `|O_i⟩`, indexed from the rest state.
    pub fn pointer_values(&self) -> &[f64] {
        &self.pointer_values
    }

    pub fn pointer(&self) -> &Operator {
        &self.pointer
    }

    pub fn s_observable(&self) -> &Operator {
        &self.s_observable
    }

    pub fn premeasurement(&self) -> &Operator {
        &self.premeasurement
    }

    pub fn factorization(&self) -> Factorization {
        Factorization::new([self.s_dim, self.o_dim]).expect("positive dims")
    }

    /// `I ⊗ Q_O`.
    pub fn lifted_pointer(&self) -> Operator {
        self.pointer.embed(&self.factorization(), 1).expect("pointer fits O slot")
    }

    /// `Q ⊗ I`.
    pub fn lifted_s_observable(&self) -> Operator {
        self.s_observable.embed(&self.factorization(), 0).expect("observable fits S slot")
    }

    fn check_amplitudes(&self, a: &[Complex64]) -> Result<Vec<Complex64>> {
        if a.len() != self.s_dim {
            return Err(Error::DimensionMismatch { expected: self.s_dim, found: a.len() });
        }
        normalize_amplitudes(a)
    }

    fn check_outcome(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.s_dim {
            return Err(Error::InvalidArgument(format!("outcome index {i} outside 1..={}", self.s_dim)));
        }
        Ok(())
    }

    /// `ψ_s = Σ a_i |s_i⟩`.
    pub fn incoming_state(&self, a: &[Complex64]) -> Result<PureState> {
        let a = self.check_amplitudes(a)?;
        PureState::from_slice(&a)
    }

    /// `ψ_s ⊗ |O₀⟩`.
    pub fn initial_state(&self, a: &[Complex64]) -> Result<PureState> {
        Ok(self.incoming_state(a)?.tensor(&PureState::basis(self.o_dim, 0)?))
    }

    /// `Σ a_i |s_i⟩|O_i⟩`.
    pub fn final_pure_state(&self, a: &[Complex64]) -> Result<PureState> {
        self.premeasurement.apply(&self.initial_state(a)?)
    }

    /// `|s_i⟩|O_i⟩`.
    pub fn outcome_state(&self, i: usize) -> Result<PureState> {
        self.check_outcome(i)?;
        Ok(PureState::basis(self.s_dim, i - 1)?.tensor(&PureState::basis(self.o_dim, i)?))
    }
}

/// Permutation unitary `|s_i, O₀⟩ ↔ |s_i, O_i⟩`, identity elsewhere.
pub fn build_premeasurement(s_dim: usize, o_dim: usize) -> Result<Operator> {
    if s_dim == 0 || o_dim < s_dim + 1 {
        return Err(Error::InvalidArgument(format!(
            "pointer dimension {o_dim} must be at least system dimension {s_dim} + 1"
        )));
    }
    let fact = Factorization::new([s_dim, o_dim])?;
    let n = fact.total();
    let mut perm: Vec<usize> = (0..n).collect();
    for s in 0..s_dim {
        let rest = fact.compose(&[s, 0]);
        let excited = fact.compose(&[s, s + 1]);
        perm.swap(rest, excited);
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (src, &dst) in perm.iter().enumerate() {
        m[(dst, src)] = ONE;
    }
    Operator::new(m, fact)
}

/// Hermitian generator `H` with `exp(−iH·duration) = u` for a unitary that
/// is also Hermitian (spectrum ⊂ {−1, +1}), such as the premeasurement map.
pub fn unitary_generator(u: &Operator, duration: f64) -> Result<Operator> {
    if !(duration > 0.0) {
        return Err(Error::InvalidArgument(format!("duration must be positive, got {duration}")));
    }
    let eig = eig_hermitian(u)?;
    if let Some(v) = eig.values.iter().find(|v| (v.abs() - 1.0).abs() > NUMERIC_TOL) {
        return Err(Error::InvalidArgument(format!("eigenvalue {v} is not ±1; operator is not unitary")));
    }
    let angle = std::f64::consts::PI / duration;
    let m = eig.map_spectrum(|v| if v < 0.0 { Complex64::new(angle, 0.0) } else { ZERO });
    Operator::new(m, u.factorization().clone()).map(|h| h.hermitian_part())
}

/// Generator of the premeasurement map acting over `[t0, t1]`.
pub fn premeasurement_hamiltonian(model: &MeasurementModel, t0: f64, t1: f64) -> Result<Operator> {
    unitary_generator(model.premeasurement(), t1 - t0)
}

fn liouville_rhs(h: &DMatrix<Complex64>, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (h * rho - rho * h) * Complex64::new(0.0, -1.0)
}

fn check_evolution_args(rho: &DensityState, h: &Operator, t: f64) -> Result<()> {
    h.require_hermitian()?;
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: h.dim() });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("evolution time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Fixed-step classical Runge–Kutta integration of `dρ/dt = −i[H, ρ]`.
///
/// The step is `t/n` with `n = ⌈t/dt⌉`, so the result lands exactly at `t`.
pub fn evolve_liouville(rho: &DensityState, h: &Operator, t: f64, dt: f64) -> Result<DensityState> {
    check_evolution_args(rho, h, t)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {dt}")));
    }
    let steps = ((t / dt) - 1e-9).ceil().max(0.0) as usize;
    let hm = h.matrix();
    let mut r = rho.matrix().clone();
    if steps > 0 {
        let step = t / steps as f64;
        let half = Complex64::new(step / 2.0, 0.0);
        let full = Complex64::new(step, 0.0);
        let sixth = Complex64::new(step / 6.0, 0.0);
        let two = Complex64::new(2.0, 0.0);
        for _ in 0..steps {
            let k1 = liouville_rhs(hm, &r);
            let k2 = liouville_rhs(hm, &(&r + &k1 * half));
            let k3 = liouville_rhs(hm, &(&r + &k2 * half));
            let k4 = liouville_rhs(hm, &(&r + &k3 * full));
            r += (k1 + k2 * two + k3 * two + k4) * sixth;
        }
    }
    Ok(DensityState::from_evolved(Operator::new(r, rho.factorization().clone())?))
}

/// `e^{−iHt}` via the spectral decomposition of `H`.
pub fn propagator(h: &Operator, t: f64) -> Result<Operator> {
    let eig = eig_hermitian(h)?;
    let u = eig.map_spectrum(|lambda| Complex64::new(0.0, -lambda * t).exp());
    Operator::new(u, h.factorization().clone())
}

/// Reference evolution `ρ ↦ e^{−iHt} ρ e^{iHt}`.
pub fn evolve_exact(rho: &DensityState, h: &Operator, t: f64) -> Result<DensityState> {
    check_evolution_args(rho, h, t)?;
    let u = propagator(h, t)?;
    let m = u.matrix() * rho.matrix() * u.matrix().adjoint();
    Ok(DensityState::from_evolved(Operator::new(m, rho.factorization().clone())?))
}

/// Applies a unitary map to a density: `U ρ U†`.
pub fn apply_unitary(rho: &DensityState, u: &Operator) -> Result<DensityState> {
    if rho.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: u.dim() });
    }
    let m = u.matrix() * rho.matrix() * u.matrix().adjoint();
    Ok(DensityState::from_evolved(Operator::new(m, rho.factorization().clone())?))
}

/// `B = |s_i⟩⟨s_j| ⊗ |O_i⟩⟨O_j| + h.c.`
pub fn interference_observable(model: &MeasurementModel, i: usize, j: usize) -> Result<Operator> {
    model.check_outcome(i)?;
    model.check_outcome(j)?;
    if i == j {
        return Err(Error::InvalidArgument("interference observable needs two distinct outcomes".into()));
    }
    let s_part = Operator::matrix_unit(model.s_dim, i - 1, j - 1);
    let o_part = Operator::matrix_unit(model.o_dim, i, j);
    let half = crate::linalg::tensor(&s_part, &o_part);
    Ok(&half + &half.adjoint())
}

/// `Σ |a_i|² |s_i O_i⟩⟨s_i O_i|`.
pub fn mixed_final_state(a: &[Complex64], model: &MeasurementModel) -> Result<DensityState> {
    let a = model.check_amplitudes(a)?;
    let fact = model.factorization();
    let mut m = DMatrix::<Complex64>::zeros(fact.total(), fact.total());
    for (k, amp) in a.iter().enumerate() {
        let idx = fact.compose(&[k, k + 1]);
        m[(idx, idx)] = amp * amp.conj();
    }
    DensityState::new(Operator::new(m, fact)?)
}

/// `|Ψ_MS⟩⟨Ψ_MS|` after premeasurement.
pub fn pure_final_state(a: &[Complex64], model: &MeasurementModel) -> Result<DensityState> {
    Ok(model.final_pure_state(a)?.density())
}

/// Environment states with `⟨E₁|E₁⟩ = ⟨E₂|E₂⟩ = 1` and `⟨E₂|E₁⟩ = κ·e^{iφ}`.
pub fn environment_pair(dim: usize, overlap: f64, phase: f64) -> Result<Vec<PureState>> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("environment dimension must be >= 2, got {dim}")));
    }
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::InvalidArgument(format!("overlap κ must lie in [0, 1], got {overlap}")));
    }
    let e1 = PureState::basis(dim, 0)?;
    let mut v = vec![ZERO; dim];
    v[0] = Complex64::from_polar(overlap, -phase);
    v[1] = Complex64::new((1.0 - overlap * overlap).max(0.0).sqrt(), 0.0);
    let e2 = PureState::normalized(nalgebra::DVector::from_vec(v), Factorization::single(dim))?;
    Ok(vec![e1, e2])
}

/// `Σ a_i |s_i⟩|O_i⟩|E_i⟩` on `S ⊗ O ⊗ E`.
pub fn decohere_triple(model: &MeasurementModel, a: &[Complex64], env: &[PureState]) -> Result<PureState> {
    let a = model.check_amplitudes(a)?;
    if env.len() != a.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: env.len() });
    }
    let e_dim = env[0].dim();
    for e in env {
        if e.dim() != e_dim {
            return Err(Error::DimensionMismatch { expected: e_dim, found: e.dim() });
        }
        let n = e.amplitudes().norm();
        if (n - 1.0).abs() > crate::linalg::CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!("environment vector has norm {n}")));
        }
    }
    let fact = model.factorization().concat(&Factorization::single(e_dim));
    let mut v = nalgebra::DVector::<Complex64>::zeros(fact.total());
    for (k, amp) in a.iter().enumerate() {
        let branch = model.outcome_state(k + 1)?.tensor(&env[k]);
        v += branch.amplitudes() * *amp;
    }
    PureState::new(v, fact)
}

/// Reduced `S ⊗ O` state of a triple.
pub fn trace_environment(triple: &PureState) -> Result<DensityState> {
    partial_trace(&triple.density(), &[0, 1])
}

/// Matrix element `⟨s_i O_i| ρ |s_j O_j⟩` of an `S ⊗ O` density.
pub fn so_coherence(rho: &DensityState, model: &MeasurementModel, i: usize, j: usize) -> Result<Complex64> {
    model.check_outcome(i)?;
    model.check_outcome(j)?;
    if rho.dim() != model.factorization().total() {
        return Err(Error::DimensionMismatch { expected: model.factorization().total(), found: rho.dim() });
    }
    let f = model.factorization();
    Ok(rho.matrix()[(f.compose(&[i - 1, i]), f.compose(&[j - 1, j]))])
}
