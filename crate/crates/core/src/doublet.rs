//! Doublet states and the stochastic outcome simulator.
//!
//! The dynamical component `φ^D` evolves unitarily and is the same in every
//! event. The informational component `φ^I` is the observer's restricted
//! state; after the measurement it is a definite pointer outcome drawn with
//! Born weights, independently per event.
//!
//! # Random numbers
//!
//! Runs use ChaCha8 (`rand_chacha`) seeded with `seed_from_u64(seed)`; the
//! preparation mode selects the stream (`0` pure, `1` mixed) so pure and mixed
//! runs with one seed are independent. A uniform variate is
//! `(next_u64() >> 11) · 2⁻⁵³`. Identical seeds reproduce identical event
//! sequences.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::algebra::{full_algebra, local_subalgebra, pointer_subalgebra};
use crate::dynamics::{
    apply_unitary, evolve_exact, evolve_liouville, interference_observable, premeasurement_hamiltonian,
    MeasurementModel,
};
use crate::error::{Error, Result};
use crate::linalg::{sigma_x, sigma_y, sigma_z, DensityState, Operator, NUMERIC_TOL};
use crate::report::{AlgebraVerdict, ComparisonReport, ReportRow};
use crate::scenario::{Evolution, Mode, Scenario};
use crate::states::{
    breuer_indistinguishable, ensemble_to_density, is_extremal, restrict_classical, ClassicalState, Ensemble,
};

/// Tolerance used for the indistinguishability verdicts in reports.
pub const VERDICT_TOL: f64 = 1e-10;

/// One observed event: the pointer value the observer registers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub event_index: u64,
    /// Pointer eigenvalue `q_i`.
    pub outcome_value: f64,
    /// Pointer basis index `i` of `|O_i⟩`.
    pub outcome_label: usize,
}

#[derive(Debug, Clone)]
pub enum Informational {
    Distribution(ClassicalState),
    Outcome(EventRecord),
}

/// `(φ^D, φ^I)`.
#[derive(Debug, Clone)]
pub struct DoubletState {
    pub dynamical: DensityState,
    pub informational: Informational,
}

impl DoubletState {
    /// Replaces the informational distribution by one outcome drawn from it.
    /// The outcome must be a point of the distribution.
    pub fn collapse(&self, record: EventRecord) -> Result<DoubletState> {
        if let Informational::Distribution(dist) = &self.informational {
            let values: Vec<f64> = dist.points().iter().map(|p| p.value).collect();
            let idx = values
                .iter()
                .position(|v| (v - record.outcome_value).abs() <= 1e-9)
                .ok_or_else(|| Error::InvalidArgument(format!("{} is not a pointer eigenvalue", record.outcome_value)))?;
            debug_assert!(is_extremal(&ClassicalState::delta(&values, idx)?, NUMERIC_TOL));
        }
        Ok(DoubletState { dynamical: self.dynamical.clone(), informational: Informational::Outcome(record) })
    }
}

pub fn run_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform variate on `[0, 1)` with 53 random bits.
pub fn uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse CDF over `weights` in declared order. Zero-weight entries are never
/// chosen; a draw equal to a cumulative boundary goes to the lower index.
fn inverse_cdf(weights: impl Iterator<Item = f64>, u: f64) -> usize {
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (k, w) in weights.enumerate() {
        if w <= 0.0 {
            continue;
        }
        cum += w;
        last_positive = k;
        if u <= cum {
            return k;
        }
    }
    last_positive
}

/// Draws a point index of `distribution`; consumes exactly one `u64`.
pub fn sample_outcome<R: RngCore>(distribution: &ClassicalState, rng: &mut R) -> usize {
    let u = uniform(rng);
    inverse_cdf(distribution.points().iter().map(|p| p.probability), u)
}

/// Aggregated outcome statistics of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStatistics {
    pub mode: Mode,
    pub seed: u64,
    pub samples: u64,
    /// Pointer eigenvalue of each label.
    pub outcome_values: BTreeMap<usize, f64>,
    pub counts: BTreeMap<usize, u64>,
    pub empirical_frequencies: BTreeMap<usize, f64>,
    pub theory_probabilities: BTreeMap<usize, f64>,
    pub empirical_pointer_mean: f64,
    pub theory_pointer_mean: f64,
    /// `|S̄_x|` of the incoming state.
    pub purity_rate: f64,
    /// `B̄` on the dynamical state.
    pub it_expectation: f64,
    /// Pearson statistic of the counts against the theory probabilities.
    pub chi_square: f64,
}

impl RunStatistics {
    /// Labels that can occur or did occur.
    pub fn active_labels(&self) -> Vec<usize> {
        self.counts
            .keys()
            .copied()
            .filter(|l| self.theory_probabilities[l] > 0.0 || self.counts[l] > 0)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_square_p_value(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN)
}

/// Two-sample Pearson test of equal outcome distributions. Bins with zero
/// theory probability in both runs are excluded.
pub fn two_sample_chi_square(a: &RunStatistics, b: &RunStatistics) -> ChiSquareTest {
    let na = a.samples as f64;
    let nb = b.samples as f64;
    let mut statistic = 0.0;
    let mut bins = 0usize;
    for (label, &pa) in &a.theory_probabilities {
        let pb = b.theory_probabilities.get(label).copied().unwrap_or(0.0);
        if pa <= 0.0 && pb <= 0.0 {
            continue;
        }
        let ca = a.counts.get(label).copied().unwrap_or(0) as f64;
        let cb = b.counts.get(label).copied().unwrap_or(0) as f64;
        let pooled = (ca + cb) / (na + nb);
        if pooled == 0.0 {
            continue;
        }
        bins += 1;
        let ea = na * pooled;
        let eb = nb * pooled;
        statistic += (ca - ea).powi(2) / ea + (cb - eb).powi(2) / eb;
    }
    let dof = bins.saturating_sub(1);
    ChiSquareTest { statistic, dof, p_value: chi_square_p_value(statistic, dof) }
}

/// Evolves an initial `S ⊗ O` density through the premeasurement interval.
pub fn premeasure(model: &MeasurementModel, rho: &DensityState, evolution: &Evolution) -> Result<DensityState> {
    match *evolution {
        Evolution::Map => apply_unitary(rho, model.premeasurement()),
        Evolution::Hamiltonian { t0, t1, dt } => {
            let h = premeasurement_hamiltonian(model, t0, t1)?;
            match dt {
                Some(dt) => evolve_liouville(rho, &h, t1 - t0, dt),
                None => evolve_exact(rho, &h, t1 - t0),
            }
        }
    }
}

/// A scenario with its doublet precomputed.
///
/// `φ^D` does not depend on the event, so it and the restricted outcome
/// distribution of every gemenge branch are computed once.
#[derive(Debug, Clone)]
pub struct Experiment {
    scenario: Scenario,
    model: MeasurementModel,
    doublet: DoubletState,
    /// `(weight, restricted outcome distribution)` per gemenge member; a single
    /// branch of weight 1 for the pure preparation.
    branches: Vec<(f64, ClassicalState)>,
    /// Pointer label for each point of the branch distributions.
    point_labels: Vec<usize>,
    point_values: Vec<f64>,
    purity_rate: f64,
    it_expectation: f64,
}

impl Experiment {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let model = scenario.model()?;
        let a = scenario.amplitudes();
        let lifted = model.lifted_pointer();
        let b = interference_observable(&model, 1, 2)?;

        let (dynamical, branches, purity_rate) = match scenario.mode {
            Mode::Pure => {
                let rho_in = model.initial_state(&a)?.density();
                let rho = premeasure(&model, &rho_in, &scenario.evolution)?;
                let dist = restrict_classical(&rho, &lifted)?;
                let sx = model.incoming_state(&a)?.expectation(&sigma_x())?.re;
                (rho, vec![(1.0, dist)], sx.abs())
            }
            Mode::Mixed => {
                let a = crate::dynamics::normalize_amplitudes(&a)?;
                let mut members = Vec::new();
                let mut branches = Vec::new();
                for (k, amp) in a.iter().enumerate() {
                    let mut member_amps = vec![Complex64::new(0.0, 0.0); a.len()];
                    member_amps[k] = Complex64::new(1.0, 0.0);
                    let rho_in = model.initial_state(&member_amps)?.density();
                    let rho = premeasure(&model, &rho_in, &scenario.evolution)?;
                    let weight = amp.norm_sqr();
                    branches.push((weight, restrict_classical(&rho, &lifted)?));
                    members.push((rho.into(), weight));
                }
                let total: f64 = members.iter().map(|(_, w): &(crate::states::Member, f64)| *w).sum();
                for m in &mut members {
                    m.1 /= total;
                }
                for br in &mut branches {
                    br.0 /= total;
                }
                (ensemble_to_density(&Ensemble::new(members)?)?, branches, 0.0)
            }
        };

        let dist = &branches[0].1;
        let point_values: Vec<f64> = dist.points().iter().map(|p| p.value).collect();
        let point_labels = point_values
            .iter()
            .map(|v| {
                model
                    .pointer_values()
                    .iter()
                    .position(|q| (q - v).abs() <= 1e-9)
                    .ok_or_else(|| Error::InvalidState(format!("restricted value {v} is not a pointer eigenvalue")))
            })
            .collect::<Result<Vec<_>>>()?;

        let informational = Informational::Distribution(mix_branches(&branches)?);
        let it_expectation = dynamical.expectation(&b)?.re;
        Ok(Experiment {
            scenario: scenario.clone(),
            model,
            doublet: DoubletState { dynamical, informational },
            branches,
            point_labels,
            point_values,
            purity_rate,
            it_expectation,
        })
    }

    pub fn doublet(&self) -> &DoubletState {
        &self.doublet
    }

    pub fn model(&self) -> &MeasurementModel {
        &self.model
    }

    /// Born probability of each pointer label.
    pub fn theory_probabilities(&self) -> BTreeMap<usize, f64> {
        let mut out: BTreeMap<usize, f64> = (0..self.model.o_dim()).map(|l| (l, 0.0)).collect();
        for (w, dist) in &self.branches {
            for (k, p) in dist.points().iter().enumerate() {
                *out.get_mut(&self.point_labels[k]).expect("label") += w * p.probability;
            }
        }
        out
    }

    fn stream(&self) -> u64 {
        match self.scenario.mode {
            Mode::Pure => 0,
            Mode::Mixed => 1,
        }
    }

    /// The event sequence of a seeded run.
    pub fn events(&self, seed: u64) -> impl Iterator<Item = EventRecord> + '_ {
        let mut rng = run_rng(seed, self.stream());
        (0u64..).map(move |event_index| {
            let branch = if self.branches.len() == 1 {
                0
            } else {
                let u = uniform(&mut rng);
                inverse_cdf(self.branches.iter().map(|(w, _)| *w), u)
            };
            let k = sample_outcome(&self.branches[branch].1, &mut rng);
            EventRecord { event_index, outcome_value: self.point_values[k], outcome_label: self.point_labels[k] }
        })
    }

    pub fn run(&self, n_events: u64, seed: u64) -> Result<RunStatistics> {
        if n_events < 1 {
            return Err(Error::InvalidArgument("at least one event is required".into()));
        }
        let mut counts: BTreeMap<usize, u64> = (0..self.model.o_dim()).map(|l| (l, 0)).collect();
        for ev in self.events(seed).take(n_events as usize) {
            *counts.get_mut(&ev.outcome_label).expect("label") += 1;
        }
        let n = n_events as f64;
        let theory = self.theory_probabilities();
        let values: BTreeMap<usize, f64> =
            self.model.pointer_values().iter().copied().enumerate().collect();
        let freqs: BTreeMap<usize, f64> = counts.iter().map(|(&l, &c)| (l, c as f64 / n)).collect();
        let empirical_pointer_mean = freqs.iter().map(|(l, f)| f * values[l]).sum();
        let theory_pointer_mean = theory.iter().map(|(l, p)| p * values[l]).sum();
        let chi_square = theory
            .iter()
            .filter(|(_, &p)| p > 0.0)
            .map(|(l, &p)| (counts[l] as f64 - n * p).powi(2) / (n * p))
            .sum();
        Ok(RunStatistics {
            mode: self.scenario.mode,
            seed,
            samples: n_events,
            outcome_values: values,
            counts,
            empirical_frequencies: freqs,
            theory_probabilities: theory,
            empirical_pointer_mean,
            theory_pointer_mean,
            purity_rate: self.purity_rate,
            it_expectation: self.it_expectation,
            chi_square,
        })
    }
}

fn mix_branches(branches: &[(f64, ClassicalState)]) -> Result<ClassicalState> {
    if branches.len() == 1 {
        return Ok(branches[0].1.clone());
    }
    let mut points = branches[0].1.points().to_vec();
    for p in &mut points {
        p.probability = 0.0;
    }
    for (w, dist) in branches {
        for (k, p) in dist.points().iter().enumerate() {
            points[k].probability += w * p.probability;
        }
    }
    ClassicalState::new(points)
}

pub fn run_experiment(scenario: &Scenario, n_events: u64, seed: u64) -> Result<RunStatistics> {
    if n_events < 1 {
        return Err(Error::InvalidArgument("at least one event is required".into()));
    }
    Experiment::new(scenario)?.run(n_events, seed)
}

/// Expectations for the pure preparation and the incoming mixture with the
/// same `|a_i|`, before and after premeasurement.
pub fn compare_pure_mixed(scenario: &Scenario) -> Result<ComparisonReport> {
    let pure = Experiment::new(&scenario.with_mode(Mode::Pure))?;
    let mixed = Experiment::new(&scenario.with_mode(Mode::Mixed))?;
    let model = pure.model().clone();
    let a = scenario.amplitudes();

    let psi_s = model.incoming_state(&a)?.density();
    let a_norm = crate::dynamics::normalize_amplitudes(&a)?;
    let rho_s_mixed = DensityState::new(Operator::diagonal(
        &a_norm.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>(),
    ))?;

    let mut rows = Vec::new();
    for (name, op) in [("S_x_incoming", sigma_x()), ("S_y_incoming", sigma_y()), ("S_z_incoming", sigma_z())] {
        rows.push(ReportRow::new(name, psi_s.expectation(&op)?.re, rho_s_mixed.expectation(&op)?.re));
    }

    let rho_p = &pure.doublet().dynamical;
    let rho_m = &mixed.doublet().dynamical;
    let q = model.lifted_pointer();
    let b = interference_observable(&model, 1, 2)?;
    rows.push(ReportRow::new("Q_O_final", rho_p.expectation(&q)?.re, rho_m.expectation(&q)?.re));
    rows.push(ReportRow::new("B_expectation", rho_p.expectation(&b)?.re, rho_m.expectation(&b)?.re));

    let dp = restrict_classical(rho_p, &q)?;
    let dm = restrict_classical(rho_m, &q)?;
    for (label, &value) in model.pointer_values().iter().enumerate() {
        rows.push(ReportRow::new(
            &format!("P_O{label}_final"),
            dp.probability_of(value),
            dm.probability_of(value),
        ));
    }

    let fact = model.factorization();
    let algebras = [
        ("U_O", pointer_subalgebra(&q)?),
        ("U_R", local_subalgebra(&fact, 1)?),
        ("full_MS", full_algebra(&fact)),
    ];
    let mut verdicts = Vec::new();
    for (name, alg) in &algebras {
        let v = breuer_indistinguishable(rho_p, rho_m, alg, VERDICT_TOL)?;
        verdicts.push(AlgebraVerdict {
            algebra: name.to_string(),
            indistinguishable: v.indistinguishable,
            max_gap: v.max_gap,
            witness_gap: v.witness_gap,
        });
    }
    Ok(ComparisonReport { title: "compare".into(), notes: Vec::new(), rows, verdicts })
}

/// The external observer's unitary description together with one outcome the
/// internal observer registers, taken from the same seeded run.
pub fn wigner_friend_views(scenario: &Scenario, seed: u64) -> Result<(DensityState, EventRecord)> {
    if scenario.mode != Mode::Pure {
        return Err(Error::InvalidArgument("the two-observer views need the pure preparation".into()));
    }
    let exp = Experiment::new(scenario)?;
    let record = exp.events(seed).next().expect("event stream is infinite");
    Ok((exp.doublet().dynamical.clone(), record))
}
