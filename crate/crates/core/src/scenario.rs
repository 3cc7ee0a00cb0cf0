//! Declarative scenario documents and command dispatch.
//!
//! A scenario is a line-oriented `key = value` document; `#` starts a comment.
//!
//! | key                   | value                              | default      |
//! |-----------------------|------------------------------------|--------------|
//! | `mode`                | `pure` \| `mixed`                  | `pure`       |
//! | `a1`, `a2`            | complex, written `re + imi`        | required     |
//! | `pointer_eigenvalues` | three comma-separated reals        | `0, 1, -1`   |
//! | `env_dim`             | integer ≥ 2                        | `2`          |
//! | `env_overlap`         | κ in `[0, 1]`                      | none         |
//! | `env_phase`           | real (radians)                     | `0`          |
//! | `samples`             | integer ≥ 1                        | `100000`     |
//! | `seed`                | unsigned 64-bit integer            | `1`          |
//! | `evolution`           | `map` \| `hamiltonian`             | `map`        |
//! | `t0`, `t1`            | interaction window                 | `0`, `1`     |
//! | `dt`                  | integrator step; exact if absent   | none         |
//! | `command`             | `compare` \| `simulate` \| `restrict` \| `wigner` \| `triple` | `compare` |
//!
//! Setting any `env_*` key enables the environment.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::doublet::{compare_pure_mixed, run_experiment, wigner_friend_views, Experiment};
use crate::dynamics::{
    decohere_triple, environment_pair, interference_observable, mixed_final_state, so_coherence,
    trace_environment, MeasurementModel, AMPLITUDE_NORM_TOL,
};
use crate::error::{Error, Result};
use crate::report::{AlgebraVerdict, ComparisonReport, Report, ReportRow, WignerReport};
use crate::states::{breuer_indistinguishable, restrict_classical};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Pure,
    Mixed,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Pure => "pure",
            Mode::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evolution {
    /// Instantaneous premeasurement unitary.
    Map,
    /// Generated by a constant interaction Hamiltonian over `[t0, t1]`;
    /// integrated with step `dt` when given, otherwise propagated exactly.
    Hamiltonian { t0: f64, t1: f64, dt: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    pub dim: usize,
    /// κ = |⟨E₂|E₁⟩|.
    pub overlap: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Compare,
    Simulate,
    Restrict,
    Wigner,
    Triple,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mode: Mode,
    pub a1: Complex64,
    pub a2: Complex64,
    pub pointer_eigenvalues: [f64; 3],
    pub environment: Option<Environment>,
    pub samples: u64,
    pub seed: u64,
    pub evolution: Evolution,
    pub command: Command,
}

impl Default for Scenario {
    /// The z-symmetric pure compare scenario.
    fn default() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Scenario {
            mode: Mode::Pure,
            a1: h,
            a2: h,
            pointer_eigenvalues: [0.0, 1.0, -1.0],
            environment: None,
            samples: 100_000,
            seed: 1,
            evolution: Evolution::Map,
            command: Command::Compare,
        }
    }
}

impl Scenario {
    pub fn with_amplitudes(mut self, a1: Complex64, a2: Complex64) -> Self {
        self.a1 = a1;
        self.a2 = a2;
        self
    }

    pub fn with_mode(&self, mode: Mode) -> Scenario {
        Scenario { mode, ..self.clone() }
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        vec![self.a1, self.a2]
    }

    /// `(|a₁|², |a₂|²)`.
    pub fn probabilities(&self) -> (f64, f64) {
        (self.a1.norm_sqr(), self.a2.norm_sqr())
    }

    pub fn model(&self) -> Result<MeasurementModel> {
        MeasurementModel::new(&self.pointer_eigenvalues)
    }
}

const KEYS: &[&str] = &[
    "mode",
    "a1",
    "a2",
    "pointer_eigenvalues",
    "env_dim",
    "env_overlap",
    "env_phase",
    "samples",
    "seed",
    "evolution",
    "t0",
    "t1",
    "dt",
    "command",
];

/// Parses `re + imi`, `re - imi`, a bare real, or a bare imaginary.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let parse_im = |t: &str| match t {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        t => t.parse::<f64>().ok(),
    };
    match split {
        Some(k) => Some(Complex64::new(body[..k].parse().ok()?, parse_im(&body[k..])?)),
        None => Some(Complex64::new(0.0, parse_im(body)?)),
    }
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse::<T>().map_err(|_| perr(line, format!("invalid value {value:?} for {key}")))
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut entries: HashMap<&str, (usize, String)> = HashMap::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| perr(line, format!("expected `key = value`, found {content:?}")))?;
        let key = key.trim();
        let value = value.trim();
        let known = KEYS.iter().find(|k| **k == key).ok_or_else(|| perr(line, format!("unknown key {key:?}")))?;
        if value.is_empty() {
            return Err(perr(line, format!("missing value for {key}")));
        }
        if let Some((prev, _)) = entries.insert(known, (line, value.to_string())) {
            return Err(perr(line, format!("duplicate key {key} (first set on line {prev})")));
        }
    }
    let get = |k: &str| entries.get(k).map(|(l, v)| (*l, v.as_str()));
    let mut s = Scenario::default();

    if let Some((l, v)) = get("mode") {
        s.mode = match v {
            "pure" => Mode::Pure,
            "mixed" => Mode::Mixed,
            _ => return Err(perr(l, format!("mode must be pure or mixed, found {v:?}"))),
        };
    }
    let amp = |key: &str| -> Result<(usize, Complex64)> {
        let (l, v) = get(key).ok_or_else(|| perr(last_line + 1, format!("missing required key {key}")))?;
        let z = parse_complex(v).ok_or_else(|| perr(l, format!("invalid complex number {v:?} for {key}")))?;
        Ok((l, z))
    };
    let (l1, a1) = amp("a1")?;
    let (l2, a2) = amp("a2")?;
    let norm_sq = a1.norm_sqr() + a2.norm_sqr();
    if !((norm_sq - 1.0).abs() <= AMPLITUDE_NORM_TOL) {
        return Err(perr(
            l1.max(l2),
            format!("|a1|² + |a2|² = {norm_sq}, must equal 1 within {AMPLITUDE_NORM_TOL:e}"),
        ));
    }
    let norm = norm_sq.sqrt();
    s.a1 = a1 / norm;
    s.a2 = a2 / norm;

    if let Some((l, v)) = get("pointer_eigenvalues") {
        let vals = v
            .split(',')
            .map(|t| parse_num::<f64>(l, "pointer_eigenvalues", t.trim()))
            .collect::<Result<Vec<_>>>()?;
        let arr: [f64; 3] =
            vals.try_into().map_err(|_| perr(l, "pointer_eigenvalues needs exactly three values"))?;
        MeasurementModel::new(&arr).map_err(|e| perr(l, e.to_string()))?;
        s.pointer_eigenvalues = arr;
    }

    let env_keys = ["env_dim", "env_overlap", "env_phase"];
    if env_keys.iter().any(|k| get(k).is_some()) {
        let mut env = Environment { dim: 2, overlap: 0.0, phase: 0.0 };
        if let Some((l, v)) = get("env_dim") {
            env.dim = parse_num(l, "env_dim", v)?;
            if env.dim < 2 {
                return Err(perr(l, "env_dim must be at least 2"));
            }
        }
        if let Some((l, v)) = get("env_overlap") {
            env.overlap = parse_num(l, "env_overlap", v)?;
            if !(0.0..=1.0).contains(&env.overlap) {
                return Err(perr(l, format!("env_overlap must lie in [0, 1], found {}", env.overlap)));
            }
        }
        if let Some((l, v)) = get("env_phase") {
            env.phase = parse_num(l, "env_phase", v)?;
            if !env.phase.is_finite() {
                return Err(perr(l, "env_phase must be finite"));
            }
        }
        s.environment = Some(env);
    }

    if let Some((l, v)) = get("samples") {
        s.samples = parse_num(l, "samples", v)?;
        if s.samples < 1 {
            return Err(perr(l, "samples must be at least 1"));
        }
    }
    if let Some((l, v)) = get("seed") {
        s.seed = parse_num(l, "seed", v)?;
    }

    let evolution_line = get("evolution").map(|(l, _)| l).unwrap_or(last_line + 1);
    let kind = get("evolution").map(|(_, v)| v).unwrap_or("map");
    match kind {
        "map" => {
            for k in ["t0", "t1", "dt"] {
                if let Some((l, _)) = get(k) {
                    return Err(perr(l, format!("{k} only applies to evolution = hamiltonian")));
                }
            }
            s.evolution = Evolution::Map;
        }
        "hamiltonian" => {
            let t0: f64 = match get("t0") {
                Some((l, v)) => parse_num(l, "t0", v)?,
                None => 0.0,
            };
            let t1: f64 = match get("t1") {
                Some((l, v)) => parse_num(l, "t1", v)?,
                None => 1.0,
            };
            if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
                return Err(perr(evolution_line, format!("need finite t1 > t0, found t0 = {t0}, t1 = {t1}")));
            }
            let dt = match get("dt") {
                Some((l, v)) => {
                    let dt: f64 = parse_num(l, "dt", v)?;
                    if !(dt > 0.0) {
                        return Err(perr(l, "dt must be positive"));
                    }
                    Some(dt)
                }
                None => None,
            };
            s.evolution = Evolution::Hamiltonian { t0, t1, dt };
        }
        other => return Err(perr(evolution_line, format!("evolution must be map or hamiltonian, found {other:?}"))),
    }

    if let Some((l, v)) = get("command") {
        s.command = match v {
            "compare" => Command::Compare,
            "simulate" => Command::Simulate,
            "restrict" => Command::Restrict,
            "wigner" => Command::Wigner,
            "triple" => Command::Triple,
            _ => return Err(perr(l, format!("unknown command {v:?}"))),
        };
    }
    Ok(s)
}

/// Dispatches a scenario to its command and returns the report.
pub fn run_command(s: &Scenario) -> Result<Report> {
    match s.command {
        Command::Compare => compare_pure_mixed(s).map(Report::Comparison),
        Command::Simulate => run_experiment(s, s.samples, s.seed).map(Report::Run),
        Command::Restrict => restrict_report(s).map(Report::Comparison),
        Command::Wigner => wigner_report(s).map(Report::Wigner),
        Command::Triple => triple_report(s).map(Report::Comparison),
    }
}

fn restrict_report(s: &Scenario) -> Result<ComparisonReport> {
    let pure = Experiment::new(&s.with_mode(Mode::Pure))?;
    let mixed = Experiment::new(&s.with_mode(Mode::Mixed))?;
    let model = pure.model();
    let q = model.lifted_pointer();
    let rho_p = &pure.doublet().dynamical;
    let rho_m = &mixed.doublet().dynamical;
    let dp = restrict_classical(rho_p, &q)?;
    let dm = restrict_classical(rho_m, &q)?;
    let mut rows = Vec::new();
    for (label, &value) in model.pointer_values().iter().enumerate() {
        rows.push(ReportRow::new(&format!("P_O{label}_final"), dp.probability_of(value), dm.probability_of(value)));
    }
    rows.push(ReportRow::new("Q_O_final", dp.mean(), dm.mean()));
    let alg = dp.source_algebra().expect("restricted from pointer algebra");
    let v = breuer_indistinguishable(rho_p, rho_m, alg, crate::doublet::VERDICT_TOL)?;
    Ok(ComparisonReport {
        title: "restrict".into(),
        notes: Vec::new(),
        rows,
        verdicts: vec![AlgebraVerdict {
            algebra: "U_O".into(),
            indistinguishable: v.indistinguishable,
            max_gap: v.max_gap,
            witness_gap: v.witness_gap,
        }],
    })
}

fn wigner_report(s: &Scenario) -> Result<WignerReport> {
    let (rho, outcome) = wigner_friend_views(s, s.seed)?;
    let model = s.model()?;
    let b = interference_observable(&model, 1, 2)?;
    let q = model.lifted_pointer();
    let dist = restrict_classical(&rho, &q)?;
    let mut external = vec![
        ("B_expectation".to_string(), rho.expectation(&b)?.re),
        ("Q_O_mean".to_string(), rho.expectation(&q)?.re),
        ("purity".to_string(), rho.purity()),
    ];
    for (label, &value) in model.pointer_values().iter().enumerate() {
        external.push((format!("P_O{label}"), dist.probability_of(value)));
    }
    Ok(WignerReport { seed: s.seed, external, outcome })
}

fn triple_report(s: &Scenario) -> Result<ComparisonReport> {
    let env = s
        .environment
        .ok_or_else(|| Error::InvalidArgument("the triple command needs env_overlap (and optionally env_dim, env_phase)".into()))?;
    let model = s.model()?;
    let a = s.amplitudes();
    let envs = environment_pair(env.dim, env.overlap, env.phase)?;
    let triple = decohere_triple(&model, &a, &envs)?;
    let reduced = trace_environment(&triple)?;
    let mixed = mixed_final_state(&a, &model)?;
    let b = interference_observable(&model, 1, 2)?;
    let q = model.lifted_pointer();
    let rows = vec![
        ReportRow::new(
            "coherence_SO",
            so_coherence(&reduced, &model, 1, 2)?.norm(),
            so_coherence(&mixed, &model, 1, 2)?.norm(),
        ),
        ReportRow::new("B_expectation", reduced.expectation(&b)?.re, mixed.expectation(&b)?.re),
        ReportRow::new("Q_O_final", reduced.expectation(&q)?.re, mixed.expectation(&q)?.re),
        ReportRow::new("purity_SO", reduced.purity(), mixed.purity()),
    ];
    Ok(ComparisonReport {
        title: "triple".into(),
        notes: vec![
            ("columns".into(), "pure = environment traced out of the triple; mixed = outcome mixture".into()),
            ("env_dim".into(), env.dim.to_string()),
            ("env_overlap".into(), crate::report::format_number(env.overlap)),
            ("env_phase".into(), crate::report::format_number(env.phase)),
        ],
        rows,
        verdicts: Vec::new(),
    })
}
