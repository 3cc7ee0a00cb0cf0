//! Test-only oracles, written independently of the library code paths.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use qinside_core::{DensityState, Factorization, Operator};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations on the real
/// symmetric embedding `[[Re, −Im], [Im, Re]]`; every eigenvalue appears twice
/// there, so every other value is returned.
pub fn jacobi_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let n = m.nrows();
    let big = 2 * n;
    let mut a = vec![vec![0.0f64; big]; big];
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..big).flat_map(|i| (0..big).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..big {
            for q in (p + 1)..big {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..big {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..big {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..big).map(|i| a[i][i]).collect();
    vals.sort_by(f64::total_cmp);
    vals.into_iter().step_by(2).collect()
}

/// Explicit index summation for a two-factor partial trace.
pub fn partial_trace_oracle(rho: &DMatrix<Complex64>, d0: usize, d1: usize, keep: usize) -> DMatrix<Complex64> {
    match keep {
        0 => DMatrix::from_fn(d0, d0, |i, j| (0..d1).map(|k| rho[(i * d1 + k, j * d1 + k)]).sum()),
        1 => DMatrix::from_fn(d1, d1, |i, j| (0..d0).map(|k| rho[(k * d1 + i, k * d1 + j)]).sum()),
        _ => panic!("two factors only"),
    }
}

/// Column space of vectorized matrices via SVD.
pub struct SvdSpan {
    pub rank: usize,
    basis: DMatrix<Complex64>,
}

impl SvdSpan {
    pub fn new(mats: &[DMatrix<Complex64>]) -> Self {
        let rows = mats[0].len();
        let a = DMatrix::from_fn(rows, mats.len(), |r, col| mats[col].as_slice()[r]);
        let svd = a.svd(true, false);
        let smax = svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|&&s| s > 1e-9 * smax.max(1.0)).count();
        let u = svd.u.unwrap();
        // nalgebra does not guarantee sorted singular values; gather the kept columns.
        let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
        idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let cols: Vec<DVector<Complex64>> = idx[..rank].iter().map(|&k| u.column(k).into_owned()).collect();
        let basis = if cols.is_empty() { DMatrix::zeros(rows, 0) } else { DMatrix::from_columns(&cols) };
        SvdSpan { rank, basis }
    }

    pub fn residual(&self, m: &DMatrix<Complex64>) -> f64 {
        let v = DVector::from_column_slice(m.as_slice());
        let proj = &self.basis * (self.basis.adjoint() * &v);
        (v - proj).norm()
    }
}

/// All words of length ≤ `max_len` in `gens`, including the empty word `I`.
pub fn monomials(gens: &[DMatrix<Complex64>], max_len: usize) -> Vec<DMatrix<Complex64>> {
    let d = gens[0].nrows();
    let mut all = vec![DMatrix::identity(d, d)];
    let mut layer = vec![DMatrix::<Complex64>::identity(d, d)];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for g in gens {
                next.push(w * g);
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}

pub fn herm_from(entries: &[f64], d: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        m[(i, i)] = c(entries[k], 0.0);
        k += 1;
        for j in (i + 1)..d {
            m[(i, j)] = c(entries[k], entries[k + 1]);
            m[(j, i)] = m[(i, j)].conj();
            k += 2;
        }
    }
    m
}

/// Random density matrix `G G† / tr(G G†)`.
pub fn density_from(entries: &[f64], fact: &Factorization) -> DensityState {
    let d = fact.total();
    let g = DMatrix::from_fn(d, d, |i, j| c(entries[2 * (i * d + j)], entries[2 * (i * d + j) + 1]));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let m = m / c(tr, 0.0);
    let m = (&m + m.adjoint()) * c(0.5, 0.0);
    DensityState::new(Operator::new(m, fact.clone()).unwrap()).unwrap()
}

pub fn entries(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n)
}

/// Strategy for a density state on the given factorization.
pub fn density(fact: Factorization) -> impl Strategy<Value = DensityState> {
    let d = fact.total();
    entries(2 * d * d).prop_filter_map("degenerate", move |e| {
        if e.iter().map(|x| x * x).sum::<f64>() < 1e-3 {
            None
        } else {
            Some(density_from(&e, &fact))
        }
    })
}

/// Strategy for a normalized amplitude pair with arbitrary phases.
pub fn amplitude_pair() -> impl Strategy<Value = [Complex64; 2]> {
    (0.0f64..std::f64::consts::FRAC_PI_2, -3.2f64..3.2, -3.2f64..3.2).prop_map(|(theta, p1, p2)| {
        [Complex64::from_polar(theta.cos(), p1), Complex64::from_polar(theta.sin(), p2)]
    })
}
