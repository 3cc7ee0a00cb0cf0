//! Fixtures shared by the benchmarks under `benches/`.

use num_complex::Complex64;
use qinside_core::{Factorization, Operator};

/// Deterministic dense Hermitian matrix of dimension `d`.
pub fn hermitian(d: usize, seed: u64) -> Operator {
    let mut x = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
    let mut next = move || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = Complex64::new(next(), 0.0);
        for j in (i + 1)..d {
            m[(i, j)] = Complex64::new(next(), next());
            m[(j, i)] = m[(i, j)].conj();
        }
    }
    Operator::new(m, Factorization::single(d)).expect("square matrix")
}
