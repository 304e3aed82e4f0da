//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use roughflow::tensor::{TensorElement, Word};

pub type Sparse = BTreeMap<Vec<usize>, f64>;

pub fn to_sparse(t: &TensorElement) -> Sparse {
    t.terms().map(|(w, c)| (w.letters().to_vec(), c)).collect()
}

/// Concatenation product over explicit words, truncated at `n`.
pub fn sparse_mul(a: &Sparse, b: &Sparse, n: usize) -> Sparse {
    let mut out = Sparse::new();
    for (u, x) in a {
        for (v, y) in b {
            if u.len() + v.len() <= n {
                let mut w = u.clone();
                w.extend(v);
                *out.entry(w).or_insert(0.0) += x * y;
            }
        }
    }
    out
}

pub fn sparse_dist(a: &Sparse, b: &Sparse) -> f64 {
    let mut worst = 0.0f64;
    for (w, x) in a {
        worst = worst.max((x - b.get(w).copied().unwrap_or(0.0)).abs());
    }
    for (w, y) in b {
        worst = worst.max((y - a.get(w).copied().unwrap_or(0.0)).abs());
    }
    worst
}

/// `exp` by the plain power series `sum a^k / k!` on sparse words.
pub fn sparse_exp(a: &Sparse, n: usize) -> Sparse {
    let mut out: Sparse = [(vec![], 1.0)].into_iter().collect();
    let mut power = out.clone();
    for k in 1..=n {
        power = sparse_mul(&power, a, n);
        for (w, c) in &power {
            *out.entry(w.clone()).or_insert(0.0) += c / factorial(k);
        }
    }
    out
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

pub fn tensor(d: usize, n: usize, terms: &[(&str, f64)]) -> TensorElement {
    let terms: Vec<(Word, f64)> = terms
        .iter()
        .map(|(w, c)| (Word::parse(w).unwrap(), *c))
        .collect();
    TensorElement::from_terms(d, n, &terms).unwrap()
}

pub fn matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let m = rows.len();
    DMatrix::from_fn(m, m, |i, j| rows[i][j])
}

/// `exp(M) x` via nalgebra's matrix exponential.
pub fn expm_apply(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let y = m.clone().exp() * DVector::from_column_slice(x);
    y.iter().copied().collect()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn sl2() -> (DMatrix<f64>, DMatrix<f64>) {
    (
        matrix(&[vec![0.0, 1.0], vec![0.0, 0.0]]),
        matrix(&[vec![0.0, 0.0], vec![1.0, 0.0]]),
    )
}
