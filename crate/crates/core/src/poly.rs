//! Sparse multivariate polynomials with exact calculus.
//!
//! Used both as the polynomial vector fields / test functions and as truncated
//! Taylor jets `h -> g(x + h)` of arbitrary smooth maps.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The coordinate function `x_i` (0-based).
    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn monomial(exponents: Vec<u32>, coeff: f64) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, coeff);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, coeff: f64) {
        assert_eq!(exponents.len(), self.nvars, "exponent arity");
        if coeff == 0.0 {
            return;
        }
        let slot = self.terms.entry(exponents).or_insert(0.0);
        *slot += coeff;
        if *slot == 0.0 {
            self.terms.retain(|_, c| *c != 0.0);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Coefficient of the constant monomial.
    pub fn constant_term(&self) -> f64 {
        self.terms.get(&vec![0; self.nvars]).copied().unwrap_or(0.0)
    }

    pub fn coeff(&self, exponents: &[u32]) -> f64 {
        self.terms.get(exponents).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * monomial_value(e, x))
            .sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign_scaled(other, 1.0);
        out
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: f64) {
        assert_eq!(self.nvars, other.nvars, "polynomial arity");
        for (e, c) in &other.terms {
            let slot = self.terms.entry(e.clone()).or_insert(0.0);
            *slot += s * c;
        }
        self.terms.retain(|_, c| *c != 0.0);
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = Self::zero(self.nvars);
        out.add_assign_scaled(self, s);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_truncated(other, u32::MAX)
    }

    /// Product with all monomials of total degree above `max_degree` dropped.
    pub fn mul_truncated(&self, other: &Self, max_degree: u32) -> Self {
        assert_eq!(self.nvars, other.nvars, "polynomial arity");
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            let da: u32 = ea.iter().sum();
            for (eb, cb) in &other.terms {
                if da + eb.iter().sum::<u32>() > max_degree {
                    continue;
                }
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *out.terms.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn truncate(&self, max_degree: u32) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() <= max_degree)
                .map(|(e, c)| (e.clone(), *c))
                .collect(),
        }
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            *out.terms.entry(d).or_insert(0.0) += c * e[i] as f64;
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    /// Taylor re-expansion `h -> p(x + h)`, truncated at `max_degree` in `h`.
    pub fn shift(&self, x: &[f64], max_degree: u32) -> Self {
        assert_eq!(x.len(), self.nvars, "shift point arity");
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut term = Self::constant(self.nvars, *c);
            for (j, &ej) in e.iter().enumerate() {
                if ej == 0 {
                    continue;
                }
                // (x_j + h_j)^ej = sum_a C(ej, a) x_j^(ej - a) h_j^a
                let mut factor = Self::zero(self.nvars);
                for a in 0..=ej.min(max_degree) {
                    let mut exps = vec![0; self.nvars];
                    exps[j] = a;
                    factor.add_term(exps, binomial(ej, a) * x[j].powi((ej - a) as i32));
                }
                term = term.mul_truncated(&factor, max_degree);
            }
            out.add_assign_scaled(&term, 1.0);
        }
        out
    }
}

fn monomial_value(e: &[u32], x: &[f64]) -> f64 {
    e.iter()
        .zip(x)
        .filter(|(k, _)| **k != 0)
        .map(|(&k, &xi)| xi.powi(k as i32))
        .product()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// A polynomial map `R^m -> R^m` flattened for fast evaluation.
#[derive(Debug, Clone, Default)]
pub struct CompiledMap {
    dim: usize,
    // (output coordinate, coefficient, exponents)
    terms: Vec<(usize, f64, Vec<u32>)>,
}

impl CompiledMap {
    pub fn new(components: &[Polynomial]) -> Self {
        let dim = components.len();
        let terms = components
            .iter()
            .enumerate()
            .flat_map(|(c, p)| p.terms().map(move |(e, k)| (c, k, e.to_vec())))
            .collect();
        CompiledMap { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (c, k, e) in &self.terms {
            out[*c] += k * monomial_value(e, x);
        }
    }
}
