//! Truncated tensor algebra over `R^d`.
//!
//! Elements are stored densely: level `k` holds `d^k` coefficients indexed by
//! words read as base-`d` numbers, first letter most significant. Letters are
//! 1-based in every public interface (`e_1, ..., e_d`).

use std::fmt;

use serde_json::{Map, Value};

use crate::error::{invalid, Error, Result};

/// Default tolerance for the structural predicates.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Name of the tensor norm used everywhere downstream. Recorded in outputs.
pub const NORM_CHOICE: &str = "l1-per-level";

/// A word `i_1 i_2 ... i_k` over the alphabet `{1, ..., d}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses `"i1.i2...ik"`; the empty string is the empty word.
    pub fn parse(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Ok(Word::empty());
        }
        s.split('.')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| invalid(format!("bad word key {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    /// All words of length `k` over `d` letters in storage order.
    pub fn all_of_length(d: usize, k: usize) -> Vec<Word> {
        (0..d.pow(k as u32))
            .map(|idx| word_from_index(d, k, idx))
            .collect()
    }

    fn index(&self, d: usize) -> Option<usize> {
        let mut idx = 0;
        for &l in &self.0 {
            if l == 0 || l > d {
                return None;
            }
            idx = idx * d + (l - 1);
        }
        Some(idx)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

fn word_from_index(d: usize, k: usize, mut idx: usize) -> Word {
    let mut letters = vec![0; k];
    for slot in letters.iter_mut().rev() {
        *slot = idx % d + 1;
        idx /= d;
    }
    Word(letters)
}

/// Per-level l1 norms of an element together with their max and their sum.
///
/// The sum is the full l1 norm of the coefficient vector; it is the norm that
/// is submultiplicative under the truncated product.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorNorm {
    pub per_level: Vec<f64>,
    pub max: f64,
    pub total: f64,
}

/// Element of the truncated tensor algebra `T^n(R^d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorElement {
    dim: usize,
    level: usize,
    coeffs: Vec<f64>,
}

impl TensorElement {
    pub fn zero(dim: usize, level: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        let len = offset(dim, level + 1);
        TensorElement {
            dim,
            level,
            coeffs: vec![0.0; len],
        }
    }

    pub fn one(dim: usize, level: usize) -> Self {
        let mut t = Self::zero(dim, level);
        t.coeffs[0] = 1.0;
        t
    }

    /// The basis vector `e_i` (1-based).
    pub fn letter(dim: usize, level: usize, i: usize) -> Self {
        let mut t = Self::zero(dim, level);
        t.set(&Word::new(vec![i]), 1.0);
        t
    }

    /// Embeds a vector of `R^d` at level one.
    pub fn from_vector(level: usize, v: &[f64]) -> Self {
        let mut t = Self::zero(v.len(), level);
        if level >= 1 {
            t.coeffs[1..=v.len()].copy_from_slice(v);
        }
        t
    }

    /// Builds an element from `(word, coefficient)` pairs.
    pub fn from_terms(dim: usize, level: usize, terms: &[(Word, f64)]) -> Result<Self> {
        let mut t = Self::zero(dim, level);
        for (w, c) in terms {
            t.try_set(w, t.coeff_checked(w)? + c)?;
        }
        Ok(t)
    }

    /// Builds an element directly from dense storage.
    pub fn from_dense(dim: usize, level: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != offset(dim, level + 1) {
            return Err(invalid(format!(
                "dense coefficient table has {} entries, expected {}",
                coeffs.len(),
                offset(dim, level + 1)
            )));
        }
        Ok(TensorElement { dim, level, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn scalar(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficients of the words of length `k`.
    pub fn level_slice(&self, k: usize) -> &[f64] {
        &self.coeffs[offset(self.dim, k)..offset(self.dim, k + 1)]
    }

    fn level_slice_mut(&mut self, k: usize) -> &mut [f64] {
        let (a, b) = (offset(self.dim, k), offset(self.dim, k + 1));
        &mut self.coeffs[a..b]
    }

    pub fn coeff(&self, w: &Word) -> f64 {
        self.coeff_checked(w).unwrap_or(0.0)
    }

    fn coeff_checked(&self, w: &Word) -> Result<f64> {
        let pos = self.position(w)?;
        Ok(self.coeffs[pos])
    }

    pub fn set(&mut self, w: &Word, value: f64) {
        self.try_set(w, value).expect("word out of range");
    }

    pub fn try_set(&mut self, w: &Word, value: f64) -> Result<()> {
        let pos = self.position(w)?;
        self.coeffs[pos] = value;
        Ok(())
    }

    fn position(&self, w: &Word) -> Result<usize> {
        if w.len() > self.level {
            return Err(invalid(format!(
                "word {w} longer than truncation level {}",
                self.level
            )));
        }
        let idx = w
            .index(self.dim)
            .ok_or_else(|| invalid(format!("word {w} has a letter outside 1..={}", self.dim)))?;
        Ok(offset(self.dim, w.len()) + idx)
    }

    /// Iterates over `(word, coefficient)` for the nonzero coefficients.
    pub fn terms(&self) -> impl Iterator<Item = (Word, f64)> + '_ {
        (0..=self.level).flat_map(move |k| {
            self.level_slice(k)
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(move |(i, c)| (word_from_index(self.dim, k, i), *c))
        })
    }

    /// Projection `pi_k` onto the words of length `k`.
    pub fn project(&self, k: usize) -> Self {
        let mut out = Self::zero(self.dim, self.level);
        if k <= self.level {
            out.level_slice_mut(k).copy_from_slice(self.level_slice(k));
        }
        out
    }

    /// Highest level carrying a nonzero coefficient, `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        (0..=self.level)
            .rev()
            .find(|&k| self.level_slice(k).iter().any(|c| *c != 0.0))
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.level != other.level {
            return Err(Error::ShapeMismatch(
                self.dim,
                self.level,
                other.dim,
                other.level,
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(TensorElement { coeffs, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(TensorElement { coeffs, ..*self })
    }

    pub fn scaled(&self, s: f64) -> Self {
        TensorElement {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            ..*self
        }
    }

    /// Dilation: level `k` multiplied by `lambda^k`.
    pub fn dilate(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        for k in 0..=self.level {
            let f = lambda.powi(k as i32);
            out.level_slice_mut(k).iter_mut().for_each(|c| *c *= f);
        }
        out
    }

    /// Truncated product; levels above `n` are dropped.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let d = self.dim;
        let mut out = Self::zero(d, self.level);
        for k in 0..=self.level {
            let base = offset(d, k);
            for i in 0..=k {
                let j = k - i;
                let stride = d.pow(j as u32);
                let a = self.level_slice(i);
                let b = other.level_slice(j);
                for (ua, &ca) in a.iter().enumerate() {
                    if ca == 0.0 {
                        continue;
                    }
                    let row = base + ua * stride;
                    for (vb, &cb) in b.iter().enumerate() {
                        out.coeffs[row + vb] += ca * cb;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `sum_{k=0..n} a^k / k!`; requires a zero scalar part.
    pub fn exp(&self) -> Result<Self> {
        if self.scalar() != 0.0 {
            return Err(invalid(format!(
                "exp needs a zero scalar part, got {}",
                self.scalar()
            )));
        }
        let one = Self::one(self.dim, self.level);
        let mut acc = one.clone();
        for k in (1..=self.level).rev() {
            acc = one.add(&self.mul(&acc)?.scaled(1.0 / k as f64))?;
        }
        Ok(acc)
    }

    /// `sum_{k=1..n} (-1)^{k+1} (g - 1)^k / k`; requires a unit scalar part.
    pub fn log(&self) -> Result<Self> {
        if self.scalar() != 1.0 {
            return Err(invalid(format!(
                "log needs a unit scalar part, got {}",
                self.scalar()
            )));
        }
        let one = Self::one(self.dim, self.level);
        let x = self.sub(&one)?;
        if self.level == 0 {
            return Ok(x);
        }
        let sign = |k: usize| if k % 2 == 1 { 1.0 } else { -1.0 };
        let n = self.level;
        let mut acc = one.scaled(sign(n) / n as f64);
        for k in (1..n).rev() {
            acc = one.scaled(sign(k) / k as f64).add(&x.mul(&acc)?)?;
        }
        x.mul(&acc)
    }

    /// Group inverse of a unit-scalar element, via the finite Neumann series
    /// `sum_k (1 - g)^k`.
    pub fn inverse(&self) -> Result<Self> {
        if self.scalar() != 1.0 {
            return Err(invalid(format!(
                "inverse needs a unit scalar part, got {}",
                self.scalar()
            )));
        }
        let one = Self::one(self.dim, self.level);
        let y = one.sub(self)?;
        let mut acc = one.clone();
        for _ in 0..self.level {
            acc = one.add(&y.mul(&acc)?)?;
        }
        Ok(acc)
    }

    pub fn norm(&self) -> TensorNorm {
        let per_level: Vec<f64> = (0..=self.level)
            .map(|k| self.level_slice(k).iter().map(|c| c.abs()).sum())
            .collect();
        let max = per_level.iter().cloned().fold(0.0, f64::max);
        let total = per_level.iter().sum();
        TensorNorm {
            per_level,
            max,
            total,
        }
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest violation of `<g, u ш w> = <g, u><g, w>` over nonempty words
    /// with `|u| + |w| <= n`, plus `|pi_0 g - 1|`.
    pub fn shuffle_defect(&self) -> f64 {
        let mut worst = (self.scalar() - 1.0).abs();
        let mut buf = Vec::with_capacity(self.level);
        for a in 1..self.level {
            for b in 1..=(self.level - a) {
                for u in Word::all_of_length(self.dim, a) {
                    let gu = self.coeff(&u);
                    for w in Word::all_of_length(self.dim, b) {
                        buf.clear();
                        let lhs = self.shuffle_pairing(u.letters(), w.letters(), &mut buf);
                        let rhs = gu * self.coeff(&w);
                        let scale = 1.0f64.max(lhs.abs()).max(rhs.abs());
                        worst = worst.max((lhs - rhs).abs() / scale);
                    }
                }
            }
        }
        worst
    }

    fn shuffle_pairing(&self, u: &[usize], w: &[usize], buf: &mut Vec<usize>) -> f64 {
        if u.is_empty() && w.is_empty() {
            return self.coeff(&Word(buf.clone()));
        }
        let mut sum = 0.0;
        if let Some((&first, rest)) = u.split_first() {
            buf.push(first);
            sum += self.shuffle_pairing(rest, w, buf);
            buf.pop();
        }
        if let Some((&first, rest)) = w.split_first() {
            buf.push(first);
            sum += self.shuffle_pairing(u, rest, buf);
            buf.pop();
        }
        sum
    }

    pub fn is_grouplike(&self, tol: f64) -> bool {
        self.scalar() == 1.0 && self.shuffle_defect() <= tol
    }

    /// Per-level l1 norm of `D_k(pi_k a) - k pi_k a`, where `D_k` is the
    /// right-normed bracketing `w_1 ... w_k -> [w_1, [w_2, ..., [w_{k-1}, w_k]]]`.
    /// Entry `k - 1` holds level `k`.
    pub fn lie_defect_per_level(&self) -> Result<Vec<f64>> {
        if self.scalar() != 0.0 {
            return Err(invalid(format!(
                "Lie elements have a zero scalar part, got {}",
                self.scalar()
            )));
        }
        Ok((1..=self.level)
            .map(|k| {
                let x = self.level_slice(k);
                let dx = dynkin(self.dim, k, x);
                dx.iter()
                    .zip(x)
                    .map(|(a, b)| (a - k as f64 * b).abs())
                    .sum()
            })
            .collect())
    }

    /// Max over levels of [`Self::lie_defect_per_level`].
    pub fn lie_defect(&self) -> Result<f64> {
        Ok(self.lie_defect_per_level()?.into_iter().fold(0.0, f64::max))
    }

    /// Lie membership with the tolerance scaled by `max(1, ||a||)`.
    pub fn is_lie(&self, tol: f64) -> bool {
        match self.lie_defect() {
            Ok(def) => def <= tol * self.norm().total.max(1.0),
            Err(_) => false,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (w, c) in self.terms() {
            map.insert(w.to_string(), Value::from(c));
        }
        let mut obj = Map::new();
        obj.insert("d".into(), Value::from(self.dim));
        obj.insert("n".into(), Value::from(self.level));
        obj.insert("coeffs".into(), Value::Object(map));
        Value::Object(obj)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |name: &str| {
            v.get(name)
                .ok_or_else(|| invalid(format!("tensor: missing field `{name}`")))
        };
        let d = field("d")?
            .as_u64()
            .filter(|d| *d >= 1)
            .ok_or_else(|| invalid("tensor.d: expected a positive integer"))?
            as usize;
        let n = field("n")?
            .as_u64()
            .ok_or_else(|| invalid("tensor.n: expected a nonnegative integer"))?
            as usize;
        let coeffs = field("coeffs")?
            .as_object()
            .ok_or_else(|| invalid("tensor.coeffs: expected an object"))?;
        let mut t = Self::zero(d, n);
        for (key, val) in coeffs {
            let c = val
                .as_f64()
                .ok_or_else(|| invalid(format!("tensor.coeffs.{key:?}: expected a number")))?;
            t.try_set(&Word::parse(key)?, c)?;
        }
        Ok(t)
    }
}

/// Number of coefficients below level `k`: `sum_{j<k} d^j`.
fn offset(d: usize, k: usize) -> usize {
    (0..k).map(|j| d.pow(j as u32)).sum()
}

/// `D(x) = sum_i e_i D(x_i) - D(x_i) e_i` where `x = sum_i e_i (x) x_i`.
fn dynkin(d: usize, k: usize, x: &[f64]) -> Vec<f64> {
    if k <= 1 {
        return x.to_vec();
    }
    let tail = d.pow(k as u32 - 1);
    let mut out = vec![0.0; x.len()];
    for i in 0..d {
        let sub = &x[i * tail..(i + 1) * tail];
        if sub.iter().all(|c| *c == 0.0) {
            continue;
        }
        let dsub = dynkin(d, k - 1, sub);
        for (j, c) in dsub.iter().enumerate() {
            // e_i (x) word_j
            out[i * tail + j] += c;
            // word_j (x) e_i
            out[j * d + i] -= c;
        }
    }
    out
}

/// Unit-scalar element of the group `G^n = exp(g^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupLikeElement(TensorElement);

impl GroupLikeElement {
    pub fn new(t: TensorElement, tol: f64) -> Result<Self> {
        if t.scalar() != 1.0 {
            return Err(Error::NotGroupLike((t.scalar() - 1.0).abs()));
        }
        let def = t.shuffle_defect();
        if def > tol {
            return Err(Error::NotGroupLike(def));
        }
        Ok(GroupLikeElement(t))
    }

    /// Wraps an element known to be group-like by construction.
    pub(crate) fn new_unchecked(t: TensorElement) -> Self {
        debug_assert_eq!(t.scalar(), 1.0);
        GroupLikeElement(t)
    }

    pub fn one(dim: usize, level: usize) -> Self {
        GroupLikeElement(TensorElement::one(dim, level))
    }

    pub fn as_tensor(&self) -> &TensorElement {
        &self.0
    }

    pub fn into_tensor(self) -> TensorElement {
        self.0
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(GroupLikeElement(self.0.mul(&other.0)?))
    }

    pub fn inverse(&self) -> Self {
        GroupLikeElement(self.0.inverse().expect("unit scalar part"))
    }

    pub fn log(&self) -> LieElement {
        LieElement(self.0.log().expect("unit scalar part"))
    }
}

/// Element of the free Lie algebra `g^n` inside `T^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieElement(TensorElement);

impl LieElement {
    pub fn new(t: TensorElement, tol: f64) -> Result<Self> {
        let def = t.lie_defect()?;
        if def > tol * t.norm().total.max(1.0) {
            return Err(Error::NotLie(def));
        }
        Ok(LieElement(t))
    }

    pub fn as_tensor(&self) -> &TensorElement {
        &self.0
    }

    pub fn into_tensor(self) -> TensorElement {
        self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        LieElement(self.0.scaled(s))
    }

    pub fn exp(&self) -> GroupLikeElement {
        GroupLikeElement(self.0.exp().expect("zero scalar part"))
    }
}
