//! Weak geometric Hölder p-rough paths with deterministic constructors.
//!
//! Increments follow `X_ts = X_s^{-1} X_t`, so they compose as
//! `X_ts = X_us X_tu` with the earlier increment on the left.

use std::io::Read;

use crate::error::{invalid, Result};
use crate::tensor::{GroupLikeElement, LieElement, TensorElement, Word, DEFAULT_TOL};

/// Hölder exponent `p > 2` and its truncation level `[p]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderExponent(f64);

impl HolderExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 2.0) {
            return Err(invalid(format!("Hölder exponent p must exceed 2, got {p}")));
        }
        Ok(HolderExponent(p))
    }

    pub fn p(&self) -> f64 {
        self.0
    }

    pub fn truncation(&self) -> usize {
        self.0.floor() as usize
    }

    /// `([p] + 1) / p`, the exponent of the approximate-flow defect.
    pub fn defect_exponent(&self) -> f64 {
        (self.truncation() as f64 + 1.0) / self.0
    }
}

/// Piecewise-linear path through `(t_i, x_i)` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    times: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl SampledPath {
    pub fn new(times: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 {
            return Err(invalid("a sampled path needs at least two samples"));
        }
        if times.len() != points.len() {
            return Err(invalid("times and points differ in length"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(invalid(
                "sample times must be finite and strictly increasing",
            ));
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(invalid("all samples need the same positive dimension"));
        }
        Ok(SampledPath { times, points })
    }

    /// Reads CSV with header `t,x1,...,xd`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| invalid(format!("path csv header: {e}")))?
            .clone();
        if headers.get(0) != Some("t") || headers.len() < 2 {
            return Err(invalid("path csv header must be `t,x1,...,xd`"));
        }
        for (i, h) in headers.iter().enumerate().skip(1) {
            if h != format!("x{i}") {
                return Err(invalid(format!(
                    "path csv column {i} should be `x{i}`, got `{h}`"
                )));
            }
        }
        let mut times = Vec::new();
        let mut points = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| invalid(format!("path csv row {}: {e}", row + 1)))?;
            let vals = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| invalid(format!("path csv row {}: bad number `{s}`", row + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            times.push(vals[0]);
            points.push(vals[1..].to_vec());
        }
        Self::new(times, points)
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Index `i` of the piece `[t_i, t_{i+1}]` containing `t`.
    fn piece(&self, t: f64) -> usize {
        let i = self.times.partition_point(|&x| x <= t);
        i.saturating_sub(1).min(self.times.len() - 2)
    }

    pub fn value_at(&self, t: f64) -> Vec<f64> {
        let t = t.clamp(self.start(), self.end());
        let i = self.piece(t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let w = (t - t0) / (t1 - t0);
        self.points[i]
            .iter()
            .zip(&self.points[i + 1])
            .map(|(a, b)| a + w * (b - a))
            .collect()
    }

    /// Velocity on the piece containing `t` (right-continuous).
    pub fn velocity_at(&self, t: f64) -> Vec<f64> {
        let i = self.piece(t);
        let dt = self.times[i + 1] - self.times[i];
        self.points[i]
            .iter()
            .zip(&self.points[i + 1])
            .map(|(a, b)| (b - a) / dt)
            .collect()
    }

    /// Breakpoints of `[s, t]`: `s`, every sample time strictly inside, `t`.
    pub fn breakpoints(&self, s: f64, t: f64) -> Vec<f64> {
        let lo = self.times.partition_point(|&x| x <= s);
        let hi = self.times.partition_point(|&x| x < t);
        let mut out = Vec::with_capacity(hi.saturating_sub(lo) + 2);
        out.push(s);
        if lo < hi {
            out.extend_from_slice(&self.times[lo..hi]);
        }
        if t > s {
            out.push(t);
        }
        out
    }

    /// Truncated signature of the path over `[s, t]`: the ordered product of
    /// `exp(increment)` over the linear pieces.
    pub fn signature(&self, s: f64, t: f64, level: usize) -> Result<GroupLikeElement> {
        self.check_window(s, t)?;
        let (s, t) = (s.max(self.start()), t.min(self.end()));
        let d = self.dim();
        let mut sig = TensorElement::one(d, level);
        if t <= s {
            return Ok(GroupLikeElement::new_unchecked(sig));
        }
        let knots = self.breakpoints(s, t);
        let mut prev = self.value_at(knots[0]);
        for &k in &knots[1..] {
            let cur = self.value_at(k);
            let delta: Vec<f64> = cur.iter().zip(&prev).map(|(a, b)| a - b).collect();
            sig = sig.mul(&exp_vector(level, &delta))?;
            prev = cur;
        }
        Ok(GroupLikeElement::new_unchecked(sig))
    }

    fn check_window(&self, s: f64, t: f64) -> Result<()> {
        let eps = time_eps(self.start(), self.end());
        if s > t {
            return Err(invalid(format!("window start {s} is after its end {t}")));
        }
        if s < self.start() - eps || t > self.end() + eps {
            return Err(invalid(format!(
                "window [{s}, {t}] leaves the path horizon [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        Ok(())
    }

    /// The same path run on times shifted by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        SampledPath {
            times: self.times.iter().map(|t| t + dt).collect(),
            points: self.points.clone(),
        }
    }

    /// The path with every point multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        SampledPath {
            times: self.times.clone(),
            points: self
                .points
                .iter()
                .map(|p| p.iter().map(|x| x * lambda).collect())
                .collect(),
        }
    }
}

fn time_eps(start: f64, end: f64) -> f64 {
    1e-12 * start.abs().max(end.abs()).max(1.0)
}

/// `exp(v)` for `v` at level one: level `k` is `v^{(x)k} / k!`.
pub fn exp_vector(level: usize, v: &[f64]) -> TensorElement {
    let d = v.len();
    let mut dense = vec![1.0];
    let mut prev = vec![1.0];
    for k in 1..=level {
        let mut cur = Vec::with_capacity(prev.len() * d);
        for a in &prev {
            for b in v {
                cur.push(a * b / k as f64);
            }
        }
        dense.extend_from_slice(&cur);
        prev = cur;
    }
    TensorElement::from_dense(d, level, dense).expect("dense layout")
}

#[derive(Debug, Clone, PartialEq)]
pub enum DriverKind {
    /// Canonical lift of a piecewise-linear path.
    PwlLift(SampledPath),
    /// `X_ts = exp(scale (t - s) (e_1 e_2 - e_2 e_1))`.
    PureArea { scale: f64 },
    /// `X_ts = exp((t - s) lambda)`.
    LogLinear(LieElement),
}

/// Per-level grid Hölder norms and their max.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderNorm {
    /// Entry `i - 1` holds level `i`.
    pub per_level: Vec<f64>,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoughPath {
    exponent: HolderExponent,
    dim: usize,
    start: f64,
    end: f64,
    kind: DriverKind,
}

impl RoughPath {
    pub fn pwl_lift(path: SampledPath, p: f64) -> Result<Self> {
        let exponent = HolderExponent::new(p)?;
        Ok(RoughPath {
            exponent,
            dim: path.dim(),
            start: path.start(),
            end: path.end(),
            kind: DriverKind::PwlLift(path),
        })
    }

    /// Pure-area driver on `[0, 1]`; see [`Self::with_horizon`].
    pub fn pure_area(d: usize, scale: f64, p: f64) -> Result<Self> {
        let exponent = HolderExponent::new(p)?;
        if exponent.truncation() != 2 {
            return Err(invalid(format!(
                "the pure-area driver lives at level 2, but [p] = {}",
                exponent.truncation()
            )));
        }
        if d < 2 {
            return Err(invalid("the pure-area driver needs dimension at least 2"));
        }
        Ok(RoughPath {
            exponent,
            dim: d,
            start: 0.0,
            end: 1.0,
            kind: DriverKind::PureArea { scale },
        })
    }

    /// One-parameter subgroup through a Lie element, on `[0, 1]`.
    pub fn log_linear(lambda: TensorElement, p: f64) -> Result<Self> {
        let exponent = HolderExponent::new(p)?;
        if lambda.level() != exponent.truncation() {
            return Err(invalid(format!(
                "generator has level {}, expected [p] = {}",
                lambda.level(),
                exponent.truncation()
            )));
        }
        let dim = lambda.dim();
        let lambda = LieElement::new(lambda, DEFAULT_TOL)?;
        Ok(RoughPath {
            exponent,
            dim,
            start: 0.0,
            end: 1.0,
            kind: DriverKind::LogLinear(lambda),
        })
    }

    /// Sets the time domain to `[start, end]`. Sampled paths keep their own.
    pub fn with_horizon(mut self, start: f64, end: f64) -> Result<Self> {
        if matches!(self.kind, DriverKind::PwlLift(_)) {
            return Err(invalid(
                "a lifted sampled path takes its horizon from the samples",
            ));
        }
        if !(end > start) {
            return Err(invalid(format!("empty horizon [{start}, {end}]")));
        }
        self.start = start;
        self.end = end;
        Ok(self)
    }

    pub fn exponent(&self) -> HolderExponent {
        self.exponent
    }

    pub fn level(&self) -> usize {
        self.exponent.truncation()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn kind(&self) -> &DriverKind {
        &self.kind
    }

    pub fn kind_tag(&self) -> &'static str {
        match self.kind {
            DriverKind::PwlLift(_) => "pwl_lift",
            DriverKind::PureArea { .. } => "pure_area",
            DriverKind::LogLinear(_) => "log_linear",
        }
    }

    /// `X_ts`; `s = t` gives the unit.
    pub fn increment(&self, s: f64, t: f64) -> Result<GroupLikeElement> {
        if s > t {
            return Err(invalid(format!(
                "increment needs s <= t, got s = {s}, t = {t}"
            )));
        }
        let eps = time_eps(self.start, self.end);
        if s < self.start - eps || t > self.end + eps {
            return Err(invalid(format!(
                "window [{s}, {t}] leaves the horizon [{}, {}]",
                self.start, self.end
            )));
        }
        let n = self.level();
        if s == t {
            return Ok(GroupLikeElement::one(self.dim, n));
        }
        match &self.kind {
            DriverKind::PwlLift(path) => path.signature(s, t, n),
            DriverKind::PureArea { scale } => {
                let gen = area_generator(self.dim, n).scaled(scale * (t - s));
                Ok(GroupLikeElement::new_unchecked(gen.exp()?))
            }
            DriverKind::LogLinear(lambda) => Ok(lambda.scaled(t - s).exp()),
        }
    }

    /// `Lambda_ts = log X_ts`.
    pub fn log_increment(&self, s: f64, t: f64) -> Result<TensorElement> {
        Ok(self.increment(s, t)?.log().into_tensor())
    }

    /// Per level `i`, the sup over the grid of `||pi_i X_ts|| / |t - s|^{i/p}`.
    pub fn holder_norm(&self, grid: &[(f64, f64)]) -> Result<HolderNorm> {
        if grid.is_empty() {
            return Err(invalid("Hölder norm needs a nonempty grid"));
        }
        let n = self.level();
        let p = self.exponent.p();
        let mut per_level = vec![0.0f64; n];
        for &(s, t) in grid {
            if !(t > s) {
                return Err(invalid(format!("grid pair ({s}, {t}) needs s < t")));
            }
            let norms = self.increment(s, t)?.as_tensor().norm().per_level;
            for i in 1..=n {
                let v = norms[i] / (t - s).powf(i as f64 / p);
                per_level[i - 1] = per_level[i - 1].max(v);
            }
        }
        let max = per_level.iter().cloned().fold(0.0, f64::max);
        Ok(HolderNorm { per_level, max })
    }

    /// All pairs `s < t` of `points` uniformly spaced points on the horizon.
    pub fn uniform_pairs(&self, points: usize) -> Vec<(f64, f64)> {
        uniform_pairs(self.start, self.end, points)
    }
}

pub fn uniform_pairs(start: f64, end: f64, points: usize) -> Vec<(f64, f64)> {
    let pts: Vec<f64> = (0..points)
        .map(|i| start + (end - start) * i as f64 / (points - 1) as f64)
        .collect();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            out.push((pts[i], pts[j]));
        }
    }
    out
}

/// `e_1 e_2 - e_2 e_1` at the given level.
pub fn area_generator(d: usize, level: usize) -> TensorElement {
    TensorElement::from_terms(
        d,
        level,
        &[(Word::new(vec![1, 2]), 1.0), (Word::new(vec![2, 1]), -1.0)],
    )
    .expect("level >= 2")
}
