//! Log-ODE approximate flow, its composition over partitions, and the flow
//! obtained as the limit of compositions over dyadic refinements.
//!
//! `mu_ts` is the time-one map of `y' = F(Lambda_ts) Id (y)` with
//! `Lambda_ts = log X_ts`, integrated with fixed-step RK4.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::diagnostics::loglog_fit;
use crate::error::{invalid, Error, Result};
use crate::ode::rk4;
use crate::rough_path::RoughPath;
use crate::tensor::{DEFAULT_TOL, NORM_CHOICE};
use crate::vector_fields::{LieField, VectorFieldSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    /// RK4 substeps per unit-time log-ODE solve.
    pub substeps: usize,
    /// Deepest dyadic level tried by [`solve_flow`].
    pub max_depth: usize,
    /// Cap on the coarsest mesh; `None` starts from the whole window.
    pub delta: Option<f64>,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            substeps: 64,
            max_depth: 16,
            delta: None,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.substeps == 0 {
            return Err(invalid("substeps must be at least 1"));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0) {
                return Err(invalid("delta must be positive"));
            }
        }
        Ok(())
    }
}

/// Strictly increasing times `s = s_0 < ... < s_n = t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    times: Vec<f64>,
}

impl Partition {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(invalid("a partition needs at least two points"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("partition times must be strictly increasing"));
        }
        Ok(Partition { times })
    }

    /// `2^depth` equal cells of `[s, t]`.
    pub fn dyadic(s: f64, t: f64, depth: usize) -> Result<Self> {
        let n = 1usize << depth;
        let mut times: Vec<f64> = (0..=n).map(|i| s + (t - s) * i as f64 / n as f64).collect();
        times[n] = t;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn mesh(&self) -> f64 {
        self.cells().map(|(a, b)| b - a).fold(0.0, f64::max)
    }
}

/// A precompiled `mu_ts`.
#[derive(Clone)]
pub struct StepMap {
    start: f64,
    end: f64,
    field: LieField,
}

impl StepMap {
    pub fn new(sys: &VectorFieldSystem, x: &RoughPath, s: f64, t: f64) -> Result<Self> {
        check_compatible(sys, x)?;
        let lambda = x.log_increment(s, t)?;
        let def = lambda.lie_defect()?;
        if def > DEFAULT_TOL * lambda.norm().total.max(1.0) {
            return Err(Error::NotLie(def));
        }
        Ok(StepMap {
            start: s,
            end: t,
            field: sys.lie_field_unchecked(&lambda),
        })
    }

    pub fn window(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn apply(&self, y: &mut [f64], substeps: usize) {
        if self.start == self.end {
            return;
        }
        rk4(|y, out| self.field.eval_into(y, out), y, 1.0, substeps);
    }
}

fn check_compatible(sys: &VectorFieldSystem, x: &RoughPath) -> Result<()> {
    if sys.driving_dim() != x.dim() {
        return Err(invalid(format!(
            "driver has dimension {}, vector field system has {} fields",
            x.dim(),
            sys.driving_dim()
        )));
    }
    if x.level() > sys.max_derivative() + 1 {
        return Err(invalid(format!(
            "truncation level {} needs derivatives of order {}, system has {}",
            x.level(),
            x.level() - 1,
            sys.max_derivative()
        )));
    }
    Ok(())
}

fn check_point(sys: &VectorFieldSystem, x: &[f64]) -> Result<()> {
    if x.len() != sys.state_dim() {
        return Err(invalid(format!(
            "state point has dimension {}, expected {}",
            x.len(),
            sys.state_dim()
        )));
    }
    Ok(())
}

/// `mu_ts(x)`.
pub fn approx_flow_step(
    sys: &VectorFieldSystem,
    x: &RoughPath,
    s: f64,
    t: f64,
    point: &[f64],
    cfg: &StepConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_point(sys, point)?;
    let map = StepMap::new(sys, x, s, t)?;
    let mut y = point.to_vec();
    map.apply(&mut y, cfg.substeps);
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Explosion {
            cell: 0,
            start: s,
            end: t,
        });
    }
    Ok(y)
}

/// `mu_{s_n s_{n-1}} o ... o mu_{s_1 s_0} (x)`.
pub fn compose_over_partition(
    sys: &VectorFieldSystem,
    x: &RoughPath,
    partition: &Partition,
    point: &[f64],
    cfg: &StepConfig,
) -> Result<Vec<f64>> {
    Ok(compose_on_points(sys, x, partition, &[point.to_vec()], cfg)?.remove(0))
}

/// [`compose_over_partition`] for many initial points; the cell maps are
/// compiled once and points are processed in parallel.
pub fn compose_on_points(
    sys: &VectorFieldSystem,
    x: &RoughPath,
    partition: &Partition,
    points: &[Vec<f64>],
    cfg: &StepConfig,
) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    for p in points {
        check_point(sys, p)?;
    }
    let maps = partition
        .cells()
        .map(|(a, b)| StepMap::new(sys, x, a, b))
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<Result<Vec<f64>>> = points
        .par_iter()
        .map(|p| {
            let mut y = p.clone();
            for (cell, map) in maps.iter().enumerate() {
                map.apply(&mut y, cfg.substeps);
                if y.iter().any(|v| !v.is_finite()) {
                    let (start, end) = map.window();
                    return Err(Error::Explosion { cell, start, end });
                }
            }
            Ok(y)
        })
        .collect();
    results.into_iter().collect()
}

/// Euclidean distance between state points.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Sup over paired points of [`distance`].
pub fn sup_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| distance(x, y))
        .fold(0.0, f64::max)
}

/// Uniform tensor grid over the box `[lower, upper]`, first coordinate slowest.
pub fn box_grid(lower: &[f64], upper: &[f64], resolution: &[usize]) -> Result<Vec<Vec<f64>>> {
    if lower.len() != upper.len() || lower.len() != resolution.len() || lower.is_empty() {
        return Err(invalid(
            "grid lower/upper/resolution must share a positive length",
        ));
    }
    if resolution.contains(&0) {
        return Err(invalid("grid resolution entries must be positive"));
    }
    let axes: Vec<Vec<f64>> = lower
        .iter()
        .zip(upper)
        .zip(resolution)
        .map(|((&lo, &hi), &r)| {
            if r == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                (0..r)
                    .map(|i| lo + (hi - lo) * i as f64 / (r - 1) as f64)
                    .collect()
            }
        })
        .collect();
    let mut points = vec![Vec::new()];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

/// Constants attached to a solve: `a = ([p] + 1) / p`, the empirical `c_1`
/// and the configured `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowConstants {
    pub a: f64,
    pub c1: f64,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub s: f64,
    pub t: f64,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
    /// Mesh of the returned iterate.
    pub mesh: f64,
    pub depth: usize,
    /// Sup-over-grid distance between the last two iterates.
    pub cauchy_gap: f64,
    /// `(mesh of the finer iterate, gap)` for each refinement.
    pub gap_history: Vec<(f64, f64)>,
    /// Log-log slope of the gap history against the mesh, when fittable.
    pub gap_rate: Option<f64>,
    /// False when the last gaps decay slower than `2^{a-1}` per halving.
    pub asymptotic: bool,
    pub substeps: usize,
    pub tolerance: f64,
    pub constants: FlowConstants,
}

impl FlowSolution {
    /// CSV with columns `x_in1..., phi_out1...`, preceded by `meta` lines
    /// written as `# ` comments.
    pub fn to_csv(&self, meta: &[String]) -> String {
        let mut out = String::new();
        for line in meta {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        let m = self.points.first().map_or(0, |p| p.len());
        let mut header: Vec<String> = (1..=m).map(|i| format!("x_in{i}")).collect();
        header.extend((1..=m).map(|i| format!("phi_out{i}")));
        out.push_str(&header.join(","));
        out.push('\n');
        for (p, v) in self.points.iter().zip(&self.values) {
            let row: Vec<String> = p.iter().chain(v).map(|x| format!("{x:e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn sidecar(&self, p: f64) -> Value {
        json!({
            "p": p,
            "a": self.constants.a,
            "c1": self.constants.c1,
            "delta": self.constants.delta,
            "s": self.s,
            "t": self.t,
            "mesh": self.mesh,
            "depth": self.depth,
            "cauchy_gap": self.cauchy_gap,
            "gap_history": self.gap_history,
            "gap_rate": self.gap_rate,
            "asymptotic": self.asymptotic,
            "tolerance": self.tolerance,
            "M": self.substeps,
            "norm_choice": NORM_CHOICE,
        })
    }
}

/// The flow `phi_ts` on `points`: compositions of `mu` over dyadic partitions
/// of `[s, t]` are refined until successive iterates differ by at most `tol`.
pub fn solve_flow(
    sys: &VectorFieldSystem,
    x: &RoughPath,
    s: f64,
    t: f64,
    points: &[Vec<f64>],
    tol: f64,
    cfg: &StepConfig,
) -> Result<FlowSolution> {
    cfg.validate()?;
    check_compatible(sys, x)?;
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    if s > t {
        return Err(invalid(format!(
            "solve window needs s <= t, got [{s}, {t}]"
        )));
    }
    for p in points {
        check_point(sys, p)?;
    }
    let a = x.exponent().defect_exponent();
    let constants = FlowConstants {
        a,
        c1: 0.0,
        delta: cfg.delta,
    };
    let len = t - s;
    if len == 0.0 {
        return Ok(FlowSolution {
            s,
            t,
            points: points.to_vec(),
            values: points.to_vec(),
            mesh: 0.0,
            depth: 0,
            cauchy_gap: 0.0,
            gap_history: Vec::new(),
            gap_rate: None,
            asymptotic: true,
            substeps: cfg.substeps,
            tolerance: tol,
            constants,
        });
    }
    let mut depth = 0;
    if let Some(delta) = cfg.delta {
        while len / (1u64 << depth) as f64 > delta && depth < cfg.max_depth {
            depth += 1;
        }
    }
    let mut prev = compose_on_points(sys, x, &Partition::dyadic(s, t, depth)?, points, cfg)?;
    let mut history: Vec<(f64, f64)> = Vec::new();
    while depth < cfg.max_depth {
        depth += 1;
        let mesh = len / (1u64 << depth) as f64;
        let cur = compose_on_points(sys, x, &Partition::dyadic(s, t, depth)?, points, cfg)?;
        let gap = sup_distance(&prev, &cur);
        history.push((mesh, gap));
        prev = cur;
        if gap <= tol {
            let (gap_rate, asymptotic) = gap_behaviour(&history, a);
            let c1 = history
                .iter()
                .map(|&(h, g)| (g / (len * (2.0 * h).powf(a - 1.0))).sqrt())
                .fold(0.0, f64::max);
            return Ok(FlowSolution {
                s,
                t,
                points: points.to_vec(),
                values: prev,
                mesh,
                depth,
                cauchy_gap: gap,
                gap_history: history,
                gap_rate,
                asymptotic,
                substeps: cfg.substeps,
                tolerance: tol,
                constants: FlowConstants { c1, ..constants },
            });
        }
    }
    Err(Error::NotConverged {
        tol,
        gaps: history.into_iter().map(|(_, g)| g).collect(),
    })
}

fn gap_behaviour(history: &[(f64, f64)], a: f64) -> (Option<f64>, bool) {
    let usable: Vec<(f64, f64)> = history.iter().copied().filter(|&(_, g)| g > 0.0).collect();
    let rate = if usable.len() >= 2 {
        Some(loglog_fit(&usable).slope)
    } else {
        None
    };
    let asymptotic = match history {
        [.., (_, g0), (_, g1)] if *g0 > 0.0 => g0 / g1.max(f64::MIN_POSITIVE) >= 2f64.powf(a - 1.1),
        _ => true,
    };
    (rate, asymptotic)
}

/// Sup over `points` of `|phi_tu(phi_us(x)) - phi_ts(x)|`, each flow solved
/// to `tol`.
#[allow(clippy::too_many_arguments)]
pub fn flow_property_defect(
    sys: &VectorFieldSystem,
    x: &RoughPath,
    s: f64,
    u: f64,
    t: f64,
    points: &[Vec<f64>],
    tol: f64,
    cfg: &StepConfig,
) -> Result<f64> {
    if !(s <= u && u <= t) {
        return Err(invalid(format!("need s <= u <= t, got ({s}, {u}, {t})")));
    }
    let first = solve_flow(sys, x, s, u, points, tol, cfg)?;
    let second = solve_flow(sys, x, u, t, &first.values, tol, cfg)?;
    let direct = solve_flow(sys, x, s, t, points, tol, cfg)?;
    Ok(sup_distance(&second.values, &direct.values))
}
