//! Empirical checks of the approximate-flow estimates: composition defect of
//! `mu`, convergence of compositions to the flow, the Euler-step (Davie)
//! estimate, and agreement with the classical ODE for smooth controls.
//!
//! Every fitted exponent is a lower bound check: the estimates bound errors
//! from above, so faster decay passes.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::flow::{
    compose_on_points, distance, solve_flow, sup_distance, Partition, StepConfig, StepMap,
};
use crate::ode::rk4_to_tolerance;
use crate::rough_path::{RoughPath, SampledPath};
use crate::vector_fields::VectorFieldSystem;

/// Errors at or below this are treated as integrator/rounding noise.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Fits with an RMS log-residual above this are inconclusive.
pub const MAX_RESIDUAL: f64 = 0.3;

/// Default slack subtracted from theoretical exponents.
pub const SLOPE_TOLERANCE: f64 = 0.15;

/// Central finite-difference step for Jacobians.
pub const JACOBIAN_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Least squares `ln e = intercept + slope ln h`; the residual is the RMS of
/// the log residuals.
pub(crate) fn loglog_fit(points: &[(f64, f64)]) -> LineFit {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(h, _)| h.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    LineFit {
        slope,
        intercept,
        residual,
    }
}

/// Log-log fit of errors against scales.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// `(scale, error)` pairs in the order given.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// Some error sits at the noise floor; the slope is meaningless.
    pub degenerate: bool,
    /// Residual above [`MAX_RESIDUAL`].
    pub inconclusive: bool,
}

impl RateFit {
    pub fn fit(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 4 {
            return Err(invalid(format!(
                "a rate fit needs at least 4 scales, got {}",
                points.len()
            )));
        }
        if points
            .iter()
            .any(|(h, e)| !(*h > 0.0) || !e.is_finite() || *e < 0.0)
        {
            return Err(invalid("rate fit needs positive scales and finite errors"));
        }
        let degenerate = points.iter().any(|(_, e)| *e <= NOISE_FLOOR);
        let clamped: Vec<(f64, f64)> = points
            .iter()
            .map(|&(h, e)| (h, e.max(NOISE_FLOOR)))
            .collect();
        let line = loglog_fit(&clamped);
        Ok(RateFit {
            slope: line.slope,
            intercept: line.intercept,
            residual: line.residual,
            inconclusive: line.residual > MAX_RESIDUAL,
            degenerate,
            points,
        })
    }

    /// Errors strictly decrease as the scale decreases.
    pub fn is_monotone(&self) -> bool {
        let mut sorted = self.points.clone();
        sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
        sorted.windows(2).all(|w| w[1].1 < w[0].1)
    }

    /// Conclusive fit with slope at least `bound`.
    pub fn passes(&self, bound: f64) -> bool {
        !self.degenerate && !self.inconclusive && self.slope.is_finite() && self.slope >= bound
    }

    pub fn to_csv(&self, meta: &[String]) -> String {
        let mut out = String::new();
        for line in meta {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str("scale,error\n");
        for (h, e) in &self.points {
            out.push_str(&format!("{h:e},{e:e}\n"));
        }
        out
    }

    pub fn summary(&self, theoretical_exponent: f64, bound: f64) -> Value {
        json!({
            "slope": self.slope,
            "residual": self.residual,
            "pass": self.passes(bound),
            "theoretical_exponent": theoretical_exponent,
            "lower_bound": bound,
            "degenerate": self.degenerate,
            "inconclusive": self.inconclusive,
            "monotone": self.is_monotone(),
        })
    }
}

/// Composition defect `mu_tu o mu_us - mu_ts` at one triple.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectReport {
    pub s: f64,
    pub u: f64,
    pub t: f64,
    /// Sup over the grid of the state defect.
    pub c0: f64,
    /// `c0` plus the sup over the grid of the Jacobian defect (Frobenius).
    pub c1: f64,
}

fn map_points(maps: &[&StepMap], points: &[Vec<f64>], substeps: usize) -> Result<Vec<Vec<f64>>> {
    points
        .par_iter()
        .map(|p| {
            let mut y = p.clone();
            for (cell, m) in maps.iter().enumerate() {
                m.apply(&mut y, substeps);
                if y.iter().any(|v| !v.is_finite()) {
                    let (start, end) = m.window();
                    return Err(Error::Explosion { cell, start, end });
                }
            }
            Ok(y)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

fn jacobian(maps: &[&StepMap], x: &[f64], substeps: usize) -> Result<Vec<f64>> {
    let m = x.len();
    let mut jac = vec![0.0; m * m];
    for j in 0..m {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += JACOBIAN_STEP;
        xm[j] -= JACOBIAN_STEP;
        let out = map_points(maps, &[xp, xm], substeps)?;
        for i in 0..m {
            jac[i * m + j] = (out[0][i] - out[1][i]) / (2.0 * JACOBIAN_STEP);
        }
    }
    Ok(jac)
}

pub fn approximate_flow_defect(
    sys: &VectorFieldSystem,
    x: &RoughPath,
    s: f64,
    u: f64,
    t: f64,
    points: &[Vec<f64>],
    cfg: &StepConfig,
) -> Result<DefectReport> {
    if !(s <= u && u <= t) {
        return Err(invalid(format!("need s <= u <= t, got ({s}, {u}, {t})")));
    }
    cfg.validate()?;
    let us = StepMap::new(sys, x, s, u)?;
    let tu = StepMap::new(sys, x, u, t)?;
    let ts = StepMap::new(sys, x, s, t)?;
    let composed = map_points(&[&us, &tu], points, cfg.substeps)?;
    let direct = map_points(&[&ts], points, cfg.substeps)?;
    let c0 = sup_distance(&composed, &direct);
    let mut jac_defect = 0.0f64;
    for p in points {
        let a = jacobian(&[&us, &tu], p, cfg.substeps)?;
        let b = jacobian(&[&ts], p, cfg.substeps)?;
        jac_defect = jac_defect.max(distance(&a, &b));
    }
    Ok(DefectReport {
        s,
        u,
        t,
        c0,
        c1: c0 + jac_defect,
    })
}

/// Sup over the grid of `|phi_ts(x) - F(X_ts) Id (x)|`, with `phi` solved to `tol`.
#[allow(clippy::too_many_arguments)]
pub fn davie_defect(
    sys: &VectorFieldSystem,
    x: &RoughPath,
    s: f64,
    t: f64,
    points: &[Vec<f64>],
    tol: f64,
    cfg: &StepConfig,
) -> Result<f64> {
    let flow = solve_flow(sys, x, s, t, points, tol, cfg)?;
    let inc = x.increment(s, t)?;
    let mut worst = 0.0f64;
    for (p, phi) in points.iter().zip(&flow.values) {
        let euler = sys.euler_map(inc.as_tensor(), p)?;
        worst = worst.max(distance(phi, &euler));
    }
    Ok(worst)
}

/// Approximate-flow C0 defects on windows `[s, s + h]` split at the midpoint.
pub fn defect_scaling(
    sys: &VectorFieldSystem,
    x: &RoughPath,
    s: f64,
    scales: &[f64],
    points: &[Vec<f64>],
    cfg: &StepConfig,
) -> Result<RateFit> {
    let errors = scales
        .iter()
        .map(|&h| {
            approximate_flow_defect(sys, x, s, s + 0.5 * h, s + h, points, cfg).map(|r| (h, r.c0))
        })
        .collect::<Result<Vec<_>>>()?;
    RateFit::fit(errors)
}

/// [`davie_defect`] on windows `[s, s + h]`.
pub fn davie_scaling(
    sys: &VectorFieldSystem,
    x: &RoughPath,
    s: f64,
    scales: &[f64],
    points: &[Vec<f64>],
    tol: f64,
    cfg: &StepConfig,
) -> Result<RateFit> {
    let errors = scales
        .iter()
        .map(|&h| davie_defect(sys, x, s, s + h, points, tol, cfg).map(|e| (h, e)))
        .collect::<Result<Vec<_>>>()?;
    RateFit::fit(errors)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SewingReport {
    /// Errors `|phi_ts - mu_pi|` against the dyadic meshes.
    pub fit: RateFit,
    pub reference_depth: usize,
    /// Cauchy gap of the reference against the next coarser mesh.
    pub reference_gap: f64,
    /// Reference gap is at most 1/8 of the coarsest measured error.
    pub reference_ok: bool,
}

/// Number of extra dyadic levels used for the reference flow.
pub const REFERENCE_EXTRA_DEPTH: usize = 4;

/// Distance between `mu_pi` over dyadic partitions of `[s, t]` at the given
/// depths and a reference composed [`REFERENCE_EXTRA_DEPTH`] levels deeper.
#[allow(clippy::too_many_arguments)]
pub fn sewing_rate(
    sys: &VectorFieldSystem,
    x: &RoughPath,
    s: f64,
    t: f64,
    points: &[Vec<f64>],
    depths: &[usize],
    cfg: &StepConfig,
) -> Result<SewingReport> {
    if depths.len() < 4 {
        return Err(invalid(format!(
            "sewing rate needs at least 4 meshes, got {}",
            depths.len()
        )));
    }
    if depths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("mesh depths must be strictly increasing"));
    }
    if !(t > s) {
        return Err(invalid("sewing rate needs a window with s < t"));
    }
    let finest = *depths.last().unwrap();
    let reference_depth = finest + REFERENCE_EXTRA_DEPTH;
    let reference = compose_on_points(
        sys,
        x,
        &Partition::dyadic(s, t, reference_depth)?,
        points,
        cfg,
    )?;
    let below = compose_on_points(
        sys,
        x,
        &Partition::dyadic(s, t, reference_depth - 1)?,
        points,
        cfg,
    )?;
    let reference_gap = sup_distance(&reference, &below);
    let errors = depths
        .iter()
        .map(|&k| {
            let partition = Partition::dyadic(s, t, k)?;
            let approx = compose_on_points(sys, x, &partition, points, cfg)?;
            Ok((partition.mesh(), sup_distance(&reference, &approx)))
        })
        .collect::<Result<Vec<_>>>()?;
    let coarsest = errors[0].1;
    Ok(SewingReport {
        fit: RateFit::fit(errors)?,
        reference_depth,
        reference_gap,
        reference_ok: reference_gap <= coarsest / 8.0,
    })
}

/// Ratio of the fitted sewing constants `max_k err_k / mesh_k^{a-1}` on
/// `[s, s + 2 len]` and `[s, s + len]`, compared at equal meshes.
#[allow(clippy::too_many_arguments)]
pub fn sewing_horizon_ratio(
    sys: &VectorFieldSystem,
    x: &RoughPath,
    s: f64,
    len: f64,
    points: &[Vec<f64>],
    depths: &[usize],
    cfg: &StepConfig,
) -> Result<f64> {
    let a = x.exponent().defect_exponent();
    let constant = |fit: &RateFit| {
        fit.points
            .iter()
            .map(|(h, e)| e / h.powf(a - 1.0))
            .fold(0.0, f64::max)
    };
    let short = sewing_rate(sys, x, s, s + len, points, depths, cfg)?;
    let shifted: Vec<usize> = depths.iter().map(|k| k + 1).collect();
    let long = sewing_rate(sys, x, s, s + 2.0 * len, points, &shifted, cfg)?;
    Ok(constant(&long.fit) / constant(&short.fit))
}

/// Solves `y' = sum_i V_i(y) h'^i` piece by piece with RK4 step doubling.
pub fn reference_ode(
    sys: &VectorFieldSystem,
    h: &SampledPath,
    s: f64,
    t: f64,
    point: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    if sys.driving_dim() != h.dim() {
        return Err(invalid(
            "control and vector fields disagree on the dimension",
        ));
    }
    let knots = h.breakpoints(s, t);
    let mut y = point.to_vec();
    for (cell, w) in knots.windows(2).enumerate() {
        let v = h.velocity_at(0.5 * (w[0] + w[1]));
        let f = |y: &[f64], out: &mut [f64]| sys.eval_combination(&v, y, out);
        y = rk4_to_tolerance(f, &y, w[1] - w[0], tol, 24).ok_or(Error::NotConverged {
            tol,
            gaps: Vec::new(),
        })?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Explosion {
                cell,
                start: w[0],
                end: w[1],
            });
        }
    }
    Ok(y)
}

/// Sup over the grid of `|phi_{T t_0}(x) - y_T(x)|` for the lift of `h` and
/// the classical solution `y` driven by `h`.
pub fn smooth_limit_check(
    sys: &VectorFieldSystem,
    h: &SampledPath,
    p: f64,
    points: &[Vec<f64>],
    tol: f64,
    cfg: &StepConfig,
) -> Result<f64> {
    let x = RoughPath::pwl_lift(h.clone(), p)?;
    if x.exponent().truncation() != 2 {
        return Err(invalid("smooth-limit check expects p in (2, 3)"));
    }
    let flow = solve_flow(sys, &x, h.start(), h.end(), points, tol, cfg)?;
    let reference = points
        .par_iter()
        .map(|q| reference_ode(sys, h, h.start(), h.end(), q, REFERENCE_ODE_TOL))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(sup_distance(&flow.values, &reference))
}

/// Step-doubling tolerance of the classical reference solve.
pub const REFERENCE_ODE_TOL: f64 = 1e-12;
