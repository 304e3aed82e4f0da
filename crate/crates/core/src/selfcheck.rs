//! Seeded invariant suite behind `roughflow selfcheck`.
//!
//! The report is plain text and depends only on the seed: random draws come
//! from a seeded ChaCha stream and parallel work is collected in input order.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{davie_scaling, defect_scaling, sewing_rate, smooth_limit_check};
use crate::error::Result;
use crate::fixtures::{four_segment_path, sl2_system, smooth_curve};
use crate::flow::{box_grid, flow_property_defect, solve_flow, StepConfig};
use crate::poly::Polynomial;
use crate::rough_path::{RoughPath, SampledPath};
use crate::tensor::{TensorElement, NORM_CHOICE};
use crate::vector_fields::{Observable, PolynomialField, VectorFieldSystem};

/// One line of the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    /// `value <= bound` if true, `value >= bound` otherwise.
    pub upper: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, bound: f64) -> Self {
        Check {
            name,
            value,
            bound,
            upper: true,
        }
    }

    fn at_least(name: &'static str, value: f64, bound: f64) -> Self {
        Check {
            name,
            value,
            bound,
            upper: false,
        }
    }

    pub fn passed(&self) -> bool {
        if self.upper {
            self.value <= self.bound
        } else {
            self.value >= self.bound
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# roughflow selfcheck");
        let _ = writeln!(
            out,
            "# seed={} norm_choice={NORM_CHOICE} p=2.5 substeps=64",
            self.seed
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<26} {:>12.4e} {} {:>9.2e}  {}",
                c.name,
                c.value,
                if c.upper { "<=" } else { ">=" },
                c.bound,
                if c.passed() { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "overall {}",
            if self.passed() { "PASS" } else { "FAIL" }
        );
        out
    }
}

/// Coefficients uniform in `[-scale, scale]`, scalar part `scalar`.
pub fn random_tensor(
    rng: &mut impl Rng,
    d: usize,
    n: usize,
    scale: f64,
    scalar: f64,
) -> TensorElement {
    let len = TensorElement::zero(d, n).as_slice().len();
    let mut coeffs: Vec<f64> = (0..len).map(|_| rng.gen_range(-scale..=scale)).collect();
    coeffs[0] = scalar;
    TensorElement::from_dense(d, n, coeffs).expect("dense length")
}

/// Piecewise-linear path on `[0, 1]` with `segments` pieces and increments
/// uniform in `[-1, 1]`.
pub fn random_pwl_path(rng: &mut impl Rng, d: usize, segments: usize) -> SampledPath {
    let mut cuts: Vec<f64> = (1..segments).map(|_| rng.gen_range(0.02..0.98)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut times = vec![0.0];
    times.extend(cuts);
    times.push(1.0);
    let mut x = vec![0.0; d];
    let mut points = vec![x.clone()];
    for _ in 1..times.len() {
        for xi in x.iter_mut() {
            *xi += rng.gen_range(-1.0..=1.0);
        }
        points.push(x.clone());
    }
    SampledPath::new(times, points).expect("increasing times")
}

fn truncated(t: TensorElement, keep: usize) -> TensorElement {
    let mut c = t.as_slice().to_vec();
    c[keep..].iter_mut().for_each(|v| *v = 0.0);
    TensorElement::from_dense(t.dim(), t.level(), c).expect("dense length")
}

fn random_polynomial(rng: &mut impl Rng, m: usize, degree: u32) -> Polynomial {
    let mut p = Polynomial::zero(m);
    for a in 0..=degree {
        for b in 0..=(degree - a) {
            p.add_term(vec![a, b], rng.gen_range(-1.0..=1.0));
        }
    }
    p
}

/// Linear fields `A`, `B` plus small quadratic terms.
fn quadratic_system(rng: &mut impl Rng) -> VectorFieldSystem {
    let base = [[[0.0, 1.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]];
    let fields = base
        .iter()
        .map(|rows| {
            let comps = (0..2)
                .map(|c| {
                    let mut p = Polynomial::zero(2);
                    p.add_term(vec![1, 0], rows[c][0]);
                    p.add_term(vec![0, 1], rows[c][1]);
                    p.add_term(vec![2, 0], 0.3 * rng.gen_range(-1.0..=1.0));
                    p.add_term(vec![1, 1], 0.3 * rng.gen_range(-1.0..=1.0));
                    p
                })
                .collect();
            PolynomialField::new(comps).expect("dims")
        })
        .collect();
    VectorFieldSystem::polynomial(fields, 3).expect("dims")
}

fn algebra_checks(rng: &mut impl Rng, checks: &mut Vec<Check>) -> Result<()> {
    let (mut roundtrip, mut assoc, mut submult, mut lie) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let d = rng.gen_range(2..=3);
        let n = rng.gen_range(2..=4);
        let a = random_tensor(rng, d, n, 0.5, 0.0);
        roundtrip = roundtrip.max(a.exp()?.log()?.sub(&a)?.max_abs());
        let g = random_tensor(rng, d, n, 0.3, 1.0);
        roundtrip = roundtrip.max(g.log()?.exp()?.sub(&g)?.max_abs());
        let (x, y, z) = (
            random_tensor(rng, d, n, 1.0, 1.0),
            random_tensor(rng, d, n, 1.0, -0.5),
            random_tensor(rng, d, n, 1.0, 0.0),
        );
        assoc = assoc.max(x.mul(&y)?.mul(&z)?.sub(&x.mul(&y.mul(&z)?)?)?.max_abs());
        submult = submult.max(x.mul(&y)?.norm().total - x.norm().total * y.norm().total);
        let sig = random_pwl_path(rng, d, 4).signature(0.0, 1.0, n)?;
        lie = lie.max(sig.log().as_tensor().lie_defect()?);
    }
    checks.push(Check::at_most("exp_log_roundtrip", roundtrip, 1e-12));
    checks.push(Check::at_most("associativity", assoc, 1e-12));
    checks.push(Check::at_most("submultiplicativity", submult, 1e-12));
    checks.push(Check::at_most("log_grouplike_is_lie", lie, 1e-10));
    Ok(())
}

fn path_checks(rng: &mut impl Rng, checks: &mut Vec<Check>) -> Result<()> {
    let (mut chen, mut shuffle) = (0.0f64, 0.0f64);
    for _ in 0..5 {
        let path = random_pwl_path(rng, 2, 8);
        let u = rng.gen_range(0.1..0.9);
        let whole = path.signature(0.0, 1.0, 4)?;
        let split = path
            .signature(0.0, u, 4)?
            .mul(&path.signature(u, 1.0, 4)?)?;
        chen = chen.max(whole.as_tensor().sub(split.as_tensor())?.max_abs());
        shuffle = shuffle.max(whole.as_tensor().shuffle_defect());
    }
    checks.push(Check::at_most("chen", chen, 1e-12));
    checks.push(Check::at_most("shuffle", shuffle, 1e-12));
    Ok(())
}

fn field_checks(rng: &mut impl Rng, checks: &mut Vec<Check>) -> Result<()> {
    let sys = quadratic_system(rng);
    let (mut morphism, mut leibniz) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        // degrees 2 and 1 keep the product inside the available derivatives
        let (ca, cb) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        let a3 = truncated(random_tensor(rng, 2, 3, 1.0, ca), 7);
        let b3 = truncated(random_tensor(rng, 2, 3, 1.0, cb), 3);
        let f = random_polynomial(rng, 2, 2);
        let x = [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)];
        morphism = morphism.max(sys.morphism_check(&a3, &b3, &f, &x)?);

        let lambda = random_pwl_path(rng, 2, 3)
            .signature(0.0, 1.0, 3)?
            .log()
            .into_tensor();
        let (f, g) = (random_polynomial(rng, 2, 2), random_polynomial(rng, 2, 2));
        let fg = f.mul(&g);
        let apply = |h: &Polynomial| sys.apply_operator(&lambda, Observable::Function(h), &x);
        let lhs = apply(&fg)?[0];
        let rhs = f.eval(&x) * apply(&g)?[0] + g.eval(&x) * apply(&f)?[0];
        leibniz = leibniz.max((lhs - rhs).abs());
    }
    checks.push(Check::at_most("morphism", morphism, 1e-10));
    checks.push(Check::at_most("leibniz", leibniz, 1e-9));
    Ok(())
}

fn flow_checks(rng: &mut impl Rng, checks: &mut Vec<Check>) -> Result<()> {
    let cfg = StepConfig::default();
    let sys = sl2_system(2);
    let grid = box_grid(&[-1.0, -1.0], &[1.0, 1.0], &[5, 5])?;

    let area = RoughPath::pure_area(2, 1.0, 2.5)?;
    let sol = solve_flow(&sys, &area, 0.0, 1.0, &grid, 1e-10, &cfg)?;
    let exact = grid
        .iter()
        .zip(&sol.values)
        .map(|(x, y)| ((y[0] - (-1.0f64).exp() * x[0]).abs()).max((y[1] - 1f64.exp() * x[1]).abs()))
        .fold(0.0, f64::max);
    checks.push(Check::at_most("exact_flow", exact, 1e-9));

    let smooth = smooth_limit_check(&sys, &four_segment_path(), 2.5, &grid, 1e-8, &cfg)?;
    checks.push(Check::at_most("smooth_limit", smooth, 1e-6));

    let curve = RoughPath::pwl_lift(smooth_curve(64), 2.5)?;
    let mut flow_prop = 0.0f64;
    for _ in 0..3 {
        let mut st = [
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
        ];
        st.sort_by(f64::total_cmp);
        flow_prop = flow_prop.max(flow_property_defect(
            &sys, &curve, st[0], st[1], st[2], &grid, 1e-8, &cfg,
        )?);
    }
    checks.push(Check::at_most("flow_property", flow_prop, 1e-7));

    let fixture = RoughPath::pwl_lift(smooth_curve(1024), 2.5)?;
    let a = fixture.exponent().defect_exponent();
    let scales: Vec<f64> = (3..=7).map(|k| 0.5f64.powi(k)).collect();
    let coarse = box_grid(&[-1.0, -1.0], &[1.0, 1.0], &[3, 3])?;
    let defect = defect_scaling(&sys, &fixture, 0.0, &scales, &coarse, &cfg)?;
    checks.push(Check::at_least(
        "defect_slope",
        conclusive(&defect),
        a - 0.15,
    ));
    let davie = davie_scaling(&sys, &fixture, 0.0, &scales, &coarse, 1e-11, &cfg)?;
    checks.push(Check::at_least("davie_slope", conclusive(&davie), a - 0.15));
    let sewing = sewing_rate(&sys, &fixture, 0.0, 1.0, &coarse, &[1, 2, 3, 4, 5], &cfg)?;
    let sewing_slope = if sewing.fit.is_monotone() && sewing.reference_ok {
        conclusive(&sewing.fit)
    } else {
        f64::NEG_INFINITY
    };
    checks.push(Check::at_least(
        "sewing_slope",
        sewing_slope,
        a - 1.0 - 0.15,
    ));
    Ok(())
}

/// The fitted slope, or `-inf` for degenerate or inconclusive fits.
fn conclusive(fit: &crate::diagnostics::RateFit) -> f64 {
    if fit.degenerate || fit.inconclusive {
        f64::NEG_INFINITY
    } else {
        fit.slope
    }
}

pub fn run(seed: u64) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    algebra_checks(&mut rng, &mut checks)?;
    path_checks(&mut rng, &mut checks)?;
    field_checks(&mut rng, &mut checks)?;
    flow_checks(&mut rng, &mut checks)?;
    Ok(Report { seed, checks })
}
