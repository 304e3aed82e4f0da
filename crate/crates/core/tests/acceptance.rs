//! Acceptance gate: one timed pass/fail line per criterion.

mod common;

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roughflow::diagnostics::{davie_scaling, defect_scaling, sewing_rate, smooth_limit_check};
use roughflow::fixtures::{four_segment_path, sl2_system, smooth_curve};
use roughflow::flow::{box_grid, flow_property_defect, solve_flow, StepConfig};
use roughflow::poly::Polynomial;
use roughflow::rough_path::{exp_vector, RoughPath, SampledPath};
use roughflow::tensor::TensorElement;
use roughflow::vector_fields::{Observable, PolynomialField, VectorFieldSystem};

const P: f64 = 2.5;
const SLOPE_TOL: f64 = 0.15;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, limit_secs: u64, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed < Duration::from_secs(limit_secs);
    let pass = out.pass && in_time;
    // straight to the stream so the line survives output capture
    let _ = writeln!(
        std::io::stderr(),
        "criterion {id:>2}: {} | {} | {:.2}s (limit {limit_secs}s)",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64()
    );
    pass
}

fn random_tensor(rng: &mut ChaCha8Rng, d: usize, n: usize, scalar: f64) -> TensorElement {
    let len: usize = (0..=n).map(|k| d.pow(k as u32)).sum();
    let mut c: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    c[0] = scalar;
    TensorElement::from_dense(d, n, c).unwrap()
}

fn random_path(rng: &mut ChaCha8Rng, d: usize, segments: usize) -> SampledPath {
    let mut times = vec![0.0];
    let mut points = vec![vec![0.0; d]];
    for _ in 0..segments {
        times.push(times.last().unwrap() + rng.gen_range(0.05..1.0));
        let prev = points.last().unwrap().clone();
        points.push(prev.iter().map(|x| x + rng.gen_range(-1.0..1.0)).collect());
    }
    SampledPath::new(times, points).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut rt, mut assoc, mut sub, mut lie) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let d = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=4);
        let a = random_tensor(&mut rng, d, n, 0.0);
        rt = rt.max(a.exp().unwrap().log().unwrap().sub(&a).unwrap().max_abs());
        let g = random_tensor(&mut rng, d, n, 1.0);
        rt = rt.max(g.log().unwrap().exp().unwrap().sub(&g).unwrap().max_abs());
        let s0 = rng.gen_range(-1.0..1.0);
        let s1 = rng.gen_range(-1.0..1.0);
        let (x, y, z) = (
            random_tensor(&mut rng, d, n, s0),
            random_tensor(&mut rng, d, n, s1),
            random_tensor(&mut rng, d, n, 0.5),
        );
        let lhs = x.mul(&y).unwrap().mul(&z).unwrap();
        assoc = assoc.max(
            lhs.sub(&x.mul(&y.mul(&z).unwrap()).unwrap())
                .unwrap()
                .max_abs(),
        );
        sub = sub.max(x.mul(&y).unwrap().norm().total - x.norm().total * y.norm().total);
        // group-like: exp of a Lie element built from letters and a bracket
        let l1 = random_tensor(&mut rng, d, n, 0.0).project(1);
        let l2 = random_tensor(&mut rng, d, n, 0.0).project(1);
        let bracket = l1.mul(&l2).unwrap().sub(&l2.mul(&l1).unwrap()).unwrap();
        let grouplike = l1
            .add(&bracket)
            .unwrap()
            .exp()
            .unwrap()
            .mul(&l2.exp().unwrap())
            .unwrap();
        lie = lie.max(grouplike.log().unwrap().lie_defect().unwrap());
    }
    Outcome {
        pass: rt <= 1e-12 && assoc <= 1e-12 && sub <= 1e-12 && lie <= 1e-10,
        detail: format!(
            "round-trip {rt:.1e}, associativity {assoc:.1e}, submultiplicativity excess {sub:.1e}, Lie defect {lie:.1e}"
        ),
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut chen, mut shuffle) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let d = rng.gen_range(1..=3);
        let segs = rng.gen_range(1..=8);
        let path = random_path(&mut rng, d, segs);
        let (s, t) = (path.start(), path.end());
        let u = rng.gen_range(s..t);
        let whole = path.signature(s, t, 4).unwrap();
        let split = path
            .signature(s, u, 4)
            .unwrap()
            .mul(&path.signature(u, t, 4).unwrap())
            .unwrap();
        chen = chen.max(whole.as_tensor().sub(split.as_tensor()).unwrap().max_abs());
        // independent check of the product of segment exponentials
        let mut prod = TensorElement::one(d, 4);
        for w in path.points().windows(2) {
            let inc: Vec<f64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
            let e = sparse_exp(&to_sparse(&exp_vector(4, &inc).project(1)), 4);
            let e = TensorElement::from_terms(
                d,
                4,
                &e.iter()
                    .map(|(w, c)| (roughflow::tensor::Word::new(w.clone()), *c))
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            prod = prod.mul(&e).unwrap();
        }
        chen = chen.max(whole.as_tensor().sub(&prod).unwrap().max_abs());
        shuffle = shuffle.max(whole.as_tensor().shuffle_defect());
    }
    Outcome {
        pass: chen <= 1e-12 && shuffle <= 1e-12,
        detail: format!("Chen {chen:.1e}, shuffle {shuffle:.1e}"),
    }
}

fn random_poly(rng: &mut ChaCha8Rng, degree: u32) -> Polynomial {
    let mut p = Polynomial::zero(2);
    for a in 0..=degree {
        for b in 0..=(degree - a) {
            p.add_term(vec![a, b], rng.gen_range(-1.0..1.0));
        }
    }
    p
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut morph, mut leib) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let fields = (0..2)
            .map(|_| {
                PolynomialField::new(vec![random_poly(&mut rng, 2), random_poly(&mut rng, 2)])
                    .unwrap()
            })
            .collect();
        let sys = VectorFieldSystem::polynomial(fields, 3).unwrap();
        let da = rng.gen_range(0..=3);
        let keep = [1, 3, 7, 15];
        let trunc = |t: TensorElement, k: usize| {
            let mut c = t.as_slice().to_vec();
            c[k..].iter_mut().for_each(|v| *v = 0.0);
            TensorElement::from_dense(2, 3, c).unwrap()
        };
        let sa = rng.gen_range(-1.0..1.0);
        let sb = rng.gen_range(-1.0..1.0);
        let a = trunc(random_tensor(&mut rng, 2, 3, sa), keep[da]);
        let b = trunc(random_tensor(&mut rng, 2, 3, sb), keep[3 - da]);
        let f = random_poly(&mut rng, 3);
        let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        morph = morph.max(sys.morphism_check(&a, &b, &f, &x).unwrap());

        let path = random_path(&mut rng, 2, 3);
        let lambda = path
            .signature(path.start(), path.end(), 3)
            .unwrap()
            .log()
            .into_tensor();
        let (f, g) = (random_poly(&mut rng, 2), random_poly(&mut rng, 2));
        let op = |h: &Polynomial| {
            sys.apply_operator(&lambda, Observable::Function(h), &x)
                .unwrap()[0]
        };
        leib = leib.max((op(&f.mul(&g)) - f.eval(&x) * op(&g) - g.eval(&x) * op(&f)).abs());
    }
    Outcome {
        pass: morph <= 1e-10 && leib <= 1e-9,
        detail: format!("morphism {morph:.1e}, Leibniz {leib:.1e}"),
    }
}

fn grid5() -> Vec<Vec<f64>> {
    box_grid(&[-1.0, -1.0], &[1.0, 1.0], &[5, 5]).unwrap()
}

fn criterion_4() -> Outcome {
    let sys = sl2_system(2);
    let x = RoughPath::pure_area(2, 1.0, P).unwrap();
    let cfg = StepConfig {
        substeps: 64,
        ..StepConfig::default()
    };
    let (a, b) = sl2();
    let gen: DMatrix<f64> = &b * &a - &a * &b;
    let mut worst = 0.0f64;
    for (s, t) in [(0.0, 1.0), (0.2, 0.7)] {
        let sol = solve_flow(&sys, &x, s, t, &grid5(), 1e-10, &cfg).unwrap();
        for (p, y) in sol.points.iter().zip(&sol.values) {
            worst = worst.max(max_diff(y, &expm_apply(&(&gen * (t - s)), p)));
        }
    }
    Outcome {
        pass: worst <= 1e-9,
        detail: format!("max deviation from exp((t-s)(BA-AB))x {worst:.1e}"),
    }
}

fn criterion_5() -> Outcome {
    let sys = sl2_system(2);
    let h = four_segment_path();
    let cfg = StepConfig::default();
    let err = smooth_limit_check(&sys, &h, P, &grid5(), 1e-8, &cfg).unwrap();
    // linear fields, piecewise-constant velocity: the classical solution is a
    // product of matrix exponentials
    let (a, b) = sl2();
    let x = RoughPath::pwl_lift(h.clone(), P).unwrap();
    let sol = solve_flow(&sys, &x, h.start(), h.end(), &grid5(), 1e-8, &cfg).unwrap();
    let mut exact_err = 0.0f64;
    for (p, y) in sol.points.iter().zip(&sol.values) {
        let mut z = p.clone();
        for w in h.points().windows(2) {
            let m = &a * (w[1][0] - w[0][0]) + &b * (w[1][1] - w[0][1]);
            z = expm_apply(&m, &z);
        }
        exact_err = exact_err.max(max_diff(y, &z));
    }
    Outcome {
        pass: err <= 1e-6 && exact_err <= 1e-6,
        detail: format!("vs RK reference {err:.1e}, vs matrix-exponential product {exact_err:.1e}"),
    }
}

fn scales() -> Vec<f64> {
    (3..=7).map(|k| 0.5f64.powi(k)).collect()
}

fn fixture() -> RoughPath {
    RoughPath::pwl_lift(smooth_curve(1024), P).unwrap()
}

fn criterion_6() -> Outcome {
    let x = fixture();
    let a = x.exponent().defect_exponent();
    let fit = defect_scaling(
        &sl2_system(2),
        &x,
        0.0,
        &scales(),
        &grid5(),
        &StepConfig::default(),
    )
    .unwrap();
    Outcome {
        pass: fit.passes(a - SLOPE_TOL) && fit.residual <= 0.3,
        detail: format!(
            "slope {:.3} (bound {:.2}), residual {:.3}, degenerate {}",
            fit.slope,
            a - SLOPE_TOL,
            fit.residual,
            fit.degenerate
        ),
    }
}

fn criterion_7() -> Outcome {
    let x = fixture();
    let a = x.exponent().defect_exponent();
    let rep = sewing_rate(
        &sl2_system(2),
        &x,
        0.0,
        1.0,
        &grid5(),
        &[1, 2, 3, 4, 5],
        &StepConfig::default(),
    )
    .unwrap();
    let bound = a - 1.0 - SLOPE_TOL;
    Outcome {
        pass: rep.fit.is_monotone() && rep.fit.passes(bound) && rep.reference_ok,
        detail: format!(
            "slope {:.3} (bound {bound:.2}), monotone {}, residual {:.3}, reference gap {:.1e}",
            rep.fit.slope,
            rep.fit.is_monotone(),
            rep.fit.residual,
            rep.reference_gap
        ),
    }
}

fn criterion_8() -> Outcome {
    let x = fixture();
    let a = x.exponent().defect_exponent();
    let fit = davie_scaling(
        &sl2_system(2),
        &x,
        0.0,
        &scales(),
        &grid5(),
        1e-11,
        &StepConfig::default(),
    )
    .unwrap();
    Outcome {
        pass: fit.passes(a - SLOPE_TOL),
        detail: format!(
            "slope {:.3} (bound {:.2}), residual {:.3}",
            fit.slope,
            a - SLOPE_TOL,
            fit.residual
        ),
    }
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sys = sl2_system(2);
    let x = RoughPath::pwl_lift(smooth_curve(256), P).unwrap();
    let tol = 1e-8;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let mut st = [
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
        ];
        st.sort_by(f64::total_cmp);
        let d = flow_property_defect(
            &sys,
            &x,
            st[0],
            st[1],
            st[2],
            &grid5(),
            tol,
            &StepConfig::default(),
        )
        .unwrap();
        worst = worst.max(d);
    }
    Outcome {
        pass: worst <= 10.0 * tol,
        detail: format!(
            "max flow-property defect {worst:.1e} (bound {:.0e})",
            10.0 * tol
        ),
    }
}

fn criterion_10() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_roughflow"))
            .args(["selfcheck", "--seed", "0"])
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    Outcome {
        pass: same && a.status.success() && b.status.success(),
        detail: format!(
            "byte-identical {same}, exit codes {:?}/{:?}",
            a.status.code(),
            b.status.code()
        ),
    }
}

#[test]
fn acceptance() {
    let results = [
        report(1, 5, criterion_1),
        report(2, 10, criterion_2),
        report(3, 10, criterion_3),
        report(4, 5, criterion_4),
        report(5, 30, criterion_5),
        report(6, 60, criterion_6),
        report(7, 60, criterion_7),
        report(8, 60, criterion_8),
        report(9, 30, criterion_9),
        report(10, 120, criterion_10),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
