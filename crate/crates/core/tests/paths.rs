mod common;

use common::*;
use proptest::prelude::*;
use roughflow::rough_path::{area_generator, exp_vector, HolderExponent, RoughPath, SampledPath};
use roughflow::tensor::{TensorElement, Word};

fn pwl_paths() -> impl Strategy<Value = SampledPath> {
    (1usize..=3, 1usize..=8).prop_flat_map(|(d, segs)| {
        (
            prop::collection::vec(0.05f64..1.0, segs),
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), segs),
        )
            .prop_map(move |(dts, incs)| {
                let mut times = vec![0.0];
                let mut points = vec![vec![0.0; d]];
                for (dt, inc) in dts.iter().zip(&incs) {
                    times.push(times.last().unwrap() + dt);
                    let prev = points.last().unwrap().clone();
                    points.push(prev.iter().zip(inc).map(|(a, b)| a + b).collect());
                }
                SampledPath::new(times, points).unwrap()
            })
    })
}

/// Level-2 signature from the increments:
/// `S^{ij} = sum_{a<b} D^i_a D^j_b + 1/2 sum_a D^i_a D^j_a`.
fn level_two(path: &SampledPath) -> Vec<Vec<f64>> {
    let d = path.dim();
    let pts = path.points();
    let incs: Vec<Vec<f64>> = pts
        .windows(2)
        .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect())
        .collect();
    let mut s = vec![vec![0.0; d]; d];
    for (a, da) in incs.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                s[i][j] += 0.5 * da[i] * da[j];
                for db in &incs[a + 1..] {
                    s[i][j] += da[i] * db[j];
                }
            }
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn signature_levels_one_and_two(path in pwl_paths()) {
        let sig = path.signature(path.start(), path.end(), 3).unwrap();
        let sig = sig.as_tensor();
        let d = path.dim();
        let first = path.points().first().unwrap();
        let last = path.points().last().unwrap();
        let s2 = level_two(&path);
        for i in 0..d {
            prop_assert!((sig.coeff(&Word::new(vec![i + 1])) - (last[i] - first[i])).abs() < 1e-12);
            for (j, expected) in s2[i].iter().enumerate() {
                prop_assert!((sig.coeff(&Word::new(vec![i + 1, j + 1])) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chen_and_shuffle(path in pwl_paths(), f1 in 0.0f64..1.0, f2 in 0.0f64..1.0) {
        let (lo, hi) = (f1.min(f2), f1.max(f2));
        let span = path.end() - path.start();
        let (s, u, t) = (path.start() + lo * span, path.start() + 0.5 * (lo + hi) * span, path.start() + hi * span);
        let whole = path.signature(s, t, 4).unwrap();
        let split = path.signature(s, u, 4).unwrap().mul(&path.signature(u, t, 4).unwrap()).unwrap();
        prop_assert!(whole.as_tensor().sub(split.as_tensor()).unwrap().max_abs() <= 1e-12);
        prop_assert!(whole.as_tensor().shuffle_defect() <= 1e-12);
    }

    #[test]
    fn signature_commutes_with_shift_and_dilation(path in pwl_paths(), dt in -3.0f64..3.0, lambda in -2.0f64..2.0) {
        let sig = path.signature(path.start(), path.end(), 3).unwrap().into_tensor();
        let shifted = path.shifted(dt);
        let sig_shift = shifted.signature(shifted.start(), shifted.end(), 3).unwrap().into_tensor();
        prop_assert!(sig.sub(&sig_shift).unwrap().max_abs() <= 1e-12);
        let scaled = path.scaled(lambda);
        let sig_scaled = scaled.signature(scaled.start(), scaled.end(), 3).unwrap().into_tensor();
        prop_assert!(sig.dilate(lambda).sub(&sig_scaled).unwrap().max_abs() <= 1e-11);
    }
}

#[test]
fn single_segment_is_exponential_of_the_increment() {
    let path = SampledPath::new(vec![0.0, 2.0], vec![vec![1.0, -1.0], vec![1.5, 0.5]]).unwrap();
    let sig = path.signature(0.0, 2.0, 4).unwrap().into_tensor();
    let inc = tensor(2, 4, &[("1", 0.5), ("2", 1.5)]);
    let oracle = sparse_exp(&to_sparse(&inc), 4);
    assert!(sparse_dist(&to_sparse(&sig), &oracle) < 1e-14);
    assert!(sparse_dist(&to_sparse(&exp_vector(4, &[0.5, 1.5])), &oracle) < 1e-14);
    // a sub-window of the segment scales the increment
    let half = path.signature(0.5, 1.5, 2).unwrap().into_tensor();
    assert!((half.coeff(&Word::new(vec![2, 2])) - 0.75f64.powi(2) / 2.0).abs() < 1e-14);
}

#[test]
fn csv_round_trip_and_errors() {
    let text = "# comment\nt,x1,x2\n0,0,0\n0.5,1,0\n1,1,1\n";
    let path = SampledPath::from_csv(text.as_bytes()).unwrap();
    assert_eq!(path.dim(), 2);
    assert_eq!(path.times(), &[0.0, 0.5, 1.0]);
    assert_eq!(path.value_at(0.75), vec![1.0, 0.5]);
    assert_eq!(path.velocity_at(0.25), vec![2.0, 0.0]);
    assert!(SampledPath::from_csv("t,x1\n0,0\n0,1\n".as_bytes()).is_err());
    assert!(SampledPath::from_csv("t,x1\n0,0\n1,1,2\n".as_bytes()).is_err());
    assert!(SampledPath::from_csv("s,x1\n0,0\n1,1\n".as_bytes()).is_err());
    assert!(path.signature(0.5, 0.2, 2).is_err());
    assert!(path.signature(0.0, 2.0, 2).is_err());
}

#[test]
fn pure_area_increments() {
    let x = RoughPath::pure_area(2, 1.0, 2.5).unwrap();
    let inc = x.increment(0.2, 0.7).unwrap().into_tensor();
    let oracle = sparse_exp(&to_sparse(&area_generator(2, 2).scaled(0.5)), 2);
    assert!(sparse_dist(&to_sparse(&inc), &oracle) < 1e-15);
    assert_eq!(inc.level_slice(1), &[0.0, 0.0]);
    // Chen over an arbitrary split
    let split = x
        .increment(0.2, 0.45)
        .unwrap()
        .mul(&x.increment(0.45, 0.7).unwrap())
        .unwrap();
    assert!(split.as_tensor().sub(&inc).unwrap().max_abs() < 1e-15);
    // level-2 ratio |X_ts| / |t-s|^{2/p} = 2 |t-s|^{1/5}: worst on the whole horizon
    let norm = x.holder_norm(&x.uniform_pairs(5)).unwrap();
    assert_eq!(norm.per_level[0], 0.0);
    assert!((norm.per_level[1] - 2.0).abs() < 1e-12);
    assert!(RoughPath::pure_area(2, 1.0, 3.5).is_err());
    assert!(RoughPath::pure_area(1, 1.0, 2.5).is_err());
}

#[test]
fn log_linear_driver() {
    let lambda = tensor(2, 2, &[("1", 0.3), ("1.2", 0.5), ("2.1", -0.5)]);
    let x = RoughPath::log_linear(lambda.clone(), 2.5).unwrap();
    let inc = x.increment(0.1, 0.6).unwrap();
    assert!(
        inc.log()
            .as_tensor()
            .sub(&lambda.scaled(0.5))
            .unwrap()
            .max_abs()
            < 1e-15
    );
    assert!(RoughPath::log_linear(
        tensor(2, 2, &[("1.1", 1.0), ("1", 1.0)])
            .sub(&tensor(2, 2, &[("1.1", 0.5)]))
            .unwrap(),
        2.5
    )
    .is_err());
    assert!(RoughPath::log_linear(TensorElement::zero(2, 3), 2.5).is_err());
    let moved = x.with_horizon(2.0, 5.0).unwrap();
    assert!(moved.increment(2.0, 5.0).is_ok());
    assert!(moved.increment(1.0, 3.0).is_err());
}

#[test]
fn exponent_bookkeeping() {
    let e = HolderExponent::new(2.5).unwrap();
    assert_eq!(e.truncation(), 2);
    assert!((e.defect_exponent() - 1.2).abs() < 1e-15);
    assert_eq!(HolderExponent::new(3.0).unwrap().truncation(), 3);
    assert!(HolderExponent::new(2.0).is_err());
    assert!(HolderExponent::new(f64::NAN).is_err());
}
