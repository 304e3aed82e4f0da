//! Drivers and field systems shared by the self-check, the CLI defaults and
//! the test suites.

use std::f64::consts::PI;

use crate::rough_path::SampledPath;
use crate::vector_fields::{PolynomialField, VectorFieldSystem};

/// Nilpotent generators `A = [[0,1],[0,0]]`, `B = [[0,0],[1,0]]`.
pub fn sl2_matrices() -> [Vec<Vec<f64>>; 2] {
    [
        vec![vec![0.0, 1.0], vec![0.0, 0.0]],
        vec![vec![0.0, 0.0], vec![1.0, 0.0]],
    ]
}

/// Linear fields `V_1 x = A x`, `V_2 x = B x` with `[A, B] != 0`.
pub fn sl2_system(max_derivative: usize) -> VectorFieldSystem {
    let fields = sl2_matrices()
        .iter()
        .map(|m| PolynomialField::linear(m).expect("square"))
        .collect();
    VectorFieldSystem::polynomial(fields, max_derivative).expect("consistent dims")
}

/// `h(t) = (0.8 sin 2 pi t, 0.5 sin 3 pi t + 0.4 t)` sampled at `pieces + 1`
/// uniform times on `[0, 1]`.
pub fn smooth_curve(pieces: usize) -> SampledPath {
    let times: Vec<f64> = (0..=pieces).map(|k| k as f64 / pieces as f64).collect();
    let points = times
        .iter()
        .map(|&t| {
            vec![
                0.8 * (2.0 * PI * t).sin(),
                0.5 * (3.0 * PI * t).sin() + 0.4 * t,
            ]
        })
        .collect();
    SampledPath::new(times, points).expect("increasing times")
}

/// Four segments with breakpoints off the dyadic grid.
pub fn four_segment_path() -> SampledPath {
    SampledPath::new(
        vec![0.0, 0.3, 0.55, 0.8, 1.0],
        vec![
            vec![0.0, 0.0],
            vec![0.6, -0.2],
            vec![0.1, 0.5],
            vec![-0.4, 0.3],
            vec![0.2, 0.9],
        ],
    )
    .expect("increasing times")
}
