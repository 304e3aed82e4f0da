//! Classical fixed-step fourth-order Runge-Kutta for autonomous systems.

/// Integrates `y' = f(y)` over `[0, duration]` with `steps` equal steps,
/// overwriting `y` with the final state.
pub fn rk4<F>(f: F, y: &mut [f64], duration: f64, steps: usize)
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = y.len();
    let h = duration / steps as f64;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for _ in 0..steps {
        f(y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        f(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        f(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        f(&tmp, &mut k4);
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// Repeats [`rk4`] with doubled step counts until two successive answers
/// differ by at most `tol` in max norm. Returns the finer answer, or `None`
/// if `max_doublings` is exhausted.
pub fn rk4_to_tolerance<F>(
    f: F,
    y0: &[f64],
    duration: f64,
    tol: f64,
    max_doublings: usize,
) -> Option<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut steps = 8;
    let mut prev = y0.to_vec();
    rk4(&f, &mut prev, duration, steps);
    for _ in 0..max_doublings {
        steps *= 2;
        let mut cur = y0.to_vec();
        rk4(&f, &mut cur, duration, steps);
        let gap = prev
            .iter()
            .zip(&cur)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if gap <= tol {
            return Some(cur);
        }
        prev = cur;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut y = [1.0];
        rk4(|y, out| out[0] = -y[0], &mut y, 1.0, 64);
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |steps| {
            let mut y = [1.0, 0.0];
            rk4(
                |y, out| {
                    out[0] = -y[1];
                    out[1] = y[0];
                },
                &mut y,
                1.0,
                steps,
            );
            ((y[0] - 1.0f64.cos()).powi(2) + (y[1] - 1.0f64.sin()).powi(2)).sqrt()
        };
        let ratio = err(10) / err(20);
        assert!(ratio > 14.0 && ratio < 18.0, "{ratio}");
    }

    #[test]
    fn tolerance_driver_converges() {
        let y = rk4_to_tolerance(|y, out| out[0] = y[0], &[1.0], 1.0, 1e-12, 20).unwrap();
        assert!((y[0] - 1.0f64.exp()).abs() < 1e-11);
    }
}
