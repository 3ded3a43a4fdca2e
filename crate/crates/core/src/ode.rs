//! Fixed-step classical Runge–Kutta core shared by the masked-consensus
//! integrator and the scalar comparison system.

/// One RK4 step of size `h` at time `t`, advancing `state` in place.
/// `rhs(t, x, out)` writes the derivative of `x` at time `t` into `out`.
/// The four stage buffers and `scratch` must have the state's length.
pub(crate) fn rk4_step<F>(
    rhs: &mut F,
    t: f64,
    h: f64,
    state: &mut [f64],
    stages: &mut [Vec<f64>; 4],
    scratch: &mut [f64],
) where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = state.len();
    let [k1, k2, k3, k4] = stages;

    rhs(t, state, k1);
    for i in 0..n {
        scratch[i] = state[i] + 0.5 * h * k1[i];
    }
    rhs(t + 0.5 * h, scratch, k2);
    for i in 0..n {
        scratch[i] = state[i] + 0.5 * h * k2[i];
    }
    rhs(t + 0.5 * h, scratch, k3);
    for i in 0..n {
        scratch[i] = state[i] + h * k3[i];
    }
    rhs(t + h, scratch, k4);
    for i in 0..n {
        state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Step plan for integrating a span of length `horizon` with nominal step
/// `step`: `full` whole steps, then an optional trailing partial step so the
/// final instant lands exactly on `t0 + horizon`.
pub(crate) fn plan_steps(horizon: f64, step: f64) -> (usize, Option<f64>) {
    debug_assert!(step > 0.0 && horizon > 0.0);
    let ratio = horizon / step;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) && rounded >= 1.0 {
        (rounded as usize, None)
    } else {
        let full = ratio.floor() as usize;
        (full, Some(horizon - full as f64 * step))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_handles_exact_and_partial_spans() {
        assert_eq!(plan_steps(50.0, 1e-3), (50_000, None));
        assert_eq!(plan_steps(1.0, 1.0), (1, None));
        let (full, partial) = plan_steps(1.05, 0.5);
        assert_eq!(full, 2);
        assert!((partial.unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn rk4_is_fourth_order_on_exponential_decay() {
        let run = |h: f64| {
            let mut rhs = |_t: f64, x: &[f64], out: &mut [f64]| out[0] = -x[0];
            let mut state = [1.0_f64];
            let mut stages = [vec![0.0], vec![0.0], vec![0.0], vec![0.0]];
            let mut scratch = [0.0_f64];
            let steps = (1.0 / h).round() as usize;
            for k in 0..steps {
                rk4_step(&mut rhs, k as f64 * h, h, &mut state, &mut stages, &mut scratch);
            }
            (state[0] - (-1.0_f64).exp()).abs()
        };
        let e1 = run(0.1);
        let e2 = run(0.05);
        let order = (e1 / e2).log2();
        assert!(order > 3.8 && order < 4.2, "observed order {order}");
    }
}
