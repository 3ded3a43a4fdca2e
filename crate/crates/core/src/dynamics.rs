//! The masked consensus flow `ẋ = −L·h(t, x, π)` and its trajectories.
//!
//! The right-hand side composes the Laplacian with the generic mask
//! evaluator, so the one code path covers every mask family; the unmasked
//! flow is the identity-mask special case. Integration is fixed-step RK4:
//! deterministic, and with a measurable fourth-order convergence rate.
//!
//! Because `1ᵀL = 0`, the true-state sum `1ᵀx(t)` is conserved along every
//! masked flow; the public sum `1ᵀy(t)` is not. [`Trajectory::conservation`]
//! reports both drifts.

use nalgebra::DVector;
use thiserror::Error;

use crate::graph::BalancedLaplacian;
use crate::masks::MaskSpec;
use crate::ode;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("dimension mismatch: laplacian is {lap}, mask covers {mask}, state has {state}")]
    DimensionMismatch {
        lap: usize,
        mask: usize,
        state: usize,
    },
    #[error("laplacian is not irreducible; consensus would not be reached")]
    NotIrreducible,
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64, partial: Trajectory },
}

/// A balanced Laplacian paired with one mask per node.
#[derive(Debug, Clone)]
pub struct MaskedSystem {
    lap: BalancedLaplacian,
    mask: MaskSpec,
    /// Row-major copy of the Laplacian for the integration hot loop.
    rows: Vec<f64>,
    n: usize,
}

impl MaskedSystem {
    pub fn new(lap: BalancedLaplacian, mask: MaskSpec) -> Result<Self, DynamicsError> {
        let n = lap.dim();
        if mask.len() != n {
            return Err(DynamicsError::DimensionMismatch {
                lap: n,
                mask: mask.len(),
                state: n,
            });
        }
        if !lap.is_irreducible() {
            return Err(DynamicsError::NotIrreducible);
        }
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                rows[i * n + j] = lap.matrix()[(i, j)];
            }
        }
        Ok(Self { lap, mask, rows, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn laplacian(&self) -> &BalancedLaplacian {
        &self.lap
    }

    pub fn mask(&self) -> &MaskSpec {
        &self.mask
    }

    /// `−L · h(t, x, π)`.
    pub fn rhs(&self, t: f64, x: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        if x.len() != self.n {
            return Err(DynamicsError::DimensionMismatch {
                lap: self.n,
                mask: self.mask.len(),
                state: x.len(),
            });
        }
        let mut masked = vec![0.0; self.n];
        let mut out = vec![0.0; self.n];
        self.rhs_into(t, x, &mut masked, &mut out);
        Ok(out)
    }

    fn rhs_into(&self, t: f64, x: &[f64], masked: &mut [f64], out: &mut [f64]) {
        self.mask.eval_into(t, x, masked);
        for i in 0..self.n {
            let row = &self.rows[i * self.n..(i + 1) * self.n];
            let mut acc = 0.0;
            for (lij, yj) in row.iter().zip(masked.iter()) {
                acc += lij * yj;
            }
            out[i] = -acc;
        }
    }

    /// Integrate from `x0` at `t0` over `horizon` with fixed step `step`,
    /// recording one sample every `sample_every` steps plus the final
    /// instant. Identical inputs give bit-identical trajectories.
    pub fn integrate(
        &self,
        x0: &[f64],
        t0: f64,
        horizon: f64,
        step: f64,
        sample_every: usize,
    ) -> Result<Trajectory, DynamicsError> {
        assert!(step > 0.0, "step must be positive");
        assert!(horizon > 0.0, "horizon must be positive");
        assert!(sample_every >= 1, "sample_every must be at least 1");
        if x0.len() != self.n {
            return Err(DynamicsError::DimensionMismatch {
                lap: self.n,
                mask: self.mask.len(),
                state: x0.len(),
            });
        }

        let eta = consensus_value(x0);
        let mut traj = Trajectory {
            times: Vec::new(),
            x_samples: Vec::new(),
            y_samples: Vec::new(),
            eta,
        };

        let mut state = x0.to_vec();
        let mut masked = vec![0.0; self.n];
        let mut stages = [
            vec![0.0; self.n],
            vec![0.0; self.n],
            vec![0.0; self.n],
            vec![0.0; self.n],
        ];
        let mut scratch = vec![0.0; self.n];
        let mut rhs = |t: f64, x: &[f64], out: &mut [f64]| {
            self.mask.eval_into(t, x, &mut masked);
            for i in 0..self.n {
                let row = &self.rows[i * self.n..(i + 1) * self.n];
                let mut acc = 0.0;
                for (lij, yj) in row.iter().zip(masked.iter()) {
                    acc += lij * yj;
                }
                out[i] = -acc;
            }
        };

        let record = |traj: &mut Trajectory, t: f64, state: &[f64], mask: &MaskSpec| {
            let mut y = vec![0.0; state.len()];
            mask.eval_into(t, state, &mut y);
            traj.times.push(t);
            traj.x_samples.push(DVector::from_column_slice(state));
            traj.y_samples.push(DVector::from_column_slice(&y));
        };

        record(&mut traj, t0, &state, &self.mask);

        let (full_steps, partial) = ode::plan_steps(horizon, step);
        let final_t = t0 + horizon;
        for k in 0..full_steps {
            let t = t0 + k as f64 * step;
            ode::rk4_step(&mut rhs, t, step, &mut state, &mut stages, &mut scratch);
            let t_next = t0 + (k + 1) as f64 * step;
            if !state.iter().all(|v| v.is_finite()) {
                return Err(DynamicsError::NonFiniteState {
                    t: t_next,
                    partial: traj,
                });
            }
            let is_last = k + 1 == full_steps && partial.is_none();
            if (k + 1) % sample_every == 0 && !is_last {
                record(&mut traj, t_next, &state, &self.mask);
            }
            if is_last {
                record(&mut traj, final_t, &state, &self.mask);
            }
        }
        if let Some(h_last) = partial {
            let t = t0 + full_steps as f64 * step;
            ode::rk4_step(&mut rhs, t, h_last, &mut state, &mut stages, &mut scratch);
            if !state.iter().all(|v| v.is_finite()) {
                return Err(DynamicsError::NonFiniteState {
                    t: final_t,
                    partial: traj,
                });
            }
            record(&mut traj, final_t, &state, &self.mask);
        }
        Ok(traj)
    }
}

/// Arithmetic mean of the initial state: the consensus target `1ᵀx₀/n`.
pub fn consensus_value(x: &[f64]) -> f64 {
    assert!(!x.is_empty(), "consensus value of an empty state");
    x.iter().sum::<f64>() / x.len() as f64
}

/// Time-stamped samples of the private state `x(t)` and public output `y(t)`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    x_samples: Vec<DVector<f64>>,
    y_samples: Vec<DVector<f64>>,
    eta: f64,
}

/// Drift of the conserved and non-conserved averages along a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct ConservationReport {
    /// `max_k |1ᵀx(t_k) − 1ᵀx₀|`: drift of the conserved private sum.
    pub state_sum_drift: f64,
    /// `state_sum_drift / n`: the same drift per node.
    pub state_average_drift: f64,
    /// `max_k |1ᵀy(t_k)/n − η|`: the public average is not conserved.
    pub public_average_drift: f64,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn x_samples(&self) -> &[DVector<f64>] {
        &self.x_samples
    }

    pub fn y_samples(&self) -> &[DVector<f64>] {
        &self.y_samples
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x_samples.first().map_or(0, |x| x.len())
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has samples")
    }

    pub fn final_x(&self) -> &DVector<f64> {
        self.x_samples.last().expect("trajectory has samples")
    }

    pub fn final_y(&self) -> &DVector<f64> {
        self.y_samples.last().expect("trajectory has samples")
    }

    /// `max_k ‖x(t_k) − η·1‖∞`, the worst consensus gap over the samples
    /// from `from_index` on.
    pub fn max_consensus_gap(&self, from_index: usize) -> f64 {
        self.x_samples[from_index..]
            .iter()
            .flat_map(|x| x.iter().map(|v| (v - self.eta).abs()))
            .fold(0.0, f64::max)
    }

    pub fn conservation(&self) -> ConservationReport {
        let n = self.dim() as f64;
        let initial_sum: f64 = self.x_samples[0].iter().sum();
        let mut state_sum_drift = 0.0_f64;
        let mut public_average_drift = 0.0_f64;
        for (x, y) in self.x_samples.iter().zip(self.y_samples.iter()) {
            let xs: f64 = x.iter().sum();
            state_sum_drift = state_sum_drift.max((xs - initial_sum).abs());
            let ya: f64 = y.iter().sum::<f64>() / n;
            public_average_drift = public_average_drift.max((ya - self.eta).abs());
        }
        ConservationReport {
            state_sum_drift,
            state_average_drift: state_sum_drift / n,
            public_average_drift,
        }
    }

    /// Uniform sample spacing, or `None` when the grid is not uniform.
    pub fn uniform_spacing(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let h = self.times[1] - self.times[0];
        for pair in self.times.windows(2) {
            if ((pair[1] - pair[0]) - h).abs() > 1e-9 * h.max(1e-12) {
                return None;
            }
        }
        Some(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedDigraph;
    use crate::masks::{MaskFamily, MaskSpec, NodeMaskParams, ParamRanges};
    use nalgebra::DMatrix;

    fn cycle3_system(mask: MaskSpec) -> MaskedSystem {
        let lap = WeightedDigraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
            .unwrap()
            .laplacian()
            .unwrap();
        MaskedSystem::new(lap, mask).unwrap()
    }

    #[test]
    fn consensus_subspace_is_in_the_kernel() {
        let sys = cycle3_system(MaskSpec::identity(3));
        let rhs = sys.rhs(0.0, &[2.5, 2.5, 2.5]).unwrap();
        for v in rhs {
            assert!(v.abs() <= 1e-12);
        }
    }

    #[test]
    fn masked_flow_has_no_equilibrium_at_consensus() {
        let params = (0..3)
            .map(|i| NodeMaskParams::vanishing_affine(i, 1.0, 1.0, 0.5 + i as f64, 1.0))
            .collect();
        let mask = MaskSpec::new(MaskFamily::VanishingAffine, params).unwrap();
        let sys = cycle3_system(mask);
        let rhs = sys.rhs(0.0, &[2.5, 2.5, 2.5]).unwrap();
        let norm = rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(norm > 1e-6, "rhs norm at consensus is {norm}");
    }

    #[test]
    fn rhs_matches_hand_product_and_dense_multiply() {
        let sys = cycle3_system(MaskSpec::identity(3));
        let rhs = sys.rhs(0.0, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(rhs, vec![-1.0, 1.0, 0.0]);

        let dense = -(sys.laplacian().matrix() * DVector::from_column_slice(&[1.0, 0.0, 0.0]));
        for i in 0..3 {
            assert_eq!(rhs[i], dense[i]);
        }
    }

    #[test]
    fn rhs_rejects_wrong_dimension() {
        let sys = cycle3_system(MaskSpec::identity(3));
        assert!(matches!(
            sys.rhs(0.0, &[1.0, 2.0]),
            Err(DynamicsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_run_reaches_the_average() {
        let sys = cycle3_system(MaskSpec::identity(3));
        let traj = sys.integrate(&[1.0, 0.0, 0.0], 0.0, 50.0, 1e-3, 100).unwrap();
        let third = 1.0 / 3.0;
        for v in traj.final_x().iter() {
            assert!((v - third).abs() < 1e-9);
        }
        assert_eq!(traj.eta(), third);
    }

    #[test]
    fn horizon_of_one_step_gives_two_samples() {
        let sys = cycle3_system(MaskSpec::identity(3));
        let traj = sys.integrate(&[1.0, 0.0, 0.0], 0.0, 1e-3, 1e-3, 1).unwrap();
        assert_eq!(traj.len(), 2);
        assert_eq!(traj.times()[0], 0.0);
        assert!((traj.times()[1] - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn consensus_value_examples() {
        assert_eq!(consensus_value(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(consensus_value(&[4.2; 7]), 4.2);
    }

    #[test]
    fn diverging_run_reports_partial_trajectory() {
        let sys = cycle3_system(MaskSpec::identity(3));
        // Step far beyond the RK4 stability limit.
        let err = sys
            .integrate(&[1.0, 0.0, 0.0], 0.0, 1e5, 1e3, 1)
            .unwrap_err();
        match err {
            DynamicsError::NonFiniteState { t, partial } => {
                assert!(t > 0.0);
                assert!(!partial.is_empty());
            }
            other => panic!("expected NonFiniteState, got {other:?}"),
        }
    }

    #[test]
    fn single_node_graph_conserves_exactly() {
        let lap = WeightedDigraph::new(1, vec![]).unwrap().laplacian().unwrap();
        let mask = MaskSpec::sample(MaskFamily::VanishingAffine, 1, &ParamRanges::default(), 3);
        let sys = MaskedSystem::new(lap, mask).unwrap();
        let traj = sys.integrate(&[4.0], 0.0, 5.0, 1e-2, 10).unwrap();
        let report = traj.conservation();
        assert_eq!(report.state_sum_drift, 0.0);
        assert_eq!(traj.final_x()[0], 4.0);
    }

    #[test]
    fn disconnected_laplacian_is_rejected() {
        let lap = BalancedLaplacian::try_from_matrix(DMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(
            MaskedSystem::new(lap, MaskSpec::identity(2)),
            Err(DynamicsError::NotIrreducible)
        ));
    }

    #[test]
    fn trajectory_outputs_match_mask_of_state() {
        let mask = MaskSpec::sample(MaskFamily::Additive, 3, &ParamRanges::default(), 17);
        let sys = cycle3_system(mask.clone());
        let traj = sys.integrate(&[3.0, -1.0, 0.5], 0.0, 2.0, 1e-3, 250).unwrap();
        for (k, t) in traj.times().iter().enumerate() {
            for i in 0..3 {
                let expected = mask.eval(i, *t, traj.x_samples()[k][i]);
                assert_eq!(traj.y_samples()[k][i], expected);
            }
        }
    }
}
