//! Convergence and stability diagnostics for masked consensus runs.
//!
//! - [`lyapunov_v`]: the time-varying quadratic form
//!   `V(t, x) = (x − η1)ᵀ (I + Φe^{−Σt}) (x − η1)` whose decay proves that
//!   the average is a global attractor of the masked flow.
//! - [`vmm`]: the max−min spread. It is monotone for classical consensus but
//!   not for masked runs; transient increases are the visible signature of
//!   attractivity without stability.
//! - [`vdot_along_trajectory`]: the analytic derivative of `V` along a
//!   vanishing-affine run, split into its four terms and cross-checked
//!   against finite differences of the sampled `V`.
//! - [`solve_comparison_ode`]: the scalar system
//!   `v̇ = −a v² + b v e^{−δ₁ t} + c e^{−δ₂ t}` that upper-bounds `V`;
//!   nonnegative and convergent to zero, with an explicit bound envelope.
//! - [`limit_system_deviation`]: how far the masked vector field is from the
//!   unmasked one, uniformly over a state box; it shrinks to zero for
//!   vanishing masks, which is what makes the masked flow asymptotically
//!   autonomous.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{MaskedSystem, Trajectory};
use crate::masks::MaskFamily;
use crate::ode;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("dimension mismatch: state has {state}, weights have {weights}")]
    DimensionMismatch { state: usize, weights: usize },
    #[error("operation requires a {expected:?} mask, system uses {found:?}")]
    WrongMaskFamily {
        expected: MaskFamily,
        found: MaskFamily,
    },
    #[error("comparison parameters invalid: {reason}")]
    InvalidParams { reason: String },
    #[error("comparison state dropped to {value:.3e} at t = {t}; step too large")]
    NonnegativityBreach { t: f64, value: f64 },
}

/// `V(t, x) = Σ_i (1 + φ_i e^{−σ_i t}) (x_i − η)²`.
pub fn lyapunov_v(
    t: f64,
    x: &[f64],
    eta: f64,
    phi: &[f64],
    sigma: &[f64],
) -> Result<f64, AnalysisError> {
    if x.len() != phi.len() || x.len() != sigma.len() {
        return Err(AnalysisError::DimensionMismatch {
            state: x.len(),
            weights: phi.len().min(sigma.len()),
        });
    }
    let mut v = 0.0;
    for i in 0..x.len() {
        let a = x[i] - eta;
        v += (1.0 + phi[i] * (-sigma[i] * t).exp()) * a * a;
    }
    Ok(v)
}

/// Max−min spread of the state vector.
pub fn vmm(x: &[f64]) -> f64 {
    assert!(!x.is_empty(), "spread of an empty state");
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in x {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

/// The derivative of `V` along a vanishing-affine trajectory, evaluated
/// analytically at every sample and split into its four terms:
///
/// 1. `−(Ma)ᵀ (L + Lᵀ) (Ma)`, the quadratic contraction (`a = x − η1`,
///    `M = I + Φe^{−Σt}`),
/// 2. `−2η (Ma)ᵀ L (M1)`, sign-indefinite, decays with the gain transient
///    because `L·M1 = L·Φe^{−Σt}1`,
/// 3. `−2 (Ma)ᵀ L (M e^{−Δt}γ)`, sign-indefinite, decays with both
///    transients,
/// 4. `−aᵀ ΣΦe^{−Σt} a`, nonpositive, decays with the gain transient.
#[derive(Debug, Clone)]
pub struct VdotSeries {
    pub times: Vec<f64>,
    /// `V(t_k, x(t_k))`.
    pub v: Vec<f64>,
    /// Sum of the four analytic terms at each sample.
    pub analytic: Vec<f64>,
    pub terms: Vec<[f64; 4]>,
    /// Central finite differences of the sampled `V`, `None` at endpoints.
    pub finite_difference: Vec<Option<f64>>,
}

pub fn vdot_along_trajectory(
    traj: &Trajectory,
    sys: &MaskedSystem,
) -> Result<VdotSeries, AnalysisError> {
    let (phi, sigma, delta, gamma) =
        sys.mask()
            .vanishing_affine_parts()
            .map_err(|_| AnalysisError::WrongMaskFamily {
                expected: MaskFamily::VanishingAffine,
                found: sys.mask().family(),
            })?;
    let n = sys.dim();
    let lap = sys.laplacian().matrix();
    let eta = traj.eta();

    let mut series = VdotSeries {
        times: traj.times().to_vec(),
        v: Vec::with_capacity(traj.len()),
        analytic: Vec::with_capacity(traj.len()),
        terms: Vec::with_capacity(traj.len()),
        finite_difference: vec![None; traj.len()],
    };

    for (k, t) in traj.times().iter().enumerate() {
        let x = &traj.x_samples()[k];
        let gain: Vec<f64> = (0..n)
            .map(|i| 1.0 + phi[i] * (-sigma[i] * *t).exp())
            .collect();
        let a: Vec<f64> = (0..n).map(|i| x[i] - eta).collect();
        let u: Vec<f64> = (0..n).map(|i| gain[i] * a[i]).collect();
        let offsets: Vec<f64> = (0..n)
            .map(|i| gain[i] * gamma[i] * (-delta[i] * *t).exp())
            .collect();

        let lu: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| lap[(i, j)] * u[j]).sum())
            .collect();
        let lg: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| lap[(i, j)] * gain[j]).sum())
            .collect();
        let lo: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| lap[(i, j)] * offsets[j]).sum())
            .collect();

        let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
        let term1 = -2.0 * dot(&u, &lu);
        let term2 = -2.0 * eta * dot(&u, &lg);
        let term3 = -2.0 * dot(&u, &lo);
        let term4 = -(0..n)
            .map(|i| sigma[i] * phi[i] * (-sigma[i] * *t).exp() * a[i] * a[i])
            .sum::<f64>();

        series.v.push(dot(&u, &a));
        series.terms.push([term1, term2, term3, term4]);
        series.analytic.push(term1 + term2 + term3 + term4);
    }

    for k in 1..traj.len().saturating_sub(1) {
        let dt = series.times[k + 1] - series.times[k - 1];
        series.finite_difference[k] = Some((series.v[k + 1] - series.v[k - 1]) / dt);
    }
    Ok(series)
}

/// Coefficients of the scalar comparison system
/// `v̇ = −a v² + b v e^{−δ₁ t} + c e^{−δ₂ t}`, `v(t₀) = v₀ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub v0: f64,
    pub t0: f64,
}

impl ComparisonParams {
    pub fn new(
        a: f64,
        b: f64,
        c: f64,
        delta1: f64,
        delta2: f64,
        v0: f64,
        t0: f64,
    ) -> Result<Self, AnalysisError> {
        let p = Self {
            a,
            b,
            c,
            delta1,
            delta2,
            v0,
            t0,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), AnalysisError> {
        let bad = |reason: String| Err(AnalysisError::InvalidParams { reason });
        for (name, v) in [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
        ] {
            if !(v > 0.0) {
                return bad(format!("{name} must be > 0, got {v}"));
            }
        }
        if !(self.v0 >= 0.0) {
            return bad(format!("v0 must be >= 0, got {}", self.v0));
        }
        if !(self.t0 >= 0.0) {
            return bad(format!("t0 must be >= 0, got {}", self.t0));
        }
        Ok(())
    }

    /// Bound every solution respects: once `v` exceeds
    /// `max(1, v₀, (b e^{−δ₁t₀} + c e^{−δ₂t₀})/a)` the derivative is
    /// negative, so trajectories stay below that threshold plus slack for
    /// the transient from below.
    pub fn bound_envelope(&self) -> f64 {
        let forcing = (self.b * (-self.delta1 * self.t0).exp()
            + self.c * (-self.delta2 * self.t0).exp())
            / self.a;
        1.0_f64.max(self.v0).max(forcing) + 1.0
    }
}

/// Scalar trajectory of the comparison system, recorded at every step.
#[derive(Debug, Clone)]
pub struct ScalarTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ScalarTrajectory {
    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("trajectory has samples")
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// RK4 integration of the comparison system. Nonnegativity is not clamped:
/// it must emerge from the dynamics, and a dip below `−1e-12` is reported as
/// an error.
pub fn solve_comparison_ode(
    p: &ComparisonParams,
    horizon: f64,
    step: f64,
) -> Result<ScalarTrajectory, AnalysisError> {
    p.validate()?;
    assert!(step > 0.0 && horizon > 0.0);
    let mut rhs = |t: f64, v: &[f64], out: &mut [f64]| {
        out[0] = -p.a * v[0] * v[0]
            + p.b * v[0] * (-p.delta1 * t).exp()
            + p.c * (-p.delta2 * t).exp();
    };
    let mut state = [p.v0];
    let mut stages = [vec![0.0], vec![0.0], vec![0.0], vec![0.0]];
    let mut scratch = [0.0];
    let mut traj = ScalarTrajectory {
        times: vec![p.t0],
        values: vec![p.v0],
    };
    let (full, partial) = ode::plan_steps(horizon, step);
    let check = |t: f64, v: f64, traj: &mut ScalarTrajectory| {
        if v < -1e-12 {
            return Err(AnalysisError::NonnegativityBreach { t, value: v });
        }
        traj.times.push(t);
        traj.values.push(v);
        Ok(())
    };
    for k in 0..full {
        let t = p.t0 + k as f64 * step;
        ode::rk4_step(&mut rhs, t, step, &mut state, &mut stages, &mut scratch);
        check(p.t0 + (k + 1) as f64 * step, state[0], &mut traj)?;
    }
    if let Some(h) = partial {
        let t = p.t0 + full as f64 * step;
        ode::rk4_step(&mut rhs, t, h, &mut state, &mut stages, &mut scratch);
        check(p.t0 + horizon, state[0], &mut traj)?;
    }
    Ok(traj)
}

/// Uniform-on-a-box gap between the masked and unmasked vector fields at
/// time `t`: `max_x ‖L·h(t, x, π) − L·x‖∞` over `sample_count` points drawn
/// from `[−box_radius, box_radius]ⁿ` with the given seed.
pub fn limit_system_deviation(
    sys: &MaskedSystem,
    t: f64,
    box_radius: f64,
    sample_count: usize,
    seed: u64,
) -> f64 {
    assert!(sample_count >= 1);
    let n = sys.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut x = vec![0.0; n];
    for k in 0..sample_count {
        for xi in x.iter_mut() {
            *xi = rng.gen_range(-box_radius..=box_radius);
        }
        if k == 0 {
            // Include a corner of the box, where the gain transient is largest.
            x.iter_mut().for_each(|xi| *xi = box_radius);
        }
        let masked = sys.rhs(t, &x).expect("dimensions match by construction");
        let mut limit = vec![0.0; n];
        for i in 0..n {
            limit[i] = -(0..n)
                .map(|j| sys.laplacian().matrix()[(i, j)] * x[j])
                .sum::<f64>();
        }
        for i in 0..n {
            worst = worst.max((masked[i] - limit[i]).abs());
        }
    }
    worst
}

/// Analytic envelope for [`limit_system_deviation`]: `‖L‖∞` times the
/// largest componentwise mask deviation over the box.
pub fn deviation_envelope(sys: &MaskedSystem, t: f64, box_radius: f64) -> f64 {
    let spec = sys.mask();
    let mut worst = 0.0_f64;
    for p in spec.params() {
        let gain = match spec.family() {
            MaskFamily::Linear | MaskFamily::VanishingAffine => {
                1.0 + p.phi * (-p.sigma * t).exp()
            }
            MaskFamily::Constant | MaskFamily::Affine => p.c,
            _ => 1.0,
        };
        let offset = match spec.family() {
            MaskFamily::Additive | MaskFamily::Affine | MaskFamily::VanishingAffine => {
                p.gamma.abs() * (-p.delta * t).exp()
            }
            _ => 0.0,
        };
        worst = worst.max(gain * (box_radius + offset) - box_radius);
    }
    sys.laplacian().inf_norm() * worst
}

/// First sample instant after which `‖x(t) − η1‖∞ < nu` holds for every
/// remaining sample; `None` when the trajectory never settles.
pub fn convergence_time(traj: &Trajectory, nu: f64) -> Option<f64> {
    assert!(nu > 0.0);
    let eta = traj.eta();
    let mut last_violation: Option<usize> = None;
    for (k, x) in traj.x_samples().iter().enumerate() {
        let gap = x.iter().map(|v| (v - eta).abs()).fold(0.0, f64::max);
        if gap >= nu {
            last_violation = Some(k);
        }
    }
    match last_violation {
        None => Some(traj.times()[0]),
        Some(k) if k + 1 < traj.len() => Some(traj.times()[k + 1]),
        Some(_) => None,
    }
}

/// Options controlling [`AnalysisReport::compute`].
#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    /// Convergence threshold for [`convergence_time`].
    pub nu: f64,
    /// Instants at which the limit-system deviation is evaluated.
    pub deviation_grid: Vec<f64>,
    pub deviation_box: f64,
    pub deviation_samples: usize,
    pub deviation_seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            nu: 1e-3,
            deviation_grid: vec![0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            deviation_box: 10.0,
            deviation_samples: 64,
            deviation_seed: 0,
        }
    }
}

/// Aggregate diagnostics for one run. Contains only derived quantities, no
/// state samples and no mask parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub eta: f64,
    /// `max_k |1ᵀx(t_k) − 1ᵀx₀|`.
    pub conservation_residual: f64,
    /// `max_k |1ᵀy(t_k)/n − η|`.
    pub public_average_drift: f64,
    pub convergence_time: Option<f64>,
    pub vmm_monotone: bool,
    pub vmm_violation_instants: Vec<f64>,
    /// `[t, deviation]` pairs of the masked-vs-limit vector field gap.
    pub deviation_curve: Vec<(f64, f64)>,
}

impl AnalysisReport {
    pub fn compute(traj: &Trajectory, sys: &MaskedSystem, opts: &AnalysisOptions) -> Self {
        let conservation = traj.conservation();
        let mut violations = Vec::new();
        let spreads: Vec<f64> = traj
            .x_samples()
            .iter()
            .map(|x| vmm(x.as_slice()))
            .collect();
        for k in 0..spreads.len().saturating_sub(1) {
            if spreads[k + 1] > spreads[k] + 1e-12 {
                violations.push(traj.times()[k + 1]);
            }
        }
        let deviation_curve = opts
            .deviation_grid
            .iter()
            .map(|&t| {
                (
                    t,
                    limit_system_deviation(
                        sys,
                        t,
                        opts.deviation_box,
                        opts.deviation_samples,
                        opts.deviation_seed,
                    ),
                )
            })
            .collect();
        AnalysisReport {
            eta: traj.eta(),
            conservation_residual: conservation.state_sum_drift,
            public_average_drift: conservation.public_average_drift,
            convergence_time: convergence_time(traj, opts.nu),
            vmm_monotone: violations.is_empty(),
            vmm_violation_instants: violations,
            deviation_curve,
        }
    }
}
