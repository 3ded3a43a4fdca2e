//! Output masks: local, time-varying, invertible maps applied to each node's
//! state before transmission.
//!
//! A node with state `x_i` publishes `y_i = h_i(t, x_i, π_i)` where the
//! parameters `π_i` are private. The families:
//!
//! | family            | `h_i(t, x_i)`                                  |
//! |-------------------|------------------------------------------------|
//! | identity          | `x_i`                                          |
//! | constant          | `c x_i`, `c > 1`                               |
//! | linear            | `(1 + φ e^{−σt}) x_i`                          |
//! | additive          | `x_i + γ e^{−δt}`                              |
//! | affine            | `c (x_i + γ e^{−δt})`                          |
//! | vanishing affine  | `(1 + φ e^{−σt})(x_i + γ e^{−δt})`             |
//!
//! The auditor checks the privacy-mask properties empirically:
//!
//! - P1 locality: `h_i` reads only `x_i` and `π_i` (structural).
//! - P2 no fixed point at `t = 0`: `h_i(0, x) ≠ x` for all `x`.
//! - P3 indiscernibility: not audited here; it quantifies over reconstruction
//!   procedures, so it is exercised as attack success/failure in
//!   [`crate::adversary`].
//! - P4 neighborhood escape: points arbitrarily close to any center map a
//!   fixed distance away at `t = 0` (homogeneous masks fail this at the
//!   origin: they map balls around 0 into shrunken/scaled balls around 0).
//! - P5 strict monotonicity in `x` at fixed `t`.
//! - P6 vanishing: `sup_x |h(t, x) − x|` decays to zero as `t` grows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("invalid parameters for {family:?} mask at node {node}: {reason}")]
    InvalidParams {
        family: MaskFamily,
        node: usize,
        reason: String,
    },
    #[error("node index in params[{position}] is {found}, expected {position}")]
    NodeIndexMismatch { position: usize, found: usize },
    #[error("operation requires the {expected:?} family, spec is {found:?}")]
    WrongFamily {
        expected: MaskFamily,
        found: MaskFamily,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskFamily {
    Identity,
    Constant,
    Linear,
    Additive,
    Affine,
    VanishingAffine,
}

impl MaskFamily {
    pub const ALL: [MaskFamily; 6] = [
        MaskFamily::Identity,
        MaskFamily::Constant,
        MaskFamily::Linear,
        MaskFamily::Additive,
        MaskFamily::Affine,
        MaskFamily::VanishingAffine,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MaskFamily::Identity => "identity",
            MaskFamily::Constant => "constant",
            MaskFamily::Linear => "linear",
            MaskFamily::Additive => "additive",
            MaskFamily::Affine => "affine",
            MaskFamily::VanishingAffine => "vanishing_affine",
        }
    }

    /// Does the family use the multiplicative transient `(1 + φ e^{−σt})`?
    fn uses_gain_transient(&self) -> bool {
        matches!(self, MaskFamily::Linear | MaskFamily::VanishingAffine)
    }

    /// Does the family use the additive transient `γ e^{−δt}`?
    fn uses_offset_transient(&self) -> bool {
        matches!(
            self,
            MaskFamily::Additive | MaskFamily::Affine | MaskFamily::VanishingAffine
        )
    }

    fn uses_constant_gain(&self) -> bool {
        matches!(self, MaskFamily::Constant | MaskFamily::Affine)
    }
}

/// Per-node private mask parameters. Only the fields the family uses are
/// validated; the others keep their defaults (`c = 1`, `phi = 0`,
/// `sigma = delta = 1`, `gamma = 0`).
///
/// The node index is carried for bookkeeping but is never serialized; the
/// position in [`MaskSpec::params`] is authoritative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeMaskParams {
    #[serde(skip)]
    pub node: usize,
    /// Constant gain, `c > 1` for the constant and affine families.
    pub c: f64,
    /// Gain transient amplitude, `φ > 0` for linear and vanishing affine.
    pub phi: f64,
    /// Gain transient decay rate, `σ > 0` (1/time).
    pub sigma: f64,
    /// Additive transient amplitude, `γ ≠ 0` (state units).
    pub gamma: f64,
    /// Additive transient decay rate, `δ > 0` (1/time).
    pub delta: f64,
}

impl NodeMaskParams {
    pub fn identity(node: usize) -> Self {
        Self {
            node,
            c: 1.0,
            phi: 0.0,
            sigma: 1.0,
            gamma: 0.0,
            delta: 1.0,
        }
    }

    pub fn constant(node: usize, c: f64) -> Self {
        Self {
            c,
            ..Self::identity(node)
        }
    }

    pub fn linear(node: usize, phi: f64, sigma: f64) -> Self {
        Self {
            phi,
            sigma,
            ..Self::identity(node)
        }
    }

    pub fn additive(node: usize, gamma: f64, delta: f64) -> Self {
        Self {
            gamma,
            delta,
            ..Self::identity(node)
        }
    }

    pub fn affine(node: usize, c: f64, gamma: f64, delta: f64) -> Self {
        Self {
            c,
            gamma,
            delta,
            ..Self::identity(node)
        }
    }

    pub fn vanishing_affine(node: usize, phi: f64, sigma: f64, gamma: f64, delta: f64) -> Self {
        Self {
            node,
            c: 1.0,
            phi,
            sigma,
            gamma,
            delta,
        }
    }

    fn validate(&self, family: MaskFamily) -> Result<(), MaskError> {
        let fail = |reason: String| MaskError::InvalidParams {
            family,
            node: self.node,
            reason,
        };
        if family.uses_constant_gain() && !(self.c > 1.0) {
            return Err(fail(format!("requires c > 1, got c = {}", self.c)));
        }
        if family.uses_gain_transient() {
            if !(self.phi > 0.0) {
                return Err(fail(format!("requires phi > 0, got phi = {}", self.phi)));
            }
            if !(self.sigma > 0.0) {
                return Err(fail(format!(
                    "requires sigma > 0, got sigma = {}",
                    self.sigma
                )));
            }
        }
        if family.uses_offset_transient() {
            if self.gamma == 0.0 || !self.gamma.is_finite() {
                return Err(fail(format!(
                    "requires gamma != 0, got gamma = {}",
                    self.gamma
                )));
            }
            if !(self.delta > 0.0) {
                return Err(fail(format!(
                    "requires delta > 0, got delta = {}",
                    self.delta
                )));
            }
        }
        Ok(())
    }
}

/// Sampling ranges for random mask parameters. Amplitudes and rates are
/// drawn uniformly; `gamma` gets a random sign.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ParamRanges {
    pub c: (f64, f64),
    pub phi: (f64, f64),
    pub sigma: (f64, f64),
    pub gamma_abs: (f64, f64),
    pub delta: (f64, f64),
}

impl Default for ParamRanges {
    fn default() -> Self {
        Self {
            c: (1.1, 5.0),
            phi: (0.5, 5.0),
            sigma: (0.1, 2.0),
            gamma_abs: (0.5, 5.0),
            delta: (0.1, 2.0),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawMaskSpec {
    family: MaskFamily,
    params: Vec<NodeMaskParams>,
}

/// A mask family plus one parameter set per node.
///
/// Construction validates the family-specific constraints for every node, so
/// evaluation never fails. The JSON form (`{"family": ..., "params": [...]}`)
/// is private material: it reveals `π` and must never be placed next to
/// public trajectory output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMaskSpec", into = "RawMaskSpec")]
pub struct MaskSpec {
    family: MaskFamily,
    params: Vec<NodeMaskParams>,
}

impl TryFrom<RawMaskSpec> for MaskSpec {
    type Error = MaskError;
    fn try_from(raw: RawMaskSpec) -> Result<Self, MaskError> {
        let params = raw
            .params
            .into_iter()
            .enumerate()
            .map(|(i, mut p)| {
                p.node = i;
                p
            })
            .collect();
        MaskSpec::new(raw.family, params)
    }
}

impl From<MaskSpec> for RawMaskSpec {
    fn from(spec: MaskSpec) -> RawMaskSpec {
        RawMaskSpec {
            family: spec.family,
            params: spec.params,
        }
    }
}

impl MaskSpec {
    pub fn new(family: MaskFamily, params: Vec<NodeMaskParams>) -> Result<Self, MaskError> {
        for (i, p) in params.iter().enumerate() {
            if p.node != i {
                return Err(MaskError::NodeIndexMismatch {
                    position: i,
                    found: p.node,
                });
            }
            p.validate(family)?;
        }
        Ok(Self { family, params })
    }

    /// The unmasked baseline: `h_i(t, x) = x` for every node.
    pub fn identity(n: usize) -> Self {
        Self {
            family: MaskFamily::Identity,
            params: (0..n).map(NodeMaskParams::identity).collect(),
        }
    }

    /// Draw a random spec for `n` nodes from the given ranges.
    pub fn sample(family: MaskFamily, n: usize, ranges: &ParamRanges, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = (0..n)
            .map(|node| {
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                NodeMaskParams {
                    node,
                    c: rng.gen_range(ranges.c.0..=ranges.c.1),
                    phi: rng.gen_range(ranges.phi.0..=ranges.phi.1),
                    sigma: rng.gen_range(ranges.sigma.0..=ranges.sigma.1),
                    gamma: sign * rng.gen_range(ranges.gamma_abs.0..=ranges.gamma_abs.1),
                    delta: rng.gen_range(ranges.delta.0..=ranges.delta.1),
                }
            })
            .collect();
        Self { family, params }
    }

    /// Like [`MaskSpec::sample`] but with one shared `c` for every node.
    /// With heterogeneous constant gains the affine-masked consensus flow
    /// settles away from the true average, so experiments that should reach
    /// the average use a node-uniform gain.
    pub fn sample_uniform_gain(
        family: MaskFamily,
        n: usize,
        ranges: &ParamRanges,
        seed: u64,
    ) -> Self {
        let mut spec = Self::sample(family, n, ranges, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let c = rng.gen_range(ranges.c.0..=ranges.c.1);
        for p in &mut spec.params {
            p.c = c;
        }
        spec
    }

    pub fn family(&self) -> MaskFamily {
        self.family
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn params(&self) -> &[NodeMaskParams] {
        &self.params
    }

    /// Smallest decay rate the family actually uses; 1 for families with no
    /// transient. Sets the time scale at which the mask has vanished.
    pub fn min_rate(&self) -> f64 {
        let mut rate = f64::INFINITY;
        for p in &self.params {
            if self.family.uses_gain_transient() {
                rate = rate.min(p.sigma);
            }
            if self.family.uses_offset_transient() {
                rate = rate.min(p.delta);
            }
        }
        if rate.is_finite() {
            rate
        } else {
            1.0
        }
    }

    /// Evaluate the mask: `y_i = h_i(t, x_i, π_i)`.
    pub fn eval(&self, node: usize, t: f64, x: f64) -> f64 {
        let p = &self.params[node];
        match self.family {
            MaskFamily::Identity => x,
            MaskFamily::Constant => p.c * x,
            MaskFamily::Linear => (1.0 + p.phi * (-p.sigma * t).exp()) * x,
            MaskFamily::Additive => x + p.gamma * (-p.delta * t).exp(),
            MaskFamily::Affine => p.c * (x + p.gamma * (-p.delta * t).exp()),
            MaskFamily::VanishingAffine => {
                (1.0 + p.phi * (-p.sigma * t).exp()) * (x + p.gamma * (-p.delta * t).exp())
            }
        }
    }

    /// Componentwise evaluation into a buffer.
    pub fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.params.len());
        debug_assert_eq!(out.len(), self.params.len());
        for (i, (xi, yi)) in x.iter().zip(out.iter_mut()).enumerate() {
            *yi = self.eval(i, t, *xi);
        }
    }

    /// Invert the mask in `x` at fixed `t`: recover `x_i` from `y_i`.
    /// Well defined for every family because the `x`-coefficient is bounded
    /// below by 1 under the parameter constraints.
    pub fn invert(&self, node: usize, t: f64, y: f64) -> f64 {
        let p = &self.params[node];
        match self.family {
            MaskFamily::Identity => y,
            MaskFamily::Constant => y / p.c,
            MaskFamily::Linear => y / (1.0 + p.phi * (-p.sigma * t).exp()),
            MaskFamily::Additive => y - p.gamma * (-p.delta * t).exp(),
            MaskFamily::Affine => y / p.c - p.gamma * (-p.delta * t).exp(),
            MaskFamily::VanishingAffine => {
                y / (1.0 + p.phi * (-p.sigma * t).exp()) - p.gamma * (-p.delta * t).exp()
            }
        }
    }

    /// Total time derivative `d/dt h_i(t, x(t), π_i)` given `ẋ_i`.
    pub fn time_derivative(&self, node: usize, t: f64, x: f64, xdot: f64) -> f64 {
        let p = &self.params[node];
        match self.family {
            MaskFamily::Identity => xdot,
            MaskFamily::Constant => p.c * xdot,
            MaskFamily::Linear => {
                let e = (-p.sigma * t).exp();
                (1.0 + p.phi * e) * xdot - p.sigma * p.phi * e * x
            }
            MaskFamily::Additive => xdot - p.delta * p.gamma * (-p.delta * t).exp(),
            MaskFamily::Affine => p.c * (xdot - p.delta * p.gamma * (-p.delta * t).exp()),
            MaskFamily::VanishingAffine => {
                let eg = (-p.sigma * t).exp();
                let eo = (-p.delta * t).exp();
                let gain = 1.0 + p.phi * eg;
                -p.sigma * p.phi * eg * (x + p.gamma * eo) + gain * (xdot - p.delta * p.gamma * eo)
            }
        }
    }

    /// Diagonal transient vectors `(φ, σ, δ, γ)` of a vanishing affine spec.
    pub fn vanishing_affine_parts(&self) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>), MaskError> {
        if self.family != MaskFamily::VanishingAffine {
            return Err(MaskError::WrongFamily {
                expected: MaskFamily::VanishingAffine,
                found: self.family,
            });
        }
        let phi = self.params.iter().map(|p| p.phi).collect();
        let sigma = self.params.iter().map(|p| p.sigma).collect();
        let delta = self.params.iter().map(|p| p.delta).collect();
        let gamma = self.params.iter().map(|p| p.gamma).collect();
        Ok((phi, sigma, delta, gamma))
    }

    /// Empirically audit the privacy-mask properties over `sample_count`
    /// random draws per check. `sample_count` must be at least 100.
    pub fn audit(&self, sample_count: usize, seed: u64) -> PropertyReport {
        assert!(sample_count >= 100, "audit needs at least 100 samples");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries = vec![
            self.audit_p1(),
            self.audit_p2(sample_count, &mut rng),
            PropertyVerdict {
                property: MaskProperty::P3Indiscernibility,
                status: PropertyStatus::NotAudited,
                counterexample: None,
                note: Some(
                    "depends on the adversary model; exercised as attack success/failure \
                     in the adversary module"
                        .into(),
                ),
            },
            self.audit_p4(sample_count, &mut rng),
            self.audit_p5(sample_count, &mut rng),
            self.audit_p6(sample_count, &mut rng),
        ];
        PropertyReport {
            family: self.family,
            entries,
        }
    }

    fn audit_p1(&self) -> PropertyVerdict {
        // Locality holds structurally: eval reads exactly params[node] and x.
        PropertyVerdict {
            property: MaskProperty::P1Local,
            status: PropertyStatus::Pass,
            counterexample: None,
            note: Some("structural: h_i reads only x_i and its own parameters".into()),
        }
    }

    fn audit_p2(&self, sample_count: usize, rng: &mut ChaCha8Rng) -> PropertyVerdict {
        for node in 0..self.params.len() {
            for k in 0..sample_count {
                let x = if k == 0 { 0.0 } else { rng.gen_range(-10.0..10.0) };
                let y = self.eval(node, 0.0, x);
                if (y - x).abs() <= 1e-12 * (1.0 + x.abs()) {
                    return PropertyVerdict {
                        property: MaskProperty::P2MaskedAtStart,
                        status: PropertyStatus::Fail,
                        counterexample: Some(Counterexample {
                            node,
                            t: 0.0,
                            x,
                            observed: y,
                            detail: format!("h(0, {x}) = {y} leaves the state unmasked"),
                        }),
                        note: None,
                    };
                }
            }
        }
        PropertyVerdict::pass(MaskProperty::P2MaskedAtStart)
    }

    /// A center `x*` certifies failure when it is numerically a fixed point
    /// of `h(0, ·)`: by continuity the tiny balls around it then map onto
    /// balls around `x*` whose image radius shrinks with the sampled radius,
    /// so proximity to `x*` leaks through the mask.
    fn audit_p4(&self, sample_count: usize, rng: &mut ChaCha8Rng) -> PropertyVerdict {
        let radii = [1e-2, 1e-3, 1e-4];
        for node in 0..self.params.len() {
            for k in 0..sample_count {
                let center = if k == 0 { 0.0 } else { rng.gen_range(-5.0..5.0) };
                let displaced = (self.eval(node, 0.0, center) - center).abs();
                if displaced <= 1e-12 * (1.0 + center.abs()) {
                    // Collapse evidence: image distance over shrinking balls.
                    let mut escapes = Vec::new();
                    for &r in &radii {
                        let mut max_escape = 0.0_f64;
                        for _ in 0..32 {
                            let x = center + rng.gen_range(-r..r);
                            max_escape = max_escape.max((self.eval(node, 0.0, x) - center).abs());
                        }
                        escapes.push(max_escape);
                    }
                    return PropertyVerdict {
                        property: MaskProperty::P4EscapesNeighborhoods,
                        status: PropertyStatus::Fail,
                        counterexample: Some(Counterexample {
                            node,
                            t: 0.0,
                            x: center,
                            observed: self.eval(node, 0.0, center),
                            detail: format!(
                                "h(0, ·) fixes {center}; max image distance over balls of radius \
                                 {radii:?} is {escapes:?}, shrinking with the ball"
                            ),
                        }),
                        note: None,
                    };
                }
            }
        }
        PropertyVerdict {
            property: MaskProperty::P4EscapesNeighborhoods,
            status: PropertyStatus::Pass,
            counterexample: None,
            note: Some("empirical: no sampled center is held near itself at t = 0".into()),
        }
    }

    fn audit_p5(&self, sample_count: usize, rng: &mut ChaCha8Rng) -> PropertyVerdict {
        let times = [0.0, 0.5, 5.0, 50.0];
        let grid = sample_count.min(400);
        for node in 0..self.params.len() {
            for &t in &times {
                let mut xs: Vec<f64> = (0..grid).map(|_| rng.gen_range(-10.0..10.0)).collect();
                xs.sort_by(|a, b| a.total_cmp(b));
                xs.dedup();
                for pair in xs.windows(2) {
                    let (lo, hi) = (pair[0], pair[1]);
                    if !(self.eval(node, t, hi) > self.eval(node, t, lo)) {
                        return PropertyVerdict {
                            property: MaskProperty::P5StrictlyIncreasing,
                            status: PropertyStatus::Fail,
                            counterexample: Some(Counterexample {
                                node,
                                t,
                                x: lo,
                                observed: self.eval(node, t, lo),
                                detail: format!(
                                    "h(t, {hi}) = {} is not above h(t, {lo}) = {}",
                                    self.eval(node, t, hi),
                                    self.eval(node, t, lo)
                                ),
                            }),
                            note: None,
                        };
                    }
                }
            }
        }
        PropertyVerdict::pass(MaskProperty::P5StrictlyIncreasing)
    }

    fn audit_p6(&self, sample_count: usize, rng: &mut ChaCha8Rng) -> PropertyVerdict {
        let _ = (sample_count, rng);
        let horizon = 50.0 / self.min_rate();
        // Doubling grid from horizon/2^12 up to the vanishing horizon.
        let mut grid = vec![0.0];
        let mut t = horizon / 4096.0;
        while t <= horizon * (1.0 + 1e-12) {
            grid.push(t);
            t *= 2.0;
        }
        let box_xs: Vec<f64> = (0..=40).map(|k| -10.0 + 0.5 * k as f64).collect();
        for node in 0..self.params.len() {
            let sup_dev = |t: f64| -> (f64, f64) {
                let mut best = (0.0_f64, 0.0_f64);
                for &x in &box_xs {
                    let d = (self.eval(node, t, x) - x).abs();
                    if d > best.0 {
                        best = (d, x);
                    }
                }
                best
            };
            let mut prev = sup_dev(grid[0]).0;
            for &tk in &grid[1..] {
                let (dev, x_at) = sup_dev(tk);
                if dev > prev + 1e-12 * (1.0 + prev) {
                    return PropertyVerdict {
                        property: MaskProperty::P6Vanishing,
                        status: PropertyStatus::Fail,
                        counterexample: Some(Counterexample {
                            node,
                            t: tk,
                            x: x_at,
                            observed: dev,
                            detail: format!(
                                "sup |h(t,x) - x| rises from {prev} to {dev} at t = {tk}"
                            ),
                        }),
                        note: None,
                    };
                }
                prev = dev;
            }
            let (final_dev, x_at) = sup_dev(horizon);
            if final_dev > 1e-9 {
                return PropertyVerdict {
                    property: MaskProperty::P6Vanishing,
                    status: PropertyStatus::Fail,
                    counterexample: Some(Counterexample {
                        node,
                        t: horizon,
                        x: x_at,
                        observed: final_dev,
                        detail: format!(
                            "|h(t, {x_at}) - {x_at}| = {final_dev:.3e} has not vanished \
                             at t = {horizon}"
                        ),
                    }),
                    note: None,
                };
            }
        }
        PropertyVerdict::pass(MaskProperty::P6Vanishing)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("mask serialization cannot fail")
    }

    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaskProperty {
    P1Local,
    P2MaskedAtStart,
    P3Indiscernibility,
    P4EscapesNeighborhoods,
    P5StrictlyIncreasing,
    P6Vanishing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyStatus {
    Pass,
    Fail,
    NotAudited,
}

/// One concrete input where a property check failed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Counterexample {
    pub node: usize,
    pub t: f64,
    pub x: f64,
    pub observed: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub property: MaskProperty,
    pub status: PropertyStatus,
    pub counterexample: Option<Counterexample>,
    pub note: Option<String>,
}

impl PropertyVerdict {
    fn pass(property: MaskProperty) -> Self {
        Self {
            property,
            status: PropertyStatus::Pass,
            counterexample: None,
            note: None,
        }
    }
}

/// Audit outcome for one mask spec: a verdict per property P1–P6.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyReport {
    pub family: MaskFamily,
    pub entries: Vec<PropertyVerdict>,
}

impl PropertyReport {
    pub fn status(&self, property: MaskProperty) -> PropertyStatus {
        self.entries
            .iter()
            .find(|e| e.property == property)
            .map(|e| e.status)
            .unwrap_or(PropertyStatus::NotAudited)
    }

    pub fn counterexample(&self, property: MaskProperty) -> Option<&Counterexample> {
        self.entries
            .iter()
            .find(|e| e.property == property)
            .and_then(|e| e.counterexample.as_ref())
    }

    /// True when no audited property failed.
    pub fn all_audited_pass(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.status != PropertyStatus::Fail)
    }
}
