//! Privacy-preserving average consensus with time-varying output masks.
//!
//! Agents on a weight-balanced digraph run the continuous-time consensus flow
//! `ẋ = −L·y`, but instead of broadcasting their true state `x_i` each node
//! publishes a masked output `y_i = h_i(t, x_i, π_i)`, where the mask `h_i`
//! and its parameters `π_i` stay private to the node. Suitable masks vanish
//! over time, so the public outputs still converge to the true average of the
//! initial states while the initial states themselves stay hidden.
//!
//! The crate provides:
//!
//! - [`graph`]: weight-balanced digraphs, their Laplacians, and the
//!   no-overlapping-neighborhoods topology check that blocks flow-integral
//!   eavesdropping.
//! - [`masks`]: the mask families (constant, linear, additive, affine,
//!   vanishing affine), their inverses and time derivatives, and an empirical
//!   auditor for the privacy-mask properties P1–P6.
//! - [`dynamics`]: deterministic fixed-step integration of the masked flow,
//!   with conservation-law accounting for the private and public averages.
//! - [`analysis`]: Lyapunov diagnostics, the scalar comparison system that
//!   underpins the convergence argument, and the deviation of the masked
//!   vector field from its autonomous limit.
//! - [`adversary`]: executable reconstruction attacks against the masked
//!   outputs, used to certify (empirically) when initial states are
//!   discernible and when they are not.
//!
//! Everything is deterministic: random instances are generated from explicit
//! seeds, and integration uses fixed-step Runge–Kutta, so identical inputs
//! produce bit-identical trajectories and reports.

pub mod adversary;
pub mod analysis;
pub mod dynamics;
pub mod graph;
pub mod masks;

mod ode;

#[cfg(doctest)]
mod book;

pub use adversary::{AttackReport, NodeAttackReport, ObservationLog, Verdict};
pub use analysis::{AnalysisReport, ComparisonParams};
pub use dynamics::{consensus_value, MaskedSystem, Trajectory};
pub use graph::{BalancedLaplacian, GraphError, WeightedDigraph};
pub use masks::{MaskFamily, MaskSpec, NodeMaskParams, ParamRanges, PropertyReport};
