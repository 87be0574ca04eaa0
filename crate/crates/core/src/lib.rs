//! Exact and Monte-Carlo models of the CHSH polarisation experiment.
//!
//! The crate has five parts:
//!
//! * [`matrix`] — exact complex linear algebra on ℂ² and ℂ²⊗ℂ²: rotations,
//!   projectors, tensor products, traces and partial traces.
//! * [`quantum`] — the joint and local projection-valued measures, the
//!   Bell state, Born-rule statistics and the partial-trace relation
//!   between joint and local measurements.
//! * [`classical`] — the explicit 16-point probability measure whose
//!   setting blocks reproduce the quantum statistics exactly, with
//!   conditional/marginal queries and the exact CHSH value.
//! * [`lhv`] — finite local hidden-variable models, the 16 deterministic
//!   strategies, and probes of the bound |S| ≤ 2.
//! * [`experiment`] — seeded Monte-Carlo runs of the measurement protocol
//!   and the counting estimators E_k and S_k.
//!
//! All model values are immutable and all queries are pure functions, so
//! everything can be shared freely across threads. With the default
//! `parallel` feature, the Monte-Carlo runners and the model probe gain
//! rayon-backed variants that partition work into fixed RNG streams and
//! therefore return bit-identical results to their serial twins.

pub mod classical;
pub mod distribution;
pub mod experiment;
pub mod lhv;
pub mod matrix;
pub mod outcome;
pub mod quantum;
pub mod settings;

pub use distribution::OutcomeDistribution;
pub use matrix::{Complex64, SquareMatrix, StateVector, ENTRY_TOL};
pub use outcome::{Outcome, JOINT_OUTCOMES};
pub use settings::{SettingAngles, SettingPair};
