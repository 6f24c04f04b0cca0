//! Two-channel Bell inequality toolkit for atomic-cascade photon pairs.
//!
//! * [`model`] holds outcomes, orientations and probability/count tables.
//! * [`qm`] predicts tables for ideal and finite-aperture detectors.
//! * [`lhv`] builds local hidden-variable ensembles and exact local bounds.
//! * [`inequality`] evaluates every functional and checks the underlying
//!   algebraic theorem.
//! * [`simulate`] runs seeded finite-statistics experiments.
//! * [`optimize`] searches polarizer orientations for the largest violation.

pub mod error;
pub mod inequality;
pub mod lhv;
pub mod model;
pub mod optimize;
pub mod qm;
pub mod simulate;

pub use error::{Error, Result};
pub use inequality::{InequalityId, InequalityReport};
pub use model::{AngleConfig, CountTable, JointDistribution, Outcome, Setting, SettingsTable};
pub use qm::{ExperimentParams, Source};
