use thiserror::Error;

use crate::inequality::InequalityId;
use crate::model::{Axis, Setting};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),

    #[error("invalid probability table: {0}")]
    InvalidDistribution(String),

    #[error("invalid count table: {0}")]
    InvalidCounts(String),

    #[error("empty run")]
    EmptyRun,

    #[error("missing setting {0}")]
    MissingSetting(Setting),

    #[error("unknown setting label `{0}`")]
    UnknownSetting(String),

    #[error("unknown axis `{0}`")]
    UnknownAxis(String),

    #[error("detector efficiency {0} outside [0, 1]")]
    InvalidEfficiency(f64),

    #[error("aperture half-angle {0} deg outside (0, 90]")]
    InvalidAperture(f64),

    #[error("depolarization override {0} outside [0, 1]")]
    InvalidDepolarization(f64),

    #[error("inconsistent marginals: {0}")]
    InconsistentMarginals(String),

    #[error("no coincidences at r,r")]
    NoRrCoincidences,

    #[error("invalid response function: {0}")]
    InvalidResponse(String),

    #[error("response function has no slot for axis {0}")]
    MissingResponse(Axis),

    #[error("invalid hidden-variable model: {0}")]
    InvalidModel(String),

    #[error("unknown functional `{0}`")]
    UnknownFunctional(String),

    #[error("{0} is not supported here: {1}")]
    UnsupportedFunctional(InequalityId, &'static str),

    #[error("theorem caps must be non-negative (U = {u}, V = {v})")]
    NegativeCap { u: f64, v: f64 },

    #[error("invalid theorem point: {0}")]
    InvalidTheoremPoint(String),

    #[error("invalid run specification: {0}")]
    InvalidRun(String),

    #[error("invalid optimization problem: {0}")]
    InvalidProblem(String),
}
