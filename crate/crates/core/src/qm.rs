//! Quantum-mechanical predictions for J=1 -> J=0 cascade photon pairs.
//!
//! Two detector angles are in play and are easy to confuse: the detector
//! separation, fixed here at pi (back-to-back detectors), and the polarizer
//! orientation difference `delta`, which is what every function below takes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{fold_angle, AngleConfig, JointDistribution, Setting, SettingsTable};

/// Detector quantum efficiency and aperture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExperimentParams {
    eta: f64,
    phi_deg: f64,
    f_override: Option<f64>,
}

impl ExperimentParams {
    pub fn new(eta: f64, phi_deg: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidEfficiency(eta));
        }
        check_aperture(phi_deg)?;
        Ok(Self {
            eta,
            phi_deg,
            f_override: None,
        })
    }

    /// Replace the computed depolarization factor.
    pub fn with_f_override(mut self, f: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidDepolarization(f));
        }
        self.f_override = Some(f);
        Ok(self)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn phi_deg(&self) -> f64 {
        self.phi_deg
    }

    pub fn f_override(&self) -> Option<f64> {
        self.f_override
    }

    /// Omega / 4pi = (1 - cos phi) / 2.
    pub fn solid_angle_fraction(&self) -> f64 {
        (1.0 - self.phi_deg.to_radians().cos()) / 2.0
    }

    pub fn angular_correlation(&self) -> f64 {
        g_unchecked(self.phi_deg)
    }

    pub fn depolarization(&self) -> f64 {
        self.f_override.unwrap_or_else(|| f_unchecked(self.phi_deg))
    }

    /// Per-channel single-count probability, eta * Omega / 8pi.
    pub fn single(&self) -> f64 {
        self.eta * self.solid_angle_fraction() / 2.0
    }

    /// eta^2 (Omega/8pi)^2 g, the common prefactor of every coincidence.
    pub fn coincidence_scale(&self) -> f64 {
        let half = self.solid_angle_fraction() / 2.0;
        self.eta * self.eta * half * half * self.angular_correlation()
    }
}

fn check_aperture(phi_deg: f64) -> Result<()> {
    if phi_deg > 0.0 && phi_deg <= 90.0 {
        Ok(())
    } else {
        Err(Error::InvalidAperture(phi_deg))
    }
}

fn g_unchecked(phi_deg: f64) -> f64 {
    let c = phi_deg.to_radians().cos();
    1.0 + c * c * (1.0 + c) * (1.0 + c) / 8.0
}

fn f_unchecked(phi_deg: f64) -> f64 {
    let one_minus = 1.0 - phi_deg.to_radians().cos();
    1.0 - 2.0 / 3.0 * one_minus * one_minus
}

/// Angular correlation g(pi, phi) = 1 + cos^2(phi) (1 + cos phi)^2 / 8.
pub fn angular_correlation_g(phi_deg: f64) -> Result<f64> {
    check_aperture(phi_deg)?;
    Ok(g_unchecked(phi_deg))
}

/// Small-aperture depolarization factor F(pi, phi) = 1 - 2/3 (1 - cos phi)^2.
pub fn depolarization_f(phi_deg: f64) -> Result<f64> {
    check_aperture(phi_deg)?;
    Ok(f_unchecked(phi_deg))
}

/// E(delta) = cos 2 delta for ideal polarizers and detectors.
pub fn ideal_expectation(delta_deg: f64) -> f64 {
    (2.0 * fold_angle(delta_deg)).to_radians().cos()
}

/// Ideal table: p++ = p-- = cos^2(delta)/2, p+- = p-+ = sin^2(delta)/2,
/// nothing goes undetected.
pub fn ideal_joint(delta_deg: f64) -> JointDistribution {
    let cos2 = ideal_expectation(delta_deg);
    let same = (1.0 + cos2) / 4.0;
    let opposite = (1.0 - cos2) / 4.0;
    JointDistribution::new([
        [same, opposite, 0.0],
        [opposite, same, 0.0],
        [0.0, 0.0, 0.0],
    ])
    .expect("ideal cascade table is a valid distribution")
}

/// Finite-aperture, finite-efficiency table.
pub fn real_joint(params: &ExperimentParams, delta_deg: f64) -> Result<JointDistribution> {
    let scale = params.coincidence_scale();
    let f = params.depolarization();
    let cos2 = (2.0 * fold_angle(delta_deg)).to_radians().cos();
    let same = scale * (1.0 + f * cos2);
    let opposite = scale * (1.0 - f * cos2);
    let single = params.single();
    JointDistribution::from_coincidences(
        [[same, opposite], [opposite, same]],
        [single, single],
        [single, single],
    )
}

/// Where predicted tables come from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Ideal,
    Real(ExperimentParams),
}

impl Source {
    pub fn joint(&self, delta_deg: f64) -> Result<JointDistribution> {
        match self {
            Source::Ideal => Ok(ideal_joint(delta_deg)),
            Source::Real(params) => real_joint(params, delta_deg),
        }
    }

    /// Prefactor c with p++(delta) = c (1 + F cos 2 delta).
    pub fn coincidence_scale(&self) -> f64 {
        match self {
            Source::Ideal => 0.25,
            Source::Real(params) => params.coincidence_scale(),
        }
    }

    pub fn depolarization(&self) -> f64 {
        match self {
            Source::Ideal => 1.0,
            Source::Real(params) => params.depolarization(),
        }
    }

    /// Coincidence probability with one polarizer removed, 2c.
    pub fn coincidence_one_removed(&self) -> f64 {
        2.0 * self.coincidence_scale()
    }

    /// Coincidence probability with both polarizers removed, 4c.
    pub fn coincidence_both_removed(&self) -> f64 {
        4.0 * self.coincidence_scale()
    }

    /// Per-setting tables for a set of labelled pairs.
    pub fn settings_table(&self, config: &AngleConfig, pairs: &[Setting]) -> Result<SettingsTable> {
        pairs
            .iter()
            .map(|&setting| Ok((setting, self.joint(config.difference(setting))?)))
            .collect()
    }
}

/// Free-function form of [`Source::settings_table`].
pub fn settings_table(
    source: &Source,
    config: &AngleConfig,
    pairs: &[Setting],
) -> Result<SettingsTable> {
    source.settings_table(config, pairs)
}
