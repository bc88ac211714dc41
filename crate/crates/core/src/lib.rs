//! Spectrum sensing for oversampled receivers.
//!
//! Synthetic scenario generation ([`signal`]), periodogram and covariance
//! estimation ([`spectral`], [`covariance`]), a registry of test statistics
//! ([`detectors`]), noise-only calibration ([`calibration`]), a Monte Carlo ROC
//! harness ([`roc`]), Gaussianity checks ([`validation`]) and the command-line
//! front end ([`cli`]).

pub mod calibration;
pub mod cli;
pub mod covariance;
pub mod detectors;
pub mod error;
pub mod roc;
pub mod signal;
pub mod spectral;
pub mod validation;

pub use calibration::{calibrate, CalibrationProfile, ProfileBank};
pub use detectors::{Detector, DetectorKind, DetectorParams, Orientation, SensingContext};
pub use error::{Error, Result};
pub use signal::{Hypothesis, IqBuffer, NoiseModel, NoisePsdShape, ScenarioConfig};
