//! Lag-autocorrelation detectors for oversampled signals.
//!
//! `y_{i}` is the circular shift of `y` by `i` samples, `y_{i}[n] = y[(n - i) mod N]`.
//! The offset `v_i` pulls the statistic toward the expected lag-i correlation
//! of a signal at the reference SNR.

use num_complex::Complex64;

use super::Flagged;
use crate::error::{Error, Result};
use crate::signal::IqBuffer;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcParams {
    pub osf: usize,
    /// Reference SNR, linear.
    pub snr_ref: f64,
    /// Signal power σ_s² entering the offsets.
    pub signal_power: f64,
}

impl AcParams {
    fn validate(&self, n: usize) -> Result<()> {
        if self.osf < 1 {
            return Err(Error::invalid("osf must be >= 1"));
        }
        if !(self.snr_ref.is_finite() && self.snr_ref > 0.0) {
            return Err(Error::invalid("snr_ref must be positive"));
        }
        if !self.signal_power.is_finite() || self.signal_power < 0.0 {
            return Err(Error::invalid("signal power must be non-negative"));
        }
        if n < self.osf {
            return Err(Error::invalid(format!("need N >= osf, got N={n}")));
        }
        Ok(())
    }
}

/// α_i = (OSF − i) / OSF.
pub fn ac_alpha(i: usize, osf: usize) -> f64 {
    (osf as f64 - i as f64) / osf as f64
}

/// v_i = N α_i σ_s² / (2·SNR_ref + N·SNR_ref²·(α_i² + 2i²/(OSF·N))).
pub fn ac_offset(i: usize, n: usize, params: &AcParams) -> f64 {
    let nf = n as f64;
    let a = ac_alpha(i, params.osf);
    let r = params.snr_ref;
    let osf = params.osf as f64;
    let i2 = (i * i) as f64;
    nf * a * params.signal_power / (2.0 * r + nf * r * r * (a * a + 2.0 * i2 / osf / nf))
}

/// `y_{i}ᴴ y`.
pub fn lag_product(y: &[Complex64], lag: usize) -> Complex64 {
    let n = y.len();
    let lag = lag % n;
    (0..n).map(|k| y[(k + n - lag) % n].conj() * y[k]).sum()
}

fn lag_term(y: &[Complex64], i: usize, params: &AcParams) -> f64 {
    (lag_product(y, i) + ac_offset(i, y.len(), params)).norm_sqr()
}

/// Σ_{i=1}^{OSF−1} |y_{i}ᴴ y + v_i|². With OSF = 1 the sum is empty: the value
/// is 0 and the result is flagged as uninformative.
pub fn t_ac(y: &IqBuffer, params: &AcParams) -> Result<Flagged<f64>> {
    params.validate(y.len())?;
    if params.osf == 1 {
        return Ok(Flagged::flagged(0.0, "osf = 1 leaves no lags to test"));
    }
    let s = y.samples();
    let v = (1..params.osf).map(|i| lag_term(s, i, params)).sum();
    Ok(Flagged::ok(v))
}

/// The lag-1 term of [`t_ac`].
pub fn t_ac1(y: &IqBuffer, params: &AcParams) -> Result<f64> {
    params.validate(y.len())?;
    Ok(lag_term(y.samples(), 1, params))
}
