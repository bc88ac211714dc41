//! Univariate Gaussianity tests for noise samples.
//!
//! Complex buffers are checked by testing real and imaginary parts
//! separately over consecutive non-overlapping chunks.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::signal::IqBuffer;

/// Smallest sample size accepted by the tests.
pub const MIN_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofReport {
    pub statistic: f64,
    pub critical_value: f64,
    pub significance: f64,
    pub rejected: bool,
    pub n: usize,
}

struct Moments {
    mean: f64,
    /// Central moments with 1/n normalization.
    m2: f64,
    m3: f64,
    m4: f64,
}

fn moments(x: &[f64]) -> Result<Moments> {
    if x.len() < MIN_SAMPLES {
        return Err(Error::invalid(format!("need at least {MIN_SAMPLES} samples, got {}", x.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("samples must be finite"));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    if m2 == 0.0 || m2.sqrt() <= 1e-14 * mean.abs() {
        return Err(Error::degenerate("sample variance is zero"));
    }
    Ok(Moments { mean, m2, m3, m4 })
}

fn check_significance(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("significance must be in (0, 1), got {alpha}")))
    }
}

/// JB = n/6·(S² + (K − 3)²/4), compared with the χ²(2) upper quantile −2·ln α.
pub fn jarque_bera(x: &[f64], significance: f64) -> Result<GofReport> {
    check_significance(significance)?;
    let m = moments(x)?;
    let n = x.len() as f64;
    let skew = m.m3 / m.m2.powf(1.5);
    let kurt = m.m4 / (m.m2 * m.m2);
    let statistic = n / 6.0 * (skew * skew + (kurt - 3.0).powi(2) / 4.0);
    let critical_value = -2.0 * significance.ln();
    Ok(GofReport {
        statistic,
        critical_value,
        significance,
        rejected: statistic > critical_value,
        n: x.len(),
    })
}

// Case 3 (mean and variance estimated) critical values for the modified
// statistic A²·(1 + 4/n − 25/n²): Stephens, JASA 69 (1974), Table 1A.
const AD_CRITICAL: [(f64, f64); 5] = [
    (0.15, 0.576),
    (0.10, 0.656),
    (0.05, 0.787),
    (0.025, 0.918),
    (0.01, 1.092),
];

/// Critical value of the modified Anderson–Darling statistic. Only the
/// tabulated levels 0.15, 0.10, 0.05, 0.025 and 0.01 are available.
pub fn anderson_darling_critical(significance: f64) -> Result<f64> {
    AD_CRITICAL
        .iter()
        .find(|(a, _)| (a - significance).abs() < 1e-12)
        .map(|&(_, c)| c)
        .ok_or_else(|| {
            Error::invalid(format!(
                "no Anderson-Darling critical value tabulated for significance {significance}"
            ))
        })
}

/// Upper tail of the standard normal, accurate far into both tails.
fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Anderson–Darling test against a normal law with estimated mean and
/// variance; reports the modified statistic A²·(1 + 4/n − 25/n²).
pub fn anderson_darling(x: &[f64], significance: f64) -> Result<GofReport> {
    check_significance(significance)?;
    let critical_value = anderson_darling_critical(significance)?;
    let m = moments(x)?;
    let n = x.len();
    let nf = n as f64;
    let sd = (m.m2 * nf / (nf - 1.0)).sqrt();
    let mut z: Vec<f64> = x.iter().map(|v| (v - m.mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    // ln Φ(z) = ln sf(−z), ln(1 − Φ(z)) = ln sf(z).
    let s: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (normal_sf(-z[i]).ln() + normal_sf(z[n - 1 - i]).ln()))
        .sum();
    let a2 = -nf - s / nf;
    let statistic = a2 * (1.0 + 4.0 / nf - 25.0 / (nf * nf));
    Ok(GofReport {
        statistic,
        critical_value,
        significance,
        rejected: statistic > critical_value,
        n,
    })
}

/// Outcome of one test repeated over chunks.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RejectionCount {
    pub tests: usize,
    pub rejected: usize,
}

impl RejectionCount {
    pub fn rejection_rate(&self) -> f64 {
        if self.tests == 0 {
            0.0
        } else {
            self.rejected as f64 / self.tests as f64
        }
    }

    pub fn pass_rate(&self) -> f64 {
        1.0 - self.rejection_rate()
    }

    fn record(&mut self, r: &GofReport) {
        self.tests += 1;
        self.rejected += usize::from(r.rejected);
    }
}

/// Chunked Gaussianity check of an IQ buffer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqGaussianity {
    pub chunk_len: usize,
    pub significance: f64,
    pub jb_real: RejectionCount,
    pub jb_imag: RejectionCount,
    pub ad_real: RejectionCount,
    pub ad_imag: RejectionCount,
}

/// Runs both tests on the real and imaginary parts of every full chunk of
/// `chunk_len` samples.
pub fn validate_iq(y: &IqBuffer, chunk_len: usize, significance: f64) -> Result<IqGaussianity> {
    if chunk_len < MIN_SAMPLES {
        return Err(Error::invalid(format!("chunk length must be >= {MIN_SAMPLES}")));
    }
    if y.len() < chunk_len {
        return Err(Error::invalid(format!(
            "buffer of {} samples holds no chunk of {chunk_len}",
            y.len()
        )));
    }
    anderson_darling_critical(significance)?;
    let mut out = IqGaussianity {
        chunk_len,
        significance,
        jb_real: RejectionCount::default(),
        jb_imag: RejectionCount::default(),
        ad_real: RejectionCount::default(),
        ad_imag: RejectionCount::default(),
    };
    for chunk in y.samples().chunks_exact(chunk_len) {
        let re: Vec<f64> = chunk.iter().map(|z| z.re).collect();
        let im: Vec<f64> = chunk.iter().map(|z| z.im).collect();
        out.jb_real.record(&jarque_bera(&re, significance)?);
        out.jb_imag.record(&jarque_bera(&im, significance)?);
        out.ad_real.record(&anderson_darling(&re, significance)?);
        out.ad_imag.record(&anderson_darling(&im, significance)?);
    }
    Ok(out)
}
