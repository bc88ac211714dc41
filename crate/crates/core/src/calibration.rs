//! Offline noise-only calibration: noise PSD, noise covariance and
//! correlation, whitening matrices, and the profile file format.
//!
//! The profile file is JSON. Every real number is stored as a string with 17
//! significant digits so that a save/load round trip is bit-exact; matrices are
//! stored as `{rows, cols, re, im}` with entries in row-major order.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::covariance::{
    arrange_matrix, eigvals_hermitian, sample_correlation, scm, whitening_matrix, CMatrix,
    HermitianMatrix, PD_RATIO,
};
use crate::detectors::Detector;
use crate::error::{Error, Result};
use crate::signal::{gen_noise, IqBuffer, ScenarioConfig};
use crate::spectral::{bartlett_periodogram, Periodogram};

pub const PROFILE_FORMAT: &str = "specsense-calibration-profile";
pub const PROFILE_VERSION: u32 = 1;

/// Tolerance on the whitening identities `B·S0·Bᴴ = I`, `K·R0·Kᴴ = I`.
pub const WHITENING_TOL: f64 = 1e-9;

/// Default PSD resolution for synthesized profiles.
pub const DEFAULT_CAL_NFFT: usize = 128;

/// Minimum snapshot length for synthesized profiles.
pub const MIN_CAL_SAMPLES: usize = 128_000;

/// Noise-only estimates shared by the whitened and PSD-matching detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationProfile {
    noise_psd: Periodogram,
    s0: HermitianMatrix,
    r0: HermitianMatrix,
    b_whiten: CMatrix,
    k_whiten: CMatrix,
    n_samples_used: usize,
}

impl CalibrationProfile {
    /// Assembles a profile from its parts, checking every invariant.
    pub fn from_parts(
        noise_psd: Periodogram,
        s0: HermitianMatrix,
        r0: HermitianMatrix,
        b_whiten: CMatrix,
        k_whiten: CMatrix,
        n_samples_used: usize,
    ) -> Result<Self> {
        let profile = Self {
            noise_psd,
            s0,
            r0,
            b_whiten,
            k_whiten,
            n_samples_used,
        };
        profile.check()?;
        Ok(profile)
    }

    fn check(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::CalibrationFailed(format!("{field}: {msg}")));
        if let Some(i) = self.noise_psd.bins().iter().position(|&b| !(b > 0.0 && b.is_finite())) {
            return bad("noise_psd", format!("bin {i} is not positive"));
        }
        let p = self.s0.dim();
        if self.r0.dim() != p {
            return bad("r0", format!("dimension {} does not match s0 ({p})", self.r0.dim()));
        }
        for (name, m) in [("b_whiten", &self.b_whiten), ("k_whiten", &self.k_whiten)] {
            if m.nrows() != p || m.ncols() != p {
                return bad(name, format!("expected {p}x{p}, got {}x{}", m.nrows(), m.ncols()));
            }
        }
        for (name, h) in [("s0", &self.s0), ("r0", &self.r0)] {
            let e = eigvals_hermitian(h)?;
            let (max, min) = (e.values()[0], e.values()[p - 1]);
            if !(max > 0.0 && min > PD_RATIO * max) {
                return bad(name, format!("not positive definite (λ_min = {min:e}, λ_max = {max:e})"));
            }
        }
        let r = sample_correlation(&self.s0)?;
        let dev = max_abs_diff(r.matrix(), self.r0.matrix());
        if dev > WHITENING_TOL {
            return bad("r0", format!("differs from the correlation of s0 by {dev:e}"));
        }
        for (name, t, h) in [
            ("b_whiten", &self.b_whiten, &self.s0),
            ("k_whiten", &self.k_whiten, &self.r0),
        ] {
            let w = t * h.matrix() * t.adjoint();
            let dev = max_abs_diff(&w, &CMatrix::identity(p, p));
            if dev > WHITENING_TOL {
                return bad(name, format!("whitened matrix deviates from identity by {dev:e}"));
            }
        }
        Ok(())
    }

    pub fn noise_psd(&self) -> &Periodogram {
        &self.noise_psd
    }

    pub fn s0(&self) -> &HermitianMatrix {
        &self.s0
    }

    pub fn r0(&self) -> &HermitianMatrix {
        &self.r0
    }

    pub fn b_whiten(&self) -> &CMatrix {
        &self.b_whiten
    }

    pub fn k_whiten(&self) -> &CMatrix {
        &self.k_whiten
    }

    pub fn n_samples_used(&self) -> usize {
        self.n_samples_used
    }

    /// Dimension of the covariance products.
    pub fn p(&self) -> usize {
        self.s0.dim()
    }

    pub fn n_fft(&self) -> usize {
        self.noise_psd.n_fft()
    }

    /// Calibrated noise power, tr(S0)/p.
    pub fn noise_power(&self) -> f64 {
        self.s0.trace() / self.p() as f64
    }

    /// Max/min PSD bin ratio in dB.
    pub fn psd_dynamic_range_db(&self) -> f64 {
        let b = self.noise_psd.bins();
        let max = b.iter().copied().fold(f64::MIN, f64::max);
        let min = b.iter().copied().fold(f64::MAX, f64::min);
        10.0 * (max / min).log10()
    }

    /// λ_max/λ_min of S0.
    pub fn condition_number(&self) -> f64 {
        let e = eigvals_hermitian(&self.s0).expect("s0 checked at construction");
        e.values()[0] / e.values()[self.p() - 1]
    }

    /// Calibration should cover at least ten times the detection window.
    /// Logs a warning and returns false otherwise.
    pub fn check_duration(&self, detection_samples: usize) -> bool {
        let ok = detection_samples.saturating_mul(10) <= self.n_samples_used;
        if !ok {
            log::warn!(
                "calibration used {} samples, less than 10x the detection window of {}",
                self.n_samples_used,
                detection_samples
            );
        }
        ok
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let file = ProfileFile {
            format: PROFILE_FORMAT.to_string(),
            version: PROFILE_VERSION,
            n_samples_used: self.n_samples_used,
            n_fft: self.noise_psd.n_fft(),
            n_avg: self.noise_psd.n_avg(),
            p: self.p(),
            noise_psd: self.noise_psd.bins().iter().map(|&x| fmt_f64(x)).collect(),
            s0: MatrixRecord::from_matrix(self.s0.matrix()),
            r0: MatrixRecord::from_matrix(self.r0.matrix()),
            b_whiten: MatrixRecord::from_matrix(&self.b_whiten),
            k_whiten: MatrixRecord::from_matrix(&self.k_whiten),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("profile serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProfileFile =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("profile: {e}")))?;
        if file.format != PROFILE_FORMAT {
            return Err(Error::Format(format!("profile: unexpected format tag '{}'", file.format)));
        }
        if file.version != PROFILE_VERSION {
            return Err(Error::Format(format!("profile: unsupported version {}", file.version)));
        }
        if file.noise_psd.len() != file.n_fft {
            return Err(Error::Format(format!(
                "noise_psd: {} values for n_fft = {}",
                file.noise_psd.len(),
                file.n_fft
            )));
        }
        let bins = file
            .noise_psd
            .iter()
            .enumerate()
            .map(|(i, s)| parse_f64(s).map_err(|e| Error::Format(format!("noise_psd[{i}]: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let noise_psd = Periodogram::from_bins(bins, file.n_avg)
            .map_err(|e| Error::Format(format!("noise_psd: {e}")))?;
        let s0 = file.s0.to_matrix("s0", file.p)?;
        let r0 = file.r0.to_matrix("r0", file.p)?;
        let b = file.b_whiten.to_matrix("b_whiten", file.p)?;
        let k = file.k_whiten.to_matrix("k_whiten", file.p)?;
        let herm = |name: &str, m: CMatrix| {
            HermitianMatrix::new(m).map_err(|e| Error::Format(format!("{name}: {e}")))
        };
        Self::from_parts(noise_psd, herm("s0", s0)?, herm("r0", r0)?, b, k, file.n_samples_used)
            .map_err(|e| match e {
                Error::CalibrationFailed(m) => Error::Format(format!("invariant violated: {m}")),
                other => Error::Format(format!("invariant violated: {other}")),
            })
    }
}

fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// 17 significant digits, exponent form, locale-independent.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    format: String,
    version: u32,
    n_samples_used: usize,
    n_fft: usize,
    n_avg: usize,
    p: usize,
    noise_psd: Vec<String>,
    s0: MatrixRecord,
    r0: MatrixRecord,
    b_whiten: MatrixRecord,
    k_whiten: MatrixRecord,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRecord {
    rows: usize,
    cols: usize,
    re: Vec<String>,
    im: Vec<String>,
}

impl MatrixRecord {
    fn from_matrix(m: &CMatrix) -> Self {
        let mut re = Vec::with_capacity(m.len());
        let mut im = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                re.push(fmt_f64(m[(i, j)].re));
                im.push(fmt_f64(m[(i, j)].im));
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            re,
            im,
        }
    }

    fn to_matrix(&self, name: &str, p: usize) -> Result<CMatrix> {
        if self.rows != p || self.cols != p {
            return Err(Error::Format(format!(
                "{name}: expected {p}x{p}, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.re.len() != p * p || self.im.len() != p * p {
            return Err(Error::Format(format!(
                "{name}: expected {} entries, got {} re / {} im",
                p * p,
                self.re.len(),
                self.im.len()
            )));
        }
        let mut m = CMatrix::zeros(p, p);
        for k in 0..p * p {
            let re = parse_f64(&self.re[k]).map_err(|e| Error::Format(format!("{name}.re[{k}]: {e}")))?;
            let im = parse_f64(&self.im[k]).map_err(|e| Error::Format(format!("{name}.im[{k}]: {e}")))?;
            m[(k / p, k % p)] = Complex64::new(re, im);
        }
        Ok(m)
    }
}

/// Builds a profile from a noise-only snapshot.
///
/// Requires at least max(n_fft·n_avg, 10·p²) samples. A covariance that is not
/// positive definite or a PSD with a non-positive bin is a calibration
/// failure; no regularization is attempted.
pub fn calibrate(noise: &IqBuffer, n_fft: usize, n_avg: usize, p: usize) -> Result<CalibrationProfile> {
    if n_fft < 1 || n_avg < 1 || p < 1 {
        return Err(Error::invalid("n_fft, n_avg and p must be >= 1"));
    }
    let need = (n_fft * n_avg).max(10 * p * p);
    if noise.len() < need {
        return Err(Error::invalid(format!(
            "calibration needs at least {need} samples, got {}",
            noise.len()
        )));
    }
    let noise_psd = bartlett_periodogram(noise, n_fft, n_avg)?;
    if let Some(i) = noise_psd.bins().iter().position(|&b| !(b > 0.0)) {
        return Err(Error::CalibrationFailed(format!("noise PSD bin {i} is not positive")));
    }
    let s0 = scm(&arrange_matrix(noise, p)?);
    let b_whiten = whitening_matrix(&s0)?;
    let r0 = sample_correlation(&s0).map_err(|e| Error::CalibrationFailed(e.to_string()))?;
    let k_whiten = whitening_matrix(&r0)?;
    CalibrationProfile::from_parts(noise_psd, s0, r0, b_whiten, k_whiten, noise.len())
}

/// A set of profiles indexed by PSD resolution and covariance dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProfileBank {
    profiles: Vec<CalibrationProfile>,
}

impl ProfileBank {
    pub fn new(profiles: Vec<CalibrationProfile>) -> Self {
        Self { profiles }
    }

    pub fn push(&mut self, profile: CalibrationProfile) {
        self.profiles.push(profile);
    }

    pub fn profiles(&self) -> &[CalibrationProfile] {
        &self.profiles
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Noise PSD from the first profile with this resolution.
    pub fn noise_psd(&self, n_fft: usize) -> Option<&Periodogram> {
        self.profiles.iter().find(|c| c.n_fft() == n_fft).map(|c| c.noise_psd())
    }

    /// First profile whose covariance products are p×p.
    pub fn covariance(&self, p: usize) -> Option<&CalibrationProfile> {
        self.profiles.iter().find(|c| c.p() == p)
    }

    /// Calibrates from one synthetic noise-only snapshot of the scenario's noise
    /// model at nominal power, covering every PSD resolution and covariance
    /// dimension the detectors need. The snapshot stream is disjoint from the
    /// trial streams used by the ROC harness.
    pub fn synthesize(config: &ScenarioConfig, detectors: &[Detector], seed: u64) -> Result<Self> {
        config.validate()?;
        let n_ffts: Vec<usize> = detectors
            .iter()
            .filter_map(|d| d.required_psd())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let ps: Vec<usize> = detectors
            .iter()
            .filter_map(|d| d.required_covariance())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let count = n_ffts.len().max(ps.len()).max(1);
        let pairs: Vec<(usize, usize)> = (0..count)
            .map(|i| {
                (
                    n_ffts.get(i).copied().unwrap_or(DEFAULT_CAL_NFFT),
                    ps.get(i).copied().unwrap_or(config.osf.max(2)),
                )
            })
            .collect();
        let len = pairs
            .iter()
            .map(|&(n, p)| n.max(10 * p * p))
            .fold(MIN_CAL_SAMPLES.max(10 * config.n_samples), usize::max);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        let noise = gen_noise(len, &config.noise, config.noise_power, &mut rng)?;
        let profiles = pairs
            .into_iter()
            .map(|(n_fft, p)| calibrate(&noise, n_fft, len / n_fft, p))
            .collect::<Result<_>>()?;
        Ok(Self { profiles })
    }
}
