//! Scenario waveforms: the OFDM signal to detect, white and colored complex
//! Gaussian noise, and per-trial noise-power uncertainty.
//!
//! Every generator takes an explicit random stream, so a trial is a pure
//! function of its seed.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::fft_in_place;

/// Number of OFDM subcarriers.
pub const OFDM_SUBCARRIERS: usize = 64;

/// Number of bins in the default colored-noise PSD shape.
pub const DEFAULT_SHAPE_BINS: usize = 128;

/// Complex baseband samples with sample-rate metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct IqBuffer {
    samples: Vec<Complex64>,
    sample_rate: f64,
}

impl IqBuffer {
    /// Wraps `samples`; rejects empty buffers and non-finite values.
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("IQ buffer must hold at least one sample"));
        }
        if let Some(i) = samples.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Same as [`IqBuffer::new`] with a nominal sample rate of 1.
    pub fn from_samples(samples: Vec<Complex64>) -> Result<Self> {
        Self::new(samples, 1.0)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of |x|² over the buffer.
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Multiplies every sample by the real factor `c`.
    pub fn scaled(mut self, c: f64) -> Self {
        for z in &mut self.samples {
            *z *= c;
        }
        self
    }

    /// Shifts the spectrum by `freq` (fraction of the sample rate).
    pub fn frequency_shifted(mut self, freq: f64) -> Self {
        if freq != 0.0 {
            for (n, z) in self.samples.iter_mut().enumerate() {
                let phase = 2.0 * std::f64::consts::PI * freq * n as f64;
                *z *= Complex64::from_polar(1.0, phase);
            }
        }
        self
    }

    /// Elementwise sum; lengths must match.
    pub fn add(mut self, other: &IqBuffer) -> Result<Self> {
        if other.len() != self.len() {
            return Err(Error::invalid(format!(
                "length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += b;
        }
        Ok(self)
    }
}

/// Relative noise PSD at the natural-order DFT bin frequencies, normalized to
/// unit mean. Known only up to a multiplicative constant in practice.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePsdShape {
    values: Vec<f64>,
}

impl NoisePsdShape {
    /// Normalizes `values` to unit mean. All entries must be positive and finite.
    pub fn from_relative(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("PSD shape must not be empty"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("PSD shape values must be positive and finite"));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Ok(Self {
            values: values.into_iter().map(|v| v / mean).collect(),
        })
    }

    /// Flat spectrum.
    pub fn white(n_bins: usize) -> Result<Self> {
        Self::from_relative(vec![1.0; n_bins])
    }

    /// Lowpass profile in the style of an SDR decimation filter: flat over the
    /// central 60% of the band, raised-cosine roll-off reaching -20 dB at ±fs/2.
    pub fn default_lowpass(n_bins: usize) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::invalid("lowpass shape needs at least 2 bins"));
        }
        let values = (0..n_bins)
            .map(|i| {
                let f = crate::spectral::bin_frequency(i, n_bins).abs();
                let db = if f <= 0.3 {
                    0.0
                } else {
                    let x = ((f - 0.3) / 0.2).min(1.0);
                    -20.0 * 0.5 * (1.0 - (std::f64::consts::PI * x).cos())
                };
                10f64.powf(db / 10.0)
            })
            .collect();
        Self::from_relative(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Noise process used by a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    White,
    Colored(NoisePsdShape),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Noise only.
    H0,
    /// Signal plus noise.
    H1,
}

/// Everything needed to synthesize one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Samples per observation (N).
    pub n_samples: usize,
    /// Oversampling factor, fs / B.
    pub osf: usize,
    /// Signal power over nominal noise power, in dB.
    pub snr_db: f64,
    /// Signal band edges as fractions of the sample rate.
    pub band: (f64, f64),
    pub noise: NoiseModel,
    /// Nominal noise power σ².
    pub noise_power: f64,
    /// Half-range U of the uniform-in-dB noise-power fluctuation.
    pub uncertainty_db: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    /// White-noise scenario with the band centered at DC and width 1/osf.
    pub fn white(n_samples: usize, osf: usize, snr_db: f64) -> Self {
        let half = 0.5 / osf.max(1) as f64;
        Self {
            n_samples,
            osf,
            snr_db,
            band: (-half, half),
            noise: NoiseModel::White,
            noise_power: 1.0,
            uncertainty_db: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(Error::invalid("n_samples must be >= 1"));
        }
        if self.osf < 1 {
            return Err(Error::invalid("osf must be >= 1"));
        }
        if self.n_samples < self.osf {
            return Err(Error::invalid("n_samples must be >= osf"));
        }
        let (lo, hi) = self.band;
        if !(-0.5..=0.5).contains(&lo) || !(-0.5..=0.5).contains(&hi) || lo >= hi {
            return Err(Error::invalid(format!(
                "band ({lo}, {hi}) must satisfy -0.5 <= f_low < f_high <= 0.5"
            )));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::invalid("snr_db must be finite"));
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(Error::invalid("noise_power must be positive"));
        }
        if !(self.uncertainty_db.is_finite() && self.uncertainty_db >= 0.0) {
            return Err(Error::invalid("uncertainty_db must be >= 0"));
        }
        Ok(())
    }

    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn band_center(&self) -> f64 {
        0.5 * (self.band.0 + self.band.1)
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

/// Circularly-symmetric complex Gaussian noise with E|x|² = `variance`.
pub fn gen_white_noise<R: Rng + ?Sized>(n: usize, variance: f64, rng: &mut R) -> Result<IqBuffer> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::invalid(format!("variance must be positive, got {variance}")));
    }
    let scale = (variance / 2.0).sqrt();
    let samples = (0..n).map(|_| complex_normal(rng, scale)).collect();
    IqBuffer::from_samples(samples)
}

/// Gaussian noise with the given PSD shape and total power `variance`.
///
/// Synthesized blockwise in the frequency domain: each block of `shape.len()`
/// white samples is transformed, weighted by sqrt(shape), and transformed back.
/// Blocks are independent; the tail of the last block is truncated.
pub fn gen_colored_noise<R: Rng + ?Sized>(
    n: usize,
    shape: &NoisePsdShape,
    variance: f64,
    rng: &mut R,
) -> Result<IqBuffer> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::invalid(format!("variance must be positive, got {variance}")));
    }
    let len = shape.len();
    let gains: Vec<f64> = shape.values().iter().map(|v| v.sqrt()).collect();
    // Unit-power white input; the inverse transform is unnormalized, so fold
    // 1/len into the output scale.
    let out_scale = variance.sqrt() / len as f64;
    let n_blocks = n.div_ceil(len);
    let mut samples = Vec::with_capacity(n_blocks * len);
    let mut block = vec![Complex64::new(0.0, 0.0); len];
    for _ in 0..n_blocks {
        for z in block.iter_mut() {
            *z = complex_normal(rng, std::f64::consts::FRAC_1_SQRT_2);
        }
        fft_in_place(&mut block, false);
        for (z, g) in block.iter_mut().zip(&gains) {
            *z *= g;
        }
        fft_in_place(&mut block, true);
        samples.extend(block.iter().map(|z| z * out_scale));
    }
    samples.truncate(n);
    IqBuffer::from_samples(samples)
}

/// Noise of the configured model.
pub fn gen_noise<R: Rng + ?Sized>(
    n: usize,
    model: &NoiseModel,
    variance: f64,
    rng: &mut R,
) -> Result<IqBuffer> {
    match model {
        NoiseModel::White => gen_white_noise(n, variance, rng),
        NoiseModel::Colored(shape) => gen_colored_noise(n, shape, variance, rng),
    }
}

/// Unit-power OFDM baseband waveform centered at DC, occupying 1/osf of the band.
///
/// 64 QPSK subcarriers, IFFT length 64·osf, cyclic prefix of a quarter symbol.
/// The waveform starts at a random offset inside the first symbol.
pub fn gen_ofdm<R: Rng + ?Sized>(n: usize, osf: usize, rng: &mut R) -> Result<IqBuffer> {
    if osf < 1 {
        return Err(Error::invalid("osf must be >= 1"));
    }
    if n < osf {
        return Err(Error::invalid(format!("need n >= osf, got n={n}, osf={osf}")));
    }
    let n_ifft = OFDM_SUBCARRIERS * osf;
    let cp = n_ifft / 4;
    let sym_len = n_ifft + cp;
    let offset = rng.random_range(0..sym_len);
    let n_symbols = (n + offset).div_ceil(sym_len);

    let half = (OFDM_SUBCARRIERS / 2) as isize;
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let scale = 1.0 / (OFDM_SUBCARRIERS as f64).sqrt();
    let mut freq = vec![Complex64::new(0.0, 0.0); n_ifft];
    let mut out = Vec::with_capacity(n_symbols * sym_len);
    for _ in 0..n_symbols {
        freq.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for k in -half..half {
            let idx = k.rem_euclid(n_ifft as isize) as usize;
            let re = if rng.random::<bool>() { amp } else { -amp };
            let im = if rng.random::<bool>() { amp } else { -amp };
            freq[idx] = Complex64::new(re, im);
        }
        fft_in_place(&mut freq, true);
        out.extend(freq[n_ifft - cp..].iter().map(|z| z * scale));
        out.extend(freq.iter().map(|z| z * scale));
    }
    IqBuffer::from_samples(out[offset..offset + n].to_vec())
}

/// One draw of the per-observation noise power: `nominal · 10^(u/10)` with
/// u uniform on [-U, U] dB. Always consumes one value from the stream.
pub fn draw_noise_power<R: Rng + ?Sized>(nominal: f64, uncertainty_db: f64, rng: &mut R) -> f64 {
    let unit: f64 = rng.random();
    if uncertainty_db <= 0.0 {
        return nominal;
    }
    let u = uncertainty_db * (2.0 * unit - 1.0);
    nominal * 10f64.powf(u / 10.0)
}

/// One observation under `hypothesis`.
///
/// The noise power is drawn per trial; under H1 the signal power is
/// `snr · nominal noise power` and the OFDM waveform is shifted to the band center.
pub fn make_trial<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    hypothesis: Hypothesis,
    rng: &mut R,
) -> Result<IqBuffer> {
    let sigma2 = draw_noise_power(config.noise_power, config.uncertainty_db, rng);
    let noise = gen_noise(config.n_samples, &config.noise, sigma2, rng)?;
    match hypothesis {
        Hypothesis::H0 => Ok(noise),
        Hypothesis::H1 => {
            let signal_power = config.snr_linear() * config.noise_power;
            let signal = gen_ofdm(config.n_samples, config.osf, rng)?
                .scaled(signal_power.sqrt())
                .frequency_shifted(config.band_center());
            signal.add(&noise)
        }
    }
}
