//! Monte Carlo harness: per-hypothesis statistic sampling, empirical ROC
//! curves and threshold selection.
//!
//! Trial `t` under hypothesis `h` draws from its own ChaCha8 stream
//! `(master_seed, 2t + h)`, so results do not depend on the worker count or
//! on scheduling order. Statistics are oriented scores (large ⇒ H1). Trials
//! whose statistic is degenerate are counted as excluded and kept in every
//! denominator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::calibration::ProfileBank;
use crate::detectors::{score_all, Detector, SensingContext};
use crate::error::{Error, Result};
use crate::signal::{make_trial, Hypothesis, ScenarioConfig};

/// Environment variable overriding the number of trial workers.
pub const WORKERS_ENV: &str = "SPECSENSE_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Evaluate every detector on the same buffers (paired comparison). When
    /// false each detector sees its own independent buffers.
    pub shared_randomness: bool,
    /// Worker threads; `None` reads [`WORKERS_ENV`], falling back to all cores.
    pub workers: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            shared_randomness: true,
            workers: None,
        }
    }
}

/// Oriented statistics of one detector under one hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct StatSample {
    /// Values from non-degenerate trials, in trial order.
    pub values: Vec<f64>,
    pub excluded: usize,
}

impl StatSample {
    pub fn n_total(&self) -> usize {
        self.values.len() + self.excluded
    }

    /// Fraction of all trials (excluded ones included) strictly above `threshold`.
    pub fn exceedance(&self, threshold: f64) -> f64 {
        let n = self.n_total();
        if n == 0 {
            return 0.0;
        }
        self.values.iter().filter(|&&v| v > threshold).count() as f64 / n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialBatch {
    pub detector: Detector,
    pub h0_stats: Vec<f64>,
    pub h1_stats: Vec<f64>,
    pub excluded_h0: usize,
    pub excluded_h1: usize,
    pub config: ScenarioConfig,
    pub seed: u64,
}

impl TrialBatch {
    pub fn n_h0(&self) -> usize {
        self.h0_stats.len() + self.excluded_h0
    }

    pub fn n_h1(&self) -> usize {
        self.h1_stats.len() + self.excluded_h1
    }

    /// Threshold for `target_pfa` on the H0 sample, then the detection rate
    /// at that threshold. Returns `(pd, realized_pfa)`.
    pub fn pd_at_pfa(&self, target_pfa: f64) -> Result<(f64, f64)> {
        let xi = threshold_for_pfa_counted(&self.h0_stats, self.n_h0(), target_pfa)?;
        Ok((
            exceed_fraction(&self.h1_stats, self.n_h1(), xi),
            exceed_fraction(&self.h0_stats, self.n_h0(), xi),
        ))
    }
}

fn exceed_fraction(values: &[f64], n_total: usize, xi: f64) -> f64 {
    values.iter().filter(|&&v| v > xi).count() as f64 / n_total as f64
}

/// Standard error of a Monte Carlo proportion.
pub fn mc_std_error(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Worker count from `options`, then [`WORKERS_ENV`], then rayon's default.
pub fn worker_count(options: &RunOptions) -> usize {
    options
        .workers
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

fn trial_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

fn hypothesis_index(h: Hypothesis) -> u64 {
    match h {
        Hypothesis::H0 => 0,
        Hypothesis::H1 => 1,
    }
}

/// Checks the scenario and every detector before any trial runs.
pub fn validate_run(
    config: &ScenarioConfig,
    detectors: &[Detector],
    n_trials: usize,
    profiles: &ProfileBank,
) -> Result<()> {
    if n_trials < 1 {
        return Err(Error::invalid("n_trials must be >= 1"));
    }
    if detectors.is_empty() {
        return Err(Error::invalid("no detectors requested"));
    }
    config.validate()?;
    let ctx = SensingContext::from_config(config, profiles);
    for d in detectors {
        d.validate(config.n_samples, &ctx)?;
        let used = d
            .required_psd()
            .and_then(|n| profiles.profiles().iter().find(|c| c.n_fft() == n))
            .into_iter()
            .chain(d.required_covariance().and_then(|p| profiles.covariance(p)));
        for profile in used {
            profile.check_duration(config.n_samples);
        }
    }
    Ok(())
}

/// Oriented statistics of each detector over `n_trials` observations of one
/// hypothesis.
pub fn sample_statistics(
    config: &ScenarioConfig,
    detectors: &[Detector],
    n_trials: usize,
    master_seed: u64,
    hypothesis: Hypothesis,
    profiles: &ProfileBank,
    options: &RunOptions,
) -> Result<Vec<StatSample>> {
    validate_run(config, detectors, n_trials, profiles)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(options))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let ctx = SensingContext::from_config(config, profiles);
    let h = hypothesis_index(hypothesis);
    let n_det = detectors.len();

    // One work unit per (trial, buffer). With shared randomness a buffer feeds
    // all detectors; otherwise each detector has its own buffer and stream.
    let units = if options.shared_randomness { n_trials } else { n_trials * n_det };
    let per_unit: Vec<Vec<Result<f64>>> = pool.install(|| {
        (0..units)
            .into_par_iter()
            .map(|u| {
                let (stream, dets) = if options.shared_randomness {
                    (2 * u as u64 + h, detectors)
                } else {
                    (2 * u as u64 + h, &detectors[u % n_det..u % n_det + 1])
                };
                let y = make_trial(config, hypothesis, &mut trial_rng(master_seed, stream))?;
                Ok(score_all(dets, &y, &ctx))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut out = vec![
        StatSample {
            values: Vec::with_capacity(n_trials),
            excluded: 0,
        };
        n_det
    ];
    for (u, scores) in per_unit.into_iter().enumerate() {
        let first = if options.shared_randomness { 0 } else { u % n_det };
        for (k, r) in scores.into_iter().enumerate() {
            let slot = &mut out[first + k];
            match r {
                Ok(v) if v.is_finite() => slot.values.push(v),
                Ok(_) | Err(Error::Degenerate(_)) => slot.excluded += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

/// H0 and H1 statistics of every detector with default options.
pub fn run_trials(
    config: &ScenarioConfig,
    detectors: &[Detector],
    n_trials: usize,
    master_seed: u64,
    profiles: &ProfileBank,
) -> Result<Vec<TrialBatch>> {
    run_trials_with(config, detectors, n_trials, master_seed, profiles, &RunOptions::default())
}

pub fn run_trials_with(
    config: &ScenarioConfig,
    detectors: &[Detector],
    n_trials: usize,
    master_seed: u64,
    profiles: &ProfileBank,
    options: &RunOptions,
) -> Result<Vec<TrialBatch>> {
    let sample = |h| sample_statistics(config, detectors, n_trials, master_seed, h, profiles, options);
    let h0 = sample(Hypothesis::H0)?;
    let h1 = sample(Hypothesis::H1)?;
    Ok(detectors
        .iter()
        .zip(h0.into_iter().zip(h1))
        .map(|(d, (s0, s1))| TrialBatch {
            detector: *d,
            h0_stats: s0.values,
            h1_stats: s1.values,
            excluded_h0: s0.excluded,
            excluded_h1: s1.excluded,
            config: config.clone(),
            seed: master_seed,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub pfa: f64,
    pub pd: f64,
}

/// ROC points ordered by increasing threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// Best detection rate among points whose pfa does not exceed `target`.
    pub fn pd_at_pfa(&self, target: f64) -> f64 {
        self.points
            .iter()
            .filter(|p| p.pfa <= target)
            .map(|p| p.pd)
            .fold(0.0, f64::max)
    }
}

/// Empirical ROC: one point per distinct H0 statistic, preceded by a point
/// at threshold −∞ where every non-excluded trial exceeds.
pub fn empirical_roc(batch: &TrialBatch) -> RocCurve {
    let mut h0 = batch.h0_stats.clone();
    let mut h1 = batch.h1_stats.clone();
    h0.sort_by(f64::total_cmp);
    h1.sort_by(f64::total_cmp);
    h0.dedup();
    let (n0, n1) = (batch.n_h0().max(1) as f64, batch.n_h1().max(1) as f64);
    let mut sorted0 = batch.h0_stats.clone();
    sorted0.sort_by(f64::total_cmp);
    let above = |sorted: &[f64], xi: f64| sorted.len() - sorted.partition_point(|&v| v <= xi);
    let points = std::iter::once(f64::NEG_INFINITY)
        .chain(h0.iter().copied())
        .map(|xi| RocPoint {
            threshold: xi,
            pfa: above(&sorted0, xi) as f64 / n0,
            pd: above(&h1, xi) as f64 / n1,
        })
        .collect();
    RocCurve { points }
}

/// Smallest empirical threshold whose realized false-alarm rate on `h0_stats`
/// does not exceed `target_pfa`.
pub fn threshold_for_pfa(h0_stats: &[f64], target_pfa: f64) -> Result<f64> {
    threshold_for_pfa_counted(h0_stats, h0_stats.len(), target_pfa)
}

/// As [`threshold_for_pfa`], with `n_total - h0_stats.len()` excluded trials
/// counted as non-exceedances.
pub fn threshold_for_pfa_counted(h0_stats: &[f64], n_total: usize, target_pfa: f64) -> Result<f64> {
    if h0_stats.is_empty() {
        return Err(Error::invalid("no H0 statistics"));
    }
    if !(target_pfa > 0.0 && target_pfa < 1.0) {
        return Err(Error::invalid(format!("target pfa must be in (0, 1), got {target_pfa}")));
    }
    if h0_stats.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("H0 statistics must be finite"));
    }
    let n_total = n_total.max(h0_stats.len());
    if (n_total as f64) < 1.0 / target_pfa {
        log::warn!("{n_total} H0 samples are too few for pfa {target_pfa}");
    }
    let mut s = h0_stats.to_vec();
    s.sort_by(f64::total_cmp);
    // At most k exceedances are allowed.
    let k = (target_pfa * n_total as f64 + 1e-9).floor() as usize;
    let m = s.len();
    Ok(if m > k { s[m - k - 1] } else { f64::NEG_INFINITY })
}
