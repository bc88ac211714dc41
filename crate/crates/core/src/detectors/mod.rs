//! Test statistics and the detector registry.
//!
//! The free functions in the submodules compute each statistic exactly as
//! defined. [`Detector`] binds a statistic to its parameters and evaluates it
//! on raw IQ samples; [`Detector::score`] additionally applies the detector's
//! [`Orientation`] so that large values always favour H1.

mod autocorr;
mod eigen;
mod frequency;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub use autocorr::{ac_alpha, ac_offset, lag_product, t_ac, t_ac1, AcParams};
pub use eigen::{
    eigen_statistic, eigen_statistic_from_scm, t_cov, whitened_eigen_statistic, EigenTest,
    WhitenedTest,
};
pub use frequency::{
    search_window_bins, t_ed, t_ed_all, t_enp_ed, t_f_agm, t_fc, t_fkl, t_search_b, t_sf,
    t_w_enp_ed, t_wf_agm,
};

use crate::calibration::ProfileBank;
use crate::covariance::{arrange_matrix, scm, HermitianMatrix};
use crate::error::{Error, Result};
use crate::signal::{IqBuffer, ScenarioConfig};
use crate::spectral::{band_bins, bartlett_periodogram, whiten_periodogram, Periodogram};

/// A value with an optional note saying it carries no information.
#[derive(Debug, Clone, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub note: Option<&'static str>,
}

impl<T> Flagged<T> {
    pub fn ok(value: T) -> Self {
        Self { value, note: None }
    }

    pub fn flagged(value: T, note: &'static str) -> Self {
        Self {
            value,
            note: Some(note),
        }
    }

    pub fn is_flagged(&self) -> bool {
        self.note.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    EdAll,
    Ed,
    EnpEd,
    FAgm,
    Sf,
    SearchB,
    WEnpEd,
    WfAgm,
    Fc,
    Fkl,
    Sph,
    Mme,
    Met,
    Lbi,
    Ind,
    Fro,
    Max,
    Cov,
    Ac,
    Ac1,
    WSph,
    WLbi,
    WInd,
    WMax,
}

/// Which way a raw statistic moves under H1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Large raw value means H1.
    Direct,
    /// Raw value is bounded above by 1 and shrinks under H1; the score is `1 - t`.
    Complement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Periodogram,
    Matrix,
    Autocorrelation,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 24] = [
        DetectorKind::EdAll,
        DetectorKind::Ed,
        DetectorKind::EnpEd,
        DetectorKind::FAgm,
        DetectorKind::Sf,
        DetectorKind::SearchB,
        DetectorKind::WEnpEd,
        DetectorKind::WfAgm,
        DetectorKind::Fc,
        DetectorKind::Fkl,
        DetectorKind::Sph,
        DetectorKind::Mme,
        DetectorKind::Met,
        DetectorKind::Lbi,
        DetectorKind::Ind,
        DetectorKind::Fro,
        DetectorKind::Max,
        DetectorKind::Cov,
        DetectorKind::Ac,
        DetectorKind::Ac1,
        DetectorKind::WSph,
        DetectorKind::WLbi,
        DetectorKind::WInd,
        DetectorKind::WMax,
    ];

    pub fn name(self) -> &'static str {
        use DetectorKind::*;
        match self {
            EdAll => "ed_all",
            Ed => "ed",
            EnpEd => "enp_ed",
            FAgm => "f_agm",
            Sf => "sf",
            SearchB => "search_b",
            WEnpEd => "w_enp_ed",
            WfAgm => "wf_agm",
            Fc => "fc",
            Fkl => "fkl",
            Sph => "sph",
            Mme => "mme",
            Met => "met",
            Lbi => "lbi",
            Ind => "ind",
            Fro => "fro",
            Max => "max",
            Cov => "cov",
            Ac => "ac",
            Ac1 => "ac1",
            WSph => "w_sph",
            WLbi => "w_lbi",
            WInd => "w_ind",
            WMax => "w_max",
        }
    }

    pub fn family(self) -> Family {
        use DetectorKind::*;
        match self {
            EdAll | Ed | EnpEd | FAgm | Sf | SearchB | WEnpEd | WfAgm | Fc | Fkl => {
                Family::Periodogram
            }
            Sph | Mme | Met | Lbi | Ind | Fro | Max | Cov | WSph | WLbi | WInd | WMax => {
                Family::Matrix
            }
            Ac | Ac1 => Family::Autocorrelation,
        }
    }

    pub fn orientation(self) -> Orientation {
        use DetectorKind::*;
        match self {
            Sf | Sph | Fc | Ind | WSph | WInd => Orientation::Complement,
            _ => Orientation::Direct,
        }
    }

    /// Invariant to a common scaling of the received samples.
    pub fn is_scale_invariant(self) -> bool {
        !matches!(
            self,
            DetectorKind::EdAll | DetectorKind::Ed | DetectorKind::Ac | DetectorKind::Ac1
        )
    }

    /// Needs the calibrated noise PSD.
    pub fn needs_noise_psd(self) -> bool {
        use DetectorKind::*;
        matches!(self, WEnpEd | WfAgm | Fc | Fkl)
    }

    /// Needs calibrated whitening matrices.
    pub fn needs_noise_covariance(self) -> bool {
        use DetectorKind::*;
        matches!(self, WSph | WLbi | WInd | WMax)
    }

    fn eigen_test(self) -> Option<EigenTest> {
        use DetectorKind::*;
        Some(match self {
            Sph => EigenTest::Sph,
            Mme => EigenTest::Mme,
            Met => EigenTest::Met,
            Lbi => EigenTest::Lbi,
            Ind => EigenTest::Ind,
            Fro => EigenTest::Fro,
            Max => EigenTest::Max,
            _ => return None,
        })
    }

    fn whitened_test(self) -> Option<WhitenedTest> {
        use DetectorKind::*;
        Some(match self {
            WSph => WhitenedTest::Sph,
            WLbi => WhitenedTest::Lbi,
            WInd => WhitenedTest::Ind,
            WMax => WhitenedTest::Max,
            _ => return None,
        })
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        DetectorKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown detector '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorParams {
    Periodogram { n_fft: usize, n_avg: usize },
    Matrix { p: usize },
    /// Reference SNR in dB.
    Autocorrelation { snr_ref_db: f64 },
}

/// A statistic together with its parameter block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detector {
    pub kind: DetectorKind,
    pub params: DetectorParams,
}

/// Scenario knowledge available at detection time.
#[derive(Debug, Clone, Copy)]
pub struct SensingContext<'a> {
    /// Signal band edges (fractions of fs).
    pub band: (f64, f64),
    pub osf: usize,
    /// Nominal (calibrated) noise power; sets σ_s² for the autocorrelation tests.
    pub noise_power: f64,
    pub profiles: &'a ProfileBank,
}

impl<'a> SensingContext<'a> {
    pub fn from_config(config: &ScenarioConfig, profiles: &'a ProfileBank) -> Self {
        Self {
            band: config.band,
            osf: config.osf,
            noise_power: config.noise_power,
            profiles,
        }
    }
}

impl Detector {
    pub fn periodogram(kind: DetectorKind, n_fft: usize, n_avg: usize) -> Self {
        Self {
            kind,
            params: DetectorParams::Periodogram { n_fft, n_avg },
        }
    }

    pub fn matrix(kind: DetectorKind, p: usize) -> Self {
        Self {
            kind,
            params: DetectorParams::Matrix { p },
        }
    }

    pub fn autocorrelation(kind: DetectorKind, snr_ref_db: f64) -> Self {
        Self {
            kind,
            params: DetectorParams::Autocorrelation { snr_ref_db },
        }
    }

    /// Parses `name[@args]`:
    ///
    /// * periodogram tests: `enp_ed@128x12`, or `enp_ed@128` with
    ///   n_avg = ⌊N/n_fft⌋; bare names use n_fft = 128;
    /// * matrix tests: `max@4` (p), bare names use p = OSF;
    /// * autocorrelation tests: `ac1@-10` (reference SNR in dB), bare names use
    ///   the scenario SNR.
    pub fn parse(text: &str, config: &ScenarioConfig) -> Result<Self> {
        let (name, args) = match text.trim().split_once('@') {
            Some((n, a)) => (n, Some(a.trim())),
            None => (text.trim(), None),
        };
        let kind: DetectorKind = name.parse()?;
        let bad = |what: &str| Error::Config(format!("detector '{text}': {what}"));
        let params = match kind.family() {
            Family::Periodogram => {
                let (n_fft, n_avg) = match args {
                    None => (128, None),
                    Some(a) => match a.split_once(['x', 'X']) {
                        Some((f, v)) => (
                            f.parse().map_err(|_| bad("bad n_fft"))?,
                            Some(v.parse().map_err(|_| bad("bad n_avg"))?),
                        ),
                        None => (a.parse().map_err(|_| bad("bad n_fft"))?, None),
                    },
                };
                if n_fft == 0 {
                    return Err(bad("n_fft must be positive"));
                }
                let n_avg = n_avg.unwrap_or(config.n_samples / n_fft);
                DetectorParams::Periodogram { n_fft, n_avg }
            }
            Family::Matrix => DetectorParams::Matrix {
                p: match args {
                    None => config.osf,
                    Some(a) => a.trim_start_matches('p').parse().map_err(|_| bad("bad p"))?,
                },
            },
            Family::Autocorrelation => DetectorParams::Autocorrelation {
                snr_ref_db: match args {
                    None => config.snr_db,
                    Some(a) => a.trim_end_matches("dB").parse().map_err(|_| bad("bad SNR_ref"))?,
                },
            },
        };
        let d = Detector { kind, params };
        d.check_family()?;
        Ok(d)
    }

    /// Parses a comma-separated detector list.
    pub fn parse_list(text: &str, config: &ScenarioConfig) -> Result<Vec<Self>> {
        let list: Vec<Detector> = text
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| Detector::parse(s, config))
            .collect::<Result<_>>()?;
        if list.is_empty() {
            return Err(Error::Config("empty detector list".into()));
        }
        Ok(list)
    }

    /// Canonical `name@args` form accepted by [`Detector::parse`].
    pub fn label(&self) -> String {
        match self.params {
            DetectorParams::Periodogram { n_fft, n_avg } => format!("{}@{n_fft}x{n_avg}", self.kind),
            DetectorParams::Matrix { p } => format!("{}@{p}", self.kind),
            DetectorParams::Autocorrelation { snr_ref_db } => format!("{}@{snr_ref_db}", self.kind),
        }
    }

    pub fn orientation(&self) -> Orientation {
        self.kind.orientation()
    }

    fn check_family(&self) -> Result<()> {
        let ok = matches!(
            (self.kind.family(), &self.params),
            (Family::Periodogram, DetectorParams::Periodogram { .. })
                | (Family::Matrix, DetectorParams::Matrix { .. })
                | (Family::Autocorrelation, DetectorParams::Autocorrelation { .. })
        );
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("parameter block does not fit detector {}", self.kind)))
        }
    }

    /// n_fft of the noise PSD this detector needs, if any.
    pub fn required_psd(&self) -> Option<usize> {
        match self.params {
            DetectorParams::Periodogram { n_fft, .. } if self.kind.needs_noise_psd() => Some(n_fft),
            _ => None,
        }
    }

    /// Dimension of the noise covariance this detector needs, if any.
    pub fn required_covariance(&self) -> Option<usize> {
        match self.params {
            DetectorParams::Matrix { p } if self.kind.needs_noise_covariance() => Some(p),
            _ => None,
        }
    }

    /// Checks the parameters against a scenario and calibration before any
    /// samples are processed.
    pub fn validate(&self, n_samples: usize, ctx: &SensingContext) -> Result<()> {
        self.check_family()?;
        let cfg = |m: String| Err(Error::Config(format!("{}: {m}", self.label())));
        match self.params {
            DetectorParams::Periodogram { n_fft, n_avg } => {
                if n_fft < 2 || n_avg < 1 {
                    return cfg("need n_fft >= 2 and n_avg >= 1".into());
                }
                if n_fft * n_avg > n_samples {
                    return cfg(format!("n_fft·n_avg = {} exceeds N = {n_samples}", n_fft * n_avg));
                }
                let band = band_bins(ctx.band.0, ctx.band.1, n_fft)?;
                match self.kind {
                    DetectorKind::Ed if band.in_band().is_empty() => {
                        return cfg("signal band holds no bins".into())
                    }
                    DetectorKind::EnpEd | DetectorKind::WEnpEd if band.is_degenerate() => {
                        return cfg("band must leave bins on both sides".into())
                    }
                    DetectorKind::SearchB => {
                        let w = search_window_bins(ctx.band.1 - ctx.band.0, n_fft);
                        if w >= n_fft {
                            return cfg("search window spans the whole spectrum".into());
                        }
                    }
                    _ => {}
                }
                if let Some(n) = self.required_psd() {
                    if ctx.profiles.noise_psd(n).is_none() {
                        return cfg(format!("no calibration profile with n_fft = {n}"));
                    }
                }
            }
            DetectorParams::Matrix { p } => {
                if p < 2 {
                    return cfg("p must be >= 2".into());
                }
                if p > n_samples {
                    return cfg(format!("p = {p} exceeds N = {n_samples}"));
                }
                if let Some(p) = self.required_covariance() {
                    if ctx.profiles.covariance(p).is_none() {
                        return cfg(format!("no calibration profile with p = {p}"));
                    }
                }
            }
            DetectorParams::Autocorrelation { snr_ref_db } => {
                if !snr_ref_db.is_finite() {
                    return cfg("SNR_ref must be finite".into());
                }
                if ctx.osf < 2 && self.kind == DetectorKind::Ac {
                    return cfg("ac needs osf >= 2".into());
                }
                if n_samples < ctx.osf {
                    return cfg("N must be >= osf".into());
                }
            }
        }
        Ok(())
    }

    /// Raw statistic as defined, without orientation.
    pub fn statistic(&self, y: &IqBuffer, ctx: &SensingContext) -> Result<f64> {
        self.evaluate(y, ctx, &mut TrialCache::default())
    }

    /// Oriented statistic: larger means more evidence for H1.
    pub fn score(&self, y: &IqBuffer, ctx: &SensingContext) -> Result<f64> {
        self.statistic(y, ctx).map(|t| orient(self.kind, t))
    }

    fn evaluate(&self, y: &IqBuffer, ctx: &SensingContext, cache: &mut TrialCache) -> Result<f64> {
        use DetectorKind::*;
        match self.params {
            DetectorParams::Periodogram { n_fft, n_avg } => {
                let p = cache.periodogram(y, n_fft, n_avg)?;
                let band = || band_bins(ctx.band.0, ctx.band.1, n_fft);
                let w = || {
                    ctx.profiles.noise_psd(n_fft).ok_or_else(|| {
                        Error::Config(format!("no calibration profile with n_fft = {n_fft}"))
                    })
                };
                match self.kind {
                    EdAll => Ok(t_ed_all(p)),
                    Ed => t_ed(p, &band()?),
                    EnpEd => t_enp_ed(p, &band()?),
                    FAgm => t_f_agm(p),
                    Sf => t_sf(p),
                    SearchB => t_search_b(p, search_window_bins(ctx.band.1 - ctx.band.0, n_fft)),
                    WEnpEd => t_w_enp_ed(&whiten_periodogram(p, w()?)?, &band()?),
                    WfAgm => t_wf_agm(&whiten_periodogram(p, w()?)?),
                    Fc => t_fc(p, w()?),
                    Fkl => t_fkl(p, w()?),
                    _ => unreachable!("checked by check_family"),
                }
            }
            DetectorParams::Matrix { p } => {
                self.check_family()?;
                let s = cache.scm(y, p)?;
                if let Some(test) = self.kind.eigen_test() {
                    eigen_statistic_from_scm(test, s)
                } else if let Some(test) = self.kind.whitened_test() {
                    let profile = ctx.profiles.covariance(p).ok_or_else(|| {
                        Error::Config(format!("no calibration profile with p = {p}"))
                    })?;
                    whitened_eigen_statistic(test, s, profile)
                } else {
                    t_cov(s)
                }
            }
            DetectorParams::Autocorrelation { snr_ref_db } => {
                self.check_family()?;
                let snr_ref = 10f64.powf(snr_ref_db / 10.0);
                let params = AcParams {
                    osf: ctx.osf,
                    snr_ref,
                    signal_power: snr_ref * ctx.noise_power,
                };
                match self.kind {
                    Ac => t_ac(y, &params).map(|f| f.value),
                    _ => t_ac1(y, &params),
                }
            }
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Applies the orientation of `kind` to a raw statistic.
pub fn orient(kind: DetectorKind, raw: f64) -> f64 {
    match kind.orientation() {
        Orientation::Direct => raw,
        Orientation::Complement => 1.0 - raw,
    }
}

/// Periodograms and SCMs shared by the detectors evaluated on one buffer.
#[derive(Default)]
struct TrialCache {
    periodograms: HashMap<(usize, usize), Periodogram>,
    scms: HashMap<usize, HermitianMatrix>,
}

impl TrialCache {
    fn periodogram(&mut self, y: &IqBuffer, n_fft: usize, n_avg: usize) -> Result<&Periodogram> {
        use std::collections::hash_map::Entry;
        match self.periodograms.entry((n_fft, n_avg)) {
            Entry::Occupied(e) => Ok(e.into_mut()),
            Entry::Vacant(e) => Ok(e.insert(bartlett_periodogram(y, n_fft, n_avg)?)),
        }
    }

    fn scm(&mut self, y: &IqBuffer, p: usize) -> Result<&HermitianMatrix> {
        use std::collections::hash_map::Entry;
        match self.scms.entry(p) {
            Entry::Occupied(e) => Ok(e.into_mut()),
            Entry::Vacant(e) => Ok(e.insert(scm(&arrange_matrix(y, p)?))),
        }
    }
}

/// Oriented scores of every detector on one buffer, sharing intermediate
/// periodograms and covariance matrices.
pub fn score_all(detectors: &[Detector], y: &IqBuffer, ctx: &SensingContext) -> Vec<Result<f64>> {
    let mut cache = TrialCache::default();
    detectors
        .iter()
        .map(|d| d.evaluate(y, ctx, &mut cache).map(|t| orient(d.kind, t)))
        .collect()
}
