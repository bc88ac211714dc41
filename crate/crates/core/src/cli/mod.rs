//! Command-line front end.
//!
//! Subcommands: `calibrate`, `roc`, `detect`, `validate`, `generate`.
//! Exit codes: 0 success, 2 configuration error, 3 data/format error,
//! 4 degenerate statistic (no decision).

pub mod config;
pub mod iq;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calibration::{calibrate, fmt_f64, CalibrationProfile, ProfileBank, MIN_CAL_SAMPLES};
use crate::detectors::{Detector, SensingContext};
use crate::error::{Error, Result};
use crate::roc::{empirical_roc, run_trials_with, RunOptions};
use crate::signal::{gen_noise, make_trial, Hypothesis, IqBuffer, ScenarioConfig};
use crate::validation::validate_iq;

use config::ScenarioFile;
use iq::{read_iq_u8, write_iq_u8};
use output::{csv_file_name, roc_csv, write_atomic, DetectorEntry, FileRef, RunManifest};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "specsense", version, about = "Spectrum sensing detectors and ROC harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate noise PSD and covariance from noise-only samples.
    Calibrate(CalibrateArgs),
    /// Monte Carlo ROC curves, one CSV per detector plus a manifest.
    Roc(RocArgs),
    /// Single-shot decision on a captured IQ file.
    Detect(DetectArgs),
    /// Jarque-Bera and Anderson-Darling checks on real and imaginary parts.
    Validate(ValidateArgs),
    /// Write one synthetic observation as an unsigned 8-bit IQ file.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Scenario file; its noise model is used when no --input is given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Noise-only capture (unsigned 8-bit IQ).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 128)]
    pub nfft: usize,
    /// Segments averaged; defaults to all available.
    #[arg(long)]
    pub navg: Option<usize>,
    /// Covariance dimension; defaults to the scenario OSF, or 4.
    #[arg(long)]
    pub p: Option<usize>,
    /// Synthetic snapshot length; defaults to max(128000, 10·N).
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[arg(long, required_unless_present = "manifest")]
    pub config: Option<PathBuf>,
    /// Comma-separated list, e.g. `enp_ed@128x12,sf@16x100,max@4,ac1@-10`.
    #[arg(long, required_unless_present = "manifest")]
    pub detectors: Option<String>,
    #[arg(long, required_unless_present = "manifest")]
    pub trials: Option<usize>,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Calibration profile; repeat for several resolutions or dimensions.
    #[arg(long = "profile")]
    pub profiles: Vec<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Give each detector its own independent buffers.
    #[arg(long)]
    pub independent: bool,
    /// Re-run exactly what a previous manifest describes.
    #[arg(long, conflicts_with_all = ["config", "detectors", "trials", "seed", "profiles", "independent"])]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    /// A single detector.
    #[arg(long = "detectors", alias = "detector")]
    pub detector: String,
    /// Threshold on the oriented score (large ⇒ H1).
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: f64,
    #[arg(long = "profile")]
    pub profiles: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Capture to check; otherwise the scenario's noise generator is sampled.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub chunk: usize,
    /// Synthetic chunks to draw when no input is given.
    #[arg(long, default_value_t = 100)]
    pub chunks: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HypothesisArg {
    H0,
    H1,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub hypothesis: HypothesisArg,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trial index; selects the same stream the ROC harness uses.
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    /// Amplitude gain applied before 8-bit quantization.
    #[arg(long, default_value_t = 0.25)]
    pub gain: f64,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Calibrate(a) => cmd_calibrate(a).map(|_| 0),
        Command::Roc(a) => cmd_roc(a).map(|_| 0),
        Command::Detect(a) => cmd_detect(a).map(|d| match d {
            Decision::NoDecision(_) => 4,
            _ => 0,
        }),
        Command::Validate(a) => cmd_validate(a).map(|_| 0),
        Command::Generate(a) => cmd_generate(a).map(|_| 0),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_scenario(path: &Path) -> Result<(ScenarioFile, ScenarioConfig)> {
    let file = ScenarioFile::load(path)?;
    let cfg = file.to_scenario()?;
    Ok((file, cfg))
}

fn load_profiles(paths: &[PathBuf]) -> Result<(ProfileBank, Vec<FileRef>)> {
    let mut bank = ProfileBank::default();
    let mut refs = Vec::new();
    for p in paths {
        bank.push(CalibrationProfile::load(p)?);
        refs.push(FileRef::of(p)?);
    }
    Ok((bank, refs))
}

pub fn cmd_calibrate(args: &CalibrateArgs) -> Result<CalibrationProfile> {
    let scenario = args.config.as_deref().map(load_scenario).transpose()?;
    let p = args
        .p
        .unwrap_or_else(|| scenario.as_ref().map_or(4, |(_, c)| c.osf.max(2)));
    let noise = match (&args.input, &scenario) {
        (Some(path), _) => read_iq_u8(path)?,
        (None, Some((file, cfg))) => {
            let len = args.samples.unwrap_or(MIN_CAL_SAMPLES.max(10 * cfg.n_samples));
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed.unwrap_or(file.seed));
            rng.set_stream(u64::MAX);
            gen_noise(len, &cfg.noise, cfg.noise_power, &mut rng)?
        }
        (None, None) => return Err(Error::Config("calibrate needs --input or --config".into())),
    };
    if args.nfft < 1 {
        return Err(Error::Config("--nfft must be >= 1".into()));
    }
    let n_avg = args.navg.unwrap_or(noise.len() / args.nfft);
    let need = (args.nfft * n_avg).max(10 * p * p).max(1);
    if noise.len() < need {
        return Err(Error::Format(format!(
            "input holds {} samples, calibration needs {need}",
            noise.len()
        )));
    }
    let profile = calibrate(&noise, args.nfft, n_avg.max(1), p)?;
    write_atomic(&args.out, profile.to_json().as_bytes())?;
    println!("profile: {}", args.out.display());
    println!("samples used: {}", profile.n_samples_used());
    println!("n_fft: {}  n_avg: {}  p: {}", args.nfft, n_avg, p);
    println!("noise power: {:.6}", profile.noise_power());
    println!("PSD dynamic range: {:.2} dB", profile.psd_dynamic_range_db());
    println!("covariance condition number: {:.4}", profile.condition_number());
    Ok(profile)
}

/// Output files written by [`cmd_roc`].
#[derive(Debug, Clone)]
pub struct RocOutputs {
    pub csv_files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

pub fn cmd_roc(args: &RocArgs) -> Result<RocOutputs> {
    let (file, cfg, detectors, trials, seed, bank, refs, shared) = match &args.manifest {
        Some(path) => {
            let m = RunManifest::load(path)?;
            if m.command != "roc" {
                return Err(Error::Format(format!("manifest is for '{}', not roc", m.command)));
            }
            let cfg = m.config.to_scenario()?;
            let detectors = m
                .detectors
                .iter()
                .map(|d| Detector::parse(&d.label, &cfg))
                .collect::<Result<Vec<_>>>()?;
            for r in &m.profiles {
                r.verify()?;
            }
            let paths: Vec<PathBuf> = m.profiles.iter().map(|r| PathBuf::from(&r.path)).collect();
            let (bank, refs) = load_profiles(&paths)?;
            let trials = m.trials.ok_or_else(|| Error::Format("manifest has no trial count".into()))?;
            (m.config, cfg, detectors, trials, m.seed, bank, refs, m.shared_randomness.unwrap_or(true))
        }
        None => {
            let (file, cfg) = load_scenario(args.config.as_deref().expect("required by clap"))?;
            let detectors = Detector::parse_list(args.detectors.as_deref().unwrap_or(""), &cfg)?;
            let trials = args.trials.unwrap_or(0);
            let seed = args.seed.unwrap_or(file.seed);
            let (bank, refs) = load_profiles(&args.profiles)?;
            (file, cfg, detectors, trials, seed, bank, refs, !args.independent)
        }
    };
    let mut names: Vec<String> = detectors.iter().map(csv_file_name).collect();
    names.sort();
    names.dedup();
    if names.len() != detectors.len() {
        return Err(Error::Config("detector list has duplicates".into()));
    }
    if trials < 1 {
        return Err(Error::invalid("--trials must be >= 1"));
    }

    let options = RunOptions {
        shared_randomness: shared,
        workers: None,
    };
    let batches = run_trials_with(&cfg, &detectors, trials, seed, &bank, &options)?;

    std::fs::create_dir_all(&args.out)?;
    let mut manifest = RunManifest::new("roc", file, seed);
    manifest.trials = Some(trials);
    manifest.shared_randomness = Some(shared);
    manifest.profiles = refs;
    let mut csv_files = Vec::new();
    for b in &batches {
        let name = csv_file_name(&b.detector);
        let path = args.out.join(&name);
        let curve = empirical_roc(b);
        write_atomic(&path, roc_csv(&curve, b).as_bytes())?;
        let (pd, pfa) = b.pd_at_pfa(0.1)?;
        println!(
            "{:<20} pd={:.4} at pfa={:.4}  excluded h0/h1 = {}/{}  -> {}",
            b.detector.label(),
            pd,
            pfa,
            b.excluded_h0,
            b.excluded_h1,
            path.display()
        );
        manifest.detectors.push(DetectorEntry::new(&b.detector, Some(name)));
        csv_files.push(path);
    }
    manifest.stamp_now();
    let manifest_path = args.out.join(MANIFEST_FILE);
    write_atomic(&manifest_path, manifest.to_json().as_bytes())?;
    Ok(RocOutputs {
        csv_files,
        manifest: manifest_path,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    H0 { score: f64 },
    H1 { score: f64 },
    NoDecision(String),
}

pub fn cmd_detect(args: &DetectArgs) -> Result<Decision> {
    let (file, cfg) = load_scenario(&args.config)?;
    let detector = Detector::parse(&args.detector, &cfg)?;
    if !args.threshold.is_finite() {
        return Err(Error::Config("--threshold must be finite".into()));
    }
    let (bank, refs) = load_profiles(&args.profiles)?;
    let ctx = SensingContext::from_config(&cfg, &bank);
    detector.validate(cfg.n_samples, &ctx)?;
    let capture = read_iq_u8(&args.input)?;
    if capture.len() < cfg.n_samples {
        return Err(Error::Format(format!(
            "input holds {} samples, detector needs N = {}",
            capture.len(),
            cfg.n_samples
        )));
    }
    for p in bank.profiles() {
        p.check_duration(cfg.n_samples);
    }
    let y = IqBuffer::from_samples(capture.samples()[..cfg.n_samples].to_vec())?;

    let mut manifest = RunManifest::new("detect", file, cfg.seed);
    manifest.detectors.push(DetectorEntry::new(&detector, None));
    manifest.profiles = refs;
    manifest.input = Some(FileRef::of(&args.input)?);
    manifest.threshold = Some(args.threshold);

    let decision = match detector.score(&y, &ctx) {
        Ok(s) if s > args.threshold => Decision::H1 { score: s },
        Ok(s) if s.is_finite() => Decision::H0 { score: s },
        Ok(s) => Decision::NoDecision(format!("statistic is {s}")),
        Err(Error::Degenerate(reason)) => Decision::NoDecision(reason),
        Err(e) => return Err(e),
    };
    println!("detector: {}", detector.label());
    match &decision {
        Decision::H0 { score } | Decision::H1 { score } => println!("statistic: {}", fmt_f64(*score)),
        Decision::NoDecision(_) => println!("statistic: none"),
    }
    println!("threshold: {}", fmt_f64(args.threshold));
    match &decision {
        Decision::H0 { .. } => println!("decision: H0"),
        Decision::H1 { .. } => println!("decision: H1"),
        Decision::NoDecision(r) => println!("decision: no-decision ({r})"),
    }
    println!("manifest: {}", manifest.sha256());
    Ok(decision)
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let y = match (&args.input, &args.config) {
        (Some(path), _) => read_iq_u8(path)?,
        (None, Some(cfg_path)) => {
            let (file, cfg) = load_scenario(cfg_path)?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed.unwrap_or(file.seed));
            gen_noise(args.chunk * args.chunks.max(1), &cfg.noise, cfg.noise_power, &mut rng)?
        }
        (None, None) => return Err(Error::Config("validate needs --input or --config".into())),
    };
    let report = validate_iq(&y, args.chunk, args.alpha)?;
    println!("test,part,tests,rejected,pass_rate");
    for (name, part, r) in [
        ("jarque_bera", "real", report.jb_real),
        ("jarque_bera", "imag", report.jb_imag),
        ("anderson_darling", "real", report.ad_real),
        ("anderson_darling", "imag", report.ad_imag),
    ] {
        println!("{name},{part},{},{},{:.4}", r.tests, r.rejected, r.pass_rate());
    }
    Ok(())
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let (file, cfg) = load_scenario(&args.config)?;
    if !(args.gain.is_finite() && args.gain > 0.0) {
        return Err(Error::Config("--gain must be positive".into()));
    }
    let (h, k) = match args.hypothesis {
        HypothesisArg::H0 => (Hypothesis::H0, 0),
        HypothesisArg::H1 => (Hypothesis::H1, 1),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed.unwrap_or(file.seed));
    rng.set_stream(2 * args.trial + k);
    let y = make_trial(&cfg, h, &mut rng)?;
    write_iq_u8(&args.out, &y, args.gain)?;
    println!("wrote {} samples to {}", y.len(), args.out.display());
    Ok(())
}

/// Entry point for the `specsense` binary.
pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .try_init();
    run(std::env::args_os())
}
