//! Frequency-domain tests against time-domain whitened eigenvalue tests when
//! the noise is lowpass rather than white.
//!
//! cargo run --release --example colored_noise_comparison

use specsense::calibration::ProfileBank;
use specsense::detectors::Detector;
use specsense::roc::run_trials;
use specsense::signal::{NoiseModel, NoisePsdShape, ScenarioConfig};

fn main() -> specsense::Result<()> {
    let mut cfg = ScenarioConfig::white(1600, 4, -10.0);
    cfg.noise = NoiseModel::Colored(NoisePsdShape::default_lowpass(128)?);
    let detectors = Detector::parse_list(
        "enp_ed@128x12,w_enp_ed@128x12,wf_agm@16x100,fc@16x100,fkl@16x100,sph@4,w_sph@4,w_lbi@4,w_ind@4,w_max@4",
        &cfg,
    )?;
    // Noise-only calibration captures for every PSD length and dimension the
    // detectors need.
    let bank = ProfileBank::synthesize(&cfg, &detectors, 9)?;
    let batches = run_trials(&cfg, &detectors, 2000, 4, &bank)?;
    for b in &batches {
        let (pd, pfa) = b.pd_at_pfa(0.1)?;
        println!("{:<18} Pd {pd:.4} (realized Pfa {pfa:.4})", b.detector.label());
    }
    Ok(())
}
