//! Thresholds set for the nominal noise level, applied when the true level
//! drifts by up to ±1 dB per observation.
//!
//! cargo run --release --example noise_uncertainty

use specsense::calibration::ProfileBank;
use specsense::detectors::Detector;
use specsense::roc::{sample_statistics, threshold_for_pfa, RunOptions};
use specsense::signal::ScenarioConfig;
use specsense::Hypothesis;

fn main() -> specsense::Result<()> {
    let nominal = ScenarioConfig::white(1600, 4, -10.0);
    let mut drifting = nominal.clone();
    drifting.uncertainty_db = 1.0;
    let detectors = Detector::parse_list("ed@128x12,ed_all@128x12,enp_ed@128x12,sf@16x100,sph@4,max@4", &nominal)?;
    let bank = ProfileBank::default();
    let opts = RunOptions::default();
    let trials = 20_000;

    let calib = sample_statistics(&nominal, &detectors, trials, 7, Hypothesis::H0, &bank, &opts)?;
    let live = sample_statistics(&drifting, &detectors, trials, 8, Hypothesis::H0, &bank, &opts)?;
    println!("target Pfa 0.1");
    for ((d, c), l) in detectors.iter().zip(&calib).zip(&live) {
        let xi = threshold_for_pfa(&c.values, 0.1)?;
        println!("  {:<14} realized Pfa {:.4}", d.label(), l.exceedance(xi));
    }
    Ok(())
}
