//! Detection probability of the normalized in-band energy detector as the
//! FFT length trades frequency resolution against averaging.
//!
//! cargo run --release --example roc_nfft_sweep

use specsense::calibration::ProfileBank;
use specsense::detectors::{Detector, DetectorKind};
use specsense::roc::{mc_std_error, run_trials};
use specsense::signal::ScenarioConfig;

fn main() -> specsense::Result<()> {
    let cfg = ScenarioConfig::white(1600, 4, -14.0);
    let detectors: Vec<Detector> = [16, 32, 64, 128, 256]
        .iter()
        .map(|&n_fft| Detector::periodogram(DetectorKind::EnpEd, n_fft, 1600 / n_fft))
        .collect();
    let trials = 4000;
    let batches = run_trials(&cfg, &detectors, trials, 1, &ProfileBank::default())?;
    println!("SNR {} dB, {trials} trials per hypothesis", cfg.snr_db);
    for pfa in [0.1, 0.01] {
        println!("\nPfa = {pfa}");
        for b in &batches {
            let (pd, _) = b.pd_at_pfa(pfa)?;
            println!("  {:<16} Pd {pd:.4} ± {:.4}", b.detector.label(), mc_std_error(pd, trials));
        }
    }
    Ok(())
}
