//! Round trip through an 8-bit interleaved IQ capture: write a trial to disk,
//! read it back and decide against a threshold set from simulated noise.
//!
//! cargo run --release --example iq_file_detect

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specsense::calibration::ProfileBank;
use specsense::cli::iq::{read_iq_u8, write_iq_u8};
use specsense::detectors::{Detector, SensingContext};
use specsense::roc::{run_trials, threshold_for_pfa};
use specsense::signal::{make_trial, ScenarioConfig};
use specsense::Hypothesis;

fn main() -> specsense::Result<()> {
    let cfg = ScenarioConfig::white(1600, 4, -8.0);
    let det = Detector::parse("enp_ed@128x12", &cfg)?;
    let bank = ProfileBank::default();
    let ctx = SensingContext::from_config(&cfg, &bank);

    let h0 = &run_trials(&cfg, &[det], 5000, 21, &bank)?[0].h0_stats;
    let xi = threshold_for_pfa(h0, 0.01)?;
    println!("threshold at Pfa 0.01: {xi:.5}");

    let path = std::env::temp_dir().join("specsense_capture.iq");
    for (k, h) in [Hypothesis::H0, Hypothesis::H1, Hypothesis::H0, Hypothesis::H1].into_iter().enumerate() {
        let y = make_trial(&cfg, h, &mut ChaCha8Rng::seed_from_u64(100 + k as u64))?;
        write_iq_u8(&path, &y, 0.25)?;
        let capture = read_iq_u8(&path)?;
        let score = det.score(&capture, &ctx)?;
        let decision = if score > xi { "H1" } else { "H0" };
        println!("capture {k} ({h:?}, {} bytes): score {score:.5} -> {decision}", 2 * capture.len());
    }
    Ok(())
}
