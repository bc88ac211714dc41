//! Runs a mixed set of detectors on shared Monte Carlo trials and writes one
//! ROC CSV per detector.
//!
//! cargo run --release --example detector_comparison

use specsense::calibration::ProfileBank;
use specsense::cli::output::{csv_file_name, roc_csv};
use specsense::detectors::Detector;
use specsense::roc::{empirical_roc, mc_std_error, run_trials};
use specsense::signal::ScenarioConfig;

fn main() -> specsense::Result<()> {
    let cfg = ScenarioConfig::white(1600, 4, -12.0);
    let detectors = Detector::parse_list(
        "enp_ed@128x12,sf@16x100,f_agm@16x100,search_b@16x100,sph@4,met@4,max@4,fro@4,ac1,ac",
        &cfg,
    )?;
    let trials = 3000;
    let batches = run_trials(&cfg, &detectors, trials, 2, &ProfileBank::default())?;

    let dir = std::env::temp_dir().join("specsense_rocs");
    std::fs::create_dir_all(&dir)?;
    let mut rows: Vec<(String, f64)> = Vec::new();
    for b in &batches {
        let curve = empirical_roc(b);
        std::fs::write(dir.join(csv_file_name(&b.detector)), roc_csv(&curve, b))?;
        rows.push((b.detector.label(), curve.pd_at_pfa(0.1)));
    }
    rows.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("Pd at Pfa 0.1, SNR {} dB, {trials} trials", cfg.snr_db);
    for (label, pd) in rows {
        println!("  {label:<16} {pd:.4} ± {:.4}", mc_std_error(pd, trials));
    }
    println!("ROC files in {}", dir.display());
    Ok(())
}
