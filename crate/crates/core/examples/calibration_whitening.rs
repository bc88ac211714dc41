//! Calibrate against a lowpass noise capture, persist the profile, and check
//! that its whitening matrix flattens fresh noise.
//!
//! cargo run --release --example calibration_whitening

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specsense::calibration::{calibrate, CalibrationProfile};
use specsense::covariance::{arrange_matrix, eigvals_hermitian, scm};
use specsense::signal::{gen_colored_noise, NoisePsdShape};

fn main() -> specsense::Result<()> {
    let shape = NoisePsdShape::default_lowpass(128)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let capture = gen_colored_noise(200_000, &shape, 1.0, &mut rng)?;

    let profile = calibrate(&capture, 128, capture.len() / 128, 4)?;
    println!("noise power        {:.4}", profile.noise_power());
    println!("PSD dynamic range  {:.1} dB", profile.psd_dynamic_range_db());
    println!("condition number   {:.2}", profile.condition_number());

    let path = std::env::temp_dir().join("specsense_profile.json");
    profile.save(&path)?;
    let loaded = CalibrationProfile::load(&path)?;
    println!("reloaded from {} identical: {}", path.display(), loaded == profile);

    let fresh = gen_colored_noise(40_000, &shape, 1.0, &mut rng)?;
    let s = scm(&arrange_matrix(&fresh, 4)?);
    let white = s.congruence(loaded.b_whiten())?;
    println!("raw SCM eigenvalues      {:.3?}", eigvals_hermitian(&s)?.values());
    println!("whitened SCM eigenvalues {:.3?}", eigvals_hermitian(&white)?.values());
    Ok(())
}
