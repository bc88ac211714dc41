//! Jarque-Bera and Anderson-Darling rejection rates over chunks of generated
//! noise. Gaussian input should be rejected at close to the nominal level.
//!
//! cargo run --release --example gaussianity

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specsense::signal::{gen_ofdm, gen_noise, NoiseModel, NoisePsdShape};
use specsense::validation::validate_iq;
use specsense::IqBuffer;

fn report(name: &str, y: &IqBuffer) -> specsense::Result<()> {
    let r = validate_iq(y, 1000, 0.05)?;
    println!(
        "{name:<8} JB {:.3}/{:.3}  AD {:.3}/{:.3}  ({} chunks)",
        r.jb_real.rejection_rate(),
        r.jb_imag.rejection_rate(),
        r.ad_real.rejection_rate(),
        r.ad_imag.rejection_rate(),
        r.jb_real.tests
    );
    Ok(())
}

fn main() -> specsense::Result<()> {
    let n = 2_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    println!("rejection rate at alpha 0.05, real/imag");
    report("white", &gen_noise(n, &NoiseModel::White, 1.0, &mut rng)?)?;
    let lowpass = NoiseModel::Colored(NoisePsdShape::default_lowpass(128)?);
    report("lowpass", &gen_noise(n, &lowpass, 1.0, &mut rng)?)?;
    // Unit-power OFDM with no noise, for contrast.
    report("ofdm", &gen_ofdm(n, 4, &mut rng)?)?;
    Ok(())
}
