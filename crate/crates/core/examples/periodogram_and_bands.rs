//! Bartlett periodogram of an OFDM burst in white noise, the in-band and
//! out-of-band bins, and the frequency-domain statistics computed from them.
//!
//! cargo run --release --example periodogram_and_bands

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specsense::detectors::{search_window_bins, t_ed_all, t_enp_ed, t_f_agm, t_search_b, t_sf};
use specsense::signal::{gen_ofdm, gen_white_noise};
use specsense::spectral::{band_bins, bartlett_periodogram, bin_frequency};

fn main() -> specsense::Result<()> {
    let (n, osf, n_fft) = (1600, 4, 64);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let snr = 10f64.powf(-5.0 / 10.0);
    let y = gen_ofdm(n, osf, &mut rng)?.scaled(snr.sqrt()).add(&gen_white_noise(n, 1.0, &mut rng)?)?;

    let p = bartlett_periodogram(&y, n_fft, n / n_fft)?;
    let half = 0.5 / osf as f64;
    let band = band_bins(-half, half, n_fft)?;
    println!("{} in-band bins, {} out-of-band", band.in_band().len(), band.out_band().len());

    let mean = |idx: &[usize]| idx.iter().map(|&i| p.bins()[i]).sum::<f64>() / idx.len() as f64;
    println!("mean power in band {:.3}, out of band {:.3}", mean(band.in_band()), mean(band.out_band()));

    println!("\n  freq     power");
    for i in (0..n_fft).step_by(4) {
        let bar = "#".repeat((p.bins()[i] * 20.0).round() as usize);
        println!("{:>7.3}  {:>7.3}  {bar}", bin_frequency(i, n_fft), p.bins()[i]);
    }

    println!("\ned_all    {:.4}", t_ed_all(&p));
    println!("enp_ed    {:.4}", t_enp_ed(&p, &band)?);
    println!("f_agm     {:.4}", t_f_agm(&p)?);
    println!("sf        {:.4}", t_sf(&p)?);
    println!("search_b  {:.4}", t_search_b(&p, search_window_bins(2.0 * half, n_fft))?);
    Ok(())
}
