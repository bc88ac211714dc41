//! Periodogram-based statistics: energy, flatness, and noise-PSD matching tests.

use crate::error::{Error, Result};
use crate::spectral::{BandIndexSet, Periodogram};

fn check_band(p: &Periodogram, band: &BandIndexSet) -> Result<()> {
    if band.n_fft() != p.n_fft() {
        return Err(Error::invalid(format!(
            "band covers {} bins, periodogram has {}",
            band.n_fft(),
            p.n_fft()
        )));
    }
    Ok(())
}

fn sum_at(p: &Periodogram, idx: &[usize]) -> f64 {
    idx.iter().map(|&i| p.bins()[i]).sum()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// ℓ₁-norm of the whole periodogram.
pub fn t_ed_all(p: &Periodogram) -> f64 {
    p.bins().iter().sum()
}

/// ℓ₁-norm of the in-band bins.
pub fn t_ed(p: &Periodogram, band: &BandIndexSet) -> Result<f64> {
    check_band(p, band)?;
    if band.in_band().is_empty() {
        return Err(Error::invalid("signal band contains no bins"));
    }
    Ok(sum_at(p, band.in_band()))
}

/// In-band energy over out-of-band energy; the out-of-band bins act as the
/// noise-power estimate.
pub fn t_enp_ed(p: &Periodogram, band: &BandIndexSet) -> Result<f64> {
    check_band(p, band)?;
    if band.is_degenerate() {
        return Err(Error::invalid("band must leave bins on both sides"));
    }
    let noise = sum_at(p, band.out_band());
    if noise <= 0.0 {
        return Err(Error::degenerate("no out-of-band energy"));
    }
    Ok(sum_at(p, band.in_band()) / noise)
}

/// Arithmetic over geometric mean of the bins (geometric mean in log space).
pub fn t_f_agm(p: &Periodogram) -> Result<f64> {
    let bins = p.bins();
    if bins.iter().any(|&b| b <= 0.0) {
        return Err(Error::degenerate("AGM needs strictly positive bins"));
    }
    let n = bins.len() as f64;
    let am = bins.iter().sum::<f64>() / n;
    let log_gm = bins.iter().map(|b| b.ln()).sum::<f64>() / n;
    // Ratio in log space: AM and GM can both under/overflow at large n_fft.
    Ok((am.ln() - log_gm).exp())
}

/// Spectral flatness `‖p‖₁ / (√n · ‖p‖₂)`, in (0, 1].
pub fn t_sf(p: &Periodogram) -> Result<f64> {
    let norm2 = l2(p.bins());
    if norm2 <= 0.0 {
        return Err(Error::degenerate("all-zero periodogram"));
    }
    let v = t_ed_all(p) / ((p.n_fft() as f64).sqrt() * norm2);
    Ok(v.min(1.0))
}

/// Width in bins of a band of width `bandwidth` (fraction of fs).
pub fn search_window_bins(bandwidth: f64, n_fft: usize) -> usize {
    ((bandwidth * n_fft as f64).round() as usize).clamp(1, n_fft.saturating_sub(1).max(1))
}

/// Largest share of total energy captured by any circular window of
/// `window_bins` adjacent bins (frequency order, wrapping through ±fs/2).
pub fn t_search_b(p: &Periodogram, window_bins: usize) -> Result<f64> {
    let n = p.n_fft();
    if window_bins < 1 || window_bins >= n {
        return Err(Error::invalid(format!(
            "window must satisfy 1 <= window < n_fft, got {window_bins} of {n}"
        )));
    }
    let total = t_ed_all(p);
    if total <= 0.0 {
        return Err(Error::degenerate("all-zero periodogram"));
    }
    let bins = p.bins();
    let best = (0..n)
        .map(|start| (0..window_bins).map(|k| bins[(start + k) % n]).sum::<f64>())
        .fold(0.0f64, f64::max);
    Ok((best / total).min(1.0))
}

/// `t_enp_ed` on the whitened periodogram `q = p / w`.
pub fn t_w_enp_ed(q: &Periodogram, band: &BandIndexSet) -> Result<f64> {
    t_enp_ed(q, band)
}

/// `t_f_agm` on the whitened periodogram.
pub fn t_wf_agm(q: &Periodogram) -> Result<f64> {
    t_f_agm(q)
}

/// Correlation coefficient `pᵀw / (‖p‖₂‖w‖₂)` between periodogram and noise PSD.
pub fn t_fc(p: &Periodogram, w: &Periodogram) -> Result<f64> {
    if p.n_fft() != w.n_fft() {
        return Err(Error::invalid("n_fft mismatch between p and w"));
    }
    let (np, nw) = (l2(p.bins()), l2(w.bins()));
    if np <= 0.0 || nw <= 0.0 {
        return Err(Error::degenerate("zero-norm periodogram"));
    }
    let dot: f64 = p.bins().iter().zip(w.bins()).map(|(a, b)| a * b).sum();
    Ok((dot / (np * nw)).min(1.0))
}

/// Kullback-Leibler divergence of the ℓ₁-normalized periodogram from the
/// ℓ₁-normalized noise PSD, with 0·log 0 = 0.
pub fn t_fkl(p: &Periodogram, w: &Periodogram) -> Result<f64> {
    if p.n_fft() != w.n_fft() {
        return Err(Error::invalid("n_fft mismatch between p and w"));
    }
    if w.bins().iter().any(|&b| b <= 0.0) {
        return Err(Error::invalid("noise PSD must be strictly positive"));
    }
    let (sp, sw) = (t_ed_all(p), t_ed_all(w));
    if sp <= 0.0 {
        return Err(Error::degenerate("all-zero periodogram"));
    }
    let d = p
        .bins()
        .iter()
        .zip(w.bins())
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| {
            let (pt, wt) = (a / sp, b / sw);
            pt * (pt / wt).ln()
        })
        .sum::<f64>();
    Ok(d.max(0.0))
}
