//! Bartlett averaged periodogram, band-to-bin mapping and frequency-domain
//! whitening.
//!
//! Bins are kept in natural DFT order: bin `i` sits at `i / n_fft` for
//! `i < n_fft / 2` and at `(i - n_fft) / n_fft` otherwise.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::signal::IqBuffer;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Unnormalized in-place DFT (`inverse` selects the positive exponent).
pub(crate) fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    plan(buf.len(), inverse).process(buf);
}

/// Center frequency of bin `i`, as a fraction of the sample rate.
pub fn bin_frequency(i: usize, n_fft: usize) -> f64 {
    if 2 * i < n_fft {
        i as f64 / n_fft as f64
    } else {
        (i as f64 - n_fft as f64) / n_fft as f64
    }
}

/// Non-negative power spectrum estimate over `n_fft` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    bins: Vec<f64>,
    n_avg: usize,
}

impl Periodogram {
    /// Wraps precomputed bins. All bins must be finite and non-negative.
    pub fn from_bins(bins: Vec<f64>, n_avg: usize) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::invalid("periodogram must have at least one bin"));
        }
        if let Some(i) = bins.iter().position(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::invalid(format!("bin {i} is negative or non-finite")));
        }
        Ok(Self { bins, n_avg })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn n_fft(&self) -> usize {
        self.bins.len()
    }

    /// Number of averaged blocks.
    pub fn n_avg(&self) -> usize {
        self.n_avg
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            bins: self.bins.iter().map(|b| b * c).collect(),
            n_avg: self.n_avg,
        }
    }
}

/// Averaged periodogram over `n_avg` consecutive non-overlapping blocks of
/// `n_fft` samples, normalized by `n_fft · n_avg`. Samples past
/// `n_fft · n_avg` are ignored.
pub fn bartlett_periodogram(y: &IqBuffer, n_fft: usize, n_avg: usize) -> Result<Periodogram> {
    bartlett_from_slice(y.samples(), n_fft, n_avg)
}

pub(crate) fn bartlett_from_slice(y: &[Complex64], n_fft: usize, n_avg: usize) -> Result<Periodogram> {
    if n_fft < 2 || n_avg < 1 {
        return Err(Error::invalid(format!("need n_fft >= 2 and n_avg >= 1, got {n_fft}, {n_avg}")));
    }
    let needed = n_fft * n_avg;
    if y.len() < needed {
        return Err(Error::invalid(format!(
            "periodogram needs {needed} samples, buffer has {}",
            y.len()
        )));
    }
    let fft = plan(n_fft, false);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut block = vec![Complex64::new(0.0, 0.0); n_fft];
    let mut bins = vec![0.0; n_fft];
    // Starting the sum at m = 1 instead of 0 would only rotate each bin's phase.
    for chunk in y[..needed].chunks_exact(n_fft) {
        block.copy_from_slice(chunk);
        fft.process_with_scratch(&mut block, &mut scratch);
        for (b, z) in bins.iter_mut().zip(&block) {
            *b += z.norm_sqr();
        }
    }
    let norm = 1.0 / needed as f64;
    bins.iter_mut().for_each(|b| *b *= norm);
    Periodogram::from_bins(bins, n_avg)
}

/// Partition of the bin indices into the signal band and its complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandIndexSet {
    in_band: Vec<usize>,
    out_band: Vec<usize>,
}

impl BandIndexSet {
    /// Builds a set from explicit in-band indices; the rest of `0..n_fft` is out of band.
    pub fn from_in_band(mut in_band: Vec<usize>, n_fft: usize) -> Result<Self> {
        in_band.sort_unstable();
        in_band.dedup();
        if in_band.last().is_some_and(|&i| i >= n_fft) {
            return Err(Error::invalid("in-band index out of range"));
        }
        let out_band = (0..n_fft).filter(|i| in_band.binary_search(i).is_err()).collect();
        Ok(Self { in_band, out_band })
    }

    /// Ascending in-band indices.
    pub fn in_band(&self) -> &[usize] {
        &self.in_band
    }

    /// Ascending out-of-band indices.
    pub fn out_band(&self) -> &[usize] {
        &self.out_band
    }

    pub fn n_fft(&self) -> usize {
        self.in_band.len() + self.out_band.len()
    }

    /// True when either side of the partition is empty. Tests comparing
    /// in-band to out-of-band energy cannot use such a set.
    pub fn is_degenerate(&self) -> bool {
        self.in_band.is_empty() || self.out_band.is_empty()
    }
}

// Absorbs rounding in band edges like 1/(2·osf) for non-power-of-two osf.
const EDGE_TOL: f64 = 1e-12;

/// Bins whose center frequency lies in `[f_low, f_high]`, edges inclusive.
///
/// An empty side is not an error here; check [`BandIndexSet::is_degenerate`].
pub fn band_bins(f_low: f64, f_high: f64, n_fft: usize) -> Result<BandIndexSet> {
    if !(-0.5..=0.5).contains(&f_low) || !(-0.5..=0.5).contains(&f_high) || f_low >= f_high {
        return Err(Error::invalid(format!(
            "band ({f_low}, {f_high}) must satisfy -0.5 <= f_low < f_high <= 0.5"
        )));
    }
    if n_fft == 0 {
        return Err(Error::invalid("n_fft must be >= 1"));
    }
    let in_band = (0..n_fft)
        .filter(|&i| {
            let f = bin_frequency(i, n_fft);
            f >= f_low - EDGE_TOL && f <= f_high + EDGE_TOL
        })
        .collect();
    BandIndexSet::from_in_band(in_band, n_fft)
}

/// Elementwise `p / w`.
pub fn whiten_periodogram(p: &Periodogram, w: &Periodogram) -> Result<Periodogram> {
    if p.n_fft() != w.n_fft() {
        return Err(Error::invalid(format!(
            "n_fft mismatch: {} vs {}",
            p.n_fft(),
            w.n_fft()
        )));
    }
    if let Some(i) = w.bins().iter().position(|&b| b <= 0.0) {
        return Err(Error::invalid(format!("noise PSD bin {i} is not positive")));
    }
    let bins = p.bins().iter().zip(w.bins()).map(|(a, b)| a / b).collect();
    Periodogram::from_bins(bins, p.n_avg())
}
