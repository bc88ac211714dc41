//! Raw IQ capture files: interleaved unsigned 8-bit I, Q pairs.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::IqBuffer;

/// Maps one byte pair to `((I − 127.5) + j(Q − 127.5)) / 127.5`.
pub fn decode_iq_u8(bytes: &[u8]) -> Result<IqBuffer> {
    if !bytes.len().is_multiple_of(2) {
        return Err(Error::Format(format!("IQ data has odd length {}", bytes.len())));
    }
    if bytes.is_empty() {
        return Err(Error::Format("IQ data is empty".into()));
    }
    let samples = bytes
        .chunks_exact(2)
        .map(|p| Complex64::new((p[0] as f64 - 127.5) / 127.5, (p[1] as f64 - 127.5) / 127.5))
        .collect();
    IqBuffer::from_samples(samples)
}

pub fn read_iq_u8(path: impl AsRef<Path>) -> Result<IqBuffer> {
    decode_iq_u8(&std::fs::read(path)?)
}

/// Inverse of [`decode_iq_u8`] after multiplying by `gain`; values outside
/// the representable range are clipped.
pub fn encode_iq_u8(y: &IqBuffer, gain: f64) -> Vec<u8> {
    let q = |x: f64| (127.5 + 127.5 * gain * x).round().clamp(0.0, 255.0) as u8;
    y.samples().iter().flat_map(|z| [q(z.re), q(z.im)]).collect()
}

pub fn write_iq_u8(path: impl AsRef<Path>, y: &IqBuffer, gain: f64) -> Result<()> {
    std::fs::write(path, encode_iq_u8(y, gain))?;
    Ok(())
}
