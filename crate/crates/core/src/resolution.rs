//! Bin-spacing algebra: FFT step from sample count, zero padding needed to
//! reach a target step, and the chirp-z point count that matches an FFT step.

use crate::error::{Error, Result};

/// Sampling setup plus the plotting step one wants to reach by padding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolutionSpec {
    pub sample_rate_hz: f64,
    pub n_samples: usize,
    pub target_step_hz: f64,
}

impl ResolutionSpec {
    pub fn new(sample_rate_hz: f64, n_samples: usize, target_step_hz: f64) -> Result<Self> {
        let native = fft_resolution(sample_rate_hz, n_samples)?;
        check_target(native, target_step_hz)?;
        Ok(ResolutionSpec {
            sample_rate_hz,
            n_samples,
            target_step_hz,
        })
    }

    pub fn zeros(&self) -> usize {
        zeros_for_resolution(self.sample_rate_hz, self.n_samples, self.target_step_hz)
            .expect("validated on construction")
    }

    /// Total transform length after padding.
    pub fn padded_len(&self) -> usize {
        self.n_samples + self.zeros()
    }
}

fn check_target(native_step: f64, target_step_hz: f64) -> Result<()> {
    if !(target_step_hz.is_finite() && target_step_hz > 0.0) {
        return Err(Error::invalid(format!(
            "target step must be positive, got {target_step_hz}"
        )));
    }
    // a relative slack of a few ulps lets target == f_s/N through
    if target_step_hz > native_step * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "target step {target_step_hz} Hz is coarser than the unpadded step {native_step} Hz; \
             padding can only refine"
        )));
    }
    Ok(())
}

/// `f_s / N`.
pub fn fft_resolution(sample_rate_hz: f64, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::invalid(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    Ok(sample_rate_hz / n as f64)
}

/// Smallest number of zeros `x` with `f_s / (N + x) <= target_step_hz`.
pub fn zeros_for_resolution(sample_rate_hz: f64, n: usize, target_step_hz: f64) -> Result<usize> {
    let native = fft_resolution(sample_rate_hz, n)?;
    check_target(native, target_step_hz)?;
    let total = ceil_tolerant(sample_rate_hz / target_step_hz);
    Ok((total as usize).saturating_sub(n))
}

/// Chirp-z length whose step over `[f1, f2]` equals an `n_fft`-point FFT step.
pub fn czt_len_for_matched_resolution(
    f1_hz: f64,
    f2_hz: f64,
    sample_rate_hz: f64,
    n_fft: usize,
) -> Result<usize> {
    fft_resolution(sample_rate_hz, n_fft)?;
    if !(f1_hz >= 0.0 && f1_hz < f2_hz && f2_hz <= sample_rate_hz / 2.0) {
        return Err(Error::invalid(format!(
            "band [{f1_hz}, {f2_hz}] Hz must satisfy 0 <= f1 < f2 <= f_s/2 = {}",
            sample_rate_hz / 2.0
        )));
    }
    let m = ((f2_hz - f1_hz) / sample_rate_hz * n_fft as f64).round();
    Ok((m as usize).max(1))
}

/// `ceil`, but values within a hair of an integer snap to it so that exact
/// quotients like `1e13 / 2e10` are not pushed up by representation error.
pub(crate) fn ceil_tolerant(q: f64) -> f64 {
    let r = q.round();
    if (q - r).abs() <= 1e-9 * q.abs().max(1.0) {
        r
    } else {
        q.ceil()
    }
}
