//! Three routes from a uniformly sampled time trace to a spectrum: the
//! zero-padded FFT, the Zoom FFT (shift, filter, decimate, short FFT) and the
//! chirp-z transform evaluated with Bluestein's convolution identity.
//!
//! Besides the transforms themselves the crate carries the resolution algebra
//! that relates sample counts to bin spacing, a two-tone resolvability
//! metric, spectrum comparison utilities, synthetic THz-TDS style traces and a
//! small timing harness. The `spectral-kit` binary exposes all of it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bench;
pub mod cli;
pub mod czt;
pub mod error;
pub mod numerics;
pub mod resolution;
pub mod signals;
pub mod zoomfft;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use numerics::{ComplexBuffer, Spectrum, Trace};
