//! Complex buffers, traces and spectra, the O(N²) DFT reference and the
//! radix-2 FFT kernel shared by every transform in the crate.

use std::f64::consts::PI;
use std::ops::Deref;

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Non-empty sequence of finite complex values.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexBuffer(Vec<Complex64>);

impl ComplexBuffer {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("complex buffer must not be empty"));
        }
        if let Some(i) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::invalid(format!("non-finite value at index {i}")));
        }
        Ok(ComplexBuffer(values))
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

impl Deref for ComplexBuffer {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

/// Uniformly sampled real time-domain signal.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    samples: Vec<f64>,
    sample_rate_hz: f64,
    t0_s: f64,
}

impl Trace {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64, t0_s: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("trace must contain at least one sample"));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate must be positive and finite, got {sample_rate_hz}"
            )));
        }
        if !t0_s.is_finite() {
            return Err(Error::invalid("trace start time must be finite"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Trace {
            samples,
            sample_rate_hz,
            t0_s,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn sample_period_s(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    pub fn t0_s(&self) -> f64 {
        self.t0_s
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time stamp of sample `n`.
    pub fn time(&self, n: usize) -> f64 {
        self.t0_s + n as f64 / self.sample_rate_hz
    }

    /// Keeps the first `n` samples.
    pub fn truncated(&self, n: usize) -> Result<Trace> {
        if n == 0 || n > self.len() {
            return Err(Error::invalid(format!(
                "cannot truncate a {}-sample trace to {n} samples",
                self.len()
            )));
        }
        Trace::new(self.samples[..n].to_vec(), self.sample_rate_hz, self.t0_s)
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.samples
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect()
    }
}

/// Complex bins on an explicit, uniformly spaced frequency axis.
///
/// Bin `k` sits at `f_start_hz + k * f_step_hz`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    bins: ComplexBuffer,
    f_start_hz: f64,
    f_step_hz: f64,
    source_n: usize,
}

impl Spectrum {
    pub fn new(
        bins: ComplexBuffer,
        f_start_hz: f64,
        f_step_hz: f64,
        source_n: usize,
    ) -> Result<Self> {
        if !(f_step_hz.is_finite() && f_step_hz > 0.0) {
            return Err(Error::invalid(format!(
                "frequency step must be positive, got {f_step_hz}"
            )));
        }
        if !f_start_hz.is_finite() {
            return Err(Error::invalid("frequency axis start must be finite"));
        }
        Ok(Spectrum {
            bins,
            f_start_hz,
            f_step_hz,
            source_n,
        })
    }

    /// Plain FFT layout: bins at `k * f_s / len` for a transform of `len` points.
    pub fn from_fft(bins: Vec<Complex64>, sample_rate_hz: f64, source_n: usize) -> Result<Self> {
        let len = bins.len() as f64;
        Spectrum::new(
            ComplexBuffer::new(bins)?,
            0.0,
            sample_rate_hz / len,
            source_n,
        )
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn f_start_hz(&self) -> f64 {
        self.f_start_hz
    }

    pub fn f_step_hz(&self) -> f64 {
        self.f_step_hz
    }

    /// Time-domain sample count the spectrum was computed from.
    pub fn source_n(&self) -> usize {
        self.source_n
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.f_start_hz + k as f64 * self.f_step_hz
    }

    pub fn f_end_hz(&self) -> f64 {
        self.frequency(self.len() - 1)
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.bins.iter().map(|c| c.norm()).collect()
    }

    /// `20 log10 |X|` with zero bins floored at [`DB_FLOOR`].
    pub fn magnitudes_db(&self) -> Vec<f64> {
        self.bins.iter().map(|c| to_db(c.norm())).collect()
    }

    /// Index of the bin nearest to `f_hz`, clamped to the axis.
    pub fn nearest_bin(&self, f_hz: f64) -> usize {
        let k = ((f_hz - self.f_start_hz) / self.f_step_hz).round();
        k.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// Keeps bins `range`, adjusting the axis start.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Spectrum> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::invalid(format!(
                "bin range {range:?} outside spectrum of {} bins",
                self.len()
            )));
        }
        let start = self.frequency(range.start);
        Spectrum::new(
            ComplexBuffer::new(self.bins[range].to_vec())?,
            start,
            self.f_step_hz,
            self.source_n,
        )
    }

    /// Non-negative frequency half `0..=len/2` of a full-circle spectrum.
    pub fn positive_half(&self) -> Result<Spectrum> {
        self.slice(0..self.len() / 2 + 1)
    }

    pub fn scaled(&self, factor: f64) -> Spectrum {
        Spectrum {
            bins: ComplexBuffer(self.bins.iter().map(|c| c * factor).collect()),
            ..self.clone()
        }
    }
}

/// Magnitudes below this are reported at the floor.
pub const DB_FLOOR: f64 = -300.0;

pub fn to_db(magnitude: f64) -> f64 {
    if magnitude > 0.0 {
        (20.0 * magnitude.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// `e^{j 2π turns}` with the argument first folded into `[-0.5, 0.5]`.
pub fn cis_turns(turns: f64) -> Complex64 {
    let t = turns - turns.round();
    let (s, c) = (2.0 * PI * t).sin_cos();
    Complex64::new(c, s)
}

/// Fractional part of `r * k`, in `[0, 1)`, without forming the large product.
///
/// `r` is split so that its high part times any `k < 2^26` is exact; the
/// high part times `2^26` is an integer, so higher bits of `k` drop out.
pub(crate) fn frac_mul(r: f64, k: u64) -> f64 {
    const SPLIT: f64 = (1u64 << 26) as f64;
    if r < 0.0 {
        // Reflect instead of wrapping: 1 + r would drop the low bits of a small r.
        let f = frac_mul(-r, k);
        return if f == 0.0 { 0.0 } else { 1.0 - f };
    }
    let r = r - r.floor();
    let hi = (r * SPLIT).round() / SPLIT;
    let lo = r - hi;
    let k_lo = (k & ((1u64 << 26) - 1)) as f64;
    let t1 = hi * k_lo;
    let t2 = lo * k as f64;
    let f = (t1 - t1.floor()) + (t2 - t2.floor());
    f - f.floor()
}

pub fn is_pow2(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

/// Smallest power of two `>= n`.
pub fn next_pow2(n: usize) -> Result<usize> {
    if n < 1 {
        return Err(Error::invalid("next_pow2 requires n >= 1"));
    }
    n.checked_next_power_of_two()
        .ok_or_else(|| Error::invalid(format!("{n} has no representable power of two above it")))
}

/// Appends zeros up to `target_len`.
pub fn zero_pad(x: &[Complex64], target_len: usize) -> Result<Vec<Complex64>> {
    if target_len < x.len() {
        return Err(Error::invalid(format!(
            "cannot zero-pad {} values down to {target_len}",
            x.len()
        )));
    }
    let mut out = Vec::with_capacity(target_len);
    out.extend_from_slice(x);
    out.resize(target_len, Complex64::new(0.0, 0.0));
    Ok(out)
}

/// Literal O(N²) evaluation of `X[k] = Σ x[n] e^{-j2πkn/N}`.
pub fn dft_naive(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = x.len();
    if n == 0 {
        return Err(Error::invalid("DFT of an empty sequence"));
    }
    // e^{-j2πr/N} for r in 0..N; the exponent kn is reduced mod N exactly.
    let roots: Vec<Complex64> = (0..n).map(|r| cis_turns(-(r as f64) / n as f64)).collect();
    Ok((0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, &v)| v * roots[(k * i) % n])
                .sum()
        })
        .collect())
}

/// Precomputed tables for an in-place iterative radix-2 FFT of one length.
///
/// Immutable after construction, so a plan can be shared across threads.
#[derive(Clone, Debug)]
pub struct FftPlan {
    len: usize,
    swaps: Vec<(u32, u32)>,
    // Per-stage twiddles, stage with half-size h at offset h - 2 (h >= 2).
    forward: Vec<Complex64>,
    inverse: Vec<Complex64>,
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if !is_pow2(len) {
            let hint = next_pow2(len.max(1))?;
            return Err(Error::invalid(format!(
                "FFT length must be a power of two, got {len}; zero-pad to {hint}"
            )));
        }
        if len > u32::MAX as usize {
            return Err(Error::invalid(format!("FFT length {len} too large")));
        }
        let bits = len.trailing_zeros();
        let mut swaps = Vec::new();
        if bits > 0 {
            for i in 0..len {
                let j = i.reverse_bits() >> (usize::BITS - bits);
                if i < j {
                    swaps.push((i as u32, j as u32));
                }
            }
        }
        let mut forward = Vec::with_capacity(len.saturating_sub(2));
        let mut h = 2;
        while h < len {
            forward.extend((0..h).map(|j| cis_turns(-(j as f64) / (2 * h) as f64)));
            h <<= 1;
        }
        let inverse = forward.iter().map(|w| w.conj()).collect();
        Ok(FftPlan {
            len,
            swaps,
            forward,
            inverse,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward, 1.0);
    }

    /// Inverse transform in place, including the `1/N` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse, 1.0 / self.len as f64);
    }

    fn run(&self, data: &mut [Complex64], table: &[Complex64], scale: f64) {
        assert_eq!(data.len(), self.len, "buffer length does not match plan");
        for &(i, j) in &self.swaps {
            data.swap(i as usize, j as usize);
        }
        if self.len == 1 {
            data[0] *= scale;
            return;
        }
        // Twiddle-free first stage; the inverse folds its 1/N in here so both
        // directions do the same amount of work.
        if scale == 1.0 {
            for pair in data.chunks_exact_mut(2) {
                let (a, b) = (pair[0], pair[1]);
                pair[0] = a + b;
                pair[1] = a - b;
            }
        } else {
            for pair in data.chunks_exact_mut(2) {
                let (a, b) = (pair[0], pair[1]);
                pair[0] = (a + b) * scale;
                pair[1] = (a - b) * scale;
            }
        }
        let mut h = 2;
        while h < self.len {
            let tw = &table[h - 2..2 * h - 2];
            for block in data.chunks_exact_mut(2 * h) {
                let (lo, hi) = block.split_at_mut(h);
                for ((a, b), w) in lo.iter_mut().zip(hi.iter_mut()).zip(tw) {
                    let t = *b * *w;
                    *b = *a - t;
                    *a += t;
                }
            }
            h <<= 1;
        }
    }
}

/// Forward FFT of a power-of-two-length sequence.
pub fn fft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(x.len())?;
    let mut out = x.to_vec();
    plan.forward(&mut out);
    Ok(out)
}

/// Inverse FFT, `(1/N) Σ X[k] e^{+j2πkn/N}`.
pub fn ifft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(x.len())?;
    let mut out = x.to_vec();
    plan.inverse(&mut out);
    Ok(out)
}

/// Max |a - b| over max |b|; both must have the same length.
pub fn max_rel_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let err = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}
