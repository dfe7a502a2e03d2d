//! Zoom FFT: shift the band of interest to 0 Hz, lowpass, decimate by `D`,
//! then run a short FFT at rate `f_s / D` and relabel its axis around the
//! band centre.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    cis_turns, frac_mul, next_pow2, zero_pad, ComplexBuffer, FftPlan, Spectrum, Trace,
};

/// How the anti-alias filter treats the ends of the record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeMode {
    /// Zero-phase linear convolution over the zero-extended record, tails
    /// included, with the decimated samples folded modulo the short-FFT
    /// length. The bins are then exact samples of the filtered, decimated
    /// record's DTFT: no transient, no wrap-around mixing.
    Full,
    /// Circular, zero-phase filtering: the record is treated as one period,
    /// as the DFT already does. No start-up transient and no group delay.
    Periodic,
    /// Causal linear convolution with zero history. Output lags the input by
    /// the filter's group delay; `trim_transient` drops that many decimated
    /// samples from the front.
    Linear { trim_transient: bool },
}

#[derive(Clone, Debug)]
pub struct ZoomOptions {
    /// Decimation factor; defaults to the largest `D` with `f_s/D >= 2 (f2 - f1)`.
    pub decimation: Option<usize>,
    /// Odd FIR length, at least 11.
    pub n_taps: usize,
    /// Lowpass cutoff; defaults to the middle of `[(f2-f1)/2, f_s/(2D)]`.
    pub cutoff_hz: Option<f64>,
    /// Minimum short-FFT length; rounded up to a power of two and never below
    /// the decimated sample count.
    pub fft_len: Option<usize>,
    pub edges: EdgeMode,
}

impl Default for ZoomOptions {
    fn default() -> Self {
        ZoomOptions {
            decimation: None,
            n_taps: 101,
            cutoff_hz: None,
            fft_len: None,
            edges: EdgeMode::Full,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ZoomFftPlan {
    f1_hz: f64,
    f2_hz: f64,
    sample_rate_hz: f64,
    decimation: usize,
    filter_taps: Vec<f64>,
    cutoff_hz: f64,
    center_hz: f64,
    fft_len: Option<usize>,
    edges: EdgeMode,
}

/// Largest `D` keeping one octave of guard band: `f_s / D >= 2 (f2 - f1)`.
pub fn default_decimation(f1_hz: f64, f2_hz: f64, sample_rate_hz: f64) -> usize {
    ((sample_rate_hz / (2.0 * (f2_hz - f1_hz))).floor() as usize).max(1)
}

impl ZoomFftPlan {
    pub fn new(f1_hz: f64, f2_hz: f64, sample_rate_hz: f64, opts: &ZoomOptions) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        let nyquist = sample_rate_hz / 2.0;
        if !(f1_hz >= 0.0 && f1_hz < f2_hz && f2_hz <= nyquist) {
            return Err(Error::invalid(format!(
                "zoom band [{f1_hz}, {f2_hz}] Hz must satisfy 0 <= f1 < f2 <= f_s/2 = {nyquist}"
            )));
        }
        let width = f2_hz - f1_hz;
        let decimation = opts
            .decimation
            .unwrap_or_else(|| default_decimation(f1_hz, f2_hz, sample_rate_hz));
        if decimation == 0 {
            return Err(Error::invalid("decimation factor must be at least 1"));
        }
        let decimated_rate = sample_rate_hz / decimation as f64;
        if decimated_rate < width * (1.0 - 1e-12) {
            return Err(Error::invalid(format!(
                "decimation {decimation} leaves rate {decimated_rate} Hz, below the band width {width} Hz"
            )));
        }

        let (filter_taps, cutoff_hz) = match (decimation, opts.cutoff_hz) {
            (1, None) => (vec![1.0], nyquist),
            (_, cutoff) => {
                let lo = width / 2.0;
                let hi = decimated_rate / 2.0;
                let fc = cutoff.unwrap_or((lo + hi) / 2.0);
                if fc < lo * (1.0 - 1e-12) || fc > hi * (1.0 + 1e-12) {
                    return Err(Error::invalid(format!(
                        "cutoff {fc} Hz outside [{lo}, {hi}] Hz for this band and decimation"
                    )));
                }
                let fc = fc.min(nyquist * (1.0 - 1e-9));
                (design_lowpass(fc, sample_rate_hz, opts.n_taps)?, fc)
            }
        };

        if let Some(len) = opts.fft_len {
            if len == 0 {
                return Err(Error::invalid("zoom FFT length must be at least 1"));
            }
        }

        Ok(ZoomFftPlan {
            f1_hz,
            f2_hz,
            sample_rate_hz,
            decimation,
            filter_taps,
            cutoff_hz,
            center_hz: (f1_hz + f2_hz) / 2.0,
            fft_len: opts.fft_len,
            edges: opts.edges,
        })
    }

    pub fn f1_hz(&self) -> f64 {
        self.f1_hz
    }

    pub fn f2_hz(&self) -> f64 {
        self.f2_hz
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn decimation(&self) -> usize {
        self.decimation
    }

    pub fn decimated_rate_hz(&self) -> f64 {
        self.sample_rate_hz / self.decimation as f64
    }

    pub fn filter_taps(&self) -> &[f64] {
        &self.filter_taps
    }

    pub fn cutoff_hz(&self) -> f64 {
        self.cutoff_hz
    }

    pub fn center_hz(&self) -> f64 {
        self.center_hz
    }

    pub fn edges(&self) -> EdgeMode {
        self.edges
    }

    /// Group delay of the linear-phase filter, in input samples.
    pub fn group_delay_samples(&self) -> usize {
        (self.filter_taps.len() - 1) / 2
    }

    /// Approximate Hamming transition width, `3.3 f_s / taps`; zero for the
    /// identity filter.
    pub fn transition_width_hz(&self) -> f64 {
        if self.filter_taps.len() == 1 {
            0.0
        } else {
            3.3 * self.sample_rate_hz / self.filter_taps.len() as f64
        }
    }

    /// Offset from the centre beyond which the filter is in its stopband.
    pub fn stopband_offset_hz(&self) -> f64 {
        self.cutoff_hz + self.transition_width_hz() / 2.0
    }

    /// Decimated samples produced for an `n`-sample input.
    pub fn decimated_len(&self, n: usize) -> usize {
        let out = n / self.decimation;
        match self.edges {
            EdgeMode::Linear {
                trim_transient: true,
            } => out.saturating_sub(self.transient_outputs()),
            _ => out,
        }
    }

    fn transient_outputs(&self) -> usize {
        self.group_delay_samples().div_ceil(self.decimation)
    }

    /// Length of the short FFT for an `n`-sample input.
    pub fn short_fft_len(&self, n: usize) -> Result<usize> {
        let base = self.decimated_len(n).max(1);
        next_pow2(base.max(self.fft_len.unwrap_or(1)))
    }
}

/// `y[n] = x[n] e^{-j2π f_shift n / f_s}`; content at `+f_shift` moves to 0 Hz.
pub fn frequency_shift(trace: &Trace, f_shift_hz: f64) -> Vec<Complex64> {
    let r = f_shift_hz / trace.sample_rate_hz();
    trace
        .samples()
        .iter()
        .enumerate()
        .map(|(n, &v)| cis_turns(-frac_mul(r, n as u64)) * v)
        .collect()
}

/// Hamming-windowed sinc lowpass with unity DC gain.
pub fn design_lowpass(cutoff_hz: f64, sample_rate_hz: f64, n_taps: usize) -> Result<Vec<f64>> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::invalid(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    if !(cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0) {
        return Err(Error::invalid(format!(
            "cutoff {cutoff_hz} Hz must lie strictly inside (0, {}) Hz",
            sample_rate_hz / 2.0
        )));
    }
    if n_taps < 11 || n_taps.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "tap count must be odd and at least 11, got {n_taps}"
        )));
    }
    let fc = cutoff_hz / sample_rate_hz;
    let mid = (n_taps / 2) as f64;
    let denom = (n_taps - 1) as f64;
    let mut taps: Vec<f64> = (0..n_taps)
        .map(|i| {
            let t = i as f64 - mid;
            let sinc = if t == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * t).sin() / (PI * t)
            };
            let window = 0.54 - 0.46 * (2.0 * PI * i as f64 / denom).cos();
            sinc * window
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|h| *h /= sum);
    Ok(taps)
}

/// Frequency response `Σ h[k] e^{-j2π f k / f_s}` of real taps.
pub fn tap_response(taps: &[f64], f_hz: f64, sample_rate_hz: f64) -> Complex64 {
    let r = f_hz / sample_rate_hz;
    taps.iter()
        .enumerate()
        .map(|(k, &h)| cis_turns(-frac_mul(r, k as u64)) * h)
        .sum()
}

fn check_decimation(len: usize, taps: &[f64], d: usize) -> Result<()> {
    if taps.is_empty() {
        return Err(Error::invalid("filter needs at least one tap"));
    }
    if d == 0 {
        return Err(Error::invalid("decimation factor must be at least 1"));
    }
    if d > len {
        return Err(Error::invalid(format!(
            "decimation factor {d} exceeds the {len}-sample input"
        )));
    }
    Ok(())
}

/// `u[m] = Σ_k h[k] y[mD - k]`, zero history, evaluated only at kept indices.
pub fn filter_decimate(y: &[Complex64], taps: &[f64], d: usize) -> Result<Vec<Complex64>> {
    check_decimation(y.len(), taps, d)?;
    Ok((0..y.len() / d)
        .map(|m| {
            let at = m * d;
            let reach = taps.len().min(at + 1);
            taps[..reach]
                .iter()
                .enumerate()
                .map(|(k, &h)| y[at - k] * h)
                .sum()
        })
        .collect())
}

/// Circular zero-phase variant: `u[m] = Σ_k h[k] y[(mD + G - k) mod N]` with
/// `G = (taps - 1) / 2`.
pub fn filter_decimate_periodic(y: &[Complex64], taps: &[f64], d: usize) -> Result<Vec<Complex64>> {
    check_decimation(y.len(), taps, d)?;
    let n = y.len() as isize;
    let g = ((taps.len() - 1) / 2) as isize;
    Ok((0..y.len() / d)
        .map(|m| {
            let at = (m * d) as isize + g;
            taps.iter()
                .enumerate()
                .map(|(k, &h)| y[(at - k as isize).rem_euclid(n) as usize] * h)
                .sum()
        })
        .collect())
}

/// Zero-phase full convolution, decimated on the grid `t = mD` (time zero
/// kept on the grid) and folded: `u[m mod len] += Σ_k h[k] y[mD + G - k]`
/// for every `m` whose output touches the record.
pub fn filter_decimate_folded(
    y: &[Complex64],
    taps: &[f64],
    d: usize,
    len: usize,
) -> Result<Vec<Complex64>> {
    check_decimation(y.len(), taps, d)?;
    if len == 0 {
        return Err(Error::invalid("fold length must be positive"));
    }
    let n = y.len() as isize;
    let g = ((taps.len() - 1) / 2) as isize;
    let d = d as isize;
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for m in (-g).div_euclid(d)..=(n - 1 + g).div_euclid(d) {
        let at = m * d + g;
        // Taps k with 0 <= at - k < n.
        let k_lo = (at - n + 1).max(0);
        let k_hi = at.min(taps.len() as isize - 1);
        if k_lo > k_hi {
            continue;
        }
        let v: Complex64 = (k_lo..=k_hi)
            .map(|k| y[(at - k) as usize] * taps[k as usize])
            .sum();
        out[m.rem_euclid(len as isize) as usize] += v;
    }
    Ok(out)
}

/// Runs the full zoom pipeline and returns the bins that fall in `[f1, f2]`.
///
/// Bins are scaled by `D` so their magnitudes line up with an FFT of the
/// undecimated trace.
pub fn zoom_fft(trace: &Trace, plan: &ZoomFftPlan) -> Result<Spectrum> {
    ZoomRunner::new(plan.clone(), trace.len())?.run(trace)
}

/// A zoom plan bound to one input length, with its short-FFT tables built.
#[derive(Clone, Debug)]
pub struct ZoomRunner {
    plan: ZoomFftPlan,
    n: usize,
    fft: FftPlan,
}

impl ZoomRunner {
    pub fn new(plan: ZoomFftPlan, n: usize) -> Result<Self> {
        let fft = FftPlan::new(plan.short_fft_len(n)?)?;
        Ok(ZoomRunner { plan, n, fft })
    }

    pub fn plan(&self) -> &ZoomFftPlan {
        &self.plan
    }

    pub fn fft_len(&self) -> usize {
        self.fft.len()
    }

    pub fn run(&self, trace: &Trace) -> Result<Spectrum> {
        let plan = &self.plan;
        let fs = trace.sample_rate_hz();
        if (fs - plan.sample_rate_hz).abs() > 1e-12 * fs {
            return Err(Error::invalid(format!(
                "plan built for f_s = {} Hz, trace sampled at {fs} Hz",
                plan.sample_rate_hz
            )));
        }
        if trace.len() != self.n {
            return Err(Error::invalid(format!(
                "runner built for {} samples, trace has {}",
                self.n,
                trace.len()
            )));
        }
        let d = plan.decimation;
        let shifted = frequency_shift(trace, plan.center_hz);
        let len = self.fft.len();
        let mut decimated = match plan.edges {
            EdgeMode::Full => filter_decimate_folded(&shifted, &plan.filter_taps, d, len)?,
            EdgeMode::Periodic => filter_decimate_periodic(&shifted, &plan.filter_taps, d)?,
            EdgeMode::Linear { .. } => filter_decimate(&shifted, &plan.filter_taps, d)?,
        };
        if let EdgeMode::Linear {
            trim_transient: true,
        } = plan.edges
        {
            let skip = plan
                .transient_outputs()
                .min(decimated.len().saturating_sub(1));
            decimated.drain(..skip);
        }

        let mut work = zero_pad(&decimated, len)?;
        self.fft.forward(&mut work);

        let step = plan.decimated_rate_hz() / len as f64;
        let lo = snap((plan.f1_hz - plan.center_hz) / step, f64::ceil);
        let hi = snap((plan.f2_hz - plan.center_hz) / step, f64::floor);
        let hi = hi.min(lo + len as i64 - 1);
        if hi < lo {
            return Err(Error::InsufficientResolution(format!(
                "zoom step {step} Hz leaves no bin inside [{}, {}] Hz",
                plan.f1_hz, plan.f2_hz
            )));
        }
        let scale = d as f64;
        let bins: Vec<Complex64> = (lo..=hi)
            .map(|k| work[k.rem_euclid(len as i64) as usize] * scale)
            .collect();
        Spectrum::new(
            ComplexBuffer::new(bins)?,
            plan.center_hz + lo as f64 * step,
            step,
            trace.len(),
        )
    }
}

fn snap(q: f64, round: fn(f64) -> f64) -> i64 {
    let r = q.round();
    if (q - r).abs() < 1e-9 {
        r as i64
    } else {
        round(q) as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{fft, to_db};

    fn tone(f: f64, fs: f64, n: usize) -> Trace {
        Trace::new(
            (0..n)
                .map(|i| (2.0 * PI * f * i as f64 / fs).cos())
                .collect(),
            fs,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn shift_identity_cases() {
        let t = tone(300.0, 8000.0, 64);
        for shift in [0.0, 8000.0] {
            let y = frequency_shift(&t, shift);
            for (a, &b) in y.iter().zip(t.samples()) {
                assert!((a - Complex64::new(b, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn shift_moves_tone_to_dc() {
        let fs = 8000.0;
        let t = Trace::new(
            (0..128)
                .map(|i| (2.0 * PI * 562.5 * i as f64 / fs).sin())
                .collect(),
            fs,
            0.0,
        )
        .unwrap();
        let y = frequency_shift(&t, 562.5);
        let spec = fft(&y).unwrap();
        // The real tone's negative image lands at -1125 Hz with equal weight.
        let top = spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((spec[0].norm() - 64.0).abs() < 1e-9);
        assert!((spec[0].norm() - top).abs() < 1e-9);
        let c = Trace::new(vec![1.0; 128], fs, 0.0).unwrap();
        let dc = frequency_shift(&c, -562.5);
        let spec = fft(&dc).unwrap();
        let k = (0..spec.len())
            .max_by(|&a, &b| spec[a].norm().total_cmp(&spec[b].norm()))
            .unwrap();
        assert_eq!(k, 9);
    }

    #[test]
    fn lowpass_design() {
        let taps = design_lowpass(800.0, 8000.0, 101).unwrap();
        assert_eq!(taps.len(), 101);
        assert!((tap_response(&taps, 0.0, 8000.0).norm() - 1.0).abs() < 1e-6);
        assert!(to_db(tap_response(&taps, 4000.0, 8000.0).norm()) <= -50.0);
        for i in 0..50 {
            assert!((taps[i] - taps[100 - i]).abs() < 1e-15);
        }
        let mut impulse = vec![Complex64::new(0.0, 0.0); 101];
        impulse[0] = Complex64::new(1.0, 0.0);
        let out = filter_decimate(&impulse, &taps, 1).unwrap();
        for (o, h) in out.iter().zip(&taps) {
            assert!((o.re - h).abs() < 1e-15 && o.im == 0.0);
        }
        assert!(design_lowpass(800.0, 8000.0, 100).is_err());
        assert!(design_lowpass(800.0, 8000.0, 9).is_err());
        assert!(design_lowpass(4000.0, 8000.0, 101).is_err());
        assert!(design_lowpass(0.0, 8000.0, 101).is_err());
    }

    #[test]
    fn stopband_beyond_transition() {
        // 101 Hamming taps, transition 0.1 f_s wide starting at the cutoff
        let fs = 1.0;
        let taps = design_lowpass(0.15, fs, 101).unwrap();
        let worst = (0..=200)
            .map(|i| 0.25 + 0.25 * i as f64 / 200.0)
            .map(|f| to_db(tap_response(&taps, f, fs).norm()))
            .fold(f64::MIN, f64::max);
        assert!(worst <= -50.0, "{worst}");
    }

    #[test]
    fn decimation_basics() {
        let y: Vec<_> = (0..10)
            .map(|i| Complex64::new(i as f64, -(i as f64)))
            .collect();
        assert_eq!(filter_decimate(&y, &[1.0], 1).unwrap(), y);
        assert_eq!(filter_decimate(&y, &[1.0], 3).unwrap().len(), 3);
        assert!(filter_decimate(&y, &[1.0], 11).is_err());
        assert!(filter_decimate(&y, &[], 1).is_err());
        assert!(filter_decimate(&y, &[1.0], 0).is_err());

        let dc = vec![Complex64::new(2.5, 0.0); 400];
        let taps = design_lowpass(500.0, 8000.0, 101).unwrap();
        let out = filter_decimate(&dc, &taps, 4).unwrap();
        assert_eq!(out.len(), 100);
        for v in &out[25..] {
            assert!((v.re - 2.5).abs() < 1e-12);
        }
        for v in filter_decimate_periodic(&dc, &taps, 4).unwrap() {
            assert!((v.re - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn decimated_tone_keeps_frequency_and_amplitude() {
        let fs = 8000.0;
        let n = 1024;
        let x: Vec<Complex64> = tone(125.0, fs, n).to_complex();
        let taps = design_lowpass(500.0, fs, 101).unwrap();
        let u = filter_decimate_periodic(&x, &taps, 4).unwrap();
        let spec = fft(&u).unwrap();
        let half = &spec[..spec.len() / 2];
        let k = (0..half.len())
            .max_by(|&a, &b| half[a].norm().total_cmp(&half[b].norm()))
            .unwrap();
        assert_eq!(k as f64 * 2000.0 / u.len() as f64, 125.0);
        let full = fft(&x).unwrap();
        let ratio_db = to_db(half[k].norm() * 4.0) - to_db(full[16].norm());
        assert!(ratio_db.abs() < 0.1, "{ratio_db}");
    }

    #[test]
    fn plan_defaults_and_validation() {
        let p = ZoomFftPlan::new(100.0, 1000.0, 8000.0, &ZoomOptions::default()).unwrap();
        assert_eq!(p.decimation(), 4);
        assert_eq!(p.center_hz(), 550.0);
        assert!(p.cutoff_hz() >= 450.0 && p.cutoff_hz() <= 1000.0);
        assert_eq!(p.group_delay_samples(), 50);
        assert_eq!(p.short_fft_len(128).unwrap(), 32);

        let full = ZoomFftPlan::new(0.0, 4000.0, 8000.0, &ZoomOptions::default()).unwrap();
        assert_eq!(full.decimation(), 1);
        assert_eq!(full.filter_taps(), &[1.0]);

        assert!(ZoomFftPlan::new(1000.0, 100.0, 8000.0, &ZoomOptions::default()).is_err());
        assert!(ZoomFftPlan::new(0.0, 4100.0, 8000.0, &ZoomOptions::default()).is_err());
        let too_much = ZoomOptions {
            decimation: Some(9),
            ..Default::default()
        };
        assert!(ZoomFftPlan::new(100.0, 1000.0, 8000.0, &too_much).is_err());
        let bad_cut = ZoomOptions {
            cutoff_hz: Some(100.0),
            ..Default::default()
        };
        assert!(ZoomFftPlan::new(100.0, 1000.0, 8000.0, &bad_cut).is_err());
    }

    #[test]
    fn trim_drops_transient_outputs() {
        let opts = ZoomOptions {
            edges: EdgeMode::Linear {
                trim_transient: true,
            },
            ..Default::default()
        };
        let p = ZoomFftPlan::new(100.0, 1000.0, 8000.0, &opts).unwrap();
        assert_eq!(p.decimated_len(1024), 256 - 13);
        let s = zoom_fft(&tone(500.0, 8000.0, 1024), &p).unwrap();
        assert!(s.f_start_hz() >= 100.0 && s.f_end_hz() <= 1000.0);
    }

    #[test]
    fn full_band_identity_plan_matches_fft() {
        let fs = 8000.0;
        let t = Trace::new(
            (0..256)
                .map(|i| ((i * 37 % 101) as f64 / 50.0) - 1.0)
                .collect(),
            fs,
            0.0,
        )
        .unwrap();
        let plan = ZoomFftPlan::new(0.0, 4000.0, fs, &ZoomOptions::default()).unwrap();
        let z = zoom_fft(&t, &plan).unwrap();
        let plain = fft(&t.to_complex()).unwrap();
        assert_eq!(z.f_start_hz(), 0.0);
        assert_eq!(z.f_step_hz(), fs / 256.0);
        assert_eq!(z.len(), 129);
        let scale = plain.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (k, b) in z.bins().iter().enumerate() {
            assert!((b - plain[k]).norm() <= 1e-6 * scale, "bin {k}");
        }
    }

    #[test]
    fn two_tone_peaks_located() {
        let fs = 8000.0;
        let n = 128;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                (2.0 * PI * 475.0 * t).sin() + (2.0 * PI * 525.0 * t).sin()
            })
            .collect();
        let trace = Trace::new(x.clone(), fs, 0.0).unwrap();
        let opts = ZoomOptions {
            decimation: Some(4),
            fft_len: Some(256),
            ..Default::default()
        };
        let plan = ZoomFftPlan::new(100.0, 1000.0, fs, &opts).unwrap();
        let z = zoom_fft(&trace, &plan).unwrap();
        let coarse = fs / 4.0 / (n / 4) as f64;
        let mags = z.magnitudes();
        let peaks: Vec<usize> = (1..mags.len() - 1)
            .filter(|&k| mags[k] > mags[k - 1] && mags[k] >= mags[k + 1] && mags[k] > 0.5 * 64.0)
            .collect();
        assert_eq!(peaks.len(), 2, "{peaks:?}");

        // Direct DTFT of the trace on a 1 Hz grid.
        let dtft = |f: f64| {
            x.iter()
                .enumerate()
                .map(|(i, &v)| cis_turns(-f * i as f64 / fs) * v)
                .sum::<Complex64>()
                .norm()
        };
        let grid: Vec<f64> = (400..=600).map(f64::from).collect();
        let oracle: Vec<f64> = (1..grid.len() - 1)
            .filter(|&i| dtft(grid[i]) > dtft(grid[i - 1]) && dtft(grid[i]) >= dtft(grid[i + 1]))
            .map(|i| grid[i])
            .collect();
        assert_eq!(oracle.len(), 2);
        for ((&k, &f_tone), &f_oracle) in peaks.iter().zip(&[475.0, 525.0]).zip(&oracle) {
            assert!(
                (z.frequency(k) - f_tone).abs() <= coarse,
                "{f_tone}: {}",
                z.frequency(k)
            );
            assert!(
                (z.frequency(k) - f_oracle).abs() <= z.f_step_hz(),
                "{f_oracle}: {}",
                z.frequency(k)
            );
        }
    }

    #[test]
    fn folded_identity_is_zero_padding() {
        let y: Vec<Complex64> = (0..10)
            .map(|i| Complex64::new(i as f64, -(i as f64)))
            .collect();
        let out = filter_decimate_folded(&y, &[1.0], 1, 16).unwrap();
        assert_eq!(&out[..10], &y[..]);
        assert!(out[10..].iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn folded_conserves_mass_at_unit_decimation() {
        let taps = design_lowpass(600.0, 8000.0, 31).unwrap();
        let y: Vec<Complex64> = (0..40)
            .map(|i| Complex64::new(((i * 7) % 5) as f64, 1.0))
            .collect();
        let out = filter_decimate_folded(&y, &taps, 1, 64).unwrap();
        let total: Complex64 = out.iter().sum();
        let want = y.iter().sum::<Complex64>() * taps.iter().sum::<f64>();
        assert!((total - want).norm() < 1e-12);
    }

    #[test]
    fn folded_matches_periodic_for_compact_signal() {
        let taps = design_lowpass(500.0, 8000.0, 21).unwrap();
        let mut y = vec![Complex64::new(0.0, 0.0); 128];
        for (i, v) in y.iter_mut().enumerate().take(70).skip(50) {
            *v = Complex64::new((i as f64 * 0.3).sin(), 0.0);
        }
        let periodic = filter_decimate_periodic(&y, &taps, 4).unwrap();
        let folded = filter_decimate_folded(&y, &taps, 4, 32).unwrap();
        for (a, b) in periodic.iter().zip(&folded) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn full_edges_follow_the_dtft_for_a_filling_tone() {
        // A 500-sample tone that is not periodic in the record: the zoom bins
        // should sample the record's DTFT shaped by the filter response.
        let fs = 8000.0;
        let n = 500;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * 313.0 * i as f64 / fs).cos())
            .collect();
        let trace = Trace::new(x.clone(), fs, 0.0).unwrap();
        let plan = ZoomFftPlan::new(200.0, 600.0, fs, &ZoomOptions::default()).unwrap();
        let z = zoom_fft(&trace, &plan).unwrap();
        let peak = n as f64 / 2.0;
        let passband = plan.cutoff_hz() - plan.transition_width_hz() / 2.0;
        let mut compared = 0;
        for k in 0..z.len() {
            let f = z.frequency(k);
            if (f - plan.center_hz()).abs() > passband {
                continue;
            }
            let dtft: Complex64 = x
                .iter()
                .enumerate()
                .map(|(i, &v)| cis_turns(-f * i as f64 / fs) * v)
                .sum();
            let offset = (f - plan.center_hz()) / fs;
            let gain: Complex64 = plan
                .filter_taps()
                .iter()
                .enumerate()
                .map(|(i, &h)| {
                    cis_turns(-offset * (i as f64 - plan.group_delay_samples() as f64)) * h
                })
                .sum();
            let expected = (dtft * gain).norm();
            assert!(
                (z.bins()[k].norm() - expected).abs() < 1e-3 * peak,
                "{f} Hz"
            );
            compared += 1;
        }
        assert!(compared >= 10, "{compared}");
    }
}
