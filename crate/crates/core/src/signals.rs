//! Test signals and trace files.
//!
//! The two-tone generator reproduces the classic resolvability setup (two
//! equal sines, 128 samples at 8 kHz by default). The THz pulse generator is a
//! synthetic stand-in for a measured THz-TDS reference trace: a single-cycle
//! Gaussian-derivative transient sampled at 100 fs, optionally followed by
//! attenuated echoes such as substrate reflections.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Trace;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoToneSpec {
    pub f_a_hz: f64,
    pub f_b_hz: f64,
    pub amp_a: f64,
    pub amp_b: f64,
    pub sample_rate_hz: f64,
    pub n: usize,
    pub phase_a: f64,
    pub phase_b: f64,
}

impl TwoToneSpec {
    /// Unit amplitudes, zero phases.
    pub fn new(f_a_hz: f64, f_b_hz: f64, sample_rate_hz: f64, n: usize) -> Self {
        TwoToneSpec {
            f_a_hz,
            f_b_hz,
            amp_a: 1.0,
            amp_b: 1.0,
            sample_rate_hz,
            n,
            phase_a: 0.0,
            phase_b: 0.0,
        }
    }

    /// Same spec with the tones moved to `center ± separation/2`.
    pub fn centered(&self, center_hz: f64, separation_hz: f64) -> Self {
        TwoToneSpec {
            f_a_hz: center_hz - separation_hz / 2.0,
            f_b_hz: center_hz + separation_hz / 2.0,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        let fs = self.sample_rate_hz;
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {fs}"
            )));
        }
        if self.n < 2 {
            return Err(Error::invalid(format!(
                "two-tone trace needs n >= 2, got {}",
                self.n
            )));
        }
        for f in [self.f_a_hz, self.f_b_hz] {
            if !(f.is_finite() && f.abs() < fs / 2.0) {
                return Err(Error::invalid(format!(
                    "tone at {f} Hz is not below the Nyquist frequency {} Hz",
                    fs / 2.0
                )));
            }
        }
        Ok(())
    }
}

/// `amp_a sin(2π f_a n / f_s + φ_a) + amp_b sin(2π f_b n / f_s + φ_b)`.
pub fn gen_two_tone(spec: &TwoToneSpec) -> Result<Trace> {
    spec.validate()?;
    let fs = spec.sample_rate_hz;
    let samples = (0..spec.n)
        .map(|i| {
            let t = i as f64 / fs;
            spec.amp_a * (2.0 * PI * spec.f_a_hz * t + spec.phase_a).sin()
                + spec.amp_b * (2.0 * PI * spec.f_b_hz * t + spec.phase_b).sin()
        })
        .collect();
    Trace::new(samples, fs, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseModel {
    /// `-(τ/σ) exp(1/2 - τ²/2σ²)`: one positive and one negative lobe,
    /// spectrum `∝ f exp(-2π²σ²f²)` peaking at `1/(2πσ)`.
    GaussianDerivative,
    /// `exp(-τ/τ_d) - exp(-τ/τ_r)` for `τ >= 0`, `τ_d = width`, `τ_r = width/4`.
    DoubleExponential,
}

/// Delayed, scaled copy of the main pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Echo {
    pub delay_s: f64,
    pub relative_amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThzPulseSpec {
    pub pulse_width_s: f64,
    pub center_time_s: f64,
    pub amplitude: f64,
    pub sample_rate_hz: f64,
    pub n: usize,
    pub model: PulseModel,
    pub echoes: Vec<Echo>,
}

impl Default for ThzPulseSpec {
    /// 500 samples at 100 fs, 300 fs wide, centred at 10 ps.
    fn default() -> Self {
        ThzPulseSpec {
            pulse_width_s: 300e-15,
            center_time_s: 10e-12,
            amplitude: 1.0,
            sample_rate_hz: 10e12,
            n: 500,
            model: PulseModel::GaussianDerivative,
            echoes: Vec::new(),
        }
    }
}

impl ThzPulseSpec {
    fn validate(&self) -> Result<()> {
        let fs = self.sample_rate_hz;
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {fs}"
            )));
        }
        if self.n < 2 {
            return Err(Error::invalid("pulse trace needs at least 2 samples"));
        }
        let w = self.pulse_width_s;
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::invalid(format!(
                "pulse width must be positive, got {w}"
            )));
        }
        let window = self.n as f64 / fs;
        let mut centers = vec![self.center_time_s];
        centers.extend(self.echoes.iter().map(|e| self.center_time_s + e.delay_s));
        for c in centers {
            let (lo, hi) = match self.model {
                PulseModel::GaussianDerivative => (c - 5.0 * w, c + 5.0 * w),
                PulseModel::DoubleExponential => (c, c + 5.0 * w),
            };
            if !(lo >= 0.0 && hi <= window) {
                return Err(Error::invalid(format!(
                    "pulse at {c} s spans [{lo}, {hi}] s, outside the {window} s window"
                )));
            }
        }
        Ok(())
    }

    fn shape(&self, tau: f64) -> f64 {
        let w = self.pulse_width_s;
        match self.model {
            PulseModel::GaussianDerivative => {
                let u = tau / w;
                -u * (0.5 - 0.5 * u * u).exp()
            }
            PulseModel::DoubleExponential => {
                if tau < 0.0 {
                    return 0.0;
                }
                let rise = w / 4.0;
                // peak of exp(-t/w) - exp(-t/r) is at t* = ln(w/r) w r / (w - r)
                let t_star = (w / rise).ln() * w * rise / (w - rise);
                let peak = (-t_star / w).exp() - (-t_star / rise).exp();
                ((-tau / w).exp() - (-tau / rise).exp()) / peak
            }
        }
    }
}

/// Deterministic single-cycle pulse plus any configured echoes.
pub fn gen_thz_pulse(spec: &ThzPulseSpec) -> Result<Trace> {
    spec.validate()?;
    let fs = spec.sample_rate_hz;
    let mut pulses = vec![(spec.center_time_s, 1.0)];
    pulses.extend(
        spec.echoes
            .iter()
            .map(|e| (spec.center_time_s + e.delay_s, e.relative_amplitude)),
    );
    let samples = (0..spec.n)
        .map(|i| {
            pulses
                .iter()
                .map(|&(center, rel)| {
                    // τ from sample offsets keeps grid-centred pulses exactly odd
                    let tau = (i as f64 - center * fs) / fs;
                    rel * spec.shape(tau)
                })
                .sum::<f64>()
                * spec.amplitude
        })
        .collect();
    Trace::new(samples, fs, 0.0)
}

/// Adds zero-mean white Gaussian noise from a seeded ChaCha8 stream.
pub fn add_white_noise(trace: &Trace, std_dev: f64, seed: u64) -> Result<Trace> {
    if !(std_dev.is_finite() && std_dev >= 0.0) {
        return Err(Error::invalid(format!(
            "noise standard deviation must be non-negative, got {std_dev}"
        )));
    }
    let normal = Normal::new(0.0, std_dev)
        .map_err(|e| Error::invalid(format!("noise standard deviation {std_dev}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = trace
        .samples()
        .iter()
        .map(|&v| v + normal.sample(&mut rng))
        .collect();
    Trace::new(samples, trace.sample_rate_hz(), trace.t0_s())
}

/// Relative tolerance on each time step against the median step.
const STEP_TOLERANCE: f64 = 1e-6;

/// Reads a `time_s,amplitude` file. A single non-numeric first line is taken
/// as a header; the sample rate comes from the mean time step.
pub fn read_trace_csv(path: &Path) -> Result<Trace> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let parse_err = |line: u64, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut lines = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(idx as u64 + 1);
            parse_err(line, e.to_string())
        })?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(idx as u64 + 1);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 columns, found {}", record.len()),
            ));
        }
        let t = record[0].parse::<f64>();
        let v = record[1].parse::<f64>();
        match (t, v) {
            (Ok(t), Ok(v)) if t.is_finite() && v.is_finite() => {
                times.push(t);
                values.push(v);
                lines.push(line);
            }
            (Err(_), Err(_)) if idx == 0 => continue,
            _ => {
                return Err(parse_err(
                    line,
                    format!(
                        "cannot parse '{},{}' as two finite numbers",
                        &record[0], &record[1]
                    ),
                ))
            }
        }
    }

    let format_err = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    if times.len() < 2 {
        return Err(format_err(format!(
            "need at least 2 samples to infer the sample rate, found {}",
            times.len()
        )));
    }
    let steps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let mut sorted = steps.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    if !(median > 0.0) {
        return Err(format_err("time column is not increasing".into()));
    }
    // differences of large absolute times carry their rounding error
    let slack = |i: usize| 4.0 * f64::EPSILON * (times[i].abs() + times[i + 1].abs());
    if let Some(i) = steps
        .iter()
        .enumerate()
        .position(|(i, &dt)| (dt - median).abs() > STEP_TOLERANCE * median + slack(i))
    {
        return Err(format_err(format!(
            "non-uniform time column at line {}: step {} s vs median {median} s",
            lines[i + 1],
            steps[i]
        )));
    }
    let span = times[times.len() - 1] - times[0];
    Trace::new(values, (times.len() - 1) as f64 / span, times[0])
}

/// Writes `time_s,amplitude` with a header and shortest round-trip decimals.
pub fn write_trace_csv(trace: &Trace, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    write_trace_to(trace, &mut out).map_err(io_err)?;
    out.flush().map_err(io_err)
}

pub fn write_trace_to(trace: &Trace, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "time_s,amplitude")?;
    for (n, v) in trace.samples().iter().enumerate() {
        writeln!(out, "{:e},{:e}", trace.time(n), v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fft;
    use num_complex::Complex64;

    #[test]
    fn single_tone_peaks_at_bin_8() {
        let mut spec = TwoToneSpec::new(500.0, 0.0, 8000.0, 128);
        spec.amp_b = 0.0;
        let t = gen_two_tone(&spec).unwrap();
        let x: Vec<Complex64> = t.to_complex();
        let s = fft(&x).unwrap();
        let k = (0..64)
            .max_by(|&a, &b| s[a].norm().total_cmp(&s[b].norm()))
            .unwrap();
        assert_eq!(k, 8);
    }

    #[test]
    fn two_tone_cases() {
        let spec = TwoToneSpec::new(475.0, 525.0, 8000.0, 128);
        let t = gen_two_tone(&spec).unwrap();
        assert_eq!(t.len(), 128);
        assert_eq!(t, gen_two_tone(&spec).unwrap());
        let want =
            (2.0 * PI * 475.0 * 3.0 / 8000.0).sin() + (2.0 * PI * 525.0 * 3.0 / 8000.0).sin();
        assert!((t.samples()[3] - want).abs() < 1e-15);

        let mut silent = spec.clone();
        silent.amp_a = 0.0;
        silent.amp_b = 0.0;
        assert!(gen_two_tone(&silent)
            .unwrap()
            .samples()
            .iter()
            .all(|&v| v == 0.0));

        assert!(gen_two_tone(&TwoToneSpec::new(4000.0, 100.0, 8000.0, 128)).is_err());
        assert!(gen_two_tone(&TwoToneSpec::new(100.0, 200.0, 8000.0, 1)).is_err());
        let c = spec.centered(550.0, 50.0);
        assert_eq!((c.f_a_hz, c.f_b_hz), (525.0, 575.0));
    }

    #[test]
    fn default_pulse_shape() {
        let t = gen_thz_pulse(&ThzPulseSpec::default()).unwrap();
        assert_eq!(t.len(), 500);
        assert_eq!(t.sample_rate_hz(), 10e12);
        let x = t.samples();
        let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - 1.0).abs() < 0.05);
        let mean: f64 = x.iter().sum::<f64>() / x.len() as f64;
        assert!(mean.abs() <= 1e-12 * peak);

        // one positive lobe before the centre, one negative after
        let (imax, _) = x
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let (imin, _) = x
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!(imax < 100 && imin > 100);
        let crossings = x
            .windows(2)
            .filter(|w| w[0].abs() > 1e-3 && w[1].abs() > 1e-3 && w[0].signum() != w[1].signum())
            .count();
        assert!(crossings <= 1);
    }

    #[test]
    fn pulse_spectrum_peak_near_analytic() {
        let spec = ThzPulseSpec::default();
        let t = gen_thz_pulse(&spec).unwrap();
        let mut x = t.to_complex();
        x.resize(8192, Complex64::new(0.0, 0.0));
        let s = fft(&x).unwrap();
        let k = (0..4096)
            .max_by(|&a, &b| s[a].norm().total_cmp(&s[b].norm()))
            .unwrap();
        let f_peak = k as f64 * spec.sample_rate_hz / 8192.0;
        let analytic = 1.0 / (2.0 * PI * spec.pulse_width_s);
        assert!(
            (f_peak - analytic).abs() <= 0.2 * analytic,
            "{f_peak} vs {analytic}"
        );
    }

    #[test]
    fn pulse_variants_and_validation() {
        let zero = ThzPulseSpec {
            amplitude: 0.0,
            ..Default::default()
        };
        assert!(gen_thz_pulse(&zero)
            .unwrap()
            .samples()
            .iter()
            .all(|&v| v == 0.0));

        let late = ThzPulseSpec {
            center_time_s: 49.9e-12,
            ..Default::default()
        };
        assert!(gen_thz_pulse(&late).is_err());
        let early = ThzPulseSpec {
            center_time_s: 1e-13,
            ..Default::default()
        };
        assert!(gen_thz_pulse(&early).is_err());

        let dexp = ThzPulseSpec {
            model: PulseModel::DoubleExponential,
            ..Default::default()
        };
        let t = gen_thz_pulse(&dexp).unwrap();
        let peak = t.samples().iter().fold(0.0f64, |m, &v| m.max(v));
        assert!(peak > 0.95 && peak <= 1.0 + 1e-12);
        assert!(t.samples()[..100].iter().all(|&v| v == 0.0));

        let echo = ThzPulseSpec {
            echoes: vec![Echo {
                delay_s: 20e-12,
                relative_amplitude: 0.5,
            }],
            ..Default::default()
        };
        let t = gen_thz_pulse(&echo).unwrap();
        let base = gen_thz_pulse(&ThzPulseSpec::default()).unwrap();
        assert!((t.samples()[297] - 0.5 * base.samples()[97]).abs() < 1e-12);
        let bad_echo = ThzPulseSpec {
            echoes: vec![Echo {
                delay_s: 45e-12,
                relative_amplitude: 0.5,
            }],
            ..Default::default()
        };
        assert!(gen_thz_pulse(&bad_echo).is_err());
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let t = gen_thz_pulse(&ThzPulseSpec::default()).unwrap();
        let a = add_white_noise(&t, 0.01, 7).unwrap();
        assert_eq!(a, add_white_noise(&t, 0.01, 7).unwrap());
        assert_ne!(a, add_white_noise(&t, 0.01, 8).unwrap());
        assert!(add_white_noise(&t, -1.0, 7).is_err());
    }
}
