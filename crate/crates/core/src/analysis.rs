//! Comparison metrics: the two-tone dip test, resolvability scans over tone
//! separation, and dB deviation between spectra on different axes.

use serde::Serialize;

use crate::czt::{czt_spectrum, dft};
use crate::error::{Error, Result};
use crate::numerics::{to_db, zero_pad, Spectrum, Trace};
use crate::resolution::zeros_for_resolution;
use crate::signals::{gen_two_tone, TwoToneSpec};

/// Non-negative half of the `total_len`-point DFT of the zero-padded trace.
///
/// Power-of-two lengths go through the radix-2 kernel; other lengths use the
/// chirp-z route on the full circle, which yields the same DFT bins.
pub fn padded_fft_spectrum(trace: &Trace, total_len: usize) -> Result<Spectrum> {
    let x = zero_pad(&trace.to_complex(), total_len)?;
    let bins = dft(&x)?;
    Spectrum::from_fft(bins, trace.sample_rate_hz(), trace.len())?.positive_half()
}

/// Zero-padded FFT spectrum whose step is at most `target_step_hz`.
pub fn fft_spectrum_at_step(trace: &Trace, target_step_hz: f64) -> Result<Spectrum> {
    let zeros = zeros_for_resolution(trace.sample_rate_hz(), trace.len(), target_step_hz)?;
    padded_fft_spectrum(trace, trace.len() + zeros)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DipMetric {
    pub peak_a_hz: f64,
    pub peak_b_hz: f64,
    pub peak_a_mag: f64,
    pub peak_b_mag: f64,
    pub valley_hz: f64,
    pub valley_mag: f64,
    /// Smaller peak over the valley, in dB; 0 when unresolved.
    pub dip_db: f64,
    pub resolved: bool,
}

/// Walks uphill from `k` to the nearest local maximum.
fn climb(mags: &[f64], mut k: usize) -> usize {
    loop {
        let left = if k > 0 {
            mags[k - 1]
        } else {
            f64::NEG_INFINITY
        };
        let right = mags.get(k + 1).copied().unwrap_or(f64::NEG_INFINITY);
        if right > mags[k] && right >= left {
            k += 1;
        } else if left > mags[k] {
            k -= 1;
        } else {
            return k;
        }
    }
}

/// Peaks nearest the two nominal tones and the deepest bin between them.
///
/// The pair is resolved when the peaks are distinct local maxima with a
/// strictly lower bin between them.
pub fn dip_metric(spectrum: &Spectrum, f_a_hz: f64, f_b_hz: f64) -> Result<DipMetric> {
    if spectrum.len() < 3 {
        return Err(Error::InsufficientResolution(format!(
            "dip test needs at least 3 bins, spectrum has {}",
            spectrum.len()
        )));
    }
    let (lo_f, hi_f) = if f_a_hz <= f_b_hz {
        (f_a_hz, f_b_hz)
    } else {
        (f_b_hz, f_a_hz)
    };
    let half = spectrum.f_step_hz() / 2.0;
    let (start, end) = (spectrum.f_start_hz(), spectrum.f_end_hz());
    for f in [lo_f, hi_f] {
        if f < start - half || f > end + half {
            return Err(Error::invalid(format!(
                "tone {f} Hz outside the spectrum axis [{start}, {end}] Hz"
            )));
        }
    }
    let mags = spectrum.magnitudes();
    let ka = climb(&mags, spectrum.nearest_bin(lo_f));
    let kb = climb(&mags, spectrum.nearest_bin(hi_f));
    let (ka, kb) = (ka.min(kb), ka.max(kb));

    let valley = (ka + 1..kb).min_by(|&i, &j| mags[i].total_cmp(&mags[j]));
    let metric = |valley: usize, resolved: bool| {
        let min_peak = mags[ka].min(mags[kb]);
        DipMetric {
            peak_a_hz: spectrum.frequency(ka),
            peak_b_hz: spectrum.frequency(kb),
            peak_a_mag: mags[ka],
            peak_b_mag: mags[kb],
            valley_hz: spectrum.frequency(valley),
            valley_mag: mags[valley],
            dip_db: if resolved {
                to_db(min_peak) - to_db(mags[valley])
            } else {
                0.0
            },
            resolved,
        }
    };
    Ok(match valley {
        Some(v) if mags[v] < mags[ka].min(mags[kb]) => metric(v, true),
        Some(v) => metric(v, false),
        None => metric(ka, false),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolvabilityCurve {
    pub separations_hz: Vec<f64>,
    pub dip_db_fft: Vec<f64>,
    pub dip_db_czt: Vec<f64>,
    pub resolved_fft: Vec<bool>,
    pub resolved_czt: Vec<bool>,
    /// Smallest separation resolved by the padded FFT, if any.
    pub min_resolved_sep_fft_hz: Option<f64>,
    pub min_resolved_sep_czt_hz: Option<f64>,
    pub fft_len: usize,
    pub fft_step_hz: f64,
    pub czt_points: usize,
    pub czt_step_hz: f64,
    pub metrics_fft: Vec<DipMetric>,
    pub metrics_czt: Vec<DipMetric>,
}

/// Sweeps tone separation around the band centre, comparing a zero-padded
/// FFT matched to the chirp-z step against the chirp-z transform of `m`
/// points over `band`.
pub fn resolvability_scan(
    base: &TwoToneSpec,
    separations_hz: &[f64],
    band: (f64, f64),
    m: usize,
) -> Result<ResolvabilityCurve> {
    let (f1, f2) = band;
    let fs = base.sample_rate_hz;
    if !(f1 >= 0.0 && f1 < f2 && f2 <= fs / 2.0) {
        return Err(Error::invalid(format!(
            "band [{f1}, {f2}] Hz must satisfy 0 <= f1 < f2 <= f_s/2"
        )));
    }
    if separations_hz.is_empty() {
        return Err(Error::invalid("no separations to scan"));
    }
    if separations_hz.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("separations must be strictly increasing"));
    }
    let center = (f1 + f2) / 2.0;
    for &sep in separations_hz {
        if !(sep >= 0.0 && center - sep / 2.0 >= f1 && center + sep / 2.0 <= f2) {
            return Err(Error::invalid(format!(
                "separation {sep} Hz puts the tones outside the band [{f1}, {f2}] Hz"
            )));
        }
    }
    if m < 2 {
        return Err(Error::invalid("chirp-z scan needs at least 2 points"));
    }
    let czt_step = (f2 - f1) / m as f64;
    let fft_len = base.n + zeros_for_resolution(fs, base.n, czt_step)?;

    let mut metrics_fft = Vec::with_capacity(separations_hz.len());
    let mut metrics_czt = Vec::with_capacity(separations_hz.len());
    for &sep in separations_hz {
        let spec = base.centered(center, sep);
        let trace = gen_two_tone(&spec)?;
        let padded = padded_fft_spectrum(&trace, fft_len)?;
        let zoomed = czt_spectrum(&trace, f1, f2, m)?;
        metrics_fft.push(dip_metric(&padded, spec.f_a_hz, spec.f_b_hz)?);
        metrics_czt.push(dip_metric(&zoomed, spec.f_a_hz, spec.f_b_hz)?);
    }

    let first_resolved = |ms: &[DipMetric]| {
        ms.iter()
            .zip(separations_hz)
            .find(|(d, _)| d.resolved)
            .map(|(_, &s)| s)
    };
    Ok(ResolvabilityCurve {
        separations_hz: separations_hz.to_vec(),
        dip_db_fft: metrics_fft.iter().map(|d| d.dip_db).collect(),
        dip_db_czt: metrics_czt.iter().map(|d| d.dip_db).collect(),
        resolved_fft: metrics_fft.iter().map(|d| d.resolved).collect(),
        resolved_czt: metrics_czt.iter().map(|d| d.resolved).collect(),
        min_resolved_sep_fft_hz: first_resolved(&metrics_fft),
        min_resolved_sep_czt_hz: first_resolved(&metrics_czt),
        fft_len,
        fft_step_hz: fs / fft_len as f64,
        czt_points: m,
        czt_step_hz: czt_step,
        metrics_fft,
        metrics_czt,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub band_start_hz: f64,
    pub band_end_hz: f64,
    pub step_a_hz: f64,
    pub step_b_hz: f64,
    /// Bins of `a` that entered the statistics.
    pub n_compared: usize,
    pub max_dev_db: f64,
    pub rms_dev_db: f64,
}

/// Linear interpolation of `|b|` at `f`, clamped to the axis.
fn magnitude_at(b: &Spectrum, mags: &[f64], f: f64) -> f64 {
    let pos = ((f - b.f_start_hz()) / b.f_step_hz()).clamp(0.0, (b.len() - 1) as f64);
    let i = pos.floor() as usize;
    if i + 1 >= b.len() {
        return mags[b.len() - 1];
    }
    let t = pos - i as f64;
    mags[i] * (1.0 - t) + mags[i + 1] * t
}

/// dB deviation of `b` from `a` over `band`, evaluated on `a`'s bins.
pub fn compare_spectra(a: &Spectrum, b: &Spectrum, band: (f64, f64)) -> Result<ComparisonReport> {
    compare_spectra_above(a, b, band, f64::NEG_INFINITY)
}

/// As [`compare_spectra`], restricted to bins of `a` no more than
/// `floor_db` below `a`'s in-band peak (`floor_db` is negative, e.g. -60).
pub fn compare_spectra_above(
    a: &Spectrum,
    b: &Spectrum,
    band: (f64, f64),
    floor_db: f64,
) -> Result<ComparisonReport> {
    let (f1, f2) = band;
    if !(f1 < f2) {
        return Err(Error::invalid(format!(
            "empty comparison band [{f1}, {f2}]"
        )));
    }
    let tol = 1e-9 * f2.abs().max(1.0);
    let lo = f1.max(a.f_start_hz()).max(b.f_start_hz());
    let hi = f2.min(a.f_end_hz()).min(b.f_end_hz());
    if lo > hi + tol {
        return Err(Error::invalid(format!(
            "spectra do not overlap inside [{f1}, {f2}] Hz"
        )));
    }
    let mags_a = a.magnitudes();
    let mags_b = b.magnitudes();
    let in_band: Vec<usize> = (0..a.len())
        .filter(|&k| {
            let f = a.frequency(k);
            f >= lo - tol && f <= hi + tol
        })
        .collect();
    if in_band.is_empty() {
        return Err(Error::InsufficientResolution(format!(
            "no bin of the reference spectrum falls in [{lo}, {hi}] Hz"
        )));
    }
    let peak_db = in_band
        .iter()
        .map(|&k| to_db(mags_a[k]))
        .fold(f64::NEG_INFINITY, f64::max);
    let devs: Vec<f64> = in_band
        .iter()
        .filter(|&&k| to_db(mags_a[k]) >= peak_db + floor_db)
        .map(|&k| to_db(mags_a[k]) - to_db(magnitude_at(b, &mags_b, a.frequency(k))))
        .collect();
    let n = devs.len();
    let (max_dev_db, rms_dev_db) = if n == 0 {
        (0.0, 0.0)
    } else {
        (
            devs.iter().fold(0.0f64, |m, d| m.max(d.abs())),
            (devs.iter().map(|d| d * d).sum::<f64>() / n as f64).sqrt(),
        )
    };
    Ok(ComparisonReport {
        band_start_hz: lo,
        band_end_hz: hi,
        step_a_hz: a.f_step_hz(),
        step_b_hz: b.f_step_hz(),
        n_compared: n,
        max_dev_db,
        rms_dev_db,
    })
}
