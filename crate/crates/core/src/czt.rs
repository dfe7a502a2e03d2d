//! Chirp-z transform.
//!
//! `X[k] = Σ_n x[n] A^{-n} W^{kn}` for `k = 0..m`, evaluated with Bluestein's
//! substitution `kn = (k² + n²)/2 - (k - n)²/2`, which turns the sum into a
//! linear convolution of the chirp-modulated input with `W^{-j²/2}`:
//!
//! ```text
//! X[k] = W^{k²/2} · IFFT( FFT(x[n] A^{-n} W^{n²/2}) · FFT(W^{-j²/2}) )[k]
//! ```
//!
//! The convolution runs on the radix-2 kernel at length
//! `next_pow2(N + m - 1)`. Chirp phases are evaluated from the exponent reduced
//! modulo one turn before any trigonometry, so large `n²` do not eat the
//! mantissa.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    cis_turns, frac_mul, is_pow2, next_pow2, ComplexBuffer, FftPlan, Spectrum, Trace,
};

/// Contour parameters: start point `A`, ratio `W`, output length `m`.
///
/// Stored in polar form, `A = |A| e^{j2π·a_turns}` and
/// `W = |W| e^{j2π·w_turns}`, so phases can be reduced exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CztParams {
    a_mag: f64,
    a_turns: f64,
    w_mag: f64,
    w_turns: f64,
    m: usize,
}

impl CztParams {
    pub fn new(a: Complex64, w: Complex64, m: usize) -> Result<Self> {
        let turns = |z: Complex64| z.arg() / (2.0 * std::f64::consts::PI);
        Self::from_polar(a.norm(), turns(a), w.norm(), turns(w), m)
    }

    pub fn from_polar(
        a_mag: f64,
        a_turns: f64,
        w_mag: f64,
        w_turns: f64,
        m: usize,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("chirp-z output length must be at least 1"));
        }
        for (name, mag) in [("A", a_mag), ("W", w_mag)] {
            if !(mag.is_finite() && mag > 0.0) {
                return Err(Error::invalid(format!(
                    "|{name}| must be positive and finite, got {mag}"
                )));
            }
        }
        if !(a_turns.is_finite() && w_turns.is_finite()) {
            return Err(Error::invalid("contour angles must be finite"));
        }
        Ok(CztParams {
            a_mag,
            a_turns,
            w_mag,
            w_turns,
            m,
        })
    }

    /// `A = 1`, `W = e^{-j2π/n}`, `m = n`: the length-`n` DFT.
    pub fn dft(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("DFT length must be at least 1"));
        }
        Self::from_polar(1.0, 0.0, 1.0, -1.0 / n as f64, n)
    }

    pub fn a(&self) -> Complex64 {
        cis_turns(self.a_turns) * self.a_mag
    }

    pub fn w(&self) -> Complex64 {
        cis_turns(self.w_turns) * self.w_mag
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_unit_circle(&self) -> bool {
        (self.a_mag - 1.0).abs() <= 1e-12 && (self.w_mag - 1.0).abs() <= 1e-12
    }

    /// `|W|^{e} e^{j2π·w_turns·e}` for `e = sign * k²/2`, phase reduced exactly.
    fn w_half_square_power(&self, k: u64, sign: f64) -> Complex64 {
        let sq = k * k;
        let turns = frac_mul(self.w_turns / 2.0, sq);
        let mag = if self.w_mag == 1.0 {
            1.0
        } else {
            self.w_mag.powf(sign * sq as f64 / 2.0)
        };
        cis_turns(sign * turns) * mag
    }

    /// `A^{-n}`.
    fn a_inverse_power(&self, n: u64) -> Complex64 {
        let mag = if self.a_mag == 1.0 {
            1.0
        } else {
            self.a_mag.powf(-(n as f64))
        };
        cis_turns(-frac_mul(self.a_turns, n)) * mag
    }
}

/// Unit-circle arc from `f1` with step `(f2 - f1) / m`.
///
/// The last bin lands one step short of `f2`, so `[0, f_s)` with `m = N`
/// reproduces the DFT exactly.
pub fn czt_params_for_band(
    f1_hz: f64,
    f2_hz: f64,
    sample_rate_hz: f64,
    m: usize,
) -> Result<CztParams> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::invalid(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    if !(f1_hz >= 0.0 && f1_hz < f2_hz && f2_hz <= sample_rate_hz) {
        return Err(Error::invalid(format!(
            "band [{f1_hz}, {f2_hz}] Hz must satisfy 0 <= f1 < f2 <= f_s = {sample_rate_hz}"
        )));
    }
    if m < 2 {
        return Err(Error::invalid(format!(
            "band contour needs at least 2 points, got {m}"
        )));
    }
    CztParams::from_polar(
        1.0,
        f1_hz / sample_rate_hz,
        1.0,
        -(f2_hz - f1_hz) / (m as f64 * sample_rate_hz),
        m,
    )
}

/// Reusable Bluestein tables for one input length and one contour.
///
/// Holds the input and output chirps, the unsampled convolution kernel and
/// the FFT twiddles. The kernel is transformed on every call, so a call costs
/// two forward FFTs, one inverse FFT and the chirp multiplications.
#[derive(Clone, Debug)]
pub struct CztPlan {
    n: usize,
    m: usize,
    fft: FftPlan,
    input_chirp: Vec<Complex64>,
    output_chirp: Vec<Complex64>,
    kernel: Vec<Complex64>,
}

impl CztPlan {
    pub fn new(n: usize, params: &CztParams) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("chirp-z input must not be empty"));
        }
        let m = params.m;
        let conv_len = next_pow2(n + m - 1)?;
        let fft = FftPlan::new(conv_len)?;

        let input_chirp: Vec<Complex64> = (0..n as u64)
            .map(|i| params.a_inverse_power(i) * params.w_half_square_power(i, 1.0))
            .collect();
        let output_chirp: Vec<Complex64> = (0..m as u64)
            .map(|k| params.w_half_square_power(k, 1.0))
            .collect();

        // W^{-j²/2} for j in -(n-1)..m, laid out circularly.
        let mut kernel = vec![Complex64::new(0.0, 0.0); conv_len];
        for (j, slot) in kernel.iter_mut().take(m).enumerate() {
            *slot = params.w_half_square_power(j as u64, -1.0);
        }
        for j in 1..n {
            kernel[conv_len - j] = params.w_half_square_power(j as u64, -1.0);
        }

        let finite = |v: &Vec<Complex64>| v.iter().all(|c| c.re.is_finite() && c.im.is_finite());
        if !(finite(&input_chirp) && finite(&output_chirp) && finite(&kernel)) {
            return Err(Error::invalid(
                "contour magnitudes overflow the chirp tables; shorten the transform or use |A| = |W| = 1",
            ));
        }
        Ok(CztPlan {
            n,
            m,
            fft,
            input_chirp,
            output_chirp,
            kernel,
        })
    }

    pub fn input_len(&self) -> usize {
        self.n
    }

    pub fn output_len(&self) -> usize {
        self.m
    }

    /// Length of the circular convolution, `next_pow2(N + m - 1)`.
    pub fn conv_len(&self) -> usize {
        self.fft.len()
    }

    pub fn process(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n {
            return Err(Error::invalid(format!(
                "plan built for {} samples, got {}",
                self.n,
                x.len()
            )));
        }
        let len = self.fft.len();
        let mut work = vec![Complex64::new(0.0, 0.0); len];
        for ((w, &v), &c) in work.iter_mut().zip(x).zip(&self.input_chirp) {
            *w = v * c;
        }
        self.fft.forward(&mut work);

        let mut kernel = self.kernel.clone();
        self.fft.forward(&mut kernel);

        for (w, k) in work.iter_mut().zip(&kernel) {
            *w *= k;
        }
        self.fft.inverse(&mut work);

        Ok(work[..self.m]
            .iter()
            .zip(&self.output_chirp)
            .map(|(&v, &c)| v * c)
            .collect())
    }
}

/// Chirp-z transform through the Bluestein convolution.
pub fn czt(x: &[Complex64], params: &CztParams) -> Result<Vec<Complex64>> {
    CztPlan::new(x.len(), params)?.process(x)
}

/// Literal evaluation of the chirp-z sum, O(N·m).
///
/// For each output point `z_k = A W^{-k}` the polynomial `Σ x[n] z_k^{-n}` is
/// evaluated by Horner's rule in `z_k^{-1} = A^{-1} W^k`.
pub fn czt_direct(x: &[Complex64], params: &CztParams) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::invalid("chirp-z input must not be empty"));
    }
    Ok((0..params.m as u64)
        .map(|k| {
            let turns = frac_mul(params.w_turns, k) - params.a_turns;
            let mag = params.w_mag.powf(k as f64) / params.a_mag;
            let u = cis_turns(turns) * mag;
            x.iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &v| acc * u + v)
        })
        .collect())
}

/// DFT of any length: radix-2 FFT for powers of two, chirp-z on the full
/// unit circle otherwise.
pub fn dft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::invalid("DFT of an empty sequence"));
    }
    if is_pow2(x.len()) {
        crate::numerics::fft(x)
    } else {
        czt(x, &CztParams::dft(x.len())?)
    }
}

/// Chirp-z spectrum of a real trace over `[f1, f2)` with `m` bins.
pub fn czt_spectrum(trace: &Trace, f1_hz: f64, f2_hz: f64, m: usize) -> Result<Spectrum> {
    let fs = trace.sample_rate_hz();
    if f2_hz > fs / 2.0 {
        return Err(Error::invalid(format!(
            "band edge {f2_hz} Hz exceeds the Nyquist frequency {} Hz of a real trace",
            fs / 2.0
        )));
    }
    let params = czt_params_for_band(f1_hz, f2_hz, fs, m)?;
    let bins = czt(&trace.to_complex(), &params)?;
    Spectrum::new(
        ComplexBuffer::new(bins)?,
        f1_hz,
        (f2_hz - f1_hz) / m as f64,
        trace.len(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dft_naive, max_rel_error};
    use std::f64::consts::PI;

    fn noise(n: usize, seed: u64) -> Vec<Complex64> {
        // small LCG, enough for test vectors
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..n).map(|_| Complex64::new(next(), next())).collect()
    }

    #[test]
    fn full_band_params_are_dft_params() {
        let p = czt_params_for_band(0.0, 8000.0, 8000.0, 64).unwrap();
        assert!((p.a() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((p.w() - cis_turns(-1.0 / 64.0)).norm() < 1e-15);
        assert!(p.is_unit_circle());
    }

    #[test]
    fn band_step_matches_two_tone_setup() {
        let p = czt_params_for_band(100.0, 1000.0, 8000.0, 128).unwrap();
        let step = -p.w_turns * 8000.0;
        assert!((step - 7.03125).abs() < 1e-12);
        assert!((step - 7.03).abs() < 0.01);
        let p = czt_params_for_band(0.0, 2.5e12, 10e12, 125).unwrap();
        assert!((-p.w_turns * 10e12 - 20e9).abs() < 1e-3);
    }

    #[test]
    fn band_validation() {
        assert!(czt_params_for_band(1000.0, 100.0, 8000.0, 16).is_err());
        assert!(czt_params_for_band(-1.0, 100.0, 8000.0, 16).is_err());
        assert!(czt_params_for_band(0.0, 9000.0, 8000.0, 16).is_err());
        assert!(czt_params_for_band(0.0, 100.0, 8000.0, 1).is_err());
        assert!(CztParams::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), 4).is_err());
        assert!(CztParams::dft(4).unwrap().m() == 4);
        assert!(CztParams::from_polar(1.0, 0.0, 1.0, 0.1, 0).is_err());
    }

    #[test]
    fn degenerates_to_dft() {
        let x = noise(64, 1);
        let want = dft_naive(&x).unwrap();
        for p in [
            CztParams::dft(64).unwrap(),
            czt_params_for_band(0.0, 8000.0, 8000.0, 64).unwrap(),
        ] {
            assert!(max_rel_error(&czt(&x, &p).unwrap(), &want) < 1e-12);
            assert!(max_rel_error(&czt_direct(&x, &p).unwrap(), &want) < 1e-12);
        }
    }

    #[test]
    fn impulse_is_flat_on_any_unit_contour() {
        let mut x = vec![Complex64::new(0.0, 0.0); 37];
        x[0] = Complex64::new(1.0, 0.0);
        let p = czt_params_for_band(123.0, 3456.0, 8000.0, 50).unwrap();
        for v in czt(&x, &p).unwrap() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn direct_small_cases() {
        let c = Complex64::new(0.3, -2.0);
        let p = CztParams::from_polar(1.0, 0.0, 1.0, 0.137, 5).unwrap();
        for v in czt_direct(&[c], &p).unwrap() {
            assert_eq!(v, c);
        }
        let x = noise(9, 2);
        let p = CztParams::from_polar(1.2, 0.1, 0.9, 0.05, 1).unwrap();
        let a_inv = p.a().inv();
        let want: Complex64 = x
            .iter()
            .enumerate()
            .map(|(n, v)| v * a_inv.powi(n as i32))
            .sum();
        let got = czt_direct(&x, &p).unwrap();
        assert_eq!(got.len(), 1);
        assert!((got[0] - want).norm() < 1e-12 * want.norm());
        assert!(czt_direct(&[], &p).is_err());
        assert!(czt(&[], &p).is_err());
    }

    #[test]
    fn bluestein_matches_direct_off_circle_and_m_gt_n() {
        let x = noise(40, 3);
        let p = CztParams::from_polar(1.01, 0.07, 0.998, -0.013, 90).unwrap();
        let err = max_rel_error(&czt(&x, &p).unwrap(), &czt_direct(&x, &p).unwrap());
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn subsampled_contour_matches_dft() {
        let x = noise(32, 4);
        let p = czt_params_for_band(0.0, 1.0, 1.0, 4 * 32).unwrap();
        let dense = czt(&x, &p).unwrap();
        let base = dft_naive(&x).unwrap();
        let picked: Vec<_> = dense.iter().step_by(4).copied().collect();
        assert!(max_rel_error(&picked, &base) < 1e-9);
    }

    #[test]
    fn any_length_dft() {
        for n in [1, 7, 12, 16, 100] {
            let x = noise(n, n as u64);
            assert!(max_rel_error(&dft(&x).unwrap(), &dft_naive(&x).unwrap()) < 1e-11);
        }
    }

    #[test]
    fn spectrum_tone_peak_and_out_of_band() {
        let fs = 8000.0;
        let tone: Vec<f64> = (0..128)
            .map(|n| (2.0 * PI * 500.0 * n as f64 / fs).sin())
            .collect();
        let trace = Trace::new(tone, fs, 0.0).unwrap();
        let s = czt_spectrum(&trace, 100.0, 1000.0, 128).unwrap();
        assert_eq!(s.f_start_hz(), 100.0);
        assert!((s.f_step_hz() - 7.03125).abs() < 1e-12);
        let mags = s.magnitudes();
        let k = (0..mags.len())
            .max_by(|&a, &b| mags[a].total_cmp(&mags[b]))
            .unwrap();
        assert!((s.frequency(k) - 500.0).abs() <= s.f_step_hz());

        // Band away from the tone: only leakage remains. The DFT bins inside
        // 2000-3000 Hz bound the level from the same DTFT.
        let far = czt_spectrum(&trace, 2000.0, 3000.0, 64).unwrap();
        let peak = mags[k];
        let far_max = far.magnitudes().into_iter().fold(0.0, f64::max);
        assert!(far_max < peak * 0.02, "{far_max} vs {peak}");

        let zero = Trace::new(vec![0.0; 16], fs, 0.0).unwrap();
        assert!(czt_spectrum(&zero, 0.0, 4000.0, 16)
            .unwrap()
            .bins()
            .iter()
            .all(|c| c.norm() == 0.0));
        assert!(czt_spectrum(&zero, 0.0, 4001.0, 16).is_err());
    }
}
