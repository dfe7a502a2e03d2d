//! Timing harness for the three spectrum routes across a sweep of target
//! plotting resolutions.
//!
//! Each grid point is sized first (a pure function of method, trace and
//! resolution), then run `warmup` times untimed and `repetitions` times
//! timed, one call per sample of the monotonic clock. All workloads of a
//! sweep are timed in interleaved blocks spread over the whole run. Means are
//! normalized to the first grid point of each method.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::czt::{czt_params_for_band, CztPlan};
use crate::error::{Error, Result};
use crate::numerics::{next_pow2, zero_pad, FftPlan, Trace};
use crate::resolution::{ceil_tolerant, zeros_for_resolution};
use crate::zoomfft::{default_decimation, ZoomFftPlan, ZoomOptions, ZoomRunner};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fft,
    Ifft,
    Zoomfft,
    Czt,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Fft => "fft",
            Method::Ifft => "ifft",
            Method::Zoomfft => "zoomfft",
            Method::Czt => "czt",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fft" => Ok(Method::Fft),
            "ifft" => Ok(Method::Ifft),
            "zoomfft" | "zoom" => Ok(Method::Zoomfft),
            "czt" => Ok(Method::Czt),
            other => Err(Error::invalid(format!(
                "unknown method '{other}' (expected fft, ifft, zoomfft or czt)"
            ))),
        }
    }
}

/// Asymptotic operation count used for the theoretical overlay.
///
/// `n` is the FFT length for `fft`/`ifft`, the full-rate equivalent length
/// for `zoomfft` (cost `(n/2d) log2(n/d)`), and the input length for `czt`
/// (cost `max(n, m) log2 max(n, m)`).
pub fn theoretical_cost(method: Method, n: usize, d: usize, m: usize) -> Result<f64> {
    if n < 2 || d < 1 || m < 1 {
        return Err(Error::invalid(format!(
            "theoretical cost needs n >= 2, d >= 1, m >= 1 (got n={n}, d={d}, m={m})"
        )));
    }
    let nlogn = |k: f64| k * k.log2();
    Ok(match method {
        Method::Fft | Method::Ifft => nlogn(n as f64),
        Method::Zoomfft => {
            if n < d {
                return Err(Error::invalid(format!(
                    "zoom cost needs n >= d (n={n}, d={d})"
                )));
            }
            let short = n as f64 / d as f64;
            short / 2.0 * short.log2()
        }
        Method::Czt => nlogn(n.max(m) as f64),
    })
}

/// Transform sizes chosen for one method at one target resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sizing {
    pub method: Method,
    pub resolution_hz: f64,
    /// FFT length for fft/ifft, chirp-z points for czt, short-FFT length
    /// for zoomfft.
    pub n_points_used: usize,
    pub decimation: usize,
    /// Plotting step actually achieved.
    pub achieved_step_hz: f64,
    pub theoretical_cost: f64,
}

/// Sizes `method` so its plotting step is at most `resolution_hz`.
///
/// The FFT pads to `N + x` zeros and then up to the next power of two; the
/// chirp-z transform spreads `ceil((f2 - f1) / res)` points over the band; the
/// Zoom FFT decimates by the default factor and pads the short FFT.
pub fn size_for(
    method: Method,
    trace: &Trace,
    band: (f64, f64),
    resolution_hz: f64,
) -> Result<Sizing> {
    let fs = trace.sample_rate_hz();
    let n = trace.len();
    let (f1, f2) = band;
    if !(resolution_hz.is_finite() && resolution_hz > 0.0) {
        return Err(Error::invalid(format!(
            "resolution must be positive, got {resolution_hz}"
        )));
    }
    let bound = |limit: f64, what: &str| {
        Error::invalid(format!(
            "{method} cannot reach {resolution_hz} Hz: {what} bound is {limit} Hz"
        ))
    };
    match method {
        Method::Fft | Method::Ifft => {
            let zeros = zeros_for_resolution(fs, n, resolution_hz)
                .map_err(|_| bound(fs / n as f64, "coarsest unpadded step"))?;
            let len = next_pow2(n + zeros)?;
            Ok(Sizing {
                method,
                resolution_hz,
                n_points_used: len,
                decimation: 1,
                achieved_step_hz: fs / len as f64,
                theoretical_cost: theoretical_cost(method, len.max(2), 1, 1)?,
            })
        }
        Method::Czt => {
            let width = f2 - f1;
            if resolution_hz > width / 2.0 {
                return Err(bound(width / 2.0, "two-point band"));
            }
            let m = ceil_tolerant(width / resolution_hz) as usize;
            Ok(Sizing {
                method,
                resolution_hz,
                n_points_used: m,
                decimation: 1,
                achieved_step_hz: width / m as f64,
                theoretical_cost: theoretical_cost(method, n.max(2), 1, m)?,
            })
        }
        Method::Zoomfft => {
            let d = default_decimation(f1, f2, fs);
            let rate = fs / d as f64;
            let decimated = (n / d).max(1);
            if resolution_hz > rate / decimated as f64 * (1.0 + 1e-12) {
                return Err(bound(
                    rate / decimated as f64,
                    "coarsest unpadded zoom step",
                ));
            }
            let len = next_pow2(decimated.max(ceil_tolerant(rate / resolution_hz) as usize))?;
            Ok(Sizing {
                method,
                resolution_hz,
                n_points_used: len,
                decimation: d,
                achieved_step_hz: rate / len as f64,
                theoretical_cost: theoretical_cost(method, (len * d).max(2), d, 1)?,
            })
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    /// Sweep grid; the first entry is the normalization baseline.
    pub resolutions_hz: Vec<f64>,
    pub repetitions: usize,
    pub warmup: usize,
    pub trace: Trace,
    /// Band for the chirp-z and Zoom FFT routes.
    pub band: (f64, f64),
    pub zoom_taps: usize,
    /// Time plan construction along with the transform.
    pub include_plan: bool,
    /// Pin the timing thread to the core it starts on (Linux only).
    pub pin_core: bool,
}

impl BenchConfig {
    /// Fig.-9 style sweep: 0.5 GHz steps downward from 20 GHz.
    pub fn thz_sweep(trace: Trace, methods: Vec<Method>, count: usize) -> Self {
        BenchConfig {
            methods,
            resolutions_hz: resolution_grid(20e9, 0.5e9, count),
            repetitions: 10_000,
            warmup: 100,
            trace,
            band: (0.0, 2.5e12),
            zoom_taps: 101,
            include_plan: false,
            pin_core: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("no methods selected"));
        }
        if self.resolutions_hz.is_empty() {
            return Err(Error::invalid("empty resolution grid"));
        }
        if self.repetitions < 1 {
            return Err(Error::invalid("repetitions must be at least 1"));
        }
        if self.warmup < 1 {
            return Err(Error::invalid("warmup must be at least 1"));
        }
        if self.resolutions_hz.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid(
                "resolution grid must be strictly decreasing",
            ));
        }
        let (f1, f2) = self.band;
        let nyquist = self.trace.sample_rate_hz() / 2.0;
        if !(f1 >= 0.0 && f1 < f2 && f2 <= nyquist) {
            return Err(Error::invalid(format!(
                "band [{f1}, {f2}] Hz must satisfy 0 <= f1 < f2 <= f_s/2 = {nyquist}"
            )));
        }
        Ok(())
    }
}

/// `count` resolutions from `start` downward in steps of `step`.
pub fn resolution_grid(start_hz: f64, step_hz: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start_hz - i as f64 * step_hz).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimingStats {
    pub mean_s: f64,
    pub median_s: f64,
    pub p95_s: f64,
}

impl TimingStats {
    fn from_samples(mut samples: Vec<f64>) -> Self {
        let mean_s = samples.iter().sum::<f64>() / samples.len() as f64;
        samples.sort_by(f64::total_cmp);
        let at = |q: f64| samples[((samples.len() - 1) as f64 * q).round() as usize];
        TimingStats {
            mean_s,
            median_s: at(0.5),
            p95_s: at(0.95),
        }
    }
}

/// Every workload of a sweep is timed in this many blocks; one round visits
/// all workloads once, so drifts in machine load reach all of them alike.
const ROUNDS: usize = 50;

/// Times every workload `repetitions` times, one call per clock sample,
/// interleaving the workloads in `ROUNDS` blocks after `warmup` untimed calls
/// each.
fn time_interleaved(
    calls: &mut [&mut dyn FnMut()],
    warmup: usize,
    repetitions: usize,
) -> Vec<TimingStats> {
    for call in calls.iter_mut() {
        for _ in 0..warmup {
            call();
        }
    }
    let mut samples: Vec<Vec<f64>> = calls
        .iter()
        .map(|_| Vec::with_capacity(repetitions))
        .collect();
    let rounds = ROUNDS.min(repetitions);
    for round in 0..rounds {
        let block = repetitions / rounds + usize::from(round < repetitions % rounds);
        for (call, out) in calls.iter_mut().zip(&mut samples) {
            for _ in 0..block {
                let start = Instant::now();
                call();
                out.push(start.elapsed().as_secs_f64());
            }
        }
    }
    samples.into_iter().map(TimingStats::from_samples).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchPoint {
    pub resolution_hz: f64,
    pub n_points_used: usize,
    pub achieved_step_hz: f64,
    pub mean_time_s: f64,
    pub median_time_s: f64,
    pub p95_time_s: f64,
    pub normalized_time: f64,
    pub theoretical_cost: f64,
    pub normalized_theoretical_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodCurve {
    pub method: Method,
    pub points: Vec<BenchPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub v: u32,
    pub baseline_resolution_hz: f64,
    pub environment: String,
    pub repetitions: usize,
    pub warmup: usize,
    pub curves: Vec<MethodCurve>,
}

impl BenchReport {
    pub fn curve(&self, method: Method) -> Option<&MethodCurve> {
        self.curves.iter().find(|c| c.method == method)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    /// `resolution_GHz,method,normalized_time,theoretical_cost`, the cost
    /// normalized to the baseline so both curves share an axis.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("resolution_GHz,method,normalized_time,theoretical_cost\n");
        for curve in &self.curves {
            for p in &curve.points {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    p.resolution_hz / 1e9,
                    curve.method,
                    p.normalized_time,
                    p.normalized_theoretical_cost
                ));
            }
        }
        out
    }

    /// Plain-text table of normalized times, one column per method.
    pub fn table(&self) -> String {
        let mut out = format!("{:>10}", "res_GHz");
        for c in &self.curves {
            out.push_str(&format!(" {:>12}", c.method.to_string()));
        }
        out.push('\n');
        let rows = self.curves.first().map_or(0, |c| c.points.len());
        for i in 0..rows {
            out.push_str(&format!(
                "{:>10.3}",
                self.curves[0].points[i].resolution_hz / 1e9
            ));
            for c in &self.curves {
                out.push_str(&format!(" {:>12.4}", c.points[i].normalized_time));
            }
            out.push('\n');
        }
        out
    }
}

/// One timed workload with everything outside the timed call prepared.
enum Workload {
    Fft {
        plan: FftPlan,
        input: Vec<Complex64>,
    },
    Ifft {
        plan: FftPlan,
        input: Vec<Complex64>,
    },
    Czt {
        plan: CztPlan,
        input: Vec<Complex64>,
    },
    Zoom {
        runner: ZoomRunner,
    },
}

struct Prepared {
    workload: Workload,
    trace: Trace,
    sizing: Sizing,
    band: (f64, f64),
    zoom_taps: usize,
}

impl Prepared {
    fn new(config: &BenchConfig, sizing: Sizing) -> Result<Self> {
        let trace = &config.trace;
        let x = trace.to_complex();
        let workload = match sizing.method {
            Method::Fft => Workload::Fft {
                plan: FftPlan::new(sizing.n_points_used)?,
                input: x,
            },
            Method::Ifft => {
                let plan = FftPlan::new(sizing.n_points_used)?;
                let mut spectrum = zero_pad(&x, sizing.n_points_used)?;
                plan.forward(&mut spectrum);
                Workload::Ifft {
                    plan,
                    input: spectrum,
                }
            }
            Method::Czt => {
                let params = czt_params_for_band(
                    config.band.0,
                    config.band.1,
                    trace.sample_rate_hz(),
                    sizing.n_points_used,
                )?;
                Workload::Czt {
                    plan: CztPlan::new(x.len(), &params)?,
                    input: x,
                }
            }
            Method::Zoomfft => Workload::Zoom {
                runner: ZoomRunner::new(
                    zoom_plan(config.band, trace, &sizing, config.zoom_taps)?,
                    trace.len(),
                )?,
            },
        };
        Ok(Prepared {
            workload,
            trace: trace.clone(),
            sizing,
            band: config.band,
            zoom_taps: config.zoom_taps,
        })
    }

    fn run(&self) {
        match &self.workload {
            Workload::Fft { plan, input } => {
                let mut buf = zero_pad(input, plan.len()).expect("sized");
                plan.forward(&mut buf);
                black_box(buf);
            }
            Workload::Ifft { plan, input } => {
                let mut buf = input.clone();
                plan.inverse(&mut buf);
                black_box(buf);
            }
            Workload::Czt { plan, input } => {
                black_box(plan.process(input).expect("sized"));
            }
            Workload::Zoom { runner } => {
                black_box(runner.run(&self.trace).expect("sized"));
            }
        }
    }

    fn run_with_plan(&self) {
        let trace = &self.trace;
        let n = self.sizing.n_points_used;
        match &self.workload {
            Workload::Fft { input, .. } => {
                let plan = FftPlan::new(n).expect("sized");
                let mut buf = zero_pad(input, n).expect("sized");
                plan.forward(&mut buf);
                black_box(buf);
            }
            Workload::Ifft { input, .. } => {
                let plan = FftPlan::new(n).expect("sized");
                let mut buf = input.clone();
                plan.inverse(&mut buf);
                black_box(buf);
            }
            Workload::Czt { input, .. } => {
                let params =
                    czt_params_for_band(self.band.0, self.band.1, trace.sample_rate_hz(), n)
                        .expect("sized");
                let plan = CztPlan::new(input.len(), &params).expect("sized");
                black_box(plan.process(input).expect("sized"));
            }
            Workload::Zoom { .. } => {
                let plan =
                    zoom_plan(self.band, trace, &self.sizing, self.zoom_taps).expect("sized");
                let runner = ZoomRunner::new(plan, trace.len()).expect("sized");
                black_box(runner.run(trace).expect("sized"));
            }
        }
    }
}

fn zoom_plan(band: (f64, f64), trace: &Trace, sizing: &Sizing, taps: usize) -> Result<ZoomFftPlan> {
    let opts = ZoomOptions {
        decimation: Some(sizing.decimation),
        n_taps: taps,
        fft_len: Some(sizing.n_points_used),
        ..Default::default()
    };
    ZoomFftPlan::new(band.0, band.1, trace.sample_rate_hz(), &opts)
}

/// Runs the sweep. All sizes are validated before any timing starts.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let mut sizings = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let row = config
            .resolutions_hz
            .iter()
            .map(|&res| size_for(method, &config.trace, config.band, res))
            .collect::<Result<Vec<_>>>()?;
        sizings.push(row);
    }

    let prepared = sizings
        .iter()
        .flatten()
        .map(|&sizing| Prepared::new(config, sizing))
        .collect::<Result<Vec<_>>>()?;
    let mut closures: Vec<Box<dyn FnMut() + '_>> = prepared
        .iter()
        .map(|p| -> Box<dyn FnMut() + '_> {
            if config.include_plan {
                Box::new(move || p.run_with_plan())
            } else {
                Box::new(move || p.run())
            }
        })
        .collect();
    let mut calls: Vec<&mut dyn FnMut()> = closures
        .iter_mut()
        .map(|c| &mut **c as &mut dyn FnMut())
        .collect();

    let pinned = config.pin_core && affinity::pin_current();
    let mut stats = time_interleaved(&mut calls, config.warmup, config.repetitions).into_iter();
    let timed: Vec<Vec<(Sizing, TimingStats)>> = sizings
        .iter()
        .map(|row| {
            row.iter()
                .map(|&s| (s, stats.next().expect("one result per workload")))
                .collect()
        })
        .collect();
    let curves = timed
        .into_iter()
        .map(|points| {
            let method = points[0].0.method;
            let (base_time, base_cost) = (points[0].1.mean_s, points[0].0.theoretical_cost);
            let points = points
                .into_iter()
                .map(|(s, t)| BenchPoint {
                    resolution_hz: s.resolution_hz,
                    n_points_used: s.n_points_used,
                    achieved_step_hz: s.achieved_step_hz,
                    mean_time_s: t.mean_s,
                    median_time_s: t.median_s,
                    p95_time_s: t.p95_s,
                    normalized_time: t.mean_s / base_time,
                    theoretical_cost: s.theoretical_cost,
                    normalized_theoretical_cost: s.theoretical_cost / base_cost,
                })
                .collect();
            MethodCurve { method, points }
        })
        .collect();
    if pinned {
        affinity::unpin();
    }

    Ok(BenchReport {
        v: 1,
        baseline_resolution_hz: config.resolutions_hz[0],
        environment: environment(pinned),
        repetitions: config.repetitions,
        warmup: config.warmup,
        curves,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParityReport {
    pub len: usize,
    pub fft: TimingStats,
    pub ifft: TimingStats,
    /// `ifft.mean / fft.mean`.
    pub ratio: f64,
}

/// Forward vs inverse FFT at one length, alternating in `rounds` blocks so
/// slow drifts in machine load hit both directions alike.
pub fn fft_ifft_parity(
    len: usize,
    repetitions: usize,
    warmup: usize,
    rounds: usize,
) -> Result<ParityReport> {
    if repetitions < 1 || rounds < 1 {
        return Err(Error::invalid("repetitions and rounds must be at least 1"));
    }
    let plan = FftPlan::new(len)?;
    let input: Vec<Complex64> = (0..len)
        .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
        .collect();
    let pinned = affinity::pin_current();
    let per_round = repetitions.div_ceil(rounds);
    let (mut fwd, mut inv) = (Vec::new(), Vec::new());
    let mut buf = input.clone();
    for _ in 0..warmup {
        buf.copy_from_slice(&input);
        plan.forward(&mut buf);
        buf.copy_from_slice(&input);
        plan.inverse(&mut buf);
    }
    for _ in 0..rounds {
        for (samples, inverse) in [(&mut fwd, false), (&mut inv, true)] {
            for _ in 0..per_round {
                buf.copy_from_slice(&input);
                let start = Instant::now();
                if inverse {
                    plan.inverse(&mut buf);
                } else {
                    plan.forward(&mut buf);
                }
                black_box(&mut buf);
                samples.push(start.elapsed().as_secs_f64());
            }
        }
    }
    if pinned {
        affinity::unpin();
    }
    let fft = TimingStats::from_samples(fwd);
    let ifft = TimingStats::from_samples(inv);
    Ok(ParityReport {
        len,
        fft,
        ifft,
        ratio: ifft.mean_s / fft.mean_s,
    })
}

fn environment(pinned: bool) -> String {
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!(
        "{}-{}, {cpus} logical cpus, {}, {}",
        std::env::consts::OS,
        std::env::consts::ARCH,
        if pinned {
            "pinned to one core"
        } else {
            "unpinned"
        },
        if cfg!(debug_assertions) {
            "debug build"
        } else {
            "optimized build"
        },
    )
}

#[cfg(target_os = "linux")]
mod affinity {
    use std::cell::RefCell;

    thread_local! {
        static SAVED: RefCell<Option<libc::cpu_set_t>> = const { RefCell::new(None) };
    }

    /// Restricts the calling thread to the CPU it is running on.
    pub fn pin_current() -> bool {
        // SAFETY: cpu_set_t is plain data; the calls only read/write the
        // provided set for the calling thread (pid 0).
        unsafe {
            let cpu = libc::sched_getcpu();
            if cpu < 0 {
                return false;
            }
            let mut old: libc::cpu_set_t = std::mem::zeroed();
            if libc::sched_getaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &mut old) != 0 {
                return false;
            }
            let mut set: libc::cpu_set_t = std::mem::zeroed();
            libc::CPU_SET(cpu as usize, &mut set);
            if libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) != 0 {
                return false;
            }
            SAVED.with(|s| *s.borrow_mut() = Some(old));
        }
        true
    }

    pub fn unpin() {
        SAVED.with(|s| {
            if let Some(old) = s.borrow_mut().take() {
                // SAFETY: restores the mask saved by pin_current.
                unsafe {
                    libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &old);
                }
            }
        });
    }
}

#[cfg(not(target_os = "linux"))]
mod affinity {
    pub fn pin_current() -> bool {
        false
    }

    pub fn unpin() {}
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{gen_thz_pulse, ThzPulseSpec};

    fn thz() -> Trace {
        gen_thz_pulse(&ThzPulseSpec::default()).unwrap()
    }

    #[test]
    fn theoretical_cost_cases() {
        assert_eq!(theoretical_cost(Method::Fft, 1024, 1, 1).unwrap(), 10240.0);
        assert_eq!(
            theoretical_cost(Method::Zoomfft, 1024, 4, 1).unwrap(),
            1024.0
        );
        let want = 500.0 * 500f64.log2();
        assert!((theoretical_cost(Method::Czt, 500, 1, 125).unwrap() - want).abs() < 1e-9);
        assert!(theoretical_cost(Method::Fft, 1, 1, 1).is_err());
        assert!(theoretical_cost(Method::Zoomfft, 16, 0, 1).is_err());
        assert!(theoretical_cost(Method::Czt, 16, 1, 0).is_err());
    }

    #[test]
    fn sizing_is_pure_and_matches_resolution_algebra() {
        let t = thz();
        let band = (0.0, 2.5e12);
        let s = size_for(Method::Fft, &t, band, 20e9).unwrap();
        assert_eq!(s.n_points_used, 512);
        let s = size_for(Method::Fft, &t, band, 2.98e9).unwrap();
        assert_eq!(s.n_points_used, 4096);
        assert!(s.achieved_step_hz <= 2.98e9);
        let s = size_for(Method::Czt, &t, band, 20e9).unwrap();
        assert_eq!(s.n_points_used, 125);
        assert!((s.achieved_step_hz - 20e9).abs() < 1.0);
        let s = size_for(Method::Czt, &t, band, 5.5e9).unwrap();
        assert_eq!(s.n_points_used, 455);
        let s = size_for(Method::Zoomfft, &t, band, 20e9).unwrap();
        assert_eq!((s.decimation, s.n_points_used), (2, 256));
        assert!(s.achieved_step_hz <= 20e9);
        assert_eq!(
            size_for(Method::Zoomfft, &t, band, 7e9).unwrap(),
            size_for(Method::Zoomfft, &t, band, 7e9).unwrap()
        );
    }

    #[test]
    fn unachievable_resolution_names_bound() {
        let err = size_for(Method::Fft, &thz(), (0.0, 2.5e12), 25e9)
            .unwrap_err()
            .to_string();
        assert!(err.contains("2e10") || err.contains("20000000000"), "{err}");
        let mut cfg = BenchConfig::thz_sweep(thz(), vec![Method::Fft], 1);
        cfg.resolutions_hz = vec![25e9];
        assert!(run_bench(&cfg).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = BenchConfig::thz_sweep(thz(), vec![Method::Fft], 2);
        cfg.repetitions = 0;
        assert!(run_bench(&cfg).is_err());
        let mut cfg = BenchConfig::thz_sweep(thz(), vec![], 2);
        assert!(run_bench(&cfg).is_err());
        cfg.methods = vec![Method::Fft];
        cfg.resolutions_hz = vec![10e9, 15e9];
        assert!(run_bench(&cfg).is_err());
    }

    #[test]
    fn single_point_self_normalizes() {
        let mut cfg = BenchConfig::thz_sweep(
            thz(),
            vec![Method::Fft, Method::Czt, Method::Zoomfft, Method::Ifft],
            2,
        );
        cfg.repetitions = 5;
        cfg.warmup = 1;
        let report = run_bench(&cfg).unwrap();
        assert_eq!(report.v, 1);
        for c in &report.curves {
            assert_eq!(c.points[0].normalized_time, 1.0);
            assert_eq!(c.points[0].normalized_theoretical_cost, 1.0);
            assert_eq!(c.points.len(), 2);
        }
        let csv = report.to_csv();
        assert!(csv.starts_with("resolution_GHz,method,normalized_time,theoretical_cost\n"));
        assert_eq!(csv.lines().count(), 1 + 4 * 2);
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json["v"], 1);

        cfg.include_plan = true;
        assert!(run_bench(&cfg).is_ok());
    }

    #[test]
    fn method_parsing() {
        assert_eq!("FFT".parse::<Method>().unwrap(), Method::Fft);
        assert_eq!("zoom".parse::<Method>().unwrap(), Method::Zoomfft);
        assert!("dft".parse::<Method>().is_err());
    }
}
