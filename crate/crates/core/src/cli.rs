//! Command-line front end.
//!
//! Every subcommand writes plain data (CSV or JSON) to `--output` or stdout;
//! human-readable summaries go to stderr. Exit status is 0 on success, 1 on
//! runtime failure and 2 on usage errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analysis::{
    fft_spectrum_at_step, padded_fft_spectrum, resolvability_scan, ResolvabilityCurve,
};
use crate::bench::{resolution_grid, run_bench, BenchConfig, Method};
use crate::czt::czt_spectrum;
use crate::error::Error;
use crate::numerics::{to_db, Spectrum, Trace};
use crate::signals::{
    add_white_noise, gen_thz_pulse, gen_two_tone, read_trace_csv, write_trace_to, Echo, PulseModel,
    ThzPulseSpec, TwoToneSpec,
};
use crate::zoomfft::{zoom_fft, EdgeMode, ZoomFftPlan, ZoomOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "spectral-kit",
    version,
    about = "Zero-padded FFT, Zoom FFT and chirp-z spectra of sampled traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute one spectrum of a trace.
    Transform(TransformArgs),
    /// Two-tone resolvability sweep, padded FFT against chirp-z.
    Twotone(TwotoneArgs),
    /// Time the transforms across a sweep of target resolutions.
    Bench(BenchArgs),
    /// Write a synthetic trace as CSV.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Synth {
    Thz,
    Twotone,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TransformMethod {
    Fft,
    Zoomfft,
    Czt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Edges {
    Full,
    Periodic,
    Linear,
    LinearTrim,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Model {
    GaussianDerivative,
    DoubleExponential,
}

#[derive(Debug, Args)]
struct Source {
    /// Trace CSV (`time_s,amplitude`).
    #[arg(long, conflicts_with = "synth")]
    input: Option<PathBuf>,
    /// Use a built-in synthetic trace instead of a file.
    #[arg(long, value_enum)]
    synth: Option<Synth>,
    /// Keep only the first N samples.
    #[arg(long)]
    samples: Option<usize>,
    /// Standard deviation of added white Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct Output {
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum)]
    method: TransformMethod,
    /// Band start in Hz (czt, zoomfft; crops fft output).
    #[arg(long)]
    f1: Option<f64>,
    /// Band end in Hz.
    #[arg(long)]
    f2: Option<f64>,
    /// Chirp-z output points.
    #[arg(long, conflicts_with = "step")]
    points: Option<usize>,
    /// Chirp-z step in Hz; sets points to ceil((f2 - f1) / step).
    #[arg(long)]
    step: Option<f64>,
    /// Zero-pad the FFT so its bin spacing is at most this many Hz.
    #[arg(long, conflicts_with = "fft_len")]
    pad_to_step: Option<f64>,
    /// Total FFT length (fft) or minimum short-FFT length (zoomfft).
    #[arg(long)]
    fft_len: Option<usize>,
    #[arg(long)]
    decimation: Option<usize>,
    #[arg(long, default_value_t = 101)]
    taps: usize,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long, value_enum, default_value_t = Edges::Full)]
    edges: Edges,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct TwotoneArgs {
    #[arg(long, default_value_t = 8000.0)]
    fs: f64,
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[arg(long, default_value_t = 100.0)]
    f1: f64,
    #[arg(long, default_value_t = 1000.0)]
    f2: f64,
    /// Chirp-z points over the band.
    #[arg(long, default_value_t = 128)]
    points: usize,
    /// Explicit separations in Hz; overrides the start/stop/step grid.
    #[arg(long, value_delimiter = ',')]
    separations: Vec<f64>,
    #[arg(long, default_value_t = 10.0)]
    sep_start: f64,
    #[arg(long, default_value_t = 200.0)]
    sep_stop: f64,
    #[arg(long, default_value_t = 5.0)]
    sep_step: f64,
    /// Amplitude of the upper tone relative to the lower one.
    #[arg(long, default_value_t = 1.0)]
    amp_b: f64,
    /// Phase of the upper tone in radians.
    #[arg(long, default_value_t = 0.0)]
    phase_b: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_delimiter = ',', default_value = "fft,czt,zoomfft")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 20e9)]
    res_start: f64,
    #[arg(long, default_value_t = 0.5e9)]
    res_step: f64,
    #[arg(long, default_value_t = 30)]
    res_count: usize,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    warmup: u64,
    #[arg(long, default_value_t = 0.0)]
    f1: f64,
    #[arg(long, default_value_t = 2.5e12)]
    f2: f64,
    #[arg(long, default_value_t = 101)]
    taps: usize,
    /// Include plan construction in the timed region.
    #[arg(long)]
    include_plan: bool,
    /// Do not pin the timing thread to a core.
    #[arg(long)]
    no_pin: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value_t = Synth::Thz)]
    kind: Synth,
    #[arg(long)]
    fs: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Pulse width in seconds.
    #[arg(long)]
    width: Option<f64>,
    /// Pulse centre time in seconds.
    #[arg(long)]
    center: Option<f64>,
    #[arg(long, value_enum, default_value_t = Model::GaussianDerivative)]
    model: Model,
    /// Echo as `delay_s:relative_amplitude`; repeatable.
    #[arg(long, value_parser = parse_echo)]
    echo: Vec<Echo>,
    #[arg(long, default_value_t = 475.0)]
    fa: f64,
    #[arg(long, default_value_t = 525.0)]
    fb: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_echo(s: &str) -> std::result::Result<Echo, String> {
    let (d, a) = s
        .split_once(':')
        .ok_or("expected delay_s:relative_amplitude")?;
    let delay_s = d
        .trim()
        .parse()
        .map_err(|e| format!("bad delay '{d}': {e}"))?;
    let relative_amplitude = a
        .trim()
        .parse()
        .map_err(|e| format!("bad amplitude '{a}': {e}"))?;
    Ok(Echo {
        delay_s,
        relative_amplitude,
    })
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Transform(a) => cmd_transform(a, stdout, stderr),
        Command::Twotone(a) => cmd_twotone(a, stdout, stderr),
        Command::Bench(a) => cmd_bench(a, stdout, stderr),
        Command::Gen(a) => cmd_gen(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(
                stderr,
                "error: {msg}\n\nFor more information, try '--help'."
            );
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn load_trace(src: &Source) -> CliResult<Trace> {
    if !(src.noise.is_finite() && src.noise >= 0.0) {
        return usage(format!(
            "--noise must be a non-negative number, got {}",
            src.noise
        ));
    }
    let trace = match (&src.input, src.synth) {
        (Some(path), _) => read_trace_csv(path)?,
        (None, Some(Synth::Thz)) => gen_thz_pulse(&ThzPulseSpec::default())?,
        (None, Some(Synth::Twotone)) => gen_two_tone(&TwoToneSpec::new(475.0, 525.0, 8000.0, 128))?,
        (None, None) => return usage("one of --input or --synth is required"),
    };
    let trace = match src.samples {
        Some(n) if n == 0 || n > trace.len() => {
            return usage(format!("--samples must be in 1..={}, got {n}", trace.len()));
        }
        Some(n) => trace.truncated(n)?,
        None => trace,
    };
    if src.noise > 0.0 {
        Ok(add_white_noise(&trace, src.noise, src.seed)?)
    } else {
        Ok(trace)
    }
}

fn check_band(f1: f64, f2: f64, fs: f64) -> CliResult<()> {
    if !(f1.is_finite() && f2.is_finite()) || f1 < 0.0 || f1 >= f2 {
        return usage(format!(
            "band must satisfy 0 <= f1 < f2, got f1={f1}, f2={f2}"
        ));
    }
    if f2 > fs / 2.0 {
        return usage(format!(
            "f2={f2} Hz exceeds the Nyquist frequency {} Hz",
            fs / 2.0
        ));
    }
    Ok(())
}

fn required_band(f1: Option<f64>, f2: Option<f64>, fs: f64, what: &str) -> CliResult<(f64, f64)> {
    match (f1, f2) {
        (Some(a), Some(b)) => check_band(a, b, fs).map(|_| (a, b)),
        _ => usage(format!("--method {what} needs --f1 and --f2")),
    }
}

fn cmd_transform(
    a: TransformArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<()> {
    let trace = load_trace(&a.source)?;
    let fs = trace.sample_rate_hz();
    let spectrum = match a.method {
        TransformMethod::Fft => {
            let full = match (a.pad_to_step, a.fft_len) {
                (Some(step), _) => {
                    if !(step.is_finite() && step > 0.0) {
                        return usage(format!("--pad-to-step must be positive, got {step}"));
                    }
                    fft_spectrum_at_step(&trace, step)?
                }
                (None, Some(len)) => {
                    if len < trace.len() {
                        return usage(format!(
                            "--fft-len {len} is shorter than the trace ({})",
                            trace.len()
                        ));
                    }
                    padded_fft_spectrum(&trace, len)?
                }
                (None, None) => padded_fft_spectrum(&trace, trace.len())?,
            };
            match (a.f1, a.f2) {
                (None, None) => full,
                (f1, f2) => {
                    let (f1, f2) = (f1.unwrap_or(0.0), f2.unwrap_or(fs / 2.0));
                    check_band(f1, f2, fs)?;
                    crop(&full, f1, f2)?
                }
            }
        }
        TransformMethod::Czt => {
            let (f1, f2) = required_band(a.f1, a.f2, fs, "czt")?;
            let m = match (a.points, a.step) {
                (Some(m), _) => m,
                (None, Some(step)) if step.is_finite() && step > 0.0 => {
                    ((f2 - f1) / step).ceil() as usize
                }
                (None, Some(step)) => return usage(format!("--step must be positive, got {step}")),
                (None, None) => return usage("--method czt needs --points or --step"),
            };
            if m < 2 {
                return usage(format!("--points must be at least 2, got {m}"));
            }
            czt_spectrum(&trace, f1, f2, m)?
        }
        TransformMethod::Zoomfft => {
            let (f1, f2) = required_band(a.f1, a.f2, fs, "zoomfft")?;
            let opts = ZoomOptions {
                decimation: a.decimation,
                n_taps: a.taps,
                cutoff_hz: a.cutoff,
                fft_len: a.fft_len,
                edges: match a.edges {
                    Edges::Full => EdgeMode::Full,
                    Edges::Periodic => EdgeMode::Periodic,
                    Edges::Linear => EdgeMode::Linear {
                        trim_transient: false,
                    },
                    Edges::LinearTrim => EdgeMode::Linear {
                        trim_transient: true,
                    },
                },
            };
            let plan = ZoomFftPlan::new(f1, f2, fs, &opts)?;
            let _ = writeln!(
                stderr,
                "zoomfft: D={}, taps={}, cutoff={} Hz, group delay={} samples",
                plan.decimation(),
                plan.filter_taps().len(),
                plan.cutoff_hz(),
                plan.group_delay_samples()
            );
            zoom_fft(&trace, &plan)?
        }
    };
    let body = match a.out.format {
        Format::Csv => spectrum_csv(&spectrum),
        Format::Json => spectrum_json(&spectrum),
    };
    emit(a.out.output.as_deref(), stdout, &body)?;
    Ok(())
}

/// Bins of `s` with frequencies inside `[f1, f2]`.
fn crop(s: &Spectrum, f1: f64, f2: f64) -> crate::error::Result<Spectrum> {
    let tol = s.f_step_hz() * 1e-9;
    let lo = (0..s.len())
        .find(|&k| s.frequency(k) >= f1 - tol)
        .unwrap_or(s.len());
    let hi = (0..s.len())
        .rev()
        .find(|&k| s.frequency(k) <= f2 + tol)
        .map_or(0, |k| k + 1);
    if lo >= hi {
        return Err(Error::InvalidArgument(format!(
            "no bins inside [{f1}, {f2}] Hz"
        )));
    }
    s.slice(lo..hi)
}

pub fn spectrum_csv(s: &Spectrum) -> String {
    let mut out = String::from("frequency_hz,re,im,magnitude_db\n");
    for (k, z) in s.bins().iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            s.frequency(k),
            z.re,
            z.im,
            to_db(z.norm())
        ));
    }
    out
}

fn spectrum_json(s: &Spectrum) -> String {
    let value = json!({
        "f_start_hz": s.f_start_hz(),
        "f_step_hz": s.f_step_hz(),
        "source_n": s.source_n(),
        "frequency_hz": (0..s.len()).map(|k| s.frequency(k)).collect::<Vec<_>>(),
        "re": s.bins().iter().map(|z| z.re).collect::<Vec<_>>(),
        "im": s.bins().iter().map(|z| z.im).collect::<Vec<_>>(),
        "magnitude_db": s.magnitudes_db(),
    });
    serde_json::to_string_pretty(&value).expect("plain data")
}

fn cmd_twotone(a: TwotoneArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    if !(a.fs.is_finite() && a.fs > 0.0) {
        return usage(format!("--fs must be positive, got {}", a.fs));
    }
    check_band(a.f1, a.f2, a.fs)?;
    if a.points < 2 {
        return usage(format!("--points must be at least 2, got {}", a.points));
    }
    let seps = if a.separations.is_empty() {
        if !(a.sep_step > 0.0 && a.sep_start >= 0.0 && a.sep_stop >= a.sep_start) {
            return usage(
                "separation grid needs 0 <= --sep-start <= --sep-stop and --sep-step > 0",
            );
        }
        let count = ((a.sep_stop - a.sep_start) / a.sep_step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| a.sep_start + i as f64 * a.sep_step)
            .collect()
    } else {
        a.separations.clone()
    };
    let mut base = TwoToneSpec::new(a.f1, a.f2, a.fs, a.n);
    base.amp_b = a.amp_b;
    base.phase_b = a.phase_b;
    let curve = resolvability_scan(&base, &seps, (a.f1, a.f2), a.points)?;

    let fmt_sep = |s: Option<f64>| s.map_or("none".to_string(), |v| format!("{v} Hz"));
    let _ = writeln!(
        stderr,
        "padded fft ({} points, {:.4} Hz step): min resolved separation {}",
        curve.fft_len,
        curve.fft_step_hz,
        fmt_sep(curve.min_resolved_sep_fft_hz)
    );
    let _ = writeln!(
        stderr,
        "czt ({} points, {:.4} Hz step): min resolved separation {}",
        curve.czt_points,
        curve.czt_step_hz,
        fmt_sep(curve.min_resolved_sep_czt_hz)
    );

    let body = match a.out.format {
        Format::Csv => curve_csv(&curve),
        Format::Json => serde_json::to_string_pretty(&curve).expect("plain data"),
    };
    emit(a.out.output.as_deref(), stdout, &body)?;
    Ok(())
}

pub fn curve_csv(c: &ResolvabilityCurve) -> String {
    let mut out = String::from("separation_hz,dip_db_fft,resolved_fft,dip_db_czt,resolved_czt\n");
    for i in 0..c.separations_hz.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            c.separations_hz[i],
            c.dip_db_fft[i],
            c.resolved_fft[i],
            c.dip_db_czt[i],
            c.resolved_czt[i]
        ));
    }
    out
}

fn cmd_bench(a: BenchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let methods = a
        .methods
        .iter()
        .map(|m| m.parse::<Method>())
        .collect::<crate::error::Result<Vec<_>>>()
        .or_else(|e| usage(e.to_string()))?;
    if methods.is_empty() {
        return usage("--methods is empty");
    }
    if a.res_count == 0 || !(a.res_start > 0.0) || !(a.res_step > 0.0) {
        return usage("resolution grid needs --res-start > 0, --res-step > 0 and --res-count >= 1");
    }
    let grid = resolution_grid(a.res_start, a.res_step, a.res_count);
    if grid.last().is_some_and(|&r| r <= 0.0) {
        return usage(format!(
            "resolution grid reaches {} Hz; reduce --res-count or --res-step",
            grid[grid.len() - 1]
        ));
    }
    let trace = if a.source.input.is_none() && a.source.synth.is_none() {
        gen_thz_pulse(&ThzPulseSpec::default())?
    } else {
        load_trace(&a.source)?
    };
    check_band(a.f1, a.f2, trace.sample_rate_hz())?;
    let config = BenchConfig {
        methods,
        resolutions_hz: grid,
        repetitions: a.reps as usize,
        warmup: a.warmup as usize,
        trace,
        band: (a.f1, a.f2),
        zoom_taps: a.taps,
        include_plan: a.include_plan,
        pin_core: !a.no_pin,
    };
    let report = run_bench(&config)?;
    let _ = writeln!(
        stderr,
        "{}\nnormalized mean time ({})",
        report.table(),
        report.environment
    );
    let body = match a.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    emit(a.output.as_deref(), stdout, &body)?;
    Ok(())
}

fn cmd_gen(a: GenArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if !(a.noise.is_finite() && a.noise >= 0.0) {
        return usage(format!(
            "--noise must be a non-negative number, got {}",
            a.noise
        ));
    }
    let trace = match a.kind {
        Synth::Thz => {
            let d = ThzPulseSpec::default();
            gen_thz_pulse(&ThzPulseSpec {
                pulse_width_s: a.width.unwrap_or(d.pulse_width_s),
                center_time_s: a.center.unwrap_or(d.center_time_s),
                sample_rate_hz: a.fs.unwrap_or(d.sample_rate_hz),
                n: a.n.unwrap_or(d.n),
                model: match a.model {
                    Model::GaussianDerivative => PulseModel::GaussianDerivative,
                    Model::DoubleExponential => PulseModel::DoubleExponential,
                },
                echoes: a.echo.clone(),
                ..d
            })?
        }
        Synth::Twotone => gen_two_tone(&TwoToneSpec::new(
            a.fa,
            a.fb,
            a.fs.unwrap_or(8000.0),
            a.n.unwrap_or(128),
        ))?,
    };
    let trace = if a.noise > 0.0 {
        add_white_noise(&trace, a.noise, a.seed)?
    } else {
        trace
    };
    let mut buf = Vec::new();
    write_trace_to(&trace, &mut buf).expect("writing to memory");
    emit(
        a.output.as_deref(),
        stdout,
        &String::from_utf8(buf).expect("ascii"),
    )?;
    Ok(())
}

fn emit(path: Option<&Path>, stdout: &mut dyn Write, body: &str) -> crate::error::Result<()> {
    match path {
        Some(p) => {
            let io = |source| Error::Io {
                path: p.to_path_buf(),
                source,
            };
            let mut w = BufWriter::new(File::create(p).map_err(io)?);
            w.write_all(body.as_bytes()).map_err(io)?;
            w.flush().map_err(io)
        }
        None => stdout
            .write_all(body.as_bytes())
            .map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}
