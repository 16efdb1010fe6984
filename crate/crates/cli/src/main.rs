//! Command-line front end for the simulator.
//!
//! Exit codes are a stable contract: 0 — success, 1 — a session's security
//! verdict came back compromised, 2 — usage or configuration error. Every
//! file-producing command writes a `manifest.json` (tool version, seed,
//! config echo and hash, wall-clock runtime) beside its outputs, and no
//! outputs are written at all when the configuration is rejected.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fiboam::harness::{
    attack_sweep, run_session, run_session_with_events, SweepParameter,
};
use fiboam::parties::Verdict;
use fiboam::spiral::{classify_peaks, SpiralSpectrumConfig};
use fiboam::{ExchangeScheme, FibAlphabet, SessionConfig, SessionReport};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "fiboam",
    version,
    about = "Simulator of quantum key distribution over Fibonacci-valued \
             orbital angular momentum, with golden-angle spiral optics"
)]
struct Cli {
    /// Output directory (default: $FIBOAM_OUT_DIR, else the current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print progress and summary details to stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded session; writes report.json, key.hex and manifest.json.
    Run(RunArgs),
    /// Run a family of sessions over one swept parameter; writes sweep.json
    /// and sweep.csv.
    Sweep(SweepArgs),
    /// Compute a spiral's far-field OAM spectrum; writes spectrum.csv and
    /// peaks.json.
    SpiralSpectrum(SpiralArgs),
    /// Enumerate the two-bit exchange scheme and print what a public-channel
    /// listener can infer from it.
    VerifyScheme(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to a session config (JSON; omitted fields take their defaults).
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the full per-pair event log as events.csv.
    #[arg(long)]
    events: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Path to the base session config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Which knob to sweep.
    #[arg(long, value_enum)]
    parameter: SweepKnob,
    /// Comma-separated values for the swept knob.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Override the base seed; session i then runs at seed + i.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKnob {
    /// Fraction of transit photons the eavesdropper intercepts.
    InterceptRate,
    /// Alphabet size N (values must be powers of two).
    AlphabetSize,
    /// Fraction of kept pairs publicly compared.
    SecurityRate,
    /// Probability-equalizing filters off (0) or on (1).
    Filters,
}

impl From<SweepKnob> for SweepParameter {
    fn from(knob: SweepKnob) -> Self {
        match knob {
            SweepKnob::InterceptRate => SweepParameter::InterceptRate,
            SweepKnob::AlphabetSize => SweepParameter::AlphabetSize,
            SweepKnob::SecurityRate => SweepParameter::SecurityRate,
            SweepKnob::Filters => SweepParameter::Filters,
        }
    }
}

#[derive(Args, Serialize)]
struct SpiralArgs {
    /// Number of spiral points.
    #[arg(long, default_value_t = 2000)]
    particles: usize,
    /// Spiral scale factor a0 in micrometres.
    #[arg(long, default_value_t = 9.28)]
    a0_um: f64,
    /// Source wavelength in nanometres.
    #[arg(long, default_value_t = 405.0)]
    wavelength_nm: f64,
    /// Collection cone half-angle in degrees.
    #[arg(long, default_value_t = 2.0)]
    cone_deg: f64,
    /// Divergence angle: "golden" or a value in degrees.
    #[arg(long, default_value = "golden")]
    alpha: String,
    /// Azimuthal grid samples (must be at least 4 per requested order).
    #[arg(long, default_value_t = 512)]
    n_az: usize,
    /// Radial grid samples.
    #[arg(long, default_value_t = 256)]
    n_radial: usize,
    /// Largest azimuthal order reported.
    #[arg(long, default_value_t = 100)]
    m_max: usize,
    /// Radial-frequency samples in the spectrum quadrature.
    #[arg(long, default_value_t = 256)]
    n_k: usize,
    /// Peak threshold as a fraction of the global maximum.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Also write the field magnitude grid as field.csv.
    #[arg(long)]
    field_csv: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// 1-based Fibonacci index of the smallest alphabet member.
    #[arg(long, default_value_t = 3)]
    n0: usize,
    /// Alphabet size N (a power of two).
    #[arg(long, default_value_t = 8)]
    size: usize,
}

/// Anything that must abort the command with exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<fiboam::Error> for UsageError {
    fn from(err: fiboam::Error) -> Self {
        UsageError(err.to_string())
    }
}

impl From<std::io::Error> for UsageError {
    fn from(err: std::io::Error) -> Self {
        UsageError(err.to_string())
    }
}

impl From<csv::Error> for UsageError {
    fn from(err: csv::Error) -> Self {
        UsageError(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("FIBOAM_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args, &out_dir, cli.verbose),
        Command::Sweep(args) => cmd_sweep(args, &out_dir, cli.verbose),
        Command::SpiralSpectrum(args) => cmd_spiral(args, &out_dir, cli.verbose),
        Command::VerifyScheme(args) => cmd_verify_scheme(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

/// Sidecar written beside every set of outputs. The session report itself is
/// pure data (byte-identical under reruns); run-specific facts like wall-clock
/// time live here instead.
fn write_manifest<T: Serialize>(
    dir: &Path,
    command: &str,
    seed: Option<u64>,
    config_sha256: Option<&str>,
    runtime_ms: u128,
    config: &T,
) -> Result<(), UsageError> {
    let manifest = serde_json::json!({
        "tool": "fiboam",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "config_sha256": config_sha256,
        "runtime_ms": runtime_ms,
        "config": config,
    });
    write_json(&dir.join("manifest.json"), &manifest)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), UsageError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| UsageError(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(fs::write(path, text)?)
}

fn load_config(path: &Path, seed_override: Option<u64>) -> Result<SessionConfig, UsageError> {
    let text = fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    let mut config: SessionConfig = serde_json::from_str(&text)
        .map_err(|e| UsageError(format!("malformed config {}: {e}", path.display())))?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn verdict_str(verdict: Verdict) -> &'static str {
    match verdict {
        Verdict::Clean => "clean",
        Verdict::Compromised => "compromised",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn cmd_run(args: &RunArgs, out_dir: &Path, verbose: bool) -> Result<ExitCode, UsageError> {
    // Parse and validate before touching the output directory, so a rejected
    // config leaves no partial outputs behind.
    let config = load_config(&args.config, args.seed)?;
    let started = Instant::now();
    let (report, events) = if args.events {
        let (report, events) = run_session_with_events(&config)?;
        (report, Some(events))
    } else {
        (run_session(&config)?, None)
    };
    let runtime_ms = started.elapsed().as_millis();

    fs::create_dir_all(out_dir)?;
    write_json(&out_dir.join("report.json"), &report)?;
    fs::write(out_dir.join("key.hex"), format!("{}\n", report.key_hex))?;
    if let Some(events) = &events {
        let mut writer = csv::Writer::from_path(out_dir.join("events.csv"))?;
        for event in events {
            writer.serialize(event)?;
        }
        writer.flush()?;
    }
    write_manifest(
        out_dir,
        "run",
        Some(config.seed),
        Some(&report.config_sha256),
        runtime_ms,
        &config,
    )?;

    if verbose {
        eprintln!(
            "kept {} pairs, {} key events x {} bits, non-adjacency {:.4}, security {}, decoy {}",
            report.kept_after_filters,
            report.key_events,
            report.bits_per_event,
            report.nonadjacent_kept_fraction,
            verdict_str(report.security.verdict),
            verdict_str(report.decoy.verdict),
        );
    }
    println!("verdict: {}", verdict_str(report.verdict));
    Ok(match report.verdict {
        Verdict::Compromised => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    })
}

fn sweep_csv(values: &[f64], reports: &[SessionReport]) -> String {
    let mut csv = String::from(
        "value,seed,emitted_pairs,kept_after_filters,key_events,bits_per_event,key_bits,\
         nonadjacent_fraction,security_overall_fraction,security_interior_fraction,\
         decoy_mean_overlap,verdict\n",
    );
    for (value, report) in values.iter().zip(reports) {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            value,
            report.seed,
            report.emitted_pairs,
            report.kept_after_filters,
            report.key_events,
            report.bits_per_event,
            report.key_bits,
            report.nonadjacent_kept_fraction,
            report.security.overall_fraction,
            report.security.interior_fraction,
            report.decoy.mean_overlap,
            verdict_str(report.verdict),
        )
        .expect("string write");
    }
    csv
}

fn cmd_sweep(args: &SweepArgs, out_dir: &Path, verbose: bool) -> Result<ExitCode, UsageError> {
    let base = load_config(&args.config, args.seed)?;
    let started = Instant::now();
    let reports = attack_sweep(&base, args.parameter.into(), &args.values)?;
    let runtime_ms = started.elapsed().as_millis();

    fs::create_dir_all(out_dir)?;
    write_json(&out_dir.join("sweep.json"), &reports)?;
    fs::write(out_dir.join("sweep.csv"), sweep_csv(&args.values, &reports))?;
    write_manifest(out_dir, "sweep", Some(base.seed), None, runtime_ms, &base)?;

    if verbose {
        for (value, report) in args.values.iter().zip(&reports) {
            eprintln!(
                "value {value}: non-adjacency {:.4}, verdict {}",
                report.nonadjacent_kept_fraction,
                verdict_str(report.verdict),
            );
        }
    }
    println!("sweep: {} sessions", reports.len());
    Ok(ExitCode::SUCCESS)
}

fn cmd_spiral(args: &SpiralArgs, out_dir: &Path, verbose: bool) -> Result<ExitCode, UsageError> {
    let alpha_rad = match args.alpha.as_str() {
        "golden" => None,
        text => Some(
            text.parse::<f64>()
                .map_err(|_| {
                    UsageError(format!(
                        "--alpha must be \"golden\" or an angle in degrees, got {text:?}"
                    ))
                })?
                .to_radians(),
        ),
    };
    let config = SpiralSpectrumConfig {
        n_points: args.particles,
        scale_um: args.a0_um,
        alpha_rad,
        wavelength_um: args.wavelength_nm / 1000.0,
        cone_half_angle_deg: args.cone_deg,
        n_az: args.n_az,
        n_radial: args.n_radial,
        m_max: args.m_max,
        n_k: args.n_k,
    };
    if !(args.threshold > 0.0 && args.threshold <= 1.0) {
        return Err(UsageError(format!(
            "--threshold must be in (0, 1], got {}",
            args.threshold
        )));
    }
    let started = Instant::now();
    let (field, spectrum) = config.compute()?;
    let peaks = classify_peaks(&spectrum, args.threshold);
    let runtime_ms = started.elapsed().as_millis();

    fs::create_dir_all(out_dir)?;
    let mut csv = String::from("m,s_m\n");
    for (m, w) in spectrum.orders.iter().zip(&spectrum.weights) {
        writeln!(csv, "{m},{w}").expect("string write");
    }
    fs::write(out_dir.join("spectrum.csv"), csv)?;
    write_json(&out_dir.join("peaks.json"), &peaks)?;
    if args.field_csv {
        let mut csv = String::from("azimuth_rad,radial_freq_per_um,magnitude\n");
        for j in 0..field.n_az {
            for i in 0..field.n_radial {
                writeln!(
                    csv,
                    "{},{},{}",
                    field.azimuth(j),
                    field.radial_freq(i),
                    field.value(j, i).norm()
                )
                .expect("string write");
            }
        }
        fs::write(out_dir.join("field.csv"), csv)?;
    }
    write_manifest(out_dir, "spiral-spectrum", None, None, runtime_ms, args)?;

    if verbose {
        eprintln!(
            "spectrum over m in [{}, {}], {} peaks above {:.0}% of max",
            -(args.m_max as i64),
            args.m_max,
            peaks.peaks.len(),
            100.0 * args.threshold,
        );
    }
    for peak in &peaks.peaks {
        println!(
            "peak m={} height={:.6e} fibonacci={}",
            peak.order, peak.height, peak.is_fibonacci
        );
    }
    println!("all peaks fibonacci: {}", peaks.all_fibonacci);
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_scheme(args: &VerifyArgs) -> Result<ExitCode, UsageError> {
    let alphabet = FibAlphabet::new(args.n0, args.size)?;
    println!(
        "alphabet: {}",
        alphabet
            .members()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    // Construction enumerates every configuration and proves both directions
    // of the exchange decodable; a violating scheme is rejected here.
    let scheme = ExchangeScheme::new(alphabet)?;
    println!("listener's candidate sets per announced bit pair:");
    for (&(a, b), values) in &scheme.eve_observation_table() {
        println!(
            "  {a}{b} -> {{{}}}",
            values
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    let uniform = scheme.uniform_guess_success();
    let ml = scheme.ml_guess_success();
    println!(
        "uniform-guess success: {}/{} = {:.4}%",
        uniform.numer(),
        uniform.denom(),
        100.0 * *uniform.numer() as f64 / *uniform.denom() as f64
    );
    println!(
        "max-likelihood-guess success: {}/{} = {:.4}%",
        ml.numer(),
        ml.denom(),
        100.0 * *ml.numer() as f64 / *ml.denom() as f64
    );
    Ok(ExitCode::SUCCESS)
}
