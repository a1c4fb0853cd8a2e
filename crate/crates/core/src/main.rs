use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use kerrtap::protocol::{write_records, DEFAULT_CHUNK_SIZE};
use kerrtap::report::{OutputRow, CSV_HEADER};
use kerrtap::verify::run_checks;
use kerrtap::{run_bb84, threshold_alpha, Error, KerrPhase, PolarizationAngle, SimConfig};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

/// Translucent eavesdropping on BB84 with a Kerr-cell Mach-Zehnder probe.
///
/// Angles are in radians unless --degrees is given.
#[derive(Debug, Parser)]
#[command(name = "kerrtap", version)]
struct Cli {
    /// File of `key = value` lines using flag names as keys; flags on the
    /// command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// All probabilities, error rates and informations for one point.
    Analyze(AnalyzeArgs),
    /// CSV of analyze rows over a grid (theta outer, phi middle, alpha inner).
    Sweep(SweepArgs),
    /// Monte Carlo run of the protocol; prints run statistics as JSON.
    Simulate(SimulateArgs),
    /// Smallest tapped fraction at which the link is no longer safe.
    Threshold(ThresholdArgs),
    /// Closed forms against the interferometer simulation plus reference values.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct AngleUnits {
    /// Read angle arguments in degrees.
    #[arg(long)]
    degrees: bool,
}

impl AngleUnits {
    fn to_radians(&self, x: f64) -> f64 {
        if self.degrees {
            x.to_radians()
        } else {
            x
        }
    }

    /// `value` converted to radians, or `default` (already in radians).
    fn angle_or(&self, value: Option<f64>, default: f64) -> f64 {
        value.map_or(default, |v| self.to_radians(v))
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct AnalyzeArgs {
    /// Alice's polarization relative to Eve's H axis [default: pi/8]
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Kerr phase [default: pi]
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Fraction of pulses Eve taps.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[command(flatten)]
    units: AngleUnits,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

/// `START` or `START:STOP:COUNT` (inclusive, evenly spaced).
#[derive(Debug, Clone, PartialEq)]
struct Range {
    start: f64,
    stop: f64,
    count: usize,
}

impl Range {
    fn points(&self, scale: impl Fn(f64) -> f64) -> Vec<f64> {
        if self.count == 1 {
            return vec![scale(self.start)];
        }
        (0..self.count)
            .map(|k| {
                let t = k as f64 / (self.count - 1) as f64;
                scale(self.start + t * (self.stop - self.start))
            })
            .collect()
    }
}

fn parse_range(s: &str) -> Result<Range, String> {
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{x}` is not a finite number"))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => {
            let v = num(single)?;
            Ok(Range {
                start: v,
                stop: v,
                count: 1,
            })
        }
        [start, stop, count] => {
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("`{count}` is not a point count"))?;
            if count == 0 {
                return Err("point count must be at least 1".into());
            }
            Ok(Range {
                start: num(start)?,
                stop: num(stop)?,
                count,
            })
        }
        _ => Err("expected START or START:STOP:COUNT".into()),
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct SweepArgs {
    /// START or START:STOP:COUNT [default: pi/8]
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    theta: Option<Range>,
    /// START or START:STOP:COUNT [default: pi]
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    phi: Option<Range>,
    /// START or START:STOP:COUNT
    #[arg(long, value_parser = parse_range, default_value = "0:1:101")]
    alpha: Range,
    #[command(flatten)]
    units: AngleUnits,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct SimulateArgs {
    /// Number of pulses Alice sends.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Kerr phase [default: pi]
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Orientation of Eve's H axis in the lab frame [default: pi/8]
    #[arg(long, allow_negative_numbers = true)]
    eve_frame: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bit flip probability on pulses Eve does not tap.
    #[arg(long, default_value_t = 0.0)]
    flip_rate: f64,
    /// Fraction of the sifted key disclosed for QBER estimation.
    #[arg(long, default_value_t = 0.5)]
    sample_fraction: f64,
    /// Pulses per RNG stream.
    #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
    chunk_size: usize,
    /// Write every pulse record as CSV to this file.
    #[arg(long, value_name = "PATH")]
    dump: Option<PathBuf>,
    #[command(flatten)]
    units: AngleUnits,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct ThresholdArgs {
    /// [default: pi/8]
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// [default: pi]
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    #[command(flatten)]
    units: AngleUnits,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct VerifyArgs {
    /// Points per axis of the (theta, phi) grid.
    #[arg(long, default_value_t = 101)]
    grid: usize,
}

const DEFAULT_THETA: f64 = std::f64::consts::FRAC_PI_8;
const DEFAULT_PHI: f64 = std::f64::consts::PI;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn finite(name: &str, x: f64) -> Result<f64, Failure> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::Usage(format!("{name} must be finite")))
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

fn analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let theta = finite("theta", args.units.angle_or(args.theta, DEFAULT_THETA))?;
    let phi = finite("phi", args.units.angle_or(args.phi, DEFAULT_PHI))?;
    let row = OutputRow::compute(
        PolarizationAngle::from_radians(theta),
        KerrPhase::from_radians(phi),
        args.alpha,
    )?;
    let mut out = io::stdout().lock();
    if args.json {
        writeln!(out, "{}", json_line(&row))?;
    } else {
        for (name, value) in row.numeric_fields() {
            writeln!(out, "{name:<8} {value:.6}")?;
        }
        writeln!(out, "{:<8} {}", "unsafe", row.is_unsafe)?;
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let units = &args.units;
    let default_range = |v: f64| Range {
        start: v,
        stop: v,
        count: 1,
    };
    let thetas = args
        .theta
        .map(|r| r.points(|x| units.to_radians(x)))
        .unwrap_or_else(|| default_range(DEFAULT_THETA).points(|x| x));
    let phis = args
        .phi
        .map(|r| r.points(|x| units.to_radians(x)))
        .unwrap_or_else(|| default_range(DEFAULT_PHI).points(|x| x));
    let alphas = args.alpha.points(|x| x);
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Failure::Usage(format!("alpha = {a} is outside [0, 1]")));
    }

    let grid: Vec<(f64, f64, f64)> = thetas
        .iter()
        .flat_map(|&t| {
            let alphas = &alphas;
            phis.iter()
                .flat_map(move |&p| alphas.iter().map(move |&a| (t, p, a)))
        })
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(t, p, a)| {
            OutputRow::compute(
                PolarizationAngle::from_radians(t),
                KerrPhase::from_radians(p),
                a,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = BufWriter::new(io::stdout().lock());
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_line())?;
    }
    out.flush()?;
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let angle_or = |x, default| args.units.angle_or(x, default);
    let config = SimConfig {
        n_pulses: args.n,
        alpha: args.alpha,
        phi: KerrPhase::from_radians(angle_or(args.phi, DEFAULT_PHI)),
        eve_frame_angle: PolarizationAngle::from_radians(angle_or(args.eve_frame, DEFAULT_THETA)),
        seed: args.seed,
        channel_flip_rate: args.flip_rate,
        sample_fraction: args.sample_fraction,
        chunk_size: args.chunk_size,
    };
    let run = run_bb84(&config)?;
    if let Some(path) = &args.dump {
        let file =
            File::create(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        write_records(BufWriter::new(file), &run.records)
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    writeln!(io::stdout().lock(), "{}", json_line(&run.stats))?;
    Ok(())
}

fn threshold(args: ThresholdArgs) -> Result<(), Failure> {
    let theta = finite("theta", args.units.angle_or(args.theta, DEFAULT_THETA))?;
    let phi = finite("phi", args.units.angle_or(args.phi, DEFAULT_PHI))?;
    let result = threshold_alpha(
        PolarizationAngle::from_radians(theta),
        KerrPhase::from_radians(phi),
    );
    let mut out = io::stdout().lock();
    match (result, args.json) {
        (Some(t), true) => writeln!(out, "{}", json_line(&t))?,
        (None, true) => writeln!(out, "{}", json_line(&serde_json::json!({ "alpha": null })))?,
        (Some(t), false) => {
            writeln!(out, "alpha*   {:.9}", t.alpha)?;
            writeln!(out, "q_ab     {:.6}", t.metrics.q_ab)?;
            writeln!(out, "i_ab     {:.6}", t.metrics.i_ab)?;
            writeln!(out, "i_ae     {:.6}", t.metrics.i_ae)?;
            writeln!(out, "i_eb     {:.6}", t.metrics.i_eb)?;
        }
        (None, false) => writeln!(out, "no threshold")?,
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let checks = run_checks(args.grid);
    let mut out = io::stdout().lock();
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "[{tag}] {}: {}", c.name, c.detail)?;
    }
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

/// Splices `key = value` lines from a `--config` file in front of the
/// subcommand's own flags, so explicit flags (parsed later) win.
fn expand_config(mut argv: Vec<String>) -> Result<Vec<String>, Failure> {
    let mut path = None;
    let mut i = 1;
    while i < argv.len() {
        if argv[i] == "--config" {
            if i + 1 >= argv.len() {
                return Err(Failure::Usage("--config requires a path".into()));
            }
            path = Some(argv.remove(i + 1));
            argv.remove(i);
        } else if let Some(p) = argv[i].strip_prefix("--config=") {
            path = Some(p.to_string());
            argv.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else { return Ok(argv) };

    let text = std::fs::read_to_string(&path).map_err(|e| Failure::Io(format!("{path}: {e}")))?;
    let mut injected = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Failure::Usage(format!("{path}:{}: expected `key = value`", lineno + 1))
        })?;
        let (key, value) = (key.trim().trim_start_matches("--"), value.trim());
        match value {
            "true" => injected.push(format!("--{key}")),
            "false" => {}
            _ => injected.push(format!("--{key}={value}")),
        }
    }
    let at = 2.min(argv.len());
    argv.splice(at..at, injected);
    Ok(argv)
}

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(f) => return report(f),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Sweep(a) => sweep(a),
        Command::Simulate(a) => simulate(a),
        Command::Threshold(a) => threshold(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(failure: Failure) -> ExitCode {
    match failure {
        Failure::Usage(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Failure::Io(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
        Failure::Verify => ExitCode::from(EXIT_VERIFY_FAILED),
    }
}
