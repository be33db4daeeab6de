//! `ringsweep`: parameter sweeps over a one-lead Aharonov-Bohm ring.
//!
//! Subcommands map one-to-one onto the library scans; every sweep writes a
//! deterministic CSV (`--out`) whose rows are `param,tau,reflectance,phase`.
//! Exit codes: 0 success, 2 invalid arguments, 3 numerical failure (the
//! offending parameter value is reported on stderr).

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use abring::phase_time::default_step;
use abring::ring::RingSpec;
use abring::solver::assemble;
use abring::sweep::{
    point_with_step, scan_flux_with_step, scan_length_with_step, scan_resonance_with_step,
    scan_well_with_step, write_csv, ResonancePeak, SweepSeries,
};
use abring::RingError;

#[derive(Parser)]
#[command(
    name = "ringsweep",
    version,
    about = "Reflection delay-time sweeps for a one-lead ring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and print R, the delay time and the residual
    Point(CommonArgs),
    /// Delay time vs circumference of a single-barrier ring (sweeps lb1; lb3 and well stay 0)
    ScanLength(CommonArgs),
    /// Delay time vs flux through the ring, in units of the flux quantum
    ScanFlux(CommonArgs),
    /// Delay time vs barrier-1 length in a two-barrier ring (fixed lb3 and well)
    ScanWell(CommonArgs),
    /// Delay time vs well width in a two-barrier ring, with resonance detection
    ScanResonance(CommonArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct CommonArgs {
    /// Incident energy E; the lead wavevector is sqrt(E)
    #[arg(long)]
    energy: Option<f64>,
    /// Strength of barrier 1
    #[arg(long)]
    v1: Option<f64>,
    /// Strength of barrier 3
    #[arg(long)]
    v3: Option<f64>,
    /// Length of barrier 1
    #[arg(long)]
    lb1: Option<f64>,
    /// Length of barrier 3
    #[arg(long)]
    lb3: Option<f64>,
    /// Width of the zero-potential well
    #[arg(long)]
    well: Option<f64>,
    /// Flux in units of the flux quantum (total loop phase 2 pi phi)
    #[arg(long)]
    phi: Option<f64>,
    /// Sweep start
    #[arg(long)]
    from: Option<f64>,
    /// Sweep end
    #[arg(long)]
    to: Option<f64>,
    /// Number of sweep points (>= 2)
    #[arg(long)]
    steps: Option<usize>,
    /// Energy step for the phase derivative (default 1e-5 * energy)
    #[arg(long = "step-h")]
    step_h: Option<f64>,
    /// Output CSV path (required for scans)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Job file with `key = value` lines mirroring these flags;
    /// explicit flags override file values
    #[arg(long)]
    job: Option<PathBuf>,
}

/// Flag values after merging the job file under the command line.
#[derive(Debug, Clone)]
struct Resolved {
    energy: f64,
    v1: f64,
    v3: f64,
    lb1: f64,
    lb3: f64,
    well: f64,
    phi: f64,
    from: Option<f64>,
    to: Option<f64>,
    steps: Option<usize>,
    step_h: Option<f64>,
    out: Option<PathBuf>,
}

enum CliError {
    Args(String),
    Ring(RingError),
    Io(String),
}

impl From<RingError> for CliError {
    fn from(e: RingError) -> Self {
        CliError::Ring(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Args(_) => 2,
            CliError::Ring(e) => {
                if e.is_numerical() {
                    3
                } else {
                    2
                }
            }
            CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Args(m) => m.clone(),
            CliError::Ring(e) => e.to_string(),
            CliError::Io(m) => m.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("ringsweep: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Point(args) => run_point(resolve(args)?),
        Command::ScanLength(args) => run_scan_length(resolve(args)?),
        Command::ScanFlux(args) => run_scan_flux(resolve(args)?),
        Command::ScanWell(args) => run_scan_well(resolve(args)?),
        Command::ScanResonance(args) => run_scan_resonance(resolve(args)?),
    }
}

/// Parsed contents of a job file; same keys as the CLI flags.
#[derive(Debug, Default)]
struct JobValues {
    energy: Option<f64>,
    v1: Option<f64>,
    v3: Option<f64>,
    lb1: Option<f64>,
    lb3: Option<f64>,
    well: Option<f64>,
    phi: Option<f64>,
    from: Option<f64>,
    to: Option<f64>,
    steps: Option<usize>,
    step_h: Option<f64>,
    out: Option<PathBuf>,
}

fn parse_job(path: &Path) -> Result<JobValues, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Args(format!("cannot read job file {}: {e}", path.display())))?;
    let mut job = JobValues::default();
    for (index, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Args(format!(
                "{}:{}: expected `key = value`, got `{raw_line}`",
                path.display(),
                index + 1
            ))
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad_value = |kind: &str| {
            CliError::Args(format!(
                "{}:{}: `{key}` expects {kind}, got `{value}`",
                path.display(),
                index + 1
            ))
        };
        let parse_f64 = |slot: &mut Option<f64>| -> Result<(), CliError> {
            *slot = Some(value.parse().map_err(|_| bad_value("a number"))?);
            Ok(())
        };
        match key {
            "energy" => parse_f64(&mut job.energy)?,
            "v1" => parse_f64(&mut job.v1)?,
            "v3" => parse_f64(&mut job.v3)?,
            "lb1" => parse_f64(&mut job.lb1)?,
            "lb3" => parse_f64(&mut job.lb3)?,
            "well" => parse_f64(&mut job.well)?,
            "phi" => parse_f64(&mut job.phi)?,
            "from" => parse_f64(&mut job.from)?,
            "to" => parse_f64(&mut job.to)?,
            "step-h" => parse_f64(&mut job.step_h)?,
            "steps" => {
                job.steps = Some(value.parse().map_err(|_| bad_value("an integer"))?);
            }
            "out" => job.out = Some(PathBuf::from(value)),
            other => {
                return Err(CliError::Args(format!(
                    "{}:{}: unknown key `{other}`",
                    path.display(),
                    index + 1
                )));
            }
        }
    }
    Ok(job)
}

fn resolve(args: CommonArgs) -> Result<Resolved, CliError> {
    let job = match &args.job {
        Some(path) => parse_job(path)?,
        None => JobValues::default(),
    };
    Ok(Resolved {
        energy: args.energy.or(job.energy).unwrap_or(1.0),
        v1: args.v1.or(job.v1).unwrap_or(0.0),
        v3: args.v3.or(job.v3).unwrap_or(0.0),
        lb1: args.lb1.or(job.lb1).unwrap_or(0.0),
        lb3: args.lb3.or(job.lb3).unwrap_or(0.0),
        well: args.well.or(job.well).unwrap_or(0.0),
        phi: args.phi.or(job.phi).unwrap_or(0.0),
        from: args.from.or(job.from),
        to: args.to.or(job.to),
        steps: args.steps.or(job.steps),
        step_h: args.step_h.or(job.step_h),
        out: args.out.or(job.out),
    })
}

impl Resolved {
    fn alpha(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.phi
    }

    fn spec(&self) -> RingSpec {
        RingSpec {
            energy: self.energy,
            v1: self.v1,
            v3: self.v3,
            lb1: self.lb1,
            lb3: self.lb3,
            well: self.well,
            alpha1: self.alpha(),
            alpha2: 0.0,
            alpha3: 0.0,
        }
    }

    fn sweep_bounds(&self) -> Result<(f64, f64, usize), CliError> {
        let from = self
            .from
            .ok_or_else(|| CliError::Args("missing --from".into()))?;
        let to = self
            .to
            .ok_or_else(|| CliError::Args("missing --to".into()))?;
        let steps = self
            .steps
            .ok_or_else(|| CliError::Args("missing --steps".into()))?;
        Ok((from, to, steps))
    }

    fn out_path(&self) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Args("missing --out (scans write a CSV file)".into()))
    }

    fn resolved_step(&self) -> f64 {
        self.step_h.unwrap_or_else(|| default_step(self.energy))
    }

    /// Deterministic metadata block for the CSV header. The swept flag is
    /// shown as `swept`; sweep bounds are assumed present.
    fn meta(&self, command: &str, swept: &str) -> Vec<(&'static str, String)> {
        let field = |name: &str, value: f64| {
            if name == swept {
                "swept".to_string()
            } else {
                fmt_float(value)
            }
        };
        vec![
            ("command", command.to_string()),
            ("energy", fmt_float(self.energy)),
            ("v1", fmt_float(self.v1)),
            ("v3", fmt_float(self.v3)),
            ("lb1", field("lb1", self.lb1)),
            ("lb3", fmt_float(self.lb3)),
            ("well", field("well", self.well)),
            ("phi", field("phi", self.phi)),
            ("from", fmt_float(self.from.unwrap_or(f64::NAN))),
            ("to", fmt_float(self.to.unwrap_or(f64::NAN))),
            (
                "steps",
                self.steps.map_or_else(String::new, |s| s.to_string()),
            ),
            ("step-h", fmt_float(self.resolved_step())),
        ]
    }
}

fn fmt_float(value: f64) -> String {
    format!("{value:e}")
}

fn write_series(
    path: &Path,
    series: &SweepSeries,
    meta: &[(&str, String)],
) -> Result<(), CliError> {
    let file = fs::File::create(path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    let mut out = std::io::BufWriter::new(file);
    write_csv(&mut out, series, meta)
        .and_then(|()| out.flush())
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {} ({} rows)", path.display(), series.rows.len());
    Ok(())
}

fn run_point(resolved: Resolved) -> Result<(), CliError> {
    let spec = resolved.spec();
    let result = point_with_step(&spec, resolved.step_h)?;
    let condition = assemble(&spec)?.condition_estimate()?;
    let mut report = String::new();
    let sign = if result.r.im.is_sign_negative() {
        "-"
    } else {
        "+"
    };
    let _ = writeln!(
        report,
        "R = {} {sign} {}i",
        fmt_float(result.r.re),
        fmt_float(result.r.im.abs())
    );
    let _ = writeln!(report, "|R| = {}", fmt_float(result.r.norm()));
    let _ = writeln!(report, "arg R = {}", fmt_float(result.r.arg()));
    let _ = writeln!(report, "tau = {}", fmt_float(result.tau));
    let _ = writeln!(report, "residual = {}", fmt_float(result.residual));
    let _ = writeln!(report, "condition = {}", fmt_float(condition));
    match resolved.out {
        Some(ref path) => fs::write(path, report)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{report}"),
    }
    Ok(())
}

fn run_scan_length(resolved: Resolved) -> Result<(), CliError> {
    let (from, to, steps) = resolved.sweep_bounds()?;
    let base = RingSpec {
        lb3: resolved.lb3,
        well: resolved.well,
        ..RingSpec::single_barrier(resolved.energy, resolved.v1, 1.0, resolved.alpha())
    };
    let series = scan_length_with_step(&base, from, to, steps, resolved.step_h)?;
    write_series(
        resolved.out_path()?,
        &series,
        &resolved.meta("scan-length", "lb1"),
    )
}

fn run_scan_flux(resolved: Resolved) -> Result<(), CliError> {
    let (from, to, steps) = resolved.sweep_bounds()?;
    let base = resolved.spec();
    let (series, visibility) = scan_flux_with_step(&base, from, to, steps, resolved.step_h)?;
    let mut meta = resolved.meta("scan-flux", "phi");
    meta.push(("visibility", fmt_float(visibility)));
    write_series(resolved.out_path()?, &series, &meta)?;
    println!("visibility = {}", fmt_float(visibility));
    Ok(())
}

fn run_scan_well(resolved: Resolved) -> Result<(), CliError> {
    let (from, to, steps) = resolved.sweep_bounds()?;
    let base = resolved.spec();
    let series = scan_well_with_step(&base, from, to, steps, resolved.step_h)?;
    let saturation = series.rows.last().map_or(f64::NAN, |row| row.tau);
    let mut meta = resolved.meta("scan-well", "lb1");
    meta.push(("saturation-tau", fmt_float(saturation)));
    write_series(resolved.out_path()?, &series, &meta)?;
    println!("saturation tau = {}", fmt_float(saturation));
    Ok(())
}

fn run_scan_resonance(resolved: Resolved) -> Result<(), CliError> {
    let (from, to, steps) = resolved.sweep_bounds()?;
    let base = resolved.spec();
    let (series, peaks) = scan_resonance_with_step(&base, from, to, steps, resolved.step_h)?;
    let mut meta = resolved.meta("scan-resonance", "well");
    meta.push(("peaks", peaks.len().to_string()));
    write_series(resolved.out_path()?, &series, &meta)?;
    print_peaks(&peaks);
    Ok(())
}

fn print_peaks(peaks: &[ResonancePeak]) {
    println!("peaks = {}", peaks.len());
    for peak in peaks {
        println!(
            "peak location = {} height = {} fwhm = {}",
            fmt_float(peak.location),
            fmt_float(peak.height),
            fmt_float(peak.fwhm)
        );
    }
}
