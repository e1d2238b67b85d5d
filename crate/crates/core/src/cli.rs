//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or invalid input,
//! 3 numerical failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{ConfigError, RunConfig};
use crate::shiftfit::{fit_shift, FitError, ShiftReport};
use crate::sim::{self, SimError};
use crate::verify;
use crate::wavekit::{self, WaveError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pmefront", version, about = "Fronts of the Fisher-KPP porous medium equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimal speed, sensitivity and profile of the sharp traveling wave.
    Wave(WaveArgs),
    /// Radial simulation driven by a key = value config file.
    Simulate(SimulateArgs),
    /// Fit h(t) ≈ c t - B log t + r0 to a series CSV.
    Fit(FitArgs),
    /// Run the acceptance criteria.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct WaveArgs {
    /// Porous-medium exponent, > 1.
    #[arg(long, allow_negative_numbers = true)]
    pub m: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Bracket width of the speed bisection.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Directory for wave.json and profile.csv; JSON goes to stdout either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `out_dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub series: PathBuf,
    /// Time window `a,b`; defaults to the last three quarters of the series.
    #[arg(long, value_parser = parse_window)]
    pub window: Option<(f64, f64)>,
    #[arg(long = "predicted-B", allow_negative_numbers = true)]
    pub predicted_b: Option<f64>,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Criteria 1-5 only (the default).
    #[arg(long, conflicts_with = "full")]
    pub quick: bool,
    /// All ten criteria, including the reference simulations.
    #[arg(long)]
    pub full: bool,
    /// Also write the JSON summary here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `a,b`")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn numeric(message: impl ToString) -> Self {
        Failure {
            code: EXIT_NUMERIC,
            message: message.to_string(),
        }
    }
}

impl From<WaveError> for Failure {
    fn from(e: WaveError) -> Self {
        match e {
            WaveError::InvalidExponent(_)
            | WaveError::InvalidAdvection(_)
            | WaveError::InvalidSpeed(_)
            | WaveError::InvalidTolerance(_)
            | WaveError::InvalidOptions(_) => Failure::usage(e),
            _ => Failure::numeric(e),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig(_) | SimError::InvalidInitialData(_) | SimError::Parse { .. } => Failure::usage(e),
            SimError::Wave(w) => w.into(),
            SimError::Io(_) => Failure::usage(e),
            _ => Failure::numeric(e),
        }
    }
}

impl From<FitError> for Failure {
    fn from(e: FitError) -> Self {
        match e {
            FitError::InvalidWindow(..) => Failure::usage(e),
            FitError::Wave(w) => w.into(),
            FitError::Sim(s) => s.into(),
            _ => Failure::numeric(e),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::usage(e)
    }
}

type Outcome = Result<i32, Failure>;

fn io_usage(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::usage(format!("{}: {e}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

#[derive(Debug, Serialize)]
struct WaveResiduals {
    bracket_width: f64,
    /// Front seed consistency `|p(δ) + c - p'(0) δ|`.
    seed: f64,
    /// Largest traveling-wave ODE residual over the profile samples.
    profile_ode: f64,
    /// `|φ'(0⁻) + c|`.
    darcy_slope: f64,
    /// `m γ² + (c + m α) γ - 1`.
    gamma: f64,
    c_prime_quadrature: f64,
}

#[derive(Debug, Serialize)]
struct WaveReport {
    m: f64,
    alpha: f64,
    c: f64,
    c_prime: f64,
    cstar: f64,
    gamma: f64,
    residuals: WaveResiduals,
}

fn cmd_wave(args: &WaveArgs) -> Outcome {
    let params = wavekit::ModelParams::new(args.m, args.alpha)?;
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(WaveError::InvalidTolerance(args.tol).into());
    }
    let ws = wavekit::solve_min_speed(&params, args.tol)?;
    let profile = wavekit::reconstruct_profile(&ws.trajectory)?;
    let sens = wavekit::c_prime_with(&params, &ws.trajectory)?;
    let cstar = wavekit::cstar(args.m)?;
    let g = wavekit::gamma(&params, ws.c);
    let report = WaveReport {
        m: args.m,
        alpha: args.alpha,
        c: ws.c,
        c_prime: sens.c_prime,
        cstar,
        gamma: g,
        residuals: WaveResiduals {
            bracket_width: ws.bracket.1 - ws.bracket.0,
            seed: ws.residual,
            profile_ode: profile.max_ode_residual(),
            darcy_slope: (profile.front_slope_estimate() + ws.c).abs(),
            gamma: args.m * g * g + (ws.c + args.m * args.alpha) * g - 1.0,
            c_prime_quadrature: sens.quadrature_error,
        },
    };
    let json = to_json(&report);
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(io_usage(dir))?;
        let mut csv = String::from("x,phi,Phi\n");
        for s in profile.samples() {
            let _ = writeln!(csv, "{:.16e},{:.16e},{:.16e}", s.x, s.phi, s.density);
        }
        let profile_path = dir.join("profile.csv");
        fs::write(&profile_path, csv).map_err(io_usage(&profile_path))?;
        let json_path = dir.join("wave.json");
        fs::write(&json_path, format!("{json}\n")).map_err(io_usage(&json_path))?;
    }
    println!("{json}");
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct RunSummary {
    c_star: f64,
    r_max: f64,
    steps: u64,
    t_final: f64,
    h_final: f64,
    rows: usize,
    snapshots: Vec<String>,
    notes: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Metadata {
    created_unix: u64,
    version: &'static str,
    wall_seconds: f64,
    config_file: String,
}

fn cmd_simulate(args: &SimulateArgs) -> Outcome {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    let sim_cfg = cfg.sim_config()?;
    sim_cfg.validate()?;
    let start = Instant::now();
    let out = sim::run(&sim_cfg)?;
    for note in &out.notes {
        eprintln!("note: {note}");
    }

    let dir = &cfg.out_dir;
    fs::create_dir_all(dir).map_err(io_usage(dir))?;
    fs::write(dir.join("config.txt"), cfg.render()).map_err(io_usage(dir))?;
    sim::write_series(&dir.join("series.csv"), &out.series)?;
    let mut snapshots = Vec::new();
    for snap in &out.snapshots {
        let path = sim::write_snapshot(dir, snap)?;
        snapshots.push(path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default());
    }
    let summary = RunSummary {
        c_star: out.c_star,
        r_max: out.r_max,
        steps: out.steps,
        t_final: out.final_state.t,
        h_final: sim::locate_front(&out.final_state, sim_cfg.u_tol)?,
        rows: out.series.rows.len(),
        snapshots,
        notes: out.notes.clone(),
    };
    fs::write(dir.join("summary.json"), format!("{}\n", to_json(&summary))).map_err(io_usage(dir))?;
    let meta = Metadata {
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        version: env!("CARGO_PKG_VERSION"),
        wall_seconds: start.elapsed().as_secs_f64(),
        config_file: args.config.display().to_string(),
    };
    fs::write(dir.join("metadata.json"), format!("{}\n", to_json(&meta))).map_err(io_usage(dir))?;
    eprintln!(
        "wrote {} rows and {} snapshots to {}",
        summary.rows,
        summary.snapshots.len(),
        dir.display()
    );
    Ok(EXIT_OK)
}

fn cmd_fit(args: &FitArgs) -> Outcome {
    let series = sim::read_series(&args.series)?;
    let window = match args.window {
        Some(w) => w,
        None => {
            let times = series.times();
            let (Some(&lo), Some(&hi)) = (times.first(), times.last()) else {
                return Err(Failure::numeric("series has no rows"));
            };
            (hi - 0.75 * (hi - lo), hi)
        }
    };
    let fit = fit_shift(&series, window)?;
    let json = to_json(&ShiftReport::new(&fit, args.predicted_b));
    if let Some(path) = &args.out {
        fs::write(path, format!("{json}\n")).map_err(io_usage(path))?;
    }
    println!("{json}");
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let summary = verify::run(true, args.full);
    print!("{}", summary.table());
    let json = to_json(&summary);
    if let Some(path) = &args.json {
        fs::write(path, format!("{json}\n")).map_err(io_usage(path))?;
    }
    println!("{json}");
    Ok(if summary.passed { EXIT_OK } else { EXIT_VERIFY })
}

pub fn dispatch(cli: &Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Wave(a) => cmd_wave(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// Parse `std::env::args`, run, and return the exit code.
pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    match Cli::try_parse() {
        Ok(cli) => dispatch(&cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}
