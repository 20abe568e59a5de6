//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on input errors (bad flags, unreadable or
//! malformed files, failed certification), 2 when a minimum-turn instance is
//! valid but infeasible.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::harness::{self, IntervalStart};
use crate::irradiance::{load_grid, save_grid, synth_day, GridAxes, IrradianceGrid, SynthConfig};
use crate::mec::{solve_max_energy, BudgetUnit, MecParams};
use crate::mtm::{solve_min_turns, MtmParams};
use crate::path::PathKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "trough-sched",
    version,
    about = "Wear-aware parabolic-trough tracker scheduling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a day of irradiance and write grid files.
    Gen(GenArgs),
    /// Fewest rotations keeping every parked cell inside [u1, u2].
    SolveMtm(SolveMtmArgs),
    /// Most energy under a rotation budget.
    SolveMec(SolveMecArgs),
    /// Minimum rotations as the lower threshold u1 varies.
    SweepU1(SweepU1Args),
    /// Optimal energy as the rotation budget varies.
    SweepMoves(SweepMovesArgs),
    /// Whole-day solve versus k independent forecast intervals.
    Forecast(ForecastArgs),
    /// Compare the solvers with exhaustive enumeration on random small grids.
    OracleCheck(OracleCheckArgs),
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Weight matrix CSV (one line per time row).
    #[arg(long)]
    grid: PathBuf,
    /// Metadata file (eps_deg, sca_start_deg, time_step_min, scale).
    #[arg(long)]
    meta: PathBuf,
    /// Restrict to vertex rows FIRST..=LAST, e.g. to drop night-edge rows.
    #[arg(long, value_parser = parse_rows)]
    rows: Option<(usize, usize)>,
}

fn parse_rows(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected FIRST:LAST, got {s:?}"))?;
    Ok((
        a.parse().map_err(|e| format!("bad first row {a:?}: {e}"))?,
        b.parse().map_err(|e| format!("bad last row {b:?}: {e}"))?,
    ))
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write results here instead of stdout (".csv" selects CSV where supported).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit wall times so identical runs give identical output.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Output matrix CSV.
    #[arg(long)]
    grid: PathBuf,
    /// Output metadata file.
    #[arg(long)]
    meta: PathBuf,
    #[arg(long, default_value_t = 161)]
    n_cols: usize,
    #[arg(long, default_value_t = 840)]
    n_rows: usize,
    #[arg(long, default_value_t = 900.0)]
    peak_dni: f64,
    #[arg(long, default_value_t = 3)]
    halfwidth: usize,
    #[arg(long, default_value_t = 6)]
    falloff: usize,
    #[arg(long, default_value_t = 0.01)]
    crown: f64,
    /// Cloud event as START:END:ATTENUATION (repeatable).
    #[arg(long = "cloud", value_parser = parse_cloud)]
    clouds: Vec<(usize, usize, f64)>,
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value_t = 10.0)]
    sca_start: f64,
    #[arg(long, default_value_t = 1.0)]
    time_step: f64,
    #[arg(long, default_value_t = 1000.0)]
    scale: f64,
}

fn parse_cloud(s: &str) -> Result<(usize, usize, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(format!("expected START:END:ATTENUATION, got {s:?}"));
    };
    Ok((
        a.parse().map_err(|e| format!("bad start row {a:?}: {e}"))?,
        b.parse().map_err(|e| format!("bad end row {b:?}: {e}"))?,
        c.parse()
            .map_err(|e| format!("bad attenuation {c:?}: {e}"))?,
    ))
}

#[derive(Debug, Args)]
struct SolveMtmArgs {
    #[command(flatten)]
    input: GridArgs,
    #[arg(long, allow_negative_numbers = true)]
    u1: f64,
    #[arg(long, allow_negative_numbers = true)]
    u2: f64,
    /// Forbid backward rotation.
    #[arg(long)]
    no_left: bool,
    #[arg(long, default_value_t = 0)]
    start_col: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SolveMecArgs {
    #[command(flatten)]
    input: GridArgs,
    /// Rotation budget (horizontal segments).
    #[arg(long)]
    moves: usize,
    /// Interpret --moves as a waypoint budget instead.
    #[arg(long)]
    waypoints: bool,
    #[arg(long)]
    no_left: bool,
    #[arg(long, default_value_t = 0)]
    start_col: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepU1Args {
    #[command(flatten)]
    input: GridArgs,
    /// Upper threshold; defaults to the grid maximum.
    #[arg(long)]
    u2: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    u1_start: f64,
    #[arg(long)]
    u1_stop: f64,
    #[arg(long)]
    u1_step: f64,
    #[arg(long)]
    no_left: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepMovesArgs {
    #[command(flatten)]
    input: GridArgs,
    #[arg(long, default_value_t = 0)]
    moves_start: usize,
    #[arg(long)]
    moves_stop: usize,
    #[arg(long, default_value_t = 1)]
    moves_step: usize,
    #[arg(long)]
    no_left: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ForecastArgs {
    #[command(flatten)]
    input: GridArgs,
    #[arg(long)]
    k: usize,
    /// Budget for the whole day and for each interval.
    #[arg(long)]
    moves: usize,
    #[arg(long, default_value_t = 0.95)]
    fraction: f64,
    #[arg(long)]
    no_left: bool,
    /// Start every interval at column 0 instead of where the previous ended.
    #[arg(long)]
    reset_start: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct OracleCheckArgs {
    #[arg(long, default_value_t = 5)]
    max_size: usize,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn kind(no_left: bool) -> PathKind {
    if no_left {
        PathKind::NoLeft
    } else {
        PathKind::General
    }
}

/// Failure that ends a run with a given status.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: e.to_string(),
        }
    }
}

fn fail(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            // clap spreads some messages (e.g. missing flags) over several
            // lines before the usage block; fold them into one
            let text = e.to_string();
            let line = text
                .lines()
                .take_while(|l| !l.trim().is_empty())
                .map(str::trim)
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(stderr, "{line}");
            return EXIT_INPUT;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.message);
            f.code
        }
    }
}

fn load(input: &GridArgs) -> Result<IrradianceGrid, Failure> {
    let grid = load_grid(&input.grid, &input.meta)?;
    Ok(match input.rows {
        Some((first, last)) => grid.row_band(first, last)?,
        None => grid,
    })
}

fn emit_json<T: Serialize>(
    value: &T,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    match &output.out {
        Some(path) => write_file(path, text.as_bytes()),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| fail(format!("cannot write stdout: {e}"))),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e).into())
}

fn wants_csv(output: &OutputArgs) -> bool {
    output
        .out
        .as_ref()
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Gen(a) => {
            let config = SynthConfig {
                n_cols: a.n_cols,
                n_rows: a.n_rows,
                peak_dni: a.peak_dni,
                acceptance_halfwidth_cols: a.halfwidth,
                falloff_cols: a.falloff,
                plateau_crown: a.crown,
                cloud_events: a.clouds,
                jitter: a.jitter,
                rng_seed: a.seed,
                axes: GridAxes {
                    eps_deg: a.eps,
                    sca_start_deg: a.sca_start,
                    time_step_min: a.time_step,
                    scale: a.scale,
                },
            };
            let grid = synth_day(&config)?;
            save_grid(&grid, &a.grid, &a.meta)?;
            let _ = writeln!(
                stdout,
                "wrote {} cols x {} rows to {}",
                grid.n_cols(),
                grid.n_rows(),
                a.grid.display()
            );
            Ok(())
        }
        Command::SolveMtm(a) => {
            let grid = load(&a.input)?;
            let params = MtmParams {
                u1: a.u1,
                u2: a.u2,
                start_col: a.start_col,
                kind: kind(a.no_left),
            };
            match solve_min_turns(&grid, &params)? {
                Some(sol) => {
                    let report = json!({
                        "status": "optimal",
                        "u1": a.u1,
                        "u2": a.u2,
                        "path": sol.path.record(&grid),
                    });
                    emit_json(&report, &a.output, stdout)
                }
                None => {
                    let report = json!({ "status": "infeasible", "u1": a.u1, "u2": a.u2 });
                    emit_json(&report, &a.output, stdout)?;
                    Err(Failure {
                        code: EXIT_INFEASIBLE,
                        message: "infeasible".into(),
                    })
                }
            }
        }
        Command::SolveMec(a) => {
            let grid = load(&a.input)?;
            let params = MecParams {
                moves_budget: a.moves,
                unit: if a.waypoints {
                    BudgetUnit::Waypoints
                } else {
                    BudgetUnit::Movements
                },
                start_col: a.start_col,
                kind: kind(a.no_left),
            };
            let sol = solve_max_energy(&grid, &params)?;
            let report = json!({
                "status": "optimal",
                "budget": a.moves,
                "unit": params.unit,
                "weight_sum": sol.weight_sum,
                "path": sol.path.record(&grid),
            });
            emit_json(&report, &a.output, stdout)
        }
        Command::SweepU1(a) => {
            let grid = load(&a.input)?;
            if a.u1_step.is_nan() || a.u1_step <= 0.0 {
                return Err(fail("--u1-step must be positive"));
            }
            let u2 = a.u2.unwrap_or_else(|| grid.global_max());
            let mut values = Vec::new();
            let mut n = 0u32;
            loop {
                let u1 = a.u1_start + f64::from(n) * a.u1_step;
                if u1 > a.u1_stop {
                    break;
                }
                values.push(u1);
                n += 1;
            }
            let mut rows = harness::sweep_u1(&grid, u2, &values, kind(a.no_left))?;
            if a.output.no_timings {
                rows.iter_mut().for_each(|r| r.wall_time_ms = 0.0);
            }
            if wants_csv(&a.output) {
                let mut buf = Vec::new();
                harness::write_sweep_csv(&rows, &mut buf, !a.output.no_timings)?;
                write_file(a.output.out.as_ref().expect("csv implies --out"), &buf)
            } else {
                emit_json(&json!({ "u2": u2, "rows": rows }), &a.output, stdout)
            }
        }
        Command::SweepMoves(a) => {
            let grid = load(&a.input)?;
            if a.moves_step == 0 {
                return Err(fail("--moves-step must be positive"));
            }
            let values: Vec<usize> = (a.moves_start..=a.moves_stop)
                .step_by(a.moves_step)
                .collect();
            let mut sweep = harness::sweep_moves(&grid, &values, kind(a.no_left))?;
            if a.output.no_timings {
                sweep.rows.iter_mut().for_each(|r| r.wall_time_ms = 0.0);
            }
            if wants_csv(&a.output) {
                let mut buf = Vec::new();
                harness::write_sweep_csv(&sweep.rows, &mut buf, !a.output.no_timings)?;
                write_file(a.output.out.as_ref().expect("csv implies --out"), &buf)
            } else {
                emit_json(&sweep, &a.output, stdout)
            }
        }
        Command::Forecast(a) => {
            let grid = load(&a.input)?;
            let start = if a.reset_start {
                IntervalStart::Reset
            } else {
                IntervalStart::Chained
            };
            let mut report =
                harness::forecast_run(&grid, a.k, a.moves, a.fraction, kind(a.no_left), start)?;
            if a.output.no_timings {
                report = report.without_timings();
            }
            if wants_csv(&a.output) {
                let mut buf = Vec::new();
                report.write_table_csv(&mut buf, !a.output.no_timings)?;
                write_file(a.output.out.as_ref().expect("csv implies --out"), &buf)
            } else {
                emit_json(&report, &a.output, stdout)
            }
        }
        Command::OracleCheck(a) => {
            if !(2..=crate::oracle::MAX_ENUM_SIDE).contains(&a.max_size) {
                return Err(fail(format!(
                    "--max-size must lie in 2..={}",
                    crate::oracle::MAX_ENUM_SIDE
                )));
            }
            let mut agree = 0u64;
            let mut first = None;
            for t in 0..a.trials {
                let mismatches = harness::certify_trial(a.seed.wrapping_add(t), a.max_size)?;
                if mismatches.is_empty() {
                    agree += 1;
                } else if first.is_none() {
                    first = mismatches.into_iter().next();
                }
            }
            let _ = writeln!(stdout, "{agree}/{} agree", a.trials);
            match first {
                None => Ok(()),
                Some(m) => Err(fail(format!(
                    "seed {}: {} solver={} oracle={}",
                    m.seed, m.check, m.solver, m.oracle
                ))),
            }
        }
    }
}
