//! Command-line driver: reads a problem file, runs the guard-crossing solver
//! and prints a JSON result record.

pub mod problem_file;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use guardivp::{solve, Budget, Exact, HitStatus, SolveOptions};

pub use problem_file::{parse_problem, to_toml, FileOptions, InputError, ProblemSpec};
pub use report::{ResultRecord, StatsRecord};

pub const EXIT_BRACKETED: i32 = 0;
pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_LEFT_ONLY: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "guardivp",
    version,
    about = "Bracket the first time a polynomial IVP trajectory enters a guard set"
)]
pub struct Args {
    /// Problem file (TOML).
    #[arg(long, value_name = "PATH")]
    pub problem: PathBuf,
    /// Target bits n: the bracket is at most 2^-n wide.
    #[arg(long, value_name = "N")]
    pub bits: u32,
    /// Write accepted step points as CSV.
    #[arg(long, value_name = "PATH")]
    pub trajectory: Option<PathBuf>,
    /// Print the stats table row to stderr.
    #[arg(long)]
    pub stats: bool,
    /// Time radius of the bounding neighbourhood (decimal).
    #[arg(long, value_name = "DECIMAL")]
    pub delta: Option<String>,
    /// State radius of the bounding neighbourhood (decimal).
    #[arg(long, value_name = "DECIMAL")]
    pub epsilon: Option<String>,
    #[arg(long, value_name = "N")]
    pub max_big_steps: Option<u64>,
    #[arg(long, value_name = "N")]
    pub max_small_steps: Option<u64>,
    /// Wall-time budget in seconds (decimal).
    #[arg(long, value_name = "DECIMAL")]
    pub max_seconds: Option<String>,
    /// Largest working precision in bits.
    #[arg(long, value_name = "N")]
    pub max_bits: Option<u32>,
    /// Fractional digits printed (default: enough for 2^-n, plus two).
    #[arg(long, value_name = "D")]
    pub digits: Option<u32>,
}

/// Merges file options and flag overrides into solver options.
pub fn solve_options(args: &Args, file: &FileOptions) -> Result<SolveOptions, InputError> {
    let flag = |v: &Option<String>, name: &str| -> Result<Option<Exact>, InputError> {
        v.as_deref()
            .map(|s| {
                let x = Exact::parse(s).map_err(|e| InputError::Field {
                    field: format!("--{name}"),
                    message: format!("invalid number {s:?}: {e}"),
                })?;
                if x.numer() <= &0.into() {
                    return Err(InputError::Field {
                        field: format!("--{name}"),
                        message: "must be positive".into(),
                    });
                }
                Ok(x)
            })
            .transpose()
    };
    let defaults = SolveOptions::new(args.bits);
    let delta = flag(&args.delta, "delta")?
        .or_else(|| file.delta.clone())
        .unwrap_or_else(|| defaults.delta.clone());
    let epsilon = flag(&args.epsilon, "epsilon")?
        .or_else(|| file.epsilon.clone())
        .unwrap_or_else(|| defaults.epsilon.clone());
    let seconds = flag(&args.max_seconds, "max-seconds")?
        .map(|s| {
            problem_file::exact_seconds(&s).ok_or_else(|| InputError::Field {
                field: "--max-seconds".into(),
                message: "out of range".into(),
            })
        })
        .transpose()?;
    let base = Budget::default();
    let budget = Budget {
        max_big_steps: args
            .max_big_steps
            .or(file.max_big_steps)
            .unwrap_or(base.max_big_steps),
        max_small_steps: args
            .max_small_steps
            .or(file.max_small_steps)
            .unwrap_or(base.max_small_steps),
        max_wall_time: seconds.or(file.max_wall_time).unwrap_or(base.max_wall_time),
        max_bits: args.max_bits.or(file.max_bits).unwrap_or(base.max_bits),
    };
    let mut options = defaults.with_radii(delta, epsilon).with_budget(budget);
    options.record_trajectory = args.trajectory.is_some();
    Ok(options)
}

/// Runs the solver for parsed arguments and returns the exit code.
pub fn run(args: &Args, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match try_run(args, out, err) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_INPUT_ERROR
        }
    }
}

fn try_run(args: &Args, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let text = fs::read_to_string(&args.problem)
        .map_err(|e| format!("cannot read {}: {e}", args.problem.display()))?;
    let spec = parse_problem(&text).map_err(|e| e.to_string())?;
    let options = solve_options(args, &spec.options).map_err(|e| e.to_string())?;
    let hit = solve(&spec.problem, &options).map_err(|e| e.to_string())?;

    let digits = args
        .digits
        .unwrap_or_else(|| report::default_digits(args.bits));
    let record = ResultRecord::new(&hit, digits);
    writeln!(out, "{}", record.to_json()).map_err(|e| e.to_string())?;
    if args.stats {
        let _ = writeln!(err, "{}", report::STATS_HEADER);
        let _ = writeln!(err, "{}", report::stats_line(&record.stats));
    }
    if let Some(path) = &args.trajectory {
        let file =
            fs::File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?;
        report::write_trajectory(file, spec.problem.dim(), &hit.trajectory, digits)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(match hit.status {
        HitStatus::Bracketed => EXIT_BRACKETED,
        HitStatus::LeftOnly => EXIT_LEFT_ONLY,
    })
}

/// Parses the command line and runs; usage errors exit with
/// [`EXIT_INPUT_ERROR`].
pub fn main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Args::try_parse_from(argv) {
        Ok(args) => run(&args, out, err),
        Err(e) if e.use_stderr() => {
            let _ = write!(err, "{}", e.render());
            EXIT_INPUT_ERROR
        }
        // --help and --version
        Err(e) => {
            let _ = write!(out, "{}", e.render());
            EXIT_BRACKETED
        }
    }
}
