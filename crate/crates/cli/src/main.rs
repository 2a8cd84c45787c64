//! `tdyn`: command-line front end for toeplitz-dynamics.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 a numerical hypothesis
//! failed (non-cyclic, non-commuting, zero leading coefficient, ...),
//! 4 a verification mismatch.

mod commands;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use toeplitz_dynamics::{Error, Tolerances};

#[derive(Parser)]
#[command(name = "tdyn", version, about = "Tuples of upper triangular Toeplitz matrices")]
struct Cli {
    /// Worker threads for parallel commands (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// JSON object overriding tolerance keys, applied after TOL_OVERRIDE_JSON.
    #[arg(long, global = true, value_name = "JSON")]
    tol: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Multinomial expansion over weak compositions.
    Multinomial,
    /// Repeated squaring.
    Binary,
    /// Explicit formulas for n <= 4.
    #[value(alias = "paper")]
    Lemma,
    /// Every applicable method, diffed against each other.
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Grid,
    Shell,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

#[derive(Args, Clone, Debug)]
pub struct OrbitArgs {
    /// Tuple file.
    #[arg(long)]
    file: PathBuf,
    /// Initial vector as a JSON list of [re, im] pairs.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Per-generator exponent caps.
    #[arg(long, value_delimiter = ',', required = true)]
    caps: Vec<u64>,
    #[arg(long, value_enum, default_value = "grid")]
    mode: ModeArg,
    /// Samples in random mode.
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Discard points with a coordinate of larger modulus.
    #[arg(long)]
    clip: Option<f64>,
    /// Start exponents at 1.
    #[arg(long)]
    positive_only: bool,
    #[arg(long, default_value_t = toeplitz_dynamics::orbit::DEFAULT_MAX_POINTS)]
    max_points: u64,
}

#[derive(Subcommand)]
enum Command {
    /// First row of A_i^K for one member of a tuple.
    Pow {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        k: u64,
        #[arg(long, value_enum, default_value = "multinomial")]
        method: Method,
    },
    /// First row of A_1^{k_1} ... A_m^{k_m}.
    Prod {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        exponents: Vec<u64>,
        #[arg(long, value_enum, default_value = "multinomial")]
        method: Method,
    },
    /// Nilpotent logarithm coordinates of one member.
    Log {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Also report the exp(log) round-trip error.
        #[arg(long)]
        check: bool,
    },
    /// Toeplitz coefficients from logarithm coordinates.
    Exp {
        /// JSON {"base": [re, im], "lam": [[re, im], ...]}.
        #[arg(long)]
        file: PathBuf,
        /// Also report the log(exp) round-trip error.
        #[arg(long)]
        check: bool,
    },
    /// Simultaneous block-Toeplitz form of a commuting tuple.
    Reduce {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        cyclic_index: usize,
    },
    /// Orbit points as CSV.
    Orbit {
        #[command(flatten)]
        orbit: OrbitArgs,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid coverage of a CSV point cloud or of an orbit.
    Coverage {
        /// CSV point cloud (as written by `orbit`).
        #[arg(long, conflicts_with = "file")]
        points: Option<PathBuf>,
        /// Tuple file; the orbit is generated directly (needs --x and --caps).
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, value_delimiter = ',')]
        caps: Vec<u64>,
        #[arg(long, value_enum, default_value = "grid")]
        mode: ModeArg,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        clip: Option<f64>,
        #[arg(long)]
        positive_only: bool,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        step: f64,
        #[arg(long, value_enum, default_value = "complex")]
        field: FieldArg,
        /// Prefix lengths at which to sample the coverage curve.
        #[arg(long, value_delimiter = ',')]
        budgets: Vec<u64>,
    },
    /// Agreement of an orbit, its equivalence points and the diagonal surrogate.
    SurrogateCheck {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Per-generator exponent caps (default 20 each).
        #[arg(long, value_delimiter = ',')]
        caps: Vec<u64>,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random search over a family of tuples, ranked by coverage.
    Search {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cross-checks closed forms, logarithms and reductions against oracles.
    Verify {
        /// Closed-form fixture (defaults to the bundled n = 4 fixture).
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Print the table as JSON.
        #[arg(long)]
        json: bool,
        /// Regenerate the bundled fixture at this path and exit.
        #[arg(long, hide = true)]
        write_fixture: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Usage(String),
    Mismatch(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Lib(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_hypothesis_failure() => 3,
            CliError::Lib(_) | CliError::Usage(_) => 2,
            CliError::Mismatch(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(s) | CliError::Mismatch(s) => write!(f, "{s}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn tolerances(tol: Option<&str>) -> CliResult<Tolerances> {
    let base = Tolerances::from_env()?;
    Ok(match tol {
        Some(json) => base.with_json(json)?,
        None => base,
    })
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let tol = tolerances(cli.tol.as_deref())?;
    match cli.command {
        Command::Pow { file, index, k, method } => commands::pow(&file, index, k, method),
        Command::Prod { file, exponents, method } => commands::prod(&file, &exponents, method),
        Command::Log { file, index, check } => commands::log(&file, index, check),
        Command::Exp { file, check } => commands::exp(&file, check),
        Command::Reduce { file, cyclic_index } => commands::reduce(&file, cyclic_index, &tol),
        Command::Orbit { orbit, out } => commands::orbit(&orbit, out.as_deref()),
        Command::Coverage {
            points,
            file,
            x,
            caps,
            mode,
            samples,
            seed,
            clip,
            positive_only,
            radius,
            step,
            field,
            budgets,
        } => {
            let orbit = match (points.as_ref(), file) {
                (Some(_), _) => None,
                (None, Some(file)) => Some(OrbitArgs {
                    file,
                    x: x.ok_or_else(|| CliError::Usage("--file needs --x".into()))?,
                    caps,
                    mode,
                    samples,
                    seed,
                    clip,
                    positive_only,
                    max_points: toeplitz_dynamics::orbit::DEFAULT_MAX_POINTS,
                }),
                (None, None) => return Err(CliError::Usage("coverage needs --points or --file".into())),
            };
            commands::coverage(points.as_deref(), orbit.as_ref(), radius, step, field, &budgets)
        }
        Command::SurrogateCheck {
            file,
            x,
            caps,
            samples,
            seed,
        } => commands::surrogate_check(&file, &x, &caps, samples, seed),
        Command::Search { family, budget, seed } => commands::search(&family, budget, seed),
        Command::Verify {
            write_fixture: Some(path),
            ..
        } => verify::write_bundled(&path),
        Command::Verify { fixture, json, .. } => verify::run(fixture.as_deref(), json, &tol),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
