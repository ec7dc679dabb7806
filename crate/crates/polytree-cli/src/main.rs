//! `polytree` — a command-line pipeline around the `polytree` library:
//! draw samples from a model, learn structure (and optionally parameters)
//! from exact or sampled distributions, print information diagnostics,
//! score a learned result against a ground-truth model, and render results
//! as GraphViz DOT.
//!
//! Exit codes: 0 success; 1 usage or parse failure; 2 data or validation
//! failure; 3 internal invariant breach.

mod commands;
mod dot;
mod result;

use std::fmt;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version surface as clap "errors" but succeed.
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sample(args) => commands::sample(args),
        Command::Learn(args) => commands::learn(args),
        Command::Mi(args) => commands::mi(args),
        Command::Eval(args) => commands::eval(args),
        Command::Dot(args) => commands::dot(args),
    }
}

#[derive(Parser)]
#[command(
    name = "polytree",
    version,
    about = "Recover poly-tree structure and parameters from joint distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw ancestral samples from a model into a CSV dataset
    Sample(SampleArgs),
    /// Learn skeleton, edge directions, and optionally parameters
    Learn(LearnArgs),
    /// Print mutual information between two variables, in bits
    Mi(MiArgs),
    /// Score a learned result against a ground-truth model
    Eval(EvalArgs),
    /// Render a learned result as GraphViz DOT
    Dot(DotArgs),
}

#[derive(Args)]
pub struct SampleArgs {
    /// Model JSON file to sample from
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,

    /// Number of rows to draw
    #[arg(
        short = 'n',
        long = "rows",
        value_name = "COUNT",
        value_parser = clap::value_parser!(u64).range(1..)
    )]
    pub rows: u64,

    /// RNG seed; identical seeds yield identical datasets
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output CSV path
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    pub output: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    /// Threshold on noiseless information values (exact sources only)
    Exact,
    /// Fixed threshold in bits, for any source kind
    Fixed,
    /// Likelihood-ratio significance test, for sampled data
    Gtest,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true)))]
pub struct LearnArgs {
    /// Factored model JSON as the distribution source
    #[arg(long, value_name = "FILE", group = "input")]
    pub model: Option<PathBuf>,

    /// Explicit joint probability table JSON as the source
    #[arg(long, value_name = "FILE", group = "input")]
    pub jpdf: Option<PathBuf>,

    /// CSV sample dataset as the source
    #[arg(long, value_name = "FILE", group = "input")]
    pub data: Option<PathBuf>,

    /// Independence oracle (default: exact for exact sources, gtest for data)
    #[arg(long, value_enum, value_name = "KIND")]
    pub oracle: Option<OracleKind>,

    /// Independence threshold in bits for the exact oracle [default: 1e-9]
    #[arg(long, value_name = "BITS")]
    pub epsilon: Option<f64>,

    /// Independence threshold in bits for the fixed oracle
    #[arg(long, value_name = "BITS")]
    pub tau: Option<f64>,

    /// Significance level for the gtest oracle [default: 0.01]
    #[arg(long, value_name = "LEVEL")]
    pub alpha: Option<f64>,

    /// Weight-tie tolerance in bits [default: 1e-9 exact, 1e-4 empirical]
    #[arg(long, value_name = "BITS")]
    pub tie_tolerance: Option<f64>,

    /// Classify triplets by conditional information, surviving tied weights
    #[arg(long)]
    pub degenerate: bool,

    /// Complete the orientation and fit conditional probability tables
    #[arg(long)]
    pub fit: bool,

    /// Additive smoothing for empirical CPT estimates (with --fit)
    #[arg(long, value_name = "ALPHA", default_value_t = 0.0, requires = "fit")]
    pub smoothing: f64,

    /// Direct an undetermined edge FROM:TO during completion (repeatable)
    #[arg(long = "orient", value_name = "FROM:TO", requires = "fit")]
    pub orient: Vec<String>,

    /// Result JSON output path
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    pub output: PathBuf,

    /// Also render the result as GraphViz DOT to this path
    #[arg(long, value_name = "FILE")]
    pub dot: Option<PathBuf>,

    /// Also write the fitted model JSON to this path (with --fit)
    #[arg(long, value_name = "FILE", requires = "fit")]
    pub model_out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true)))]
pub struct MiArgs {
    /// Factored model JSON as the distribution source
    #[arg(long, value_name = "FILE", group = "input")]
    pub model: Option<PathBuf>,

    /// Explicit joint probability table JSON as the source
    #[arg(long, value_name = "FILE", group = "input")]
    pub jpdf: Option<PathBuf>,

    /// CSV sample dataset as the source
    #[arg(long, value_name = "FILE", group = "input")]
    pub data: Option<PathBuf>,

    /// First variable name
    #[arg(value_name = "A")]
    pub a: String,

    /// Second variable name
    #[arg(value_name = "B")]
    pub b: String,

    /// Condition on this variable, printing conditional mutual information
    #[arg(long, value_name = "C")]
    pub given: Option<String>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Learned result JSON
    #[arg(long, value_name = "FILE")]
    pub result: PathBuf,

    /// Ground-truth model JSON
    #[arg(long, value_name = "FILE")]
    pub truth: PathBuf,

    /// Report JSON output path (stdout when omitted)
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct DotArgs {
    /// Learned result JSON
    #[arg(long, value_name = "FILE")]
    pub result: PathBuf,

    /// DOT output path (stdout when omitted)
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    pub output: Option<PathBuf>,
}

/// A command failure: either the command line itself is wrong, or the
/// pipeline rejected the inputs.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(polytree::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    /// 1 usage/parse, 2 data/validation, 3 internal.
    pub fn exit_code(&self) -> i32 {
        use polytree::Error as E;
        match self {
            Self::Usage(_) | Self::Lib(E::Parse(_)) | Self::Lib(E::Io(_)) => 1,
            Self::Lib(E::InvalidInput(_))
            | Self::Lib(E::Validation(_))
            | Self::Lib(E::OracleConfig(_))
            | Self::Lib(E::GenerationBudget { .. }) => 2,
            Self::Lib(E::Internal(_)) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(msg) => write!(f, "{msg}"),
            Self::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<polytree::Error> for CliError {
    fn from(e: polytree::Error) -> Self {
        Self::Lib(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_line_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes_follow_the_error_class() {
        use polytree::Error as E;
        assert_eq!(CliError::usage("x").exit_code(), 1);
        assert_eq!(CliError::Lib(E::Parse("x".into())).exit_code(), 1);
        assert_eq!(
            CliError::Lib(E::Io(std::io::Error::other("x"))).exit_code(),
            1
        );
        assert_eq!(CliError::Lib(E::InvalidInput("x".into())).exit_code(), 2);
        assert_eq!(CliError::Lib(E::Validation("x".into())).exit_code(), 2);
        assert_eq!(CliError::Lib(E::OracleConfig("x".into())).exit_code(), 2);
        assert_eq!(
            CliError::Lib(E::GenerationBudget { attempts: 3 }).exit_code(),
            2
        );
        assert_eq!(CliError::Lib(E::Internal("x".into())).exit_code(), 3);
    }

    #[test]
    fn learn_requires_exactly_one_input_kind() {
        use clap::CommandFactory;
        let m = Cli::command();
        assert!(m
            .clone()
            .try_get_matches_from(["polytree", "learn", "-o", "r.json"])
            .is_err());
        assert!(m
            .clone()
            .try_get_matches_from([
                "polytree", "learn", "--model", "a", "--data", "b", "-o", "r.json"
            ])
            .is_err());
        assert!(m
            .try_get_matches_from(["polytree", "learn", "--model", "a", "-o", "r.json"])
            .is_ok());
    }

    #[test]
    fn fit_only_flags_require_fit() {
        use clap::CommandFactory;
        let m = Cli::command();
        assert!(m
            .clone()
            .try_get_matches_from([
                "polytree",
                "learn",
                "--model",
                "a",
                "--smoothing",
                "1.0",
                "-o",
                "r.json"
            ])
            .is_err());
        assert!(m
            .try_get_matches_from([
                "polytree", "learn", "--model", "a", "--orient", "A:B", "-o", "r.json"
            ])
            .is_err());
    }
}
