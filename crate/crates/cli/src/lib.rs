//! `cbnobs`: observability analysis for conjunctive Boolean networks.
//!
//! Every command is reachable through [`run`], which returns the exit code
//! and the text that would go to stdout and stderr.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use cbn_observe::format::{parse_document, NetworkDocument, ParseError};
use cbn_observe::observer::ObserverError;
use cbn_observe::oracle::OracleError;
use cbn_observe::random::ExperimentError;
use cbn_observe::Cbn;

mod commands;

pub const EXIT_OK: i32 = 0;
/// Not observable, or the request was refused on semantic grounds.
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cbnobs",
    version,
    about = "Observability of conjunctive Boolean networks"
)]
pub struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural observability test with the violating nodes and cycles.
    Check { file: PathBuf },
    /// Minimal set of extra observed variables.
    Solve {
        file: PathBuf,
        /// List the fixed part, the per-cycle choices and the solution count.
        #[arg(long)]
        all: bool,
    },
    /// Recover the initial state from an output trace.
    Observe { file: PathBuf, trace: PathBuf },
    /// Write the output trace of a run from a given initial state.
    Simulate {
        file: PathBuf,
        /// Initial state as a 0/1 string, x1 first.
        #[arg(long)]
        x0: String,
        /// Number of samples; defaults to the observer horizon.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Rewrite a DBN, a control network or a network with AND outputs as a plain CBN.
    Reduce(ReduceArgs),
    /// Random-graph sweep of the minimal observer fraction.
    Experiment(ExperimentArgs),
    /// Exhaustive pair-simulation check for small networks.
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = cbn_observe::oracle::DEFAULT_ORACLE_MAX_N)]
        max_n: usize,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "mode")]
pub struct ReduceMode {
    #[arg(long)]
    pub dbn: bool,
    #[arg(long)]
    pub cbcn: bool,
    #[arg(long = "aug-outputs")]
    pub aug_outputs: bool,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub mode: ReduceMode,
    /// Write the reduced network here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub n: usize,
    /// Comma-separated edge probabilities; defaults to a log grid around 1/n.
    #[arg(long, value_delimiter = ',')]
    pub p_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Summary CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Long-format CSV with one row per trial.
    #[arg(long)]
    pub per_trial: Option<PathBuf>,
    #[arg(long)]
    pub no_self_loops: bool,
    /// Points in the default grid.
    #[arg(long, default_value_t = 21)]
    pub grid_points: usize,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}", parse_message(path, error))]
    Parse { path: PathBuf, error: ParseError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Observer(#[from] ObserverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

fn parse_message(path: &Path, error: &ParseError) -> String {
    if error.line == 0 {
        format!("{}: {}", path.display(), error.kind)
    } else {
        format!("{}:{error}", path.display())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Observer(
                ObserverError::NotObservable(_)
                | ObserverError::TraceTooShort { .. }
                | ObserverError::InconsistentTrace { .. },
            ) => EXIT_NEGATIVE,
            _ => EXIT_USAGE,
        }
    }
}

/// What a command produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(EXIT_OK, text)
            };
        }
    };
    let json = cli.json;
    match commands::dispatch(cli) {
        Ok(out) => out,
        Err(e) => {
            let stderr = if json {
                let v = serde_json::json!({ "error": e.to_string(), "exit_code": e.exit_code() });
                format!("{v}\n")
            } else {
                format!("error: {e}\n")
            };
            Outcome {
                code: e.exit_code(),
                stdout: String::new(),
                stderr,
            }
        }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

pub(crate) fn read_document(path: &Path) -> Result<NetworkDocument, CliError> {
    parse_document(&read_text(path)?).map_err(|error| CliError::Parse {
        path: path.to_owned(),
        error,
    })
}

pub(crate) fn read_cbn(path: &Path) -> Result<Cbn, CliError> {
    read_document(path)?
        .to_cbn()
        .map_err(|error| CliError::Parse {
            path: path.to_owned(),
            error,
        })
}

/// 1-based variable name.
pub fn var_name(v: usize) -> String {
    format!("x{}", v + 1)
}

pub(crate) fn names(vs: &[usize]) -> Vec<String> {
    vs.iter().map(|&v| var_name(v)).collect()
}

pub(crate) fn name_list(vs: &[usize]) -> String {
    if vs.is_empty() {
        "(none)".into()
    } else {
        names(vs).join(" ")
    }
}
