//! The `ergodic` command line.
//!
//! [`run`] parses arguments, loads the JSON inputs, calls into
//! `ergodic_core` and renders a [`RunReport`]. Exit codes: 0 success,
//! 2 invalid input or usage, 3 a finished run whose verdict is
//! inconclusive or whose iteration did not converge.

mod commands;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use report::{InputDigest, RunReport, Trace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// Every library operation a subcommand can reach, as recorded in
/// [`RunReport::operations`].
pub const OPERATIONS: &[&str] = &[
    "validate",
    "telescope",
    "enumerate_paths",
    "transition_matrices",
    "scaled_path_sums",
    "markovianize",
    "cocycle_value",
    "normalized_potential",
    "local_potential",
    "expectation",
    "variation",
    "contraction_epsilon",
    "contraction_epsilon_bruteforce",
    "ratio_bound",
    "check_variation_condition",
    "check_series_condition",
    "variation_decay",
    "solve_state",
    "edge_probabilities",
    "cylinder_mass",
    "g_measure_residual",
    "primitivity_exponent",
    "perron",
    "build_ruelle_matrix",
    "eigen_measure",
    "extend_cylinder_measure",
    "stationary_expectation",
    "walters_check_locally_constant",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "ergodic", version, about = "Unique ergodicity and transfer-operator checks on Bratteli diagrams")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    /// Trace written by `--format csv` (default: the first one).
    #[arg(long, global = true)]
    pub trace: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Level of the seed; defaults to the diagram depth minus the probe delta.
    #[arg(long)]
    pub seed_depth: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub probe_delta: usize,
    /// Level masses are compared on levels `0..=check-level`.
    #[arg(long, default_value_t = 0)]
    pub check_level: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural checks on a diagram.
    Validate { diagram: PathBuf },
    /// Contract a weighted diagram along cut levels.
    Telescope {
        diagram: PathBuf,
        /// Comma-separated, strictly increasing, starting at 0.
        #[arg(long, value_delimiter = ',', required = true)]
        cuts: Vec<usize>,
    },
    /// Variation and divergent-series tests for unique ergodicity.
    CheckUnique {
        diagram: PathBuf,
        #[arg(long, default_value_t = 0)]
        base: usize,
        /// Defaults to the diagram depth.
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Assert that the series of contraction ratios diverges.
        #[arg(long)]
        declare_divergent: bool,
        /// Also compute each contraction coefficient by subset enumeration.
        #[arg(long)]
        bruteforce: bool,
    },
    /// Approximate state of the dimension group.
    State {
        diagram: PathBuf,
        #[command(flatten)]
        state: StateArgs,
    },
    /// Markov measure of the approximate state.
    Measure {
        diagram: PathBuf,
        #[command(flatten)]
        state: StateArgs,
        /// Edge ordinals from level 0, comma-separated; repeatable.
        #[arg(long = "path")]
        paths: Vec<String>,
        /// List the mass of every path of this length.
        #[arg(long)]
        level: Option<usize>,
        /// Cylinder-function JSON for the conditional-expectation residual.
        #[arg(long)]
        function: Option<PathBuf>,
    },
    /// Perron-Frobenius data of a nonnegative matrix.
    Pf {
        matrix: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
    },
    /// Ruelle operator of a locally constant potential on an edge shift.
    Ruelle {
        graph: PathBuf,
        potential: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Edge word, comma-separated; repeatable.
        #[arg(long = "word")]
        words: Vec<String>,
        /// Word-function JSON for stationary expectations.
        #[arg(long)]
        function: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        horizon: usize,
    },
    /// Conditional expectations of a cylinder function.
    Expect {
        diagram: PathBuf,
        function: PathBuf,
        /// Defaults to the diagram depth.
        #[arg(long)]
        horizon: Option<usize>,
    },
}

/// Exit code and the two output streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Failure before a report exists.
#[derive(Debug)]
pub(crate) struct Failure(pub String);

/// Runs one command; `args[0]` is the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let start = Instant::now();
    let (mut report, code) = match commands::dispatch(&cli.command) {
        Ok(r) => r,
        Err(Failure(msg)) => {
            return Outcome { code: EXIT_INVALID, stdout: String::new(), stderr: format!("error: {msg}\n") };
        }
    };
    report.wall_time = start.elapsed().as_secs_f64();
    let stdout = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => match report.to_csv(cli.trace.as_deref()) {
            Ok(s) => s,
            Err(msg) => return Outcome { code: EXIT_INVALID, stdout: String::new(), stderr: format!("error: {msg}\n") },
        },
    };
    let stderr = match code {
        EXIT_INCONCLUSIVE => format!("{}: inconclusive or not converged\n", report.command),
        EXIT_INVALID => format!("{}: input failed validation\n", report.command),
        _ => String::new(),
    };
    Outcome { code, stdout, stderr }
}

/// Drops the `wall_time` line from a JSON report.
pub fn strip_wall_time(json: &str) -> String {
    json.lines()
        .filter(|l| !l.trim_start().starts_with("\"wall_time\""))
        .collect::<Vec<_>>()
        .join("\n")
}
