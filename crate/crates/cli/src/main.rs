mod commands;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use biharm_core::fields::{case_from_spec, CaseDefinition, CaseFile};
use biharm_core::Error;

/// Biharmonic Dirichlet problem on the unit disk: solutions, constants and
/// numerical verification.
#[derive(Debug, Parser)]
#[command(name = "biharm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Constant table for (K, ‖φ‖∞, ‖g‖∞).
    Constants(ConstantsArgs),
    /// Evaluate the solution on a polar grid.
    Solve(SolveArgs),
    /// Run the invariant suite for a case.
    Verify(VerifyArgs),
    /// Seeded Lipschitz ratio scan with a log-ratio histogram.
    Scan(ScanArgs),
    /// Kernel quadrature against closed-form oracles.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Polar grid `RxT`: radii by angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub n_r: usize,
    pub n_theta: usize,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (r, t) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected RxT, got '{s}'"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| format!("'{v}' is not a positive integer"))
        };
        Ok(Self {
            n_r: parse(r)?,
            n_theta: parse(t)?,
        })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n_r, self.n_theta)
    }
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct CaseSource {
    /// Catalog case, optionally with parameters: `example-4.1:gamma=6,beta_arg=0.3`.
    #[arg(long = "case")]
    pub name: Option<String>,
    /// JSON case file.
    #[arg(long = "case-file")]
    pub file: Option<PathBuf>,
}

impl CaseSource {
    pub fn load(&self) -> Result<CaseDefinition, CliError> {
        match (&self.name, &self.file) {
            (Some(n), _) => case_from_spec(n).map_err(CliError::usage),
            (None, Some(p)) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
                let file: CaseFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("invalid case file {}: {e}", p.display())))?;
                CaseDefinition::from_file(file).map_err(CliError::usage)
            }
            (None, None) => Err(CliError::Usage("one of --case or --case-file is required".into())),
        }
    }

    pub fn describe(&self) -> String {
        match (&self.name, &self.file) {
            (Some(n), _) => n.clone(),
            (None, Some(p)) => p.display().to_string(),
            (None, None) => String::new(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct ConstantsArgs {
    /// Dilatation K ≥ 1.
    #[arg(long = "k", allow_negative_numbers = true)]
    pub k: f64,
    #[arg(long = "phi-norm", default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi_norm: f64,
    #[arg(long = "g-norm", default_value_t = 0.0, allow_negative_numbers = true)]
    pub g_norm: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub case: CaseSource,
    #[arg(long, default_value = "32x64")]
    pub grid: Grid,
    /// Outermost grid radius.
    #[arg(long = "r-max", default_value_t = 0.95)]
    pub r_max: f64,
    /// Also evaluate the Laplacian.
    #[arg(long)]
    pub laplacian: bool,
    /// Threshold on the error against the closed form.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Field CSV path when the report is JSON.
    #[arg(long = "field-out")]
    pub field_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub case: CaseSource,
    #[arg(long, default_value = "16x32")]
    pub grid: Grid,
    #[arg(long, default_value_t = 10_000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Threshold on the representation error.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub case: CaseSource,
    #[arg(long, default_value_t = 10_000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Restrict sampling to the disk of this radius.
    #[arg(long = "near-origin")]
    pub near_origin: Option<f64>,
    /// Histogram bin width in log10(ratio).
    #[arg(long = "bin-width", default_value_t = 0.01)]
    pub bin_width: f64,
    /// Histogram CSV path when the report is JSON.
    #[arg(long = "hist-out")]
    pub hist_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    /// Threshold on the kernel series discrepancy.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or inputs: exit 2.
    Usage(String),
    /// Computation or I/O failure: exit 1.
    Failed(String),
}

impl CliError {
    pub fn usage(e: Error) -> Self {
        Self::Usage(e.to_string())
    }

    pub fn failed(e: impl fmt::Display) -> Self {
        Self::Failed(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let start = Instant::now();
    let outcome = match &cli.command {
        Command::Constants(a) => commands::constants(a),
        Command::Solve(a) => commands::solve(a),
        Command::Verify(a) => commands::verify(a),
        Command::Scan(a) => commands::scan(a),
        Command::Selftest(a) => commands::selftest(a),
    };
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
