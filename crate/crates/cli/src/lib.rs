//! Command-line front end for the `blaschke` checks.
//!
//! Exit codes: 0 when every selected check passes, 1 when one fails, 2 on any
//! configuration or evaluation error.

pub mod config;
pub mod report;
pub mod run;
pub mod specs;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "blaschke", version, about = "Checks volume-product inequalities for Minkowski and Asplund endomorphisms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run geometric (convex body) or functional (log-concave) checks.
    Verify {
        #[arg(value_enum)]
        kind: Kind,
        #[command(flatten)]
        opts: Opts,
    },
    /// Closed-form and pipeline volume products of the unbounded family.
    Counterexample {
        #[command(flatten)]
        opts: Opts,
    },
    /// Merge result CSV files (or directories of them) into a summary.
    Report {
        /// Result files or directories; directories contribute every report CSV they contain.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output directory (default: OUTPUT_DIR or the current directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one check along a one-parameter family probing its equality case.
    Sweep {
        #[arg(long, value_enum)]
        family: Family,
        /// Family parameters: ellipsoid axis ratio or skew strength.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Geometric,
    Functional,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Semi-axes `(r, 1, ..., 1)`.
    Ellipsoid,
    /// Gaussian with a one-sided quadratic bump of strength `t`.
    Skew,
}

/// Flags shared by the computing subcommands; each may also come from `--config`.
#[derive(Args, Debug, Clone, Default)]
pub struct Opts {
    #[arg(long)]
    pub dim: Option<usize>,
    /// Check id or group: thm2, chain, geometric, functional, all.
    #[arg(long)]
    pub id: Option<String>,
    /// Minkowski endomorphism: sigma, delta, pi1, J, file:<json>.
    #[arg(long)]
    pub endo: Option<String>,
    /// Zonal measure for the Asplund endomorphism: [<factor>*]sigma|nu|equator|file:<json>.
    #[arg(long)]
    pub mu: Option<String>,
    /// Body: ball[:r=..], cube, simplex, ellipsoid:axes=.., random-polytope[:k=..], Kc[:c=..], Lc[:c=..], file:<json>.
    #[arg(long)]
    pub body: Option<String>,
    /// Log-concave function: gaussian[:a=..][:y=..], indicator:<body>, norm-p:<body>:p=.., skew[:t=..], random-gaussian, file:<grid>.
    #[arg(long)]
    pub f: Option<String>,
    /// Comma-separated parameters of the unbounded family.
    #[arg(long)]
    pub c: Option<String>,
    /// Seed, list `1,2,3` or half-open range `0..100`.
    #[arg(long)]
    pub seed: Option<String>,
    /// Sphere quadrature resolution (geometric) or nodes per axis (functional).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Relative tolerance overriding the per-check default.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads for independent checks.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory (default: OUTPUT_DIR or the current directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Treat integration tail-bound violations as errors.
    #[arg(long)]
    pub strict: bool,
    /// key=value file supplying any of the flags above; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match run::dispatch(cli.command) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}
