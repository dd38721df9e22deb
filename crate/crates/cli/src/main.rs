//! bicheb: bivariate Chebyshev approximation with certified decay and
//! truncation-error bounds.

mod commands;
mod emit;
mod resolve;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use emit::{Emitter, Format};

/// Failure carrying its process exit code: 2 argument error, 3 evaluation
/// error, 4 variation non-convergence, 1 I/O failure.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Eval(String),
    NonConvergence(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Eval(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m)
            | CliError::Eval(m)
            | CliError::NonConvergence(m)
            | CliError::Io(m) => f.write_str(m),
        }
    }
}

const AFTER_HELP: &str = "\
expression grammar (--expr):
  expr   := term (('+' | '-') term)*
  term   := unary (('*' | '/') unary)*
  unary  := '-' unary | power
  power  := atom ('^' integer)*
  atom   := number | 'x' | 'y' | func '(' expr ')' | '(' expr ')'
  func   := 'abs' | 'sin' | 'cos' | 'exp'
Exponents are integer literals; precedence is ^ > unary minus > * / > + -.

exit codes:
  0  success / property certified      2  argument error
  1  I/O failure or uncertified run    3  evaluation error
                                       4  variation non-convergence";

#[derive(Parser)]
#[command(
    name = "bicheb",
    version,
    about = "Bivariate Chebyshev approximation with certified decay and error bounds",
    after_long_help = AFTER_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the primary artifact here (the companion artifact swaps the
    /// file extension); stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Primary artifact format (each command has a natural default).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Suppress the progress summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads for the numeric kernels (default: logical CPUs).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute quadrature coefficients of f on an explicit node grid.
    Approx(ApproxArgs),
    /// Check oracle coefficients against every applicable decay bound.
    DecayAudit(DecayAuditArgs),
    /// Verify the aliasing identity and certify the residual against the
    /// predicted fold-tail bound.
    AliasCheck(AliasCheckArgs),
    /// Measured L1 truncation errors against both a priori bounds over a
    /// degree sweep.
    ErrorReport(ErrorReportArgs),
    /// Drop coefficients under a certified (or magnitude) threshold and
    /// verify the budget.
    Compress(CompressArgs),
    /// List the built-in corpus with classes and variation constants.
    CorpusList,
    /// Estimate variation constants by Gauss–Chebyshev quadrature.
    Variation(VariationArgs),
}

/// Selects the target function.
#[derive(Args, Debug)]
struct FnSelect {
    /// Built-in corpus function (see `bicheb corpus-list`).
    #[arg(long = "fn", value_name = "NAME")]
    name: Option<String>,
    /// Expression in x and y, e.g. "abs(x)*abs(y)".
    #[arg(long, value_name = "TEXT", conflicts_with = "name")]
    expr: Option<String>,
    /// Finite-difference step for partials of expressions (default 1e-4)
    /// and for above-cap corpus remainders (default 1e-2).
    #[arg(long = "fd-h", value_name = "H")]
    fd_h: Option<f64>,
}

#[derive(Args)]
struct ApproxArgs {
    #[command(flatten)]
    func: FnSelect,
    /// Truncation degree along x.
    #[arg(long)]
    dx: usize,
    /// Truncation degree along y.
    #[arg(long)]
    dy: usize,
    /// Nodes along x (default 2*dx+2).
    #[arg(long)]
    nx: Option<usize>,
    /// Nodes along y (default 2*dy+2).
    #[arg(long)]
    ny: Option<usize>,
}

#[derive(Args)]
struct DecayAuditArgs {
    #[command(flatten)]
    func: FnSelect,
    /// Smoothness order along x.
    #[arg(long)]
    k: usize,
    /// Smoothness order along y.
    #[arg(long)]
    l: usize,
    /// Largest x index audited.
    #[arg(long, default_value_t = 64)]
    imax: usize,
    /// Largest y index audited.
    #[arg(long, default_value_t = 64)]
    jmax: usize,
    /// Oracle oversampling factor.
    #[arg(long, default_value_t = 4)]
    oversample: usize,
    /// Relative slack above a bound before a coefficient counts as a
    /// violation.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Grid for numeric variation estimation when no closed form applies.
    #[arg(long = "variation-n", default_value_t = 256)]
    variation_n: usize,
    /// Gauss-Legendre points per axis for the measured L1 error.
    #[arg(long = "l1-grid", default_value_t = 200)]
    l1_grid: usize,
}

#[derive(Args)]
struct AliasCheckArgs {
    #[command(flatten)]
    func: FnSelect,
    /// Nodes along x.
    #[arg(long)]
    nx: usize,
    /// Nodes along y.
    #[arg(long)]
    ny: usize,
    /// Resolved degree along x (must be < nx).
    #[arg(long)]
    dx: usize,
    /// Resolved degree along y (must be < ny).
    #[arg(long)]
    dy: usize,
    /// Fold depth of the truncated aliasing identity.
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    /// Oracle oversampling for the extended exact coefficients.
    #[arg(long, default_value_t = 4)]
    oversample: usize,
    /// Smoothness order along x for the tail bound (default: corpus class).
    #[arg(long)]
    k: Option<usize>,
    /// Smoothness order along y for the tail bound (default: corpus class).
    #[arg(long)]
    l: Option<usize>,
    /// Grid for numeric variation estimation when no closed form applies.
    #[arg(long = "variation-n", default_value_t = 256)]
    variation_n: usize,
}

#[derive(Args)]
struct ErrorReportArgs {
    #[command(flatten)]
    func: FnSelect,
    /// Smoothness order along x (>= 1).
    #[arg(long)]
    k: usize,
    /// Smoothness order along y (>= 1).
    #[arg(long)]
    l: usize,
    /// First degree in the sweep.
    #[arg(long)]
    dmin: usize,
    /// Last degree in the sweep (inclusive).
    #[arg(long)]
    dmax: usize,
    /// Degree increment.
    #[arg(long, default_value_t = 4)]
    step: usize,
    /// Node rule mapping degree to grid size.
    #[arg(long = "n-rule", default_value = "2d+2")]
    n_rule: String,
    /// Oracle oversampling factor.
    #[arg(long, default_value_t = 4)]
    oversample: usize,
    /// Gauss-Legendre points per axis for measured L1 errors.
    #[arg(long = "l1-grid", default_value_t = 200)]
    l1_grid: usize,
    /// Grid for numeric variation estimation when no closed form applies.
    #[arg(long = "variation-n", default_value_t = 256)]
    variation_n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Strategy {
    /// Drop entries whose tightest decay bound is below epsilon.
    Bound,
    /// Drop entries whose computed magnitude is below epsilon.
    Magnitude,
}

#[derive(Args)]
struct CompressArgs {
    #[command(flatten)]
    func: FnSelect,
    /// Coefficient degree along x.
    #[arg(long)]
    dx: usize,
    /// Coefficient degree along y.
    #[arg(long)]
    dy: usize,
    /// Drop threshold.
    #[arg(long)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = Strategy::Bound)]
    strategy: Strategy,
    /// Smoothness order along x (default: corpus class).
    #[arg(long)]
    k: Option<usize>,
    /// Smoothness order along y (default: corpus class).
    #[arg(long)]
    l: Option<usize>,
    /// Oracle oversampling factor.
    #[arg(long, default_value_t = 4)]
    oversample: usize,
    /// Gauss-Legendre points per axis for the budget verification.
    #[arg(long = "l1-grid", default_value_t = 200)]
    l1_grid: usize,
    /// Grid for numeric variation estimation when no closed form applies.
    #[arg(long = "variation-n", default_value_t = 256)]
    variation_n: usize,
}

#[derive(Args)]
struct VariationArgs {
    #[command(flatten)]
    func: FnSelect,
    /// Smoothness order along x.
    #[arg(long)]
    k: usize,
    /// Smoothness order along y.
    #[arg(long)]
    l: usize,
    /// Gauss-Chebyshev points per axis.
    #[arg(long, default_value_t = 256)]
    n: usize,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}

fn run(cli: &Cli) -> i32 {
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let em = Emitter { out: cli.out.clone(), format: cli.format, quiet: cli.quiet };
    let outcome = match &cli.command {
        Command::Approx(a) => commands::approx(a, &em),
        Command::DecayAudit(a) => commands::decay_audit(a, &em),
        Command::AliasCheck(a) => commands::alias_check(a, &em),
        Command::ErrorReport(a) => commands::error_report(a, &em),
        Command::Compress(a) => commands::compress(a, &em),
        Command::CorpusList => commands::corpus_list(&em),
        Command::Variation(a) => commands::variation(a, &em),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}
