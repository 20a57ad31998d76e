use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

mod commands;
mod config;
mod report;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file, or input file: exit 2.
    Config(String),
    /// The computation ran but did not converge or certify: exit 1.
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

impl From<theta_extremal::Error> for CliError {
    fn from(e: theta_extremal::Error) -> Self {
        use theta_extremal::Error as E;
        match e {
            E::IllConditioned(_) | E::Merge(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "theta-extremal", version, about = "Moment-constrained concave energies on spheres and improved Sobolev constants")]
pub struct Cli {
    /// TOML file with one key per flag (flags win on conflict).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Θ(m, θ, n): numerical upper bounds, brute force, closed forms.
    Theta {
        #[command(subcommand)]
        cmd: ThetaCmd,
    },
    /// Lower-bound certificate for a measure stored as JSON.
    Certify(CertifyArgs),
    /// Sharp Sobolev-type constants.
    Const {
        #[command(subcommand)]
        cmd: ConstCmd,
    },
    /// Concentrating test functions for the degree-2 constrained inequality.
    Bubble {
        #[command(subcommand)]
        cmd: BubbleCmd,
    },
    /// Config file helpers.
    Config {
        #[command(subcommand)]
        cmd: ConfigCmd,
    },
}

#[derive(Subcommand, Debug)]
pub enum ThetaCmd {
    /// Minimize Σν_i^θ over measures in M_m^c with penalized projected gradient.
    Solve(SolveArgs),
    /// Exhaustive grid search over weight vectors (m = 1 only).
    Bruteforce(BruteforceArgs),
    /// Known closed form, or "unknown".
    ClosedForm(ClosedFormArgs),
}

#[derive(Args, Debug, Default)]
pub struct SolveArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Atoms per restart. Without it, every size from the smallest feasible
    /// support up to 2(n+2) is tried and the best result kept.
    #[arg(long)]
    pub support: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_outer_iters: Option<usize>,
    #[arg(long)]
    pub max_inner_iters: Option<usize>,
    #[arg(long)]
    pub penalty_init: Option<f64>,
    #[arg(long)]
    pub penalty_growth: Option<f64>,
    #[arg(long)]
    pub step_size: Option<f64>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long)]
    pub residual_tol: Option<f64>,
    #[arg(long)]
    pub merge_tol: Option<f64>,
    /// Report path (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BruteforceArgs {
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub max_support: Option<usize>,
    #[arg(long)]
    pub grid_steps: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ClosedFormArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    /// Measure file: {"n": .., "points": [[..], ..], "weights": [..]}.
    #[arg(long)]
    pub measure: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<u32>,
    /// Only needed by --m 2 and --m 1 (bound on Σν_i^θ); defaults to 0.5.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ConstCmd {
    /// S_{n,p} on R^n.
    Sobolev(SobolevArgs),
    /// Sharp constant of the second-order (biharmonic) inequality, n ≥ 5.
    Biharmonic(BiharmonicArgs),
    /// S_{n,p}^p / Θ(m, (n−p)/n, n) for the moment-constrained inequality.
    Improved(ImprovedArgs),
}

#[derive(Args, Debug)]
pub struct SobolevArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Args, Debug)]
pub struct BiharmonicArgs {
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ImprovedArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub m: Option<u32>,
}

#[derive(Subcommand, Debug)]
pub enum BubbleCmd {
    /// Rayleigh quotients of the corrected test function along ε.
    Sweep(SweepArgs),
    /// Compare the Beta-integral limit with (n+2)^{−p/n} S_{n,p}^p.
    IdentityCheck(IdentityArgs),
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Strictly descending, e.g. 1e-2,1e-3,1e-4.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// CSV path; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional JSON report with run metadata and the extra diagnostics.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IdentityArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum ConfigCmd {
    /// Print the accepted config keys per command as JSON.
    PrintSchema,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("THETA_EXTREMAL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t >= 1)
        .ok_or_else(|| CliError::Config(format!("THETA_EXTREMAL_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = configure_threads().and_then(|_| commands::run(cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Config(msg) => eprintln!("error: {msg}"),
                CliError::Numerical(msg) => eprintln!("{msg}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
