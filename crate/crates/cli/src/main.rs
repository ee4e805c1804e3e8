use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hopca::HopcaError;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "hopca", version, about = "Higher-order PCA for third-order tensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decompose a tensor and write factors, weights or core, and diagnostics.
    Decompose(DecomposeArgs),
    /// Draw a simulated data set.
    Simulate(SimulateArgs),
    /// Support recovery and signal MSE over replicates.
    Table(TableArgs),
    /// Averaged ROC curves over replicates.
    Roc(RocArgs),
    /// Cumulative projected variance explained by a fitted model.
    Varex(VarexArgs),
    /// BIC over a λ grid for one factor of a rank-one fit.
    Bic(BicArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DecomposeMethod {
    CpAls,
    Tpa,
    Hosvd,
    Hooi,
    SparseCpTpa,
    SparseCpAls,
    SparseHosvd,
    SparseHooi,
    Gcp,
    SparseGcp,
    Fpca,
    FpcaHalfsmooth,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PenaltyArg {
    Lasso,
    Nonneg,
    Group,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SmootherArg {
    Second,
    Fourth,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SignalArg {
    High,
    Low,
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long, value_enum)]
    method: DecomposeMethod,
    /// Components (CP) or ranks K,K,K (Tucker).
    #[arg(long, default_value_t = 1)]
    rank: usize,
    /// Fixed level, comma-separated grid for BIC, or `bic`.
    #[arg(long)]
    lambda_u: Option<String>,
    #[arg(long)]
    lambda_v: Option<String>,
    #[arg(long)]
    lambda_w: Option<String>,
    #[arg(long, value_enum, default_value_t = PenaltyArg::Lasso)]
    penalty: PenaltyArg,
    /// Block length of contiguous groups for `--penalty group`.
    #[arg(long, default_value_t = 5)]
    group_size: usize,
    #[arg(long)]
    q1: Option<PathBuf>,
    #[arg(long)]
    q2: Option<PathBuf>,
    #[arg(long)]
    q3: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = SmootherArg::Second)]
    smoother: SmootherArg,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    orthogonalize: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=4))]
    scenario: u32,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    sparsity: f64,
    #[arg(long, value_enum, default_value_t = SignalArg::High)]
    signal: SignalArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Omit the noise term.
    #[arg(long)]
    noiseless: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Comma-separated method names; all methods when omitted.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    /// Comma-separated grid values.
    #[arg(long)]
    grid: Option<String>,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
}

#[derive(Args, Debug)]
struct RocArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
}

#[derive(Args, Debug)]
struct VarexArgs {
    #[arg(long)]
    input: PathBuf,
    /// Directory written by `decompose`.
    #[arg(long)]
    model: PathBuf,
    /// Largest number of leading columns; all columns when omitted.
    #[arg(long)]
    k: Option<usize>,
    /// Directory for varex.csv; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BicArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    mode: u8,
    /// Comma-separated λ values; the default log grid when omitted.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    nonneg: bool,
    /// Directory for bic.csv; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(HopcaError),
}

impl From<HopcaError> for CliError {
    fn from(e: HopcaError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e {
                HopcaError::Io(_) | HopcaError::Csv(_) | HopcaError::Parse(_) => 2,
                HopcaError::Dimension(_) | HopcaError::InvalidArgument(_) => 1,
                HopcaError::NonFinite(_)
                | HopcaError::NotPositiveDefinite { .. }
                | HopcaError::NotPositiveSemiDefinite { .. }
                | HopcaError::NotSymmetric(_)
                | HopcaError::ZeroTensor => 3,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Decompose(a) => commands::decompose(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Table(a) => commands::table(a.exp),
        Command::Roc(a) => commands::roc(a.exp),
        Command::Varex(a) => commands::varex(a),
        Command::Bic(a) => commands::bic(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
