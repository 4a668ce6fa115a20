use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use erlang_queue::Method;

#[derive(Debug, Parser)]
#[command(
    name = "erlq",
    version,
    about = "Steady-state solver for M/E_r/c/K queues"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and print its record.
    Solve(SolveArgs),
    /// Mean system size over a grid of traffic densities and queue limits.
    Table(TableArgs),
    /// Discrete-event simulation, optionally compared with the exact solution.
    Simulate(SimulateArgs),
    /// Wall-clock timing sweep over Erlang order and queue limit.
    Bench(BenchArgs),
    /// List the enumerated states.
    States(StatesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Squaring,
    Linear,
    Uniform,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Squaring => Method::Squaring,
            MethodArg::Linear => Method::Linear,
            MethodArg::Uniform => Method::Uniformization,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    /// Erlang order of the service time.
    #[arg(long)]
    pub r: usize,
    /// Number of service channels.
    #[arg(long)]
    pub c: usize,
    /// Maximum queue length (customers in service excluded).
    #[arg(long = "K")]
    pub k: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RateArgs {
    /// Arrival rate.
    #[arg(
        long,
        conflicts_with = "rho",
        required_unless_present = "rho",
        allow_negative_numbers = true
    )]
    pub lambda: Option<f64>,
    /// Traffic density per channel, lambda r / (mu c).
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Rate of one Erlang stage.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mu: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Squaring)]
    pub method: MethodArg,
    /// Convergence threshold for the iterative methods.
    #[arg(long, default_value_t = 1e-12)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub rates: RateArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Print the generator in coordinate format before the record.
    #[arg(long)]
    pub dump_q: bool,
    /// Solve with all three methods and require agreement.
    #[arg(long)]
    pub check_all: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub c: usize,
    /// Traffic densities, one column each.
    #[arg(long, value_delimiter = ',', default_values_t = crate::commands::DEFAULT_RHOS)]
    pub rhos: Vec<f64>,
    /// Queue limits, one row each.
    #[arg(long, value_delimiter = ',', default_values_t = crate::commands::DEFAULT_TABLE_KS)]
    pub ks: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub rates: RateArgs,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Measured simulated time.
    #[arg(long, default_value_t = 1e6)]
    pub horizon: f64,
    /// Discarded simulated time; defaults to 10% of the horizon.
    #[arg(long)]
    pub warmup: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub batches: usize,
    /// Also solve exactly and report whether the interval covers L.
    #[arg(long)]
    pub compare: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 3, 4])]
    pub rs: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = crate::commands::DEFAULT_BENCH_KS)]
    pub ks: Vec<usize>,
    #[arg(long, default_value_t = 6)]
    pub c: usize,
    #[arg(long, default_value_t = 0.9)]
    pub rho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Timed repetitions per cell; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatesArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
