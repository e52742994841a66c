mod commands;
mod data;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Version of the JSON documents written to stdout.
pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "COPULA_PMI_THREADS";

#[derive(Parser)]
#[command(name = "copula-pmi", version, about = "Measure-inducing dependence: checks, estimates and tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a parametric copula for PMI/NMI on a grid.
    Check(CheckArgs),
    /// Estimate concordance measures from a two-column CSV file.
    Estimate(EstimateArgs),
    /// Test a sample for PMI or NMI.
    Test(TestArgs),
    /// Run a simulation study and write its CSV table.
    Simulate(SimulateArgs),
}

#[derive(Args)]
pub struct FamilyArgs {
    /// Copula family.
    #[arg(long)]
    pub family: FamilyName,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FamilyName {
    Independence,
    Upper,
    Lower,
    MGamma,
    V,
    /// `alpha M_Γ + (1 - alpha) Π`.
    Mix,
    Gaussian,
    Frank,
    Fgm,
    FgmCubic,
    Frechet,
    MarshallOlkin,
    Clayton,
    Gumbel,
    Amh,
    Joe,
    /// Extreme-value copula with a piecewise-linear Pickands function that is PQD but not PMI.
    EvcCounterexample,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Volume,
    Kernel,
    Density,
    Pqd,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Pmi,
    Nmi,
}

#[derive(Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub criterion: CriterionArg,
    /// Grid size m.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long, value_enum, default_value = "pmi")]
    pub direction: DirectionArg,
    /// Slack tolerance; defaults to one matched to the copula's accuracy.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TiesArg {
    Error,
    Jitter,
}

#[derive(Args)]
pub struct InputArgs {
    /// Two-column CSV file (header optional).
    #[arg(long)]
    pub input: PathBuf,
    /// 1-based indices of the two columns to use.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [1, 2])]
    pub columns: Vec<usize>,
    #[arg(long, value_enum, default_value = "error")]
    pub ties: TiesArg,
    /// Seed for every random choice; generated and reported when absent.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Rho,
    Gamma,
    #[value(name = "kappaV", alias = "kappa-v")]
    KappaV,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Ec,
    Ecc,
    Both,
}

#[derive(Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub measure: MeasureArg,
    #[arg(long, value_enum, default_value = "both")]
    pub estimator: EstimatorArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairArg {
    #[value(name = "T1", alias = "t1")]
    T1,
    #[value(name = "T2", alias = "t2")]
    T2,
    #[value(name = "T3", alias = "t3")]
    T3,
    #[value(name = "all")]
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Ec,
    Ecc,
}

#[derive(Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub pair: PairArg,
    #[arg(long, value_enum, default_value = "pmi")]
    pub direction: DirectionArg,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, value_enum, default_value = "ec")]
    pub estimator: KindArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyArg {
    Rejection,
    Variance,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyFamilyArg {
    Gaussian,
    Frank,
    Fgm,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub study: StudyArg,
    #[arg(long, value_enum)]
    pub family: StudyFamilyArg,
    /// Comma-separated parameter grid.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub params: Vec<f64>,
    /// Comma-separated sample sizes.
    #[arg(long = "n", value_delimiter = ',', required = true)]
    pub ns: Vec<usize>,
    /// Repetitions per cell.
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Bootstrap replicates per test.
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [PairArg::All])]
    pub pairs: Vec<PairArg>,
    #[arg(long, value_enum, default_value = "both")]
    pub estimator: EstimatorArg,
    #[arg(long, value_enum, default_value = "pmi")]
    pub direction: DirectionArg,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

/// Result of a command that completed without a usage or data error.
pub enum Outcome {
    Pass,
    Fail,
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Check(a) => commands::check(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Test(a) => commands::test(a),
        Command::Simulate(a) => commands::simulate(a),
    });
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
