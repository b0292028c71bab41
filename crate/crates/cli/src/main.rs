//! `netdesign` command-line tool.
//!
//! Exit status is 0 on success, 2 for invalid input (bad flags, bad
//! configuration, degenerate assignments, non-integrable priors) and 1 for
//! runtime failures such as unreadable or unwritable files.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "netdesign",
    version,
    about = "Optimal treatment assignment for network experiments"
)]
pub struct Cli {
    /// Random seed (default: `master_seed` of the configuration, 0 without one).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Study configuration JSON; unknown keys are rejected. Flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "NETDESIGN_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a random network and write it as an edge list.
    GenNetwork(GenNetworkArgs),
    /// Compute a treatment assignment for a network.
    Design(DesignArgs),
    /// Evaluate the risk of an assignment.
    Evaluate(EvaluateArgs),
    /// Run a simulation study and write its reports.
    Simulate(SimulateArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyArg {
    /// Erdos-Renyi G(n, p)
    Er,
    /// Ring lattice with random rewiring
    Sw,
    /// Preferential attachment
    Pl,
    /// Stochastic block model with equal blocks
    Sbm,
}

#[derive(Args, Debug)]
pub struct GenNetworkArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Number of nodes.
    #[arg(long)]
    pub n: usize,
    /// Edge probability for `er` (default: 5 / (n - 1)).
    #[arg(long)]
    pub p: Option<f64>,
    /// Lattice degree for `sw`, even.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Rewiring probability for `sw`.
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    /// Edges per new node for `pl`.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Number of equal-sized blocks for `sbm`.
    #[arg(long, default_value_t = 4)]
    pub blocks: usize,
    /// Within-block probability for `sbm` (default: 16 / n).
    #[arg(long)]
    pub p_in: Option<f64>,
    /// Between-block probability for `sbm` (default: 4 / (3n)).
    #[arg(long)]
    pub p_out: Option<f64>,
    /// Output file; `.json` writes JSON, anything else an edge list.
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Hyper-parameters of the Normal-model prior. Unset values come from
/// `true_prior` of the configuration (defaults 1, 0.5, 3, 1, 2, 1).
#[derive(Args, Debug, Default)]
pub struct PriorArgs {
    /// Mean of the latent-mean prior.
    #[arg(long)]
    pub mu0: Option<f64>,
    /// Standard deviation of the latent-mean prior.
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// Shape of the inverse-gamma prior on the outcome noise variance.
    #[arg(long)]
    pub r_gamma: Option<f64>,
    /// Scale of the inverse-gamma prior on the outcome noise variance.
    #[arg(long)]
    pub lambda_gamma: Option<f64>,
    /// Shape of the inverse-gamma prior on the latent variance.
    #[arg(long)]
    pub r_sigma: Option<f64>,
    /// Scale of the inverse-gamma prior on the latent variance.
    #[arg(long)]
    pub lambda_sigma: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyArg {
    /// Simulated annealing on the integrated MSE
    Optimal,
    /// Completely randomized with floor(n/2) treated
    Balanced,
    /// Randomized within spectral clusters
    Stratified,
    /// Best of per-parameter optima under a discrete prior
    PointPrior,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectiveArg {
    /// Monte-Carlo estimate with fixed draws
    Mc,
    /// Exact integrated MSE of the Normal model
    ClosedForm,
}

#[derive(Args, Debug)]
pub struct DesignArgs {
    /// Network file (edge list or JSON).
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long, value_enum, default_value = "optimal")]
    pub strategy: StrategyArg,
    /// Objective minimized by the optimal strategy.
    #[arg(long, value_enum, default_value = "mc")]
    pub objective: ObjectiveArg,
    #[command(flatten)]
    pub prior: PriorArgs,
    /// Prior draws of the Monte-Carlo objective (default: `n_mc_draws`, 1000).
    #[arg(long)]
    pub n_draws: Option<usize>,
    /// Clusters for the stratified strategy (default: `k_clusters`, 4).
    #[arg(long)]
    pub k_clusters: Option<usize>,
    /// Annealing iterations per restart (default: 200 n).
    #[arg(long)]
    pub iters: Option<usize>,
    /// Annealing restarts (default: 5).
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Point-prior grid JSON: `{"params": [{"mu", "sigma2", "gamma2"}...], "weights": [...]}`.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Also write the JSON result to this file.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelArg {
    /// Integrated MSE under the Normal-model prior
    Prior,
    /// MSE at fixed Normal-model parameters
    Normal,
    /// MSE at fixed Poisson-Gamma parameters
    PoissonGamma,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Network file; not needed with `--explicit-cov`.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Assignment as a JSON list of 0/1.
    #[arg(long)]
    pub assignment: Option<String>,
    #[arg(long, value_enum, default_value = "prior")]
    pub model: ModelArg,
    /// Latent mean of the Normal model.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Latent variance of the Normal model.
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Outcome noise variance of the Normal model.
    #[arg(long, default_value_t = 1.0)]
    pub gamma2: f64,
    /// Gamma shape of the Poisson-Gamma model.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Gamma scale of the Poisson-Gamma model.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[command(flatten)]
    pub prior: PriorArgs,
    /// Prior draws for the Monte-Carlo estimate; 0 skips it.
    #[arg(long, default_value_t = 10_000)]
    pub mc_draws: usize,
    /// Report the bias and variance parts (Normal model).
    #[arg(long)]
    pub decompose: bool,
    /// Covariance matrix JSON (list of rows); reports the variance of the contrast.
    #[arg(long)]
    pub explicit_cov: Option<PathBuf>,
    /// Contrast weights as a JSON list, used with `--explicit-cov`.
    #[arg(long)]
    pub weights: Option<String>,
    /// Also write the JSON result to this file.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyArg {
    /// Optimal vs randomized-balanced vs spectral-stratified
    Comparative,
    /// Optimal designs under the misspecified-prior grid
    Misspec,
    /// Full factorial study and its analysis of variance
    Anova,
    /// Agreement of Monte-Carlo rankings with the exact ranking
    Ranking,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "comparative")]
    pub study: StudyArg,
    /// Directory for the reports.
    #[arg(short = 'o', long, alias = "output", default_value = ".")]
    pub output_dir: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Candidate designs of the ranking study.
    #[arg(long, default_value_t = 10)]
    pub ranking_designs: usize,
    /// Prior draws per estimate in the ranking study.
    #[arg(long, default_value_t = 2000)]
    pub ranking_draws: usize,
    /// Pairs of independent estimates in the ranking study.
    #[arg(long, default_value_t = 100)]
    pub ranking_pairs: usize,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let validation = err
        .chain()
        .find_map(|e| e.downcast_ref::<netdesign::Error>())
        .is_some_and(netdesign::Error::is_validation);
    if validation {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
