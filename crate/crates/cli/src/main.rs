use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use ideofactor::baselines::Method;
use ideofactor::data::GraphMode;

mod error;
mod fit;
mod grid;
mod inputs;
mod serve;
mod views;

use error::CliError;

#[derive(Parser)]
#[command(name = "ideofactor", version, about = "Ideology and popularity scores from joint user/source factorization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a planted two-block instance as input files.
    Generate(GenerateArgs),
    /// Fit factors and write factors.json, ids.json, report.json, manifest.json.
    Fit(FitArgs),
    /// Re-run a fit from its manifest.
    Replay(ReplayArgs),
    /// Choose alpha and beta against a validation ground truth.
    Gridsearch(GridArgs),
    /// Ideology, popularity and cluster per user and source.
    Score(ScoreArgs),
    /// Compare predicted scores or labels with a ground truth.
    Eval(EvalArgs),
    /// Sample sources for a user inside a tolerance box.
    Recommend(RecommendArgs),
    /// Write the ideology-popularity space JSON, optionally serving it over HTTP.
    ExportSpace(ExportSpaceArgs),
}

#[derive(Args, Clone)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Clone)]
pub struct InputArgs {
    /// User-user edge list (or follow list with --graph-mode follow).
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long, default_value = "retweet-count")]
    pub graph_mode: GraphMode,
    /// User-source engagement counts.
    #[arg(long)]
    pub engagement: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 200)]
    pub n_users: usize,
    #[arg(long, default_value_t = 60)]
    pub m_sources: usize,
    #[arg(long, default_value_t = 0.5)]
    pub block_fraction: f64,
    #[arg(long, default_value_t = 0.10)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.01)]
    pub p_out: f64,
    #[arg(long, default_value_t = 3.0)]
    pub lambda_in: f64,
    #[arg(long, default_value_t = 0.2)]
    pub lambda_out: f64,
    #[arg(long, default_value_t = 0.15)]
    pub ideology_spread: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct FitArgs {
    #[arg(long, default_value = "ifd")]
    pub method: Method,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub inputs: InputArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub inputs: InputArgs,
    /// Validation ground truth (`id,score`).
    #[arg(long, required = true)]
    pub truth: PathBuf,
    #[arg(long, default_value = "users")]
    pub target: views::Target,
    #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.1,1,10,100")]
    pub alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.1,1,10,100")]
    pub betas: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct RunArgs {
    /// Directory written by `fit`.
    #[arg(long)]
    pub run: PathBuf,
    /// Anchor scores (`id,score`) used to orient the latent axes. Repeatable.
    #[arg(long)]
    pub truth: Vec<PathBuf>,
    /// Scale factor columns to unit L1 mass before scoring.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Score table from `score`, or an `id,score` CSV.
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, default_value = "users")]
    pub target: views::Target,
    #[arg(long, default_value = "unknown")]
    pub method: String,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Engagement file; enables the popularity-vs-volume correlation.
    #[arg(long)]
    pub engagement: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct SpaceSource {
    /// Space JSON from `export-space`.
    #[arg(long, conflicts_with_all = ["run", "truth", "normalize"])]
    pub space: Option<PathBuf>,
    #[arg(long)]
    pub run: Option<PathBuf>,
    #[arg(long)]
    pub engagement: Option<PathBuf>,
    #[arg(long)]
    pub truth: Vec<PathBuf>,
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Args)]
pub struct RecommendArgs {
    #[command(flatten)]
    pub source: SpaceSource,
    #[arg(long)]
    pub user: String,
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub exclude_consumed: bool,
    /// Weight every source by the Gaussians without cutting at the box.
    #[arg(long)]
    pub no_truncate: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ExportSpaceArgs {
    #[command(flatten)]
    pub source: SpaceSource,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Serve GET /space and GET /recommend on 127.0.0.1:<port> (0 picks a free port).
    #[arg(long)]
    pub serve: Option<u16>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(a) => inputs::cmd_generate(&a),
        Command::Fit(a) => fit::cmd_fit(&a),
        Command::Replay(a) => fit::cmd_replay(&a),
        Command::Gridsearch(a) => grid::cmd_gridsearch(&a),
        Command::Score(a) => views::cmd_score(&a),
        Command::Eval(a) => views::cmd_eval(&a),
        Command::Recommend(a) => views::cmd_recommend(&a),
        Command::ExportSpace(a) => serve::cmd_export_space(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
