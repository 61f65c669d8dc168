mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hprr_core::prefit::CrmMode;
use hprr_core::EstimatorId;
use serde::Serialize;

/// Batch tooling for peer-review reward scoring, weight fitting and corpus curation.
#[derive(Parser)]
#[command(name = "hprr", version, about)]
struct Cli {
    /// Seed for every random choice; echoed in output headers.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Worker threads for per-record work (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a review corpus into metric vectors and rewards.
    Score(ScoreArgs),
    /// Fit metric weights from pairwise preferences.
    Fit(FitArgs),
    /// Keep the reviews above the 90th percentile of uniform reward.
    Curate(CurateArgs),
    /// Write user/assistant fine-tuning pairs.
    ExportSft(ExportArgs),
    /// Per-system means, normalized profiles and reward histograms.
    Analyze(AnalyzeArgs),
    /// Score a single review/manuscript pair and show the alignment.
    Meteor(MeteorArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ScorerKind {
    Lexicon,
    Ingest,
}

#[derive(Args)]
pub struct ScorerArgs {
    #[arg(long, value_enum, default_value_t = ScorerKind::Lexicon)]
    scorer: ScorerKind,

    /// Sentence-label file for `--scorer ingest`.
    #[arg(long, required_if_eq("scorer", "ingest"))]
    labels: Option<PathBuf>,

    /// Cue lexicon JSON for `--scorer lexicon`.
    #[arg(long, env = "HPRR_LEXICON")]
    lexicon: Option<PathBuf>,
}

#[derive(Args)]
pub struct ScoreArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,

    /// `uniform`, `human`, or a path to a weight config or fit output.
    #[arg(long, default_value = "uniform")]
    weights: String,

    /// Estimator whose weights are taken from a fit output.
    #[arg(long, default_value = "abt")]
    estimator: EstimatorId,

    /// System label for records that carry none.
    #[arg(long, default_value = "Human")]
    system: String,

    #[command(flatten)]
    scorer: ScorerArgs,
}

#[derive(Args)]
pub struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,

    #[arg(long, value_delimiter = ',', default_values = ["bt", "abt", "crm"])]
    estimators: Vec<EstimatorId>,

    #[arg(long, default_value_t = 5)]
    folds: usize,

    /// Skip cross-validation.
    #[arg(long)]
    no_cv: bool,

    #[arg(long, default_value = "soft")]
    crm_mode: CrmMode,

    #[arg(long, default_value_t = 1e-12)]
    crm_epsilon: f64,

    #[arg(long, default_value_t = 0.1)]
    crm_lambda: f64,

    /// Laplace smoothing constant.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
}

#[derive(Args)]
pub struct CurateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,

    /// Curation report (JSON); printed to stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,

    /// Tag whose values get separate thresholds.
    #[arg(long)]
    group_by: Option<String>,

    #[command(flatten)]
    scorer: ScorerArgs,
}

#[derive(Args)]
pub struct ExportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Scored reviews from `hprr score`.
    #[arg(long)]
    input: PathBuf,

    /// Per-system summary CSV.
    #[arg(long)]
    output: PathBuf,

    /// Normalized-profile CSV.
    #[arg(long)]
    profile: Option<PathBuf>,

    /// Reward histogram CSV.
    #[arg(long)]
    histogram: Option<PathBuf>,

    /// System for the histogram (default: the first one seen).
    #[arg(long)]
    histogram_system: Option<String>,

    #[arg(long, default_value_t = 20)]
    bins: usize,

    /// Histogram range as `LOW,HIGH`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    range: Option<Vec<f64>>,
}

#[derive(Args)]
pub struct MeteorArgs {
    #[arg(long, required_unless_present = "review_file", conflicts_with = "review_file")]
    review: Option<String>,
    #[arg(long)]
    review_file: Option<PathBuf>,
    #[arg(long, required_unless_present = "manuscript_file", conflicts_with = "manuscript_file")]
    manuscript: Option<String>,
    #[arg(long)]
    manuscript_file: Option<PathBuf>,
}

/// One entry of the error summary printed on failure.
#[derive(Debug, Serialize)]
pub struct Failure {
    pub context: String,
    pub message: String,
}

impl Failure {
    pub fn new(context: impl Into<String>, message: impl ToString) -> Self {
        Self { context: context.into(), message: message.to_string() }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Score(_) => "score",
            Command::Fit(_) => "fit",
            Command::Curate(_) => "curate",
            Command::ExportSft(_) => "export-sft",
            Command::Analyze(_) => "analyze",
            Command::Meteor(_) => "meteor",
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let name = cli.command.name();

    let failures = match run(cli) {
        Ok(failures) => failures,
        Err(e) => vec![Failure::new("fatal", format!("{e:#}"))],
    };
    if failures.is_empty() {
        return ExitCode::SUCCESS;
    }
    let summary = serde_json::json!({ "status": "error", "command": name, "errors": failures });
    eprintln!("{summary}");
    ExitCode::FAILURE
}

fn run(cli: Cli) -> anyhow::Result<Vec<Failure>> {
    if let Some(n) = cli.workers {
        if n == 0 {
            anyhow::bail!("--workers must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let seed = cli.seed;
    match cli.command {
        Command::Score(args) => commands::score(&args, seed),
        Command::Fit(args) => commands::fit(&args, seed),
        Command::Curate(args) => commands::curate(&args, seed),
        Command::ExportSft(args) => commands::export_sft(&args),
        Command::Analyze(args) => commands::analyze(&args, seed),
        Command::Meteor(args) => commands::meteor(&args),
    }
}
