//! Command-line pipeline: scenario translation, map sampling, planning, goal
//! inference, and the evaluation harness, scriptable end to end.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "invplan",
    version,
    about = "Goal inference over grid-world gameshow scenarios",
    after_help = "Exit codes: 1 usage, 2 schema/parse, 3 sampling/planning, 4 transport, 5 internal."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer the goal posterior for one stimulus (or a raw scenario record)
    Infer(InferArgs),
    /// Run the whole corpus and correlate with human judgments
    Eval(EvalArgs),
    /// Query an LLM directly for 1-7 ratings (the baseline protocol)
    Baseline(BaselineArgs),
    /// Dump the optimal plan to one trophy (debugging aid)
    Plan(PlanArgs),
    /// Render the sampled map as an ASCII grid (debugging aid)
    SampleMap(SampleMapArgs),
}

/// Flags shared by every pipeline-running subcommand.
#[derive(Args, Clone)]
struct PipelineOpts {
    /// Corpus file (JSON array of stimulus records)
    #[arg(long, default_value = "data/corpus.json")]
    corpus: PathBuf,
    /// Fixtures directory with per-stimulus canned translations
    #[arg(long, default_value = "fixtures")]
    fixtures: PathBuf,
    /// Rationality (inverse temperature) of the agent model
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Probability floor for observations impossible under a goal
    #[arg(long, default_value_t = 1e-6)]
    epsilon_floor: f64,
    /// Macro-step budget for subgoal-condition enumeration
    #[arg(long, default_value_t = 8)]
    subgoal_horizon: u32,
    /// Master seed; all randomness derives from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use a live chat-completion endpoint instead of fixtures
    #[arg(long)]
    live: bool,
    /// Model name for live translation
    #[arg(long, default_value = "gpt-3.5-turbo")]
    llm_model: String,
    /// Base URL of the chat-completions API
    #[arg(long, default_value = "https://api.openai.com/v1")]
    api_base: String,
    /// Sampling temperature for live translation
    #[arg(long, default_value_t = 1.2)]
    temperature: f64,
    /// Translation attempts before giving up
    #[arg(long, default_value_t = 10)]
    max_rejections: u32,
    /// Output directory for results, logs, and the run manifest
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct InferArgs {
    #[command(flatten)]
    common: PipelineOpts,
    /// Stimulus id from the corpus
    #[arg(long, conflicts_with = "scenario")]
    stimulus: Option<String>,
    /// Path to a scenario record to infer on directly (bypasses translation)
    #[arg(long)]
    scenario: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: PipelineOpts,
    /// Human judgment CSV (participant_id,stimulus_id,trophy,rating)
    #[arg(long)]
    human: PathBuf,
    /// Bootstrap resamples for the confidence intervals
    #[arg(long, default_value_t = 1000)]
    bootstrap_samples: u32,
    /// Drop participants whose top-goal picks agree with the consensus on
    /// less than this fraction of their stimuli
    #[arg(long)]
    exclude_below: Option<f64>,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    common: PipelineOpts,
    /// Well-formed samples to collect per stimulus
    #[arg(long, default_value_t = 30)]
    samples: u32,
    /// Prompt template file; `{stimulus}` is substituted per stimulus
    #[arg(long)]
    template: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    common: PipelineOpts,
    /// Stimulus id from the corpus
    #[arg(long)]
    stimulus: String,
    /// Trophy to plan toward
    #[arg(long)]
    goal: String,
}

#[derive(Args)]
struct SampleMapArgs {
    #[command(flatten)]
    common: PipelineOpts,
    /// Stimulus id from the corpus
    #[arg(long)]
    stimulus: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems (and --help/--version) all leave through here.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Infer(args) => commands::infer(args),
        Command::Eval(args) => commands::eval(args),
        Command::Baseline(args) => commands::baseline(args),
        Command::Plan(args) => commands::plan(args),
        Command::SampleMap(args) => commands::sample_map(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
