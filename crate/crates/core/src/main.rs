use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use artifact_trust::config::RunConfig;
use artifact_trust::model::Variant;
use artifact_trust::stages::{run_stage, Overrides, Stage};

#[derive(Parser)]
#[command(name = "artifact-trust", version, about = "Perturb code artifacts, elicit audit traces, and score them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract and filter candidate samples.
    Curate(StageArgs),
    /// Build the seven-variant matrix.
    Perturb(StageArgs),
    /// Query every configured endpoint and store traces.
    Elicit(StageArgs),
    /// Join traces with ground truth and compute metrics.
    Evaluate(StageArgs),
    /// Write report tables.
    Report(StageArgs),
}

#[derive(Args)]
struct StageArgs {
    #[arg(long)]
    config: PathBuf,
    /// Continue an existing trace store.
    #[arg(long)]
    resume: bool,
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_variant)]
    variants: Option<Vec<Variant>>,
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::ALL
        .into_iter()
        .find(|v| v.as_str().eq_ignore_ascii_case(s))
        .ok_or_else(|| format!("unknown variant `{s}`"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, args) = match cli.command {
        Command::Curate(a) => (Stage::Curate, a),
        Command::Perturb(a) => (Stage::Perturb, a),
        Command::Elicit(a) => (Stage::Elicit, a),
        Command::Evaluate(a) => (Stage::Evaluate, a),
        Command::Report(a) => (Stage::Report, a),
    };
    let overrides = Overrides {
        resume: args.resume,
        models: args.models,
        variants: args.variants,
        limit: args.limit,
        seed: args.seed,
        out: args.out,
    };
    let result = RunConfig::load(&args.config)
        .map_err(Into::into)
        .and_then(|config| run_stage(stage, config, &overrides));
    match result {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string_pretty(&e.to_json(stage)).expect("failure serializes"));
            ExitCode::FAILURE
        }
    }
}
