use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use tabeval_core::generators::{generate_with_components, GeneratorKind, DEFAULT_COMPONENTS};
use tabeval_core::ml_utility::{Learner, LearnerKind};
use tabeval_core::report::{emit_plot_data, emit_report, run_evaluation, EvalConfig, ReportFormat};
use tabeval_core::tabular::{load_csv, write_csv, CsvOptions};
use tabeval_core::{Error, Result, Schema};

#[derive(Parser)]
#[command(name = "tabeval", version, about = "Evaluate synthetic tabular data against its source")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured metric and write the reports.
    Evaluate(EvaluateArgs),
    /// Fit a baseline generator and write synthetic rows as CSV.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output_dir` in the config.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "both", value_parser = ["json", "markdown", "both"])]
    format: String,
    /// Skip the plots/ CSV files.
    #[arg(long)]
    no_plots: bool,
    /// Overrides the target column.
    #[arg(long)]
    target: Option<String>,
    /// Replaces the configured learners; repeat for several.
    #[arg(long = "learner", value_parser = ["logistic_regression", "k_nearest_neighbors"])]
    learners: Vec<String>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = ["gmm", "copula", "random"])]
    model: String,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON schema for the input; inferred when absent.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Mixture components for `gmm`.
    #[arg(long, default_value_t = DEFAULT_COMPONENTS)]
    k: usize,
    /// Field separator of both input and output.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let mut cfg = EvalConfig::from_file(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = args.output {
        cfg.output_dir = Some(o);
    }
    if let Some(t) = args.target {
        cfg.target = t;
    }
    if !args.learners.is_empty() {
        cfg.learners = args
            .learners
            .iter()
            .map(|l| {
                let kind = match l.as_str() {
                    "k_nearest_neighbors" => LearnerKind::KNearestNeighbors,
                    _ => LearnerKind::LogisticRegression,
                };
                Learner { kind, ..Default::default() }
            })
            .collect();
    }
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("tabeval-out"));
    let report = run_evaluation(&cfg)?;
    let mut written = emit_report(&report, args.format.parse::<ReportFormat>()?, &dir)?;
    if !args.no_plots {
        written.extend(emit_plot_data(&report, &dir)?);
    }
    let timings = dir.join("timings.json");
    let text = serde_json::to_string_pretty(&report.timings)? + "\n";
    std::fs::write(&timings, text).map_err(|e| Error::Io { path: timings.clone(), source: e })?;
    for p in written {
        info!("wrote {}", p.display());
    }
    info!("finished in {:.1} s", report.timings.total_seconds);
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let kind: GeneratorKind = args.model.parse()?;
    if !args.delimiter.is_ascii() {
        return Err(Error::InvalidArgument("delimiter must be a single ASCII character".into()));
    }
    let opts = CsvOptions { delimiter: args.delimiter as u8 };
    let schema = args.schema.map(|p| Schema::from_json_file(&p)).transpose()?;
    let data = load_csv(&args.input, schema.as_ref(), &opts)?;
    let synthetic = generate_with_components(kind, &data, args.n, args.seed, args.k)?;
    match args.output {
        Some(p) => {
            let f = std::fs::File::create(&p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
            write_csv(&synthetic, f, &opts)?;
            info!("wrote {} rows to {}", args.n, p.display());
        }
        None => write_csv(&synthetic, std::io::stdout().lock(), &opts)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let result = match Cli::parse().command {
        Command::Evaluate(args) => evaluate(args),
        Command::Generate(args) => generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::FAILURE
        }
    }
}
