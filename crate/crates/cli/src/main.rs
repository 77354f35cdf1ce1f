mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "termkit",
    version,
    about = "Term extraction evaluation and dataset tooling"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalOpts {
    /// Worker threads for parallel stages [default: available parallelism]
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for a bare `mock:` endpoint
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Suppress diagnostics and side reports on stderr
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score predictions against gold at corpus or document level
    Eval(EvalArgs),
    /// Expand predictions with document and/or corpus consistency
    Consistency(ConsistencyArgs),
    /// k-NN overlap between embedded datasets and shared-term counts
    Overlap(OverlapArgs),
    /// Median term length and median term count per document
    Stats(StatsArgs),
    /// Cohen's kappa between two raters
    Kappa(KappaArgs),
    /// Build a conversation dataset from NER records and abstracts
    BuildDataset(BuildDatasetArgs),
    /// Assemble a few-shot extraction prompt
    Fewshot(FewshotArgs),
    /// Check a run manifest's digests against the files on disk
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GranularityArg {
    Corpus,
    Doc,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Type,
    Occurrence,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Json,
    Tsv,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapPolicyArg {
    Greedy,
    Allow,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MatchOpts {
    /// Compare terms without case folding
    #[arg(long)]
    pub case_sensitive: bool,
    /// Allow matches that start or end inside a word
    #[arg(long)]
    pub no_word_boundary: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// Gold spans (JSONL: doc_id, surface, start, end)
    #[arg(long, conflicts_with = "gold_iob")]
    pub gold: Option<PathBuf>,
    /// Gold spans as IOB (file or directory)
    #[arg(long)]
    pub gold_iob: Option<PathBuf>,
    /// Corpus-level gold term list (TSV, first column)
    #[arg(long)]
    pub gold_terms: Option<PathBuf>,
    /// Predictions (JSONL: term-list and/or span records)
    #[arg(
        long,
        conflicts_with = "pred_iob",
        required_unless_present = "pred_iob"
    )]
    pub pred: Option<PathBuf>,
    /// Predictions as IOB (file or directory)
    #[arg(long)]
    pub pred_iob: Option<PathBuf>,
    /// Documents (JSONL file or directory of .txt); fixes the document set
    #[arg(long)]
    pub docs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = GranularityArg::Corpus)]
    pub granularity: GranularityArg,
    /// Document-level counting unit
    #[arg(long, value_enum, default_value_t = ModeArg::Occurrence)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub report: ReportFormat,
    #[command(flatten)]
    pub matching: MatchOpts,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConsistencyArgs {
    /// Documents (JSONL file or directory of .txt)
    #[arg(long)]
    pub docs: PathBuf,
    /// Predictions (JSONL)
    #[arg(long)]
    pub pred: PathBuf,
    /// Document-level consistency
    #[arg(long)]
    pub dc: bool,
    /// Corpus-level consistency
    #[arg(long)]
    pub cc: bool,
    /// Minimum extracted/containing document ratio for CC
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = OverlapPolicyArg::Greedy)]
    pub overlap: OverlapPolicyArg,
    #[command(flatten)]
    pub matching: MatchOpts,
    /// Augmented predictions (JSONL)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Consistency report (JSON)
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OverlapArgs {
    /// Embedded points (JSONL: dataset, id, vector)
    #[arg(long, required_unless_present = "terms")]
    pub embeddings: Option<PathBuf>,
    /// Neighbours per point
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Also report (O(A→B) + O(B→A)) / 2
    #[arg(long)]
    pub symmetrize: bool,
    /// Term list for shared-term counts, as NAME=PATH (repeatable)
    #[arg(long, value_name = "NAME=PATH")]
    pub terms: Vec<String>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitArg {
    /// Distinct normalized terms per document
    Types,
    /// Every annotated span
    Occurrences,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StatsArgs {
    /// Spans (JSONL)
    #[arg(long, group = "source")]
    pub gold: Option<PathBuf>,
    /// Predictions (JSONL)
    #[arg(long, group = "source")]
    pub pred: Option<PathBuf>,
    /// IOB file or directory
    #[arg(long, group = "source")]
    pub iob: Option<PathBuf>,
    /// Documents (JSONL file or directory of .txt); documents without terms count as zero
    #[arg(long)]
    pub docs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = UnitArg::Types)]
    pub unit: UnitArg,
    #[command(flatten)]
    pub matching: MatchOpts,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KappaArgs {
    /// First rater: one label per line
    #[arg(long, requires = "b", conflicts_with = "pairs")]
    pub a: Option<PathBuf>,
    /// Second rater: one label per line
    #[arg(long, requires = "a")]
    pub b: Option<PathBuf>,
    /// Both raters as two tab-separated columns
    #[arg(long, required_unless_present = "a")]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BuildDatasetArgs {
    /// NER records (JSONL: text, entities[{surface, type}])
    #[arg(long, requires = "labels", required_unless_present = "abstracts")]
    pub ner: Option<PathBuf>,
    /// Abstracts (JSONL: id, text, domain)
    #[arg(long)]
    pub abstracts: Option<PathBuf>,
    /// Entity-type label table (TSV: type_name, label, source)
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Endpoint URL or mock:<seed> [env: TERMKIT_LLM_URL]
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Endpoint settings (JSON: url, key, model, timeout_secs)
    #[arg(long)]
    pub endpoint_config: Option<PathBuf>,
    /// Maximum concurrent endpoint requests
    #[arg(long, default_value_t = 4)]
    pub max_inflight: usize,
    /// Conversations (JSONL)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Build report (JSON)
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Label table including types classified during the run (TSV)
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FewshotArgs {
    /// Candidate demonstrations (JSONL: id, text, terms, vector)
    #[arg(long)]
    pub examples: PathBuf,
    /// Text to extract terms from
    #[arg(
        long,
        conflicts_with = "target_file",
        required_unless_present = "target_file"
    )]
    pub target: Option<String>,
    #[arg(long)]
    pub target_file: Option<PathBuf>,
    /// Domain vector as a JSON array; without it the first examples are used
    #[arg(long)]
    pub target_vector: Option<String>,
    /// Number of demonstrations
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Prepend the term definition (context enrichment)
    #[arg(long)]
    pub ce: bool,
    /// Fix the assistant response stem (response guidance)
    #[arg(long)]
    pub arg: bool,
    #[arg(long, value_enum, default_value_t = PromptFormat::Json)]
    pub format: PromptFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Manifest written next to a previous run's output
    pub manifest: PathBuf,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let endpoint = err
        .chain()
        .filter_map(|e| e.downcast_ref::<termkit::Error>())
        .any(termkit::Error::is_endpoint_failure);
    if endpoint {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.global.quiet {
            log::LevelFilter::Error
        } else {
            log::LevelFilter::Warn
        })
        .parse_env("TERMKIT_LOG")
        .init();

    if let Some(threads) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }

    let g = &cli.global;
    let result = match &cli.command {
        Command::Eval(a) => commands::eval(a, g),
        Command::Consistency(a) => commands::consistency(a, g),
        Command::Overlap(a) => commands::overlap(a, g),
        Command::Stats(a) => commands::stats(a, g),
        Command::Kappa(a) => commands::kappa(a, g),
        Command::BuildDataset(a) => commands::build_dataset(a, g),
        Command::Fewshot(a) => commands::fewshot(a, g),
        Command::Verify(a) => commands::verify(a, g),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
