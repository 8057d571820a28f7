mod commands;
mod config;
mod spec;

use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use apt_core::{EvalProtocol, LandmarkMode, MergeKind, MultiRootPolicy, PathWeighting, Pipeline, Schema, Scheme};
use clap::{Args, Parser, Subcommand};

/// Typed distributional lexicons from dependency-parsed text, and phrase
/// composition by aligning their dependency contexts.
#[derive(Debug, Parser)]
#[command(name = "apt", version)]
struct Cli {
    /// key = value file supplying defaults for any option below.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for the parallel stages (default: all cores).
    #[arg(short = 'j', long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    format: Option<Format>,
    /// More logging on stderr; repeat for debug output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count a CoNLL corpus into a lexicon file.
    Build(BuildArgs),
    /// Nearest neighbours of a word or a composed phrase.
    Neighbors(NeighborsArgs),
    /// Compose a phrase and dump its representation.
    Compose(ComposeArgs),
    /// Correlate phrase similarities with human judgments.
    Eval(EvalArgs),
    /// Summarise a lexicon or dump entries.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Tsv,
    Table,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tsv" => Ok(Format::Tsv),
            "table" | "text-table" => Ok(Format::Table),
            _ => Err(format!("unknown format {s:?} (expected tsv or table)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Tsv => "tsv",
            Format::Table => "table",
        })
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// CoNLL-U or CoNLL-X files; `.gz` files are decompressed.
    #[arg(required = true, value_name = "CORPUS")]
    corpus: Vec<PathBuf>,
    #[arg(short, long, value_name = "FILE")]
    output: PathBuf,
    /// Write the text format instead of the binary one.
    #[arg(long)]
    text: bool,
    /// Longest dependency path kept.
    #[arg(long)]
    order_cap: Option<usize>,
    /// Drop features seen fewer times than this in the whole corpus.
    #[arg(long)]
    threshold: Option<u64>,
    /// Use LEMMA instead of FORM when present.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    lemma: Option<bool>,
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    lowercase: Option<bool>,
    /// Tag coarsening, e.g. `NNS=NN,VBD=VB`.
    #[arg(long, value_name = "FROM=TO", value_delimiter = ',')]
    pos_map: Option<Vec<String>>,
    /// Labels whose dependents are skipped (default: punct,p).
    #[arg(long, value_name = "LABEL", value_delimiter = ',')]
    exclude_labels: Option<Vec<String>>,
    /// What to do with sentences that have several roots.
    #[arg(long)]
    multi_root: Option<MultiRootPolicy>,
    /// Abort on the first malformed sentence instead of skipping it.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    strict_input: Option<bool>,
}

#[derive(Debug, Args)]
pub struct LexiconArg {
    /// Lexicon file (binary or text).
    #[arg(short, long, env = "APT_LEXICON", value_name = "FILE")]
    lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[command(flatten)]
    lexicon: LexiconArg,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    pipeline: Option<Pipeline>,
    /// Context distribution smoothing exponent.
    #[arg(long, value_name = "ALPHA")]
    cds_alpha: Option<f64>,
    /// PPMI shift k.
    #[arg(long, value_name = "K")]
    shift: Option<f64>,
    #[arg(long)]
    path_weighting: Option<PathWeighting>,
    #[arg(long)]
    merge: Option<MergeKind>,
    /// Let unknown words contribute nothing instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Args)]
pub struct NeighborsArgs {
    /// A word (`dry/JJ`) or a phrase spec (`dry/JJ amod clothes/NNS`).
    query: String,
    #[arg(short = 'n', long)]
    top: Option<usize>,
    /// Contextualise at this word of the phrase (0-based) instead of the root.
    #[arg(long)]
    node: Option<usize>,
    /// Only rank lexemes with this tag.
    #[arg(long, value_name = "TAG")]
    pos: Option<String>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// Phrase spec; see `neighbors`.
    #[arg(required_unless_present = "conll", conflicts_with = "conll")]
    spec: Option<String>,
    /// Compose every sentence of a CoNLL file instead.
    #[arg(long, value_name = "FILE")]
    conll: Option<PathBuf>,
    /// Dump the representation contextualised at this word.
    #[arg(long)]
    node: Option<usize>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    dataset: PathBuf,
    #[arg(long)]
    schema: Option<Schema>,
    /// One or more of ml_individual, turney_averaged, aggregated.
    #[arg(long, value_delimiter = ',')]
    protocol: Option<Vec<EvalProtocol>>,
    /// How landmarks of subject-verb items are represented.
    #[arg(long)]
    landmark: Option<LandmarkMode>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    lexicon: LexiconArg,
    /// Dump the count APT of these lexemes.
    #[arg(long = "lexeme", value_name = "WORD/TAG")]
    lexemes: Vec<String>,
    /// Only show types up to this order.
    #[arg(long)]
    order: Option<usize>,
    /// Write the whole lexicon in the text format.
    #[arg(long)]
    dump: bool,
    /// Include marginal rows in `--dump`.
    #[arg(long)]
    marginals: bool,
    /// Verify the stored marginals.
    #[arg(long)]
    check: bool,
}

/// Why a run failed, which decides the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage = 1,
    Data = 2,
    Invariant = 3,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

pub trait Classify<T> {
    fn or_usage(self) -> Result<T, Failure>;
    fn or_data(self) -> Result<T, Failure>;
    fn or_invariant(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn or_usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            kind: Kind::Usage,
            error: e.into(),
        })
    }

    fn or_data(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            kind: Kind::Data,
            error: e.into(),
        })
    }

    fn or_invariant(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            kind: Kind::Invariant,
            error: e.into(),
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Kind::Usage as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let outcome = std::panic::catch_unwind(|| commands::run(cli)).unwrap_or_else(|_| {
        Err(Failure {
            kind: Kind::Invariant,
            error: anyhow::anyhow!("internal error"),
        })
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if is_broken_pipe(&f.error) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = writeln!(io::stderr(), "apt: {:#}", f.error);
            ExitCode::from(f.kind as u8)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<io::Error>())
        .any(|io| io.kind() == io::ErrorKind::BrokenPipe)
}
