//! Anchored packed dependency trees.
//!
//! A distributional lexicon maps each lexeme to an elementary APT: the
//! weighted lexemes it co-occurs with, keyed by the reduced dependency path
//! between them. Phrases are composed by offsetting each word's APT to the
//! phrase head and merging the aligned trees.

pub mod apt;
pub mod composition;
pub mod corpus;
pub mod evaluation;
pub mod exec;
pub mod lexicon;
pub mod path;
pub mod similarity;
pub mod synthetic;
pub mod weighting;

pub use apt::{Apt, AptBuilder, AptError, AptNode, LexemeId, WeightKind};
pub use composition::{
    align, compose_tree, merge, offset, Aligned, ComposedTree, Composer, CompositionError, MergeKind, OffsetApt,
    OovPolicy,
};
pub use corpus::{
    open_corpus, parse_conll, ConllSentence, ConllToken, CorpusError, DependencyTree, Lexeme, SentenceReader,
    TreeError, TreeReader,
};
pub use evaluation::{
    evaluate, evaluate_scores, load_dataset, parse_dataset, report_scores, score_phrase_pair, spearman, EvalConfig,
    EvalError, EvalProtocol, EvalReport, JudgmentRecord, LandmarkMode, Relation, Schema,
};
pub use exec::{configure_threads, Execution};
pub use lexicon::{
    build_from_files, build_lexicon, build_lexicon_with, extract_cooccurrences, extract_positions, read_text_file,
    FormatError, IngestReport, IngestionConfig, Lexicon, LexiconBuilder, LexiconError, MultiRootPolicy,
};
pub use path::{CooccurrenceType, DependencyLabel, Direction, PathElement, PathError};
pub use similarity::{cosine, neighbors, vectorize, FeatureVector, Neighbor, NeighborIndex, NeighborList};
pub use weighting::{
    apply_weighting, path_weight, ppmi, to_probability, PathWeighting, Pipeline, Scheme, WeightingConfig,
    WeightingContext, WeightingError,
};
