//! Bilingual word embeddings learned from document-aligned comparable
//! corpora.
//!
//! Aligned document pairs are merged into pseudo-bilingual documents
//! ([`shuffle`]), a skip-gram model with negative sampling is trained over
//! them ([`trainer`]), and the resulting shared space is queried for
//! cross-lingual neighbours ([`space`]) and in-context translation choices
//! ([`context`]), with evaluation harnesses in [`eval`].

pub mod context;
pub mod corpus;
pub mod error;
pub mod eval;
mod fsutil;
pub mod pipeline;
pub mod shuffle;
pub mod space;
pub mod synthetic;
pub mod trainer;

pub use context::{
    compose, contextualize, rank_candidates, score_in_context, ContextBag, ContextMethod,
    ContextScorerConfig,
};
pub use corpus::{
    build_vocabulary, filter_corpus, filter_pair, load_corpus, AlignedCorpus, CorpusFormat,
    DocumentPair, LangTag, Token, Vocabulary,
};
pub use error::{Error, Result};
pub use eval::{
    acc_by_sense_count, ble_evaluate, mcnemar, no_context_baseline, swtc_evaluate, BleTestSet,
    EvalResult, McNemar, SwtcInstance,
};
pub use fsutil::write_atomic;
pub use pipeline::{run_pipeline, sweep, PipelineConfig, PipelineInput, RunManifest, SweepReport};
pub use shuffle::{
    concat, length_ratio_shuffle, merge_and_shuffle, shuffle_corpus, PseudoBilingualDocument,
    ShuffleSeed, ShuffleStrategy,
};
pub use space::{cosine, hellinger, nearest_cross, ranked_list, EmbeddingSpace, QueryMode, RankedList};
pub use trainer::{train, ModelParams, TrainingConfig};
