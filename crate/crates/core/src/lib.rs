//! Cross-lingual projection of discourse-connective annotations.
//!
//! Given a sentence-aligned parallel corpus, a connective lexicon for the
//! candidate side, and discourse annotations on the other side, this crate
//! matches candidate connectives, aligns the two sides word by word
//! (EM-trained lexical models or external alignments, with intersection /
//! union / grow-diag symmetrization), computes each candidate's translation
//! span, and labels it as discourse usage (projecting the relation),
//! non-discourse usage, or unsupported (dropped in translation). Evaluation
//! utilities cover intrinsic scoring against a gold standard,
//! dropped-candidate detection rates, Krippendorff's alpha, a synthetic
//! corpus generator with known ground truth, and a usage classifier for the
//! downstream experiment.
//!
//! Numeric components are generic over the float width via [`Scalar`];
//! `*64`/`*32` aliases are exported for the common instantiations.

pub mod align;
pub mod annotation;
pub mod classifier;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod lexicon;
pub mod projection;
pub mod scalar;

pub use align::{AlignerKind, AlignmentLink, AlignmentSet, Direction, TranslationModel, NULL_WORD};
pub use annotation::{OverlapPolicy, SourceAnnotation};
pub use classifier::{ClassifierEval, ClassifierModel, FeatureVector, TrainConfig, UsageLabel};
pub use corpus::{
    LoadOptions, Punctuation, SentencePair, Span, Token, TokenizerProfile,
};
pub use error::{Error, Result};
pub use evaluation::{
    DroppedReport, EvalReport, GoldRecord, GoldStatus, ReliabilityData, SynthConfig,
    SynthConnective, SynthCorpus,
};
pub use lexicon::{CandidateDc, ConnectiveEntry};
pub use projection::{ProjectedAnnotation, Stats, Status};
pub use scalar::Scalar;

/// `f64` instantiations, the default throughout the command-line tool.
pub type TranslationModel64 = align::TranslationModel<f64>;
pub type EvalReport64 = evaluation::EvalReport<f64>;
pub type DroppedReport64 = evaluation::DroppedReport<f64>;
pub type ClassifierModel64 = classifier::ClassifierModel<f64>;
pub type FeatureVector64 = classifier::FeatureVector<f64>;
pub type ClassifierEval64 = classifier::ClassifierEval<f64>;

/// `f32` instantiations for memory-constrained runs.
pub type TranslationModel32 = align::TranslationModel<f32>;
pub type EvalReport32 = evaluation::EvalReport<f32>;
pub type DroppedReport32 = evaluation::DroppedReport<f32>;
pub type ClassifierModel32 = classifier::ClassifierModel<f32>;
pub type FeatureVector32 = classifier::FeatureVector<f32>;
pub type ClassifierEval32 = classifier::ClassifierEval<f32>;
