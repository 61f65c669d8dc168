//! Human-aligned peer review reward: text relevance, aspect metrics,
//! preference-fitted weights, corpus curation and analysis.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision.

pub mod analyze;
pub mod aspects;
pub mod corpus;
pub mod error;
pub mod meteor;
pub mod prefit;
pub mod reward;
pub mod scalar;
pub mod textproc;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use aspects::{AspectId, AspectScorer, AspectVector, LabelStore, LexiconScorer, SentenceLabels};
pub use meteor::{align, meteor_score, Alignment, MeteorStats};
pub use prefit::{EstimatorId, Outcome};
pub use reward::{hprr, Metric, MetricVector, ScoredReview, WeightTag, WeightVector, METRIC_COUNT};
pub use textproc::{split_sentences, tokenize, SentenceSeq, TokenSeq};

pub type MetricVectorF64 = reward::MetricVector<f64>;
pub type MetricVectorF32 = reward::MetricVector<f32>;
pub type WeightVectorF64 = reward::WeightVector<f64>;
pub type WeightVectorF32 = reward::WeightVector<f32>;
pub type ScoredReviewF64 = reward::ScoredReview<f64>;
pub type ScoredReviewF32 = reward::ScoredReview<f32>;
pub type MeteorStatsF64 = meteor::MeteorStats<f64>;
pub type MeteorStatsF32 = meteor::MeteorStats<f32>;
pub type PreferenceMatchF64 = prefit::PreferenceMatch<f64>;
pub type PreferenceMatchF32 = prefit::PreferenceMatch<f32>;
pub type FitResultF64 = prefit::FitResult<f64>;
pub type FitResultF32 = prefit::FitResult<f32>;
pub type CorpusRecordF64 = corpus::CorpusRecord<f64>;
pub type CorpusRecordF32 = corpus::CorpusRecord<f32>;
pub type SystemSummaryF64 = analyze::SystemSummary<f64>;
pub type SystemSummaryF32 = analyze::SystemSummary<f32>;
