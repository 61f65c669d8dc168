//! Per-sentence review-quality aspects and their per-review normalisation.
//!
//! A scorer labels every sentence with a value in `[0, 1]` for each of the
//! eight aspects; [`normalize`] averages those labels over the sentences.

mod labels;
mod lexicon;

pub use labels::{export_sentence_labels, ingest_sentence_labels, LabelRow, LabelStore};
pub use lexicon::LexiconScorer;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::textproc::SentenceSeq;

pub const ASPECT_COUNT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AspectId {
    #[serde(rename = "Cr")]
    Criticism,
    #[serde(rename = "Ex")]
    Example,
    #[serde(rename = "ImRe")]
    ImportanceRelevance,
    #[serde(rename = "MaMe")]
    MaterialsMethods,
    #[serde(rename = "Pr")]
    Praise,
    #[serde(rename = "PrRe")]
    PresentationReporting,
    #[serde(rename = "ReDi")]
    ResultsDiscussion,
    #[serde(rename = "SuSo")]
    SuggestionSolution,
}

impl AspectId {
    pub const ALL: [AspectId; ASPECT_COUNT] = [
        AspectId::Criticism,
        AspectId::Example,
        AspectId::ImportanceRelevance,
        AspectId::MaterialsMethods,
        AspectId::Praise,
        AspectId::PresentationReporting,
        AspectId::ResultsDiscussion,
        AspectId::SuggestionSolution,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            AspectId::Criticism => "Cr",
            AspectId::Example => "Ex",
            AspectId::ImportanceRelevance => "ImRe",
            AspectId::MaterialsMethods => "MaMe",
            AspectId::Praise => "Pr",
            AspectId::PresentationReporting => "PrRe",
            AspectId::ResultsDiscussion => "ReDi",
            AspectId::SuggestionSolution => "SuSo",
        }
    }

    /// Position in canonical order.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AspectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for AspectId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AspectId::ALL
            .into_iter()
            .find(|a| a.short_name() == s)
            .ok_or_else(|| Error::UnknownAspect(s.to_owned()))
    }
}

/// One row of aspect values per sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceLabels<T> {
    rows: Vec<[T; ASPECT_COUNT]>,
}

impl<T: Scalar> SentenceLabels<T> {
    pub fn new(rows: Vec<[T; ASPECT_COUNT]>) -> Result<Self> {
        for (s, row) in rows.iter().enumerate() {
            for (a, &v) in AspectId::ALL.iter().zip(row) {
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(Error::Invalid(format!("sentence {s}, aspect {a}: value {v} outside [0, 1]")));
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn zeros(sentences: usize) -> Self {
        Self { rows: vec![[T::zero(); ASPECT_COUNT]; sentences] }
    }

    pub fn rows(&self) -> &[[T; ASPECT_COUNT]] {
        &self.rows
    }

    pub fn sentence_count(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, sentence: usize, aspect: AspectId) -> T {
        self.rows[sentence][aspect.index()]
    }
}

/// Per-review aspect scores, each the mean of the sentence labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AspectVector<T>(pub [T; ASPECT_COUNT]);

impl<T: Scalar> AspectVector<T> {
    pub fn get(&self, aspect: AspectId) -> T {
        self.0[aspect.index()]
    }
}

/// Labels every sentence of a review.
pub trait AspectScorer<T: Scalar>: Sync {
    fn label(&self, review_id: &str, sentences: &SentenceSeq) -> Result<SentenceLabels<T>>;
}

pub fn normalize<T: Scalar>(labels: &SentenceLabels<T>, sentences: &SentenceSeq) -> Result<AspectVector<T>> {
    if sentences.count() == 0 {
        return Err(Error::EmptyReview);
    }
    if labels.sentence_count() != sentences.count() {
        return Err(Error::Invalid(format!(
            "{} label rows for {} sentences",
            labels.sentence_count(),
            sentences.count()
        )));
    }
    let n = T::from_count(sentences.count());
    let mut out = [T::zero(); ASPECT_COUNT];
    for row in labels.rows() {
        for (acc, &v) in out.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for v in &mut out {
        *v = (*v / n).min(T::one());
    }
    Ok(AspectVector(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sentences(n: usize) -> SentenceSeq {
        SentenceSeq::new((0..n).map(|i| format!("Sentence {i}.")).collect())
    }

    fn row(aspects: &[AspectId]) -> [f64; ASPECT_COUNT] {
        let mut r = [0.0; ASPECT_COUNT];
        for a in aspects {
            r[a.index()] = 1.0;
        }
        r
    }

    #[test]
    fn short_names_round_trip() {
        let names: Vec<_> = AspectId::ALL.iter().map(|a| a.short_name()).collect();
        assert_eq!(names, ["Cr", "Ex", "ImRe", "MaMe", "Pr", "PrRe", "ReDi", "SuSo"]);
        for a in AspectId::ALL {
            assert_eq!(a.short_name().parse::<AspectId>().unwrap(), a);
        }
        assert!("XX".parse::<AspectId>().is_err());
    }

    #[test]
    fn normalize_examples() {
        use AspectId::*;
        let labels = SentenceLabels::new(vec![row(&[Criticism]), row(&[]), row(&[Criticism]), row(&[])]).unwrap();
        let v = normalize(&labels, &sentences(4)).unwrap();
        assert_eq!(v.get(Criticism), 0.5);

        let labels = SentenceLabels::new(vec![row(&[Praise]); 3]).unwrap();
        assert_eq!(normalize(&labels, &sentences(3)).unwrap().get(Praise), 1.0);

        let labels = SentenceLabels::<f64>::zeros(5);
        assert_eq!(normalize(&labels, &sentences(5)).unwrap().0, [0.0; 8]);
    }

    #[test]
    fn normalize_rejects_empty() {
        let labels = SentenceLabels::<f64>::zeros(0);
        assert!(matches!(normalize(&labels, &sentences(0)), Err(Error::EmptyReview)));
    }

    #[test]
    fn labels_validated() {
        let mut r = [0.0f64; ASPECT_COUNT];
        r[2] = 1.5;
        assert!(SentenceLabels::new(vec![r]).is_err());
        r[2] = f64::NAN;
        assert!(SentenceLabels::new(vec![r]).is_err());
    }

    proptest! {
        #[test]
        fn duplication_invariance(rows in prop::collection::vec(prop::array::uniform8(0.0f64..=1.0), 1..12)) {
            let n = rows.len();
            let once = normalize(&SentenceLabels::new(rows.clone()).unwrap(), &sentences(n)).unwrap();
            let doubled: Vec<_> = rows.iter().chain(rows.iter()).copied().collect();
            let twice = normalize(&SentenceLabels::new(doubled).unwrap(), &sentences(2 * n)).unwrap();
            for (a, b) in once.0.iter().zip(twice.0) {
                prop_assert!((a - b).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(a));
            }
        }
    }
}
