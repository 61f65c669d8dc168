use std::collections::BTreeMap;
use std::path::Path;

use super::{AspectId, AspectScorer, SentenceLabels, ASPECT_COUNT};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::textproc::{tokenize, SentenceSeq};

const DEFAULT_LEXICON: &str = include_str!("default_lexicon.json");

/// Binary cue-phrase labeller.
///
/// A sentence carries an aspect when any of that aspect's cue phrases occurs
/// in it as a whole-token subsequence. Cues are tokenized the same way as the
/// sentence, so "e.g." and "e g" are the same cue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconScorer {
    /// Space-padded token strings, `" lack of "`.
    cues: [Vec<String>; ASPECT_COUNT],
}

impl LexiconScorer {
    /// Parses a JSON object mapping aspect short names to cue phrase lists.
    /// Aspects absent from the object get no cues.
    pub fn from_json(json: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(json)?;
        let mut cues: [Vec<String>; ASPECT_COUNT] = Default::default();
        for (name, phrases) in raw {
            let aspect: AspectId = name.parse()?;
            cues[aspect.index()] = phrases
                .iter()
                .map(|p| tokenize(p).join(" "))
                .filter(|p| !p.is_empty())
                .map(|p| format!(" {p} "))
                .collect();
        }
        Ok(Self { cues })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn cues(&self, aspect: AspectId) -> impl Iterator<Item = &str> {
        self.cues[aspect.index()].iter().map(|c| c.trim())
    }

    pub fn label_sentence<T: Scalar>(&self, sentence: &str) -> [T; ASPECT_COUNT] {
        let padded = format!(" {} ", tokenize(sentence).join(" "));
        let mut row = [T::zero(); ASPECT_COUNT];
        for (slot, cues) in row.iter_mut().zip(&self.cues) {
            if cues.iter().any(|c| padded.contains(c.as_str())) {
                *slot = T::one();
            }
        }
        row
    }
}

impl Default for LexiconScorer {
    fn default() -> Self {
        Self::from_json(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }
}

impl<T: Scalar> AspectScorer<T> for LexiconScorer {
    fn label(&self, _review_id: &str, sentences: &SentenceSeq) -> Result<SentenceLabels<T>> {
        let rows = sentences.iter().map(|s| self.label_sentence(s)).collect();
        SentenceLabels::new(rows)
    }
}
