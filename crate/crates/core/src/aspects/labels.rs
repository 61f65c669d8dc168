//! Sentence labels supplied from outside, one JSON record per line:
//! `{"review_id": "r1", "sentence_index": 0, "aspect": "Cr", "value": 1.0}`.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{AspectId, AspectScorer, SentenceLabels, ASPECT_COUNT};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::textproc::SentenceSeq;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRow {
    pub review_id: String,
    pub sentence_index: usize,
    pub aspect: String,
    pub value: f64,
}

/// Ingested labels keyed by review id, then sentence index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelStore {
    reviews: HashMap<String, BTreeMap<usize, [f64; ASPECT_COUNT]>>,
}

impl LabelStore {
    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn contains(&self, review_id: &str) -> bool {
        self.reviews.contains_key(review_id)
    }

    /// Labels for a review with `sentence_count` sentences; unlisted
    /// (sentence, aspect) pairs read as 0, an unknown review as all zeros.
    pub fn labels_for<T: Scalar>(&self, review_id: &str, sentence_count: usize) -> Result<SentenceLabels<T>> {
        let mut rows = vec![[T::zero(); ASPECT_COUNT]; sentence_count];
        let Some(sentences) = self.reviews.get(review_id) else {
            log::warn!("no ingested labels for review {review_id}");
            return Ok(SentenceLabels { rows });
        };
        for (&idx, values) in sentences {
            let row = rows.get_mut(idx).ok_or_else(|| {
                Error::Invalid(format!(
                    "review {review_id}: sentence index {idx} out of range ({sentence_count} sentences)"
                ))
            })?;
            for (slot, &v) in row.iter_mut().zip(values) {
                *slot = T::lit(v);
            }
        }
        Ok(SentenceLabels { rows })
    }
}

impl<T: Scalar> AspectScorer<T> for LabelStore {
    fn label(&self, review_id: &str, sentences: &SentenceSeq) -> Result<SentenceLabels<T>> {
        self.labels_for(review_id, sentences.count())
    }
}

/// Reads a labeled-sentence file. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn ingest_sentence_labels(reader: impl BufRead) -> Result<LabelStore> {
    let mut store = LabelStore::default();
    let mut seen: HashMap<(String, usize), [bool; ASPECT_COUNT]> = HashMap::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Record { line: line_no, message };
        let row: LabelRow = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let aspect: AspectId = row
            .aspect
            .parse()
            .map_err(|_| bad(format!("unknown aspect {:?}", row.aspect)))?;
        if !(0.0..=1.0).contains(&row.value) {
            return Err(bad(format!("value {} outside [0, 1]", row.value)));
        }
        let flags = seen.entry((row.review_id.clone(), row.sentence_index)).or_default();
        if std::mem::replace(&mut flags[aspect.index()], true) {
            return Err(bad(format!(
                "duplicate label for review {}, sentence {}, aspect {aspect}",
                row.review_id, row.sentence_index
            )));
        }
        store
            .reviews
            .entry(row.review_id)
            .or_default()
            .entry(row.sentence_index)
            .or_insert([0.0; ASPECT_COUNT])[aspect.index()] = row.value;
    }
    Ok(store)
}

/// Writes every non-zero label of one review in the ingestion format.
pub fn export_sentence_labels<T: Scalar>(
    review_id: &str,
    labels: &SentenceLabels<T>,
    mut out: impl Write,
) -> Result<()> {
    for (idx, row) in labels.rows().iter().enumerate() {
        for (aspect, &v) in AspectId::ALL.iter().zip(row) {
            if v != T::zero() {
                let rec = LabelRow {
                    review_id: review_id.to_owned(),
                    sentence_index: idx,
                    aspect: aspect.short_name().to_owned(),
                    value: v.to_f64_lossy(),
                };
                serde_json::to_writer(&mut out, &rec)?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ingest(text: &str) -> Result<LabelStore> {
        ingest_sentence_labels(text.as_bytes())
    }

    #[test]
    fn direct_mapping_and_defaults() {
        let store = ingest(
            "{\"review_id\":\"r1\",\"sentence_index\":0,\"aspect\":\"Cr\",\"value\":1.0}\n\
             {\"review_id\":\"r1\",\"sentence_index\":1,\"aspect\":\"SuSo\",\"value\":0.25}\n",
        )
        .unwrap();
        let labels: SentenceLabels<f64> = store.labels_for("r1", 2).unwrap();
        assert_eq!(labels.get(0, AspectId::Criticism), 1.0);
        assert_eq!(labels.get(1, AspectId::SuggestionSolution), 0.25);
        let zeros = labels.rows().iter().flatten().filter(|&&v| v == 0.0).count();
        assert_eq!(zeros, 14);
    }

    #[test]
    fn unknown_aspect_names_row() {
        let err = ingest("\n{\"review_id\":\"r1\",\"sentence_index\":0,\"aspect\":\"XX\",\"value\":1.0}\n").unwrap_err();
        match err {
            Error::Record { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("unknown aspect"));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn out_of_range_and_duplicates() {
        let row = |v: f64| format!("{{\"review_id\":\"r\",\"sentence_index\":0,\"aspect\":\"Pr\",\"value\":{v}}}\n");
        assert!(matches!(ingest(&row(1.5)), Err(Error::Record { line: 1, .. })));
        assert!(matches!(ingest(&row(-0.1)), Err(Error::Record { line: 1, .. })));
        let dup = format!("{}{}", row(1.0), row(0.0));
        assert!(matches!(ingest(&dup), Err(Error::Record { line: 2, .. })));
    }

    #[test]
    fn index_beyond_sentences() {
        let store = ingest("{\"review_id\":\"r\",\"sentence_index\":3,\"aspect\":\"Pr\",\"value\":1}").unwrap();
        assert!(store.labels_for::<f64>("r", 3).is_err());
        assert!(store.labels_for::<f64>("r", 4).is_ok());
    }

    proptest! {
        #[test]
        fn export_ingest_round_trip(
            rows in prop::collection::vec(
                prop::array::uniform8(prop_oneof![Just(0.0f64), Just(1.0), 0.0f64..=1.0]),
                1..10,
            )
        ) {
            let labels = SentenceLabels::new(rows).unwrap();
            let mut buf = Vec::new();
            export_sentence_labels("rev-7", &labels, &mut buf).unwrap();
            let back: SentenceLabels<f64> = ingest_sentence_labels(buf.as_slice())
                .unwrap()
                .labels_for("rev-7", labels.sentence_count())
                .unwrap();
            prop_assert_eq!(back, labels);
        }
    }
}
