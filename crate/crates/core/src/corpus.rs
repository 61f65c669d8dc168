//! Review corpora: loading, top-decile curation, and SFT export.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aspects::AspectScorer;
use crate::error::{Error, Result};
use crate::prefit::is_header_line;
use crate::reward::{compute_metric_vector, hprr, MetricVector, WeightVector};
use crate::scalar::Scalar;

/// User prompt; `{paper_content}` is replaced by the paper text.
pub const SFT_USER_TEMPLATE: &str = "You are a member of the scientific community tasked with peer review. \n\
Review the following paper content.\n\n### Paper Content\n\n{paper_content}";

const THINK_OPEN: &str = "<think> ";
const THINK_CLOSE: &str = " </think>\n\n";

/// Share of malformed lines above which loading aborts.
pub const MAX_MALFORMED_FRACTION: f64 = 0.01;

pub const MIN_CURATION_RECORDS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRecord<T> {
    /// `review_id` from the file, or `{paper_id}/{line index}`.
    pub id: String,
    pub paper_id: String,
    pub paper_text: String,
    pub review_text: String,
    pub thinking_trace: Option<String>,
    pub metrics: Option<MetricVector<T>>,
    pub system: Option<String>,
    pub tags: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
struct RecordLine<T> {
    paper_id: String,
    paper_text: String,
    review_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    thinking_trace: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metrics: Option<MetricVector<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    review_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    system: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    tags: BTreeMap<String, String>,
}

impl<T: Scalar> CorpusRecord<T> {
    fn from_line(line: RecordLine<T>, index: usize) -> std::result::Result<Self, String> {
        if line.paper_id.trim().is_empty() {
            return Err("blank paper_id".into());
        }
        if line.review_text.trim().is_empty() {
            return Err("blank review_text".into());
        }
        let id = match line.review_id {
            Some(id) if !id.trim().is_empty() => id,
            _ => format!("{}/{}", line.paper_id, index),
        };
        Ok(Self {
            id,
            paper_id: line.paper_id,
            paper_text: line.paper_text,
            review_text: line.review_text,
            thinking_trace: line.thinking_trace,
            metrics: line.metrics,
            system: line.system,
            tags: line.tags,
        })
    }

    fn to_line(&self) -> RecordLine<T> {
        RecordLine {
            paper_id: self.paper_id.clone(),
            paper_text: self.paper_text.clone(),
            review_text: self.review_text.clone(),
            thinking_trace: self.thinking_trace.clone(),
            metrics: self.metrics,
            review_id: Some(self.id.clone()),
            system: self.system.clone(),
            tags: self.tags.clone(),
        }
    }
}

/// A rejected input line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Malformed {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct CorpusLoad<T> {
    pub records: Vec<CorpusRecord<T>>,
    pub malformed: Vec<Malformed>,
}

/// Parses a JSON-lines corpus. Malformed lines are reported with their
/// 1-based line number; more than 1% of them aborts the load.
pub fn read_corpus<T, R>(reader: R) -> Result<CorpusLoad<T>>
where
    T: Scalar + for<'de> Deserialize<'de>,
    R: BufRead,
{
    let mut records = Vec::new();
    let mut malformed = Vec::new();
    let mut total = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || is_header_line(trimmed) {
            continue;
        }
        total += 1;
        let parsed = serde_json::from_str::<RecordLine<T>>(trimmed)
            .map_err(|e| e.to_string())
            .and_then(|r| CorpusRecord::from_line(r, records.len()));
        match parsed {
            Ok(r) => records.push(r),
            Err(message) => {
                log::warn!("line {}: {message}", i + 1);
                malformed.push(Malformed { line: i + 1, message });
            }
        }
    }
    if !malformed.is_empty() && malformed.len() as f64 > MAX_MALFORMED_FRACTION * total as f64 {
        let first = &malformed[0];
        return Err(Error::TooManyMalformed {
            malformed: malformed.len(),
            total,
            first: format!("line {}: {}", first.line, first.message),
        });
    }
    Ok(CorpusLoad { records, malformed })
}

pub fn load_corpus<T>(path: impl AsRef<Path>) -> Result<CorpusLoad<T>>
where
    T: Scalar + for<'de> Deserialize<'de>,
{
    read_corpus(BufReader::new(std::fs::File::open(path)?))
}

pub fn write_corpus<T: Scalar + Serialize, W: Write>(mut w: W, records: &[CorpusRecord<T>]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, &r.to_line())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Nearest-rank percentile: the value at 1-based rank `ceil(p n / 100)` of the sorted sample.
pub fn nearest_rank_percentile<T: Scalar>(values: &[T], p: u32) -> Option<T> {
    if values.is_empty() || p > 100 {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite rewards"));
    let n = sorted.len();
    let rank = ((p as usize * n).div_ceil(100)).max(1);
    Some(sorted[rank - 1])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupThreshold<T> {
    pub group: String,
    pub input_count: usize,
    pub threshold: T,
    pub kept_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurationReport<T> {
    pub input_count: usize,
    /// Global threshold; `None` when thresholds are per group.
    pub threshold: Option<T>,
    pub kept_count: usize,
    pub kept_ids: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_by: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupThreshold<T>>,
    /// Positions of kept records in the input, ascending.
    #[serde(skip)]
    pub kept_indices: Vec<usize>,
}

/// Uniform reward per record: from precomputed metrics when present, otherwise scored.
pub fn uniform_rewards<T, S>(records: &[CorpusRecord<T>], scorer: &S) -> Result<Vec<T>>
where
    T: Scalar,
    S: AspectScorer<T> + ?Sized,
{
    let uniform = WeightVector::uniform();
    records
        .par_iter()
        .map(|r| {
            let v = match &r.metrics {
                Some(v) => *v,
                None => compute_metric_vector(&r.id, &r.review_text, &r.paper_text, scorer)?,
            };
            Ok(hprr(&v, &uniform))
        })
        .collect()
}

/// Keeps records whose uniform reward is strictly above the nearest-rank 90th
/// percentile, globally or within each value of tag `group_by`.
pub fn curate_top_decile<T, S>(records: &[CorpusRecord<T>], scorer: &S, group_by: Option<&str>) -> Result<CurationReport<T>>
where
    T: Scalar,
    S: AspectScorer<T> + ?Sized,
{
    let rewards = uniform_rewards(records, scorer)?;
    curate_by_reward(records, &rewards, group_by)
}

pub fn curate_by_reward<T: Scalar>(
    records: &[CorpusRecord<T>],
    rewards: &[T],
    group_by: Option<&str>,
) -> Result<CurationReport<T>> {
    if records.len() < MIN_CURATION_RECORDS {
        return Err(Error::TooFewRecords { needed: MIN_CURATION_RECORDS, got: records.len() });
    }
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let key = match group_by {
            Some(tag) => r.tags.get(tag).cloned().unwrap_or_default(),
            None => String::new(),
        };
        groups.entry(key).or_default().push(i);
    }

    let mut kept = Vec::new();
    let mut reports = Vec::new();
    let mut global_threshold = None;
    for (group, members) in &groups {
        if members.len() < MIN_CURATION_RECORDS {
            return Err(Error::TooFewRecords { needed: MIN_CURATION_RECORDS, got: members.len() });
        }
        let values: Vec<T> = members.iter().map(|&i| rewards[i]).collect();
        let threshold = nearest_rank_percentile(&values, 90).expect("non-empty group");
        let before = kept.len();
        kept.extend(members.iter().copied().filter(|&i| rewards[i] > threshold));
        if group_by.is_some() {
            reports.push(GroupThreshold {
                group: group.clone(),
                input_count: members.len(),
                threshold,
                kept_count: kept.len() - before,
            });
        } else {
            global_threshold = Some(threshold);
        }
    }
    kept.sort_unstable();
    Ok(CurationReport {
        input_count: records.len(),
        threshold: global_threshold,
        kept_count: kept.len(),
        kept_ids: kept.iter().map(|&i| records[i].id.clone()).collect(),
        group_by: group_by.map(str::to_owned),
        groups: reports,
        kept_indices: kept,
    })
}

/// One supervised fine-tuning example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftPair {
    pub user: String,
    pub assistant: String,
}

pub fn user_message(paper_text: &str) -> String {
    SFT_USER_TEMPLATE.replace("{paper_content}", paper_text)
}

pub fn assistant_message(trace: Option<&str>, review: &str) -> String {
    match trace {
        Some(t) => format!("{THINK_OPEN}{t}{THINK_CLOSE}{review}"),
        None => review.to_owned(),
    }
}

/// Splits an assistant message back into `(trace, review)`.
pub fn parse_assistant(message: &str) -> (Option<&str>, &str) {
    if let Some(rest) = message.strip_prefix(THINK_OPEN) {
        if let Some(end) = rest.find(THINK_CLOSE) {
            return (Some(&rest[..end]), &rest[end + THINK_CLOSE.len()..]);
        }
    }
    (None, message)
}

/// `None` when the paper text is blank.
pub fn sft_pair<T>(record: &CorpusRecord<T>) -> Option<SftPair> {
    if record.paper_text.trim().is_empty() {
        return None;
    }
    let trace = record.thinking_trace.as_deref().filter(|t| !t.trim().is_empty());
    Some(SftPair {
        user: user_message(&record.paper_text),
        assistant: assistant_message(trace, &record.review_text),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SftExportReport {
    pub written: usize,
    pub skipped_ids: Vec<String>,
}

/// Writes one `{"user", "assistant"}` object per line.
pub fn export_sft<T, W: Write>(records: &[CorpusRecord<T>], mut w: W) -> Result<SftExportReport> {
    let mut report = SftExportReport::default();
    for r in records {
        match sft_pair(r) {
            Some(pair) => {
                serde_json::to_writer(&mut w, &pair)?;
                w.write_all(b"\n")?;
                report.written += 1;
            }
            None => {
                log::warn!("record {}: blank paper text, skipped", r.id);
                report.skipped_ids.push(r.id.clone());
            }
        }
    }
    Ok(report)
}
