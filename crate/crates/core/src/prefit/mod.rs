//! Fitting the nine reward weights from pairwise human preferences.

pub mod abt;
pub mod adjust;
pub mod bt;
pub mod crm;
pub mod cv;
mod linalg;
pub mod nnls;
mod simplex;

use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reward::{named_array, MetricVector, WeightVector, METRIC_COUNT};
use crate::scalar::Scalar;

pub use abt::fit_abt;
pub use adjust::{adjust_weights, laplace_smooth, min_max_to_sum, AdjustedWeights};
pub use bt::{fit_bt, BtOptions};
pub use crm::{fit_crm, CrmFit, CrmMode, CrmOptions};
pub use cv::{cross_validate, macro_f1, CvOptions, CvReport, WeightStage};

/// Arena vote outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "A")]
    ABetter,
    #[serde(rename = "B")]
    BBetter,
    #[serde(rename = "TIE")]
    Tie,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::ABetter, Outcome::BBetter, Outcome::Tie];

    /// Signed encoding: A = +1, tie = 0, B = -1.
    pub fn signed<T: Scalar>(self) -> T {
        match self {
            Outcome::ABetter => T::one(),
            Outcome::BBetter => -T::one(),
            Outcome::Tie => T::zero(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::ABetter => Outcome::BBetter,
            Outcome::BBetter => Outcome::ABetter,
            Outcome::Tie => Outcome::Tie,
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Outcome::ABetter),
            "B" => Ok(Outcome::BBetter),
            "TIE" => Ok(Outcome::Tie),
            other => Err(Error::Invalid(format!("unknown outcome {other:?}"))),
        }
    }
}

/// One arena vote between two reviews of the same paper.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatch<T> {
    pub paper_id: String,
    pub reviewer_id: String,
    pub covariates_a: MetricVector<T>,
    pub covariates_b: MetricVector<T>,
    pub outcome: Outcome,
}

impl<T: Scalar> PreferenceMatch<T> {
    pub fn comparison(&self) -> Comparison<T> {
        Comparison {
            diff: self.covariates_a.difference(&self.covariates_b).to_vec(),
            outcome: self.outcome,
        }
    }
}

/// A vote reduced to its covariate difference `a - b`, of any dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison<T> {
    pub diff: Vec<T>,
    pub outcome: Outcome,
}

impl<T: Scalar> Comparison<T> {
    pub fn new(diff: Vec<T>, outcome: Outcome) -> Self {
        Self { diff, outcome }
    }
}

pub fn comparisons<T: Scalar>(matches: &[PreferenceMatch<T>]) -> Vec<Comparison<T>> {
    matches.iter().map(PreferenceMatch::comparison).collect()
}

#[derive(Serialize, Deserialize)]
struct MatchLine<T> {
    paper_id: String,
    reviewer_id: String,
    covariates_a: [T; METRIC_COUNT],
    covariates_b: [T; METRIC_COUNT],
    outcome: Outcome,
}

/// Reads a preference file: one JSON object per line. Blank lines and
/// `{"header": ...}` lines are skipped.
pub fn read_preferences<T, R>(reader: R) -> Result<Vec<PreferenceMatch<T>>>
where
    T: Scalar + for<'de> Deserialize<'de>,
    R: BufRead,
{
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || is_header_line(trimmed) {
            continue;
        }
        let record = |message: String| Error::Record { line: i + 1, message };
        let parsed: MatchLine<T> = serde_json::from_str(trimmed).map_err(|e| record(e.to_string()))?;
        out.push(PreferenceMatch {
            paper_id: parsed.paper_id,
            reviewer_id: parsed.reviewer_id,
            covariates_a: MetricVector::new(parsed.covariates_a).map_err(|e| record(e.to_string()))?,
            covariates_b: MetricVector::new(parsed.covariates_b).map_err(|e| record(e.to_string()))?,
            outcome: parsed.outcome,
        });
    }
    Ok(out)
}

pub fn write_preferences<T: Scalar + Serialize, W: Write>(mut w: W, matches: &[PreferenceMatch<T>]) -> Result<()> {
    for m in matches {
        let line = MatchLine {
            paper_id: m.paper_id.clone(),
            reviewer_id: m.reviewer_id.clone(),
            covariates_a: *m.covariates_a.values(),
            covariates_b: *m.covariates_b.values(),
            outcome: m.outcome,
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub(crate) fn is_header_line(line: &str) -> bool {
    line.starts_with("{\"header\"")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorId {
    Bt,
    Abt,
    Crm,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 3] = [EstimatorId::Bt, EstimatorId::Abt, EstimatorId::Crm];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorId::Bt => "bt",
            EstimatorId::Abt => "abt",
            EstimatorId::Crm => "crm",
        }
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorId::ALL
            .into_iter()
            .find(|e| e.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Invalid(format!("unknown estimator {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions<T> {
    pub bt: BtOptions<T>,
    pub crm: CrmOptions<T>,
    /// Laplace smoothing constant.
    pub alpha: T,
    /// Cross-validation settings; `None` skips it.
    pub cv: Option<CvOptions>,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            bt: BtOptions::default(),
            crm: CrmOptions::default(),
            alpha: T::lit(0.01),
            cv: Some(CvOptions::default()),
        }
    }
}

/// Raw estimator output on comparisons of any dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFit<T> {
    pub weights: Vec<T>,
    /// Soft-slack violations, CRM only.
    pub violations: Option<usize>,
}

pub fn fit_raw<T: Scalar>(estimator: EstimatorId, data: &[Comparison<T>], opts: &FitOptions<T>) -> Result<RawFit<T>> {
    match estimator {
        EstimatorId::Bt => Ok(RawFit { weights: bt::fit_bt_raw(data, &opts.bt)?, violations: None }),
        EstimatorId::Abt => Ok(RawFit { weights: abt::fit_abt_raw(data)?, violations: None }),
        EstimatorId::Crm => {
            let fit = crm::fit_crm_raw(data, &opts.crm)?;
            Ok(RawFit { weights: fit.weights, violations: Some(fit.violations) })
        }
    }
}

/// Weights from one estimator at every post-processing stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de> + Copy"))]
pub struct FitResult<T> {
    pub estimator: EstimatorId,
    pub matches: usize,
    #[serde(with = "named_array")]
    pub raw_weights: [T; METRIC_COUNT],
    #[serde(with = "named_array")]
    pub positive_weights: [T; METRIC_COUNT],
    #[serde(with = "named_array")]
    pub smoothed_weights: [T; METRIC_COUNT],
    /// Min-max was undefined; the later stages are uniform.
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub crm_violations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cv: Option<CvReport<T>>,
}

impl<T: Scalar> FitResult<T> {
    pub(crate) fn from_raw(estimator: EstimatorId, matches: usize, raw: RawFit<T>, alpha: T) -> Result<Self> {
        let raw_weights: [T; METRIC_COUNT] = raw
            .weights
            .try_into()
            .map_err(|w: Vec<T>| Error::Invalid(format!("expected {METRIC_COUNT} weights, got {}", w.len())))?;
        let adjusted = AdjustedWeights::compute_or_uniform(&raw_weights, alpha)?;
        Ok(Self {
            estimator,
            matches,
            raw_weights,
            positive_weights: to_array(adjusted.positive),
            smoothed_weights: to_array(adjusted.smoothed),
            degenerate: adjusted.degenerate,
            crm_violations: raw.violations,
            cv: None,
        })
    }

    pub fn cv_f1(&self) -> Option<T> {
        self.cv.as_ref().map(|c| c.mean_f1)
    }

    pub fn stage(&self, stage: WeightStage) -> &[T; METRIC_COUNT] {
        match stage {
            WeightStage::Raw => &self.raw_weights,
            WeightStage::Positive => &self.positive_weights,
            WeightStage::Smoothed => &self.smoothed_weights,
        }
    }

    /// The smoothed stage as a reward weight vector.
    pub fn weight_vector(&self) -> Result<WeightVector<T>> {
        WeightVector::custom(self.smoothed_weights)
    }
}

fn to_array<T: Scalar>(v: Vec<T>) -> [T; METRIC_COUNT] {
    v.try_into().unwrap_or_else(|_| unreachable!("adjusted weights keep their length"))
}

/// Fits one estimator, post-processes its weights, and cross-validates if requested.
pub fn fit<T: Scalar>(estimator: EstimatorId, matches: &[PreferenceMatch<T>], opts: &FitOptions<T>) -> Result<FitResult<T>> {
    let data = comparisons(matches);
    let raw = fit_raw(estimator, &data, opts)?;
    let mut result = FitResult::from_raw(estimator, matches.len(), raw, opts.alpha)?;
    if let Some(cv_opts) = &opts.cv {
        result.cv = Some(cross_validate(&data, estimator, opts, cv_opts)?);
    }
    Ok(result)
}
