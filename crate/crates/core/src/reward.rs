//! Nine-dimensional metric vectors and the weighted reward over them.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::aspects::{normalize, AspectScorer, AspectVector, ASPECT_COUNT};
use crate::error::{Error, Result};
use crate::meteor::meteor_score;
use crate::scalar::{dot, Scalar};
use crate::textproc::{split_sentences, tokenize};

pub const METRIC_COUNT: usize = 9;

/// Reward dimensions in canonical order: the eight aspects, then METEOR relevance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    Cr,
    Ex,
    ImRe,
    MaMe,
    Pr,
    PrRe,
    ReDi,
    SuSo,
    ReME,
}

impl Metric {
    pub const ALL: [Metric; METRIC_COUNT] = [
        Metric::Cr,
        Metric::Ex,
        Metric::ImRe,
        Metric::MaMe,
        Metric::Pr,
        Metric::PrRe,
        Metric::ReDi,
        Metric::SuSo,
        Metric::ReME,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            Metric::Cr => "Cr",
            Metric::Ex => "Ex",
            Metric::ImRe => "ImRe",
            Metric::MaMe => "MaMe",
            Metric::Pr => "Pr",
            Metric::PrRe => "PrRe",
            Metric::ReDi => "ReDi",
            Metric::SuSo => "SuSo",
            Metric::ReME => "ReME",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.short_name() == s)
            .ok_or_else(|| Error::UnknownMetric(s.to_owned()))
    }
}

/// Parses a `{short name -> value}` map that must name every metric exactly once.
fn from_named<T: Copy>(named: BTreeMap<String, T>) -> Result<[T; METRIC_COUNT]> {
    let mut slots: [Option<T>; METRIC_COUNT] = [None; METRIC_COUNT];
    for (name, v) in named {
        slots[name.parse::<Metric>()?.index()] = Some(v);
    }
    let mut out = Vec::with_capacity(METRIC_COUNT);
    for (m, slot) in Metric::ALL.iter().zip(slots) {
        out.push(slot.ok_or(Error::MissingWeight(m.short_name()))?);
    }
    Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
}

fn serialize_named<T: Serialize, S: Serializer>(values: &[T; METRIC_COUNT], s: S) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(METRIC_COUNT))?;
    for (m, v) in Metric::ALL.iter().zip(values) {
        map.serialize_entry(m.short_name(), v)?;
    }
    map.end()
}

/// Serde adapter writing `[T; 9]` as an object keyed by metric short name.
///
/// Values are unconstrained, so it also carries signed raw weights.
pub mod named_array {
    use super::*;

    pub fn serialize<T: Serialize, S: Serializer>(values: &[T; METRIC_COUNT], s: S) -> Result<S::Ok, S::Error> {
        serialize_named(values, s)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<[T; METRIC_COUNT], D::Error>
    where
        T: Deserialize<'de> + Copy,
        D: Deserializer<'de>,
    {
        let named = BTreeMap::<String, T>::deserialize(d)?;
        from_named(named).map_err(de::Error::custom)
    }
}

/// Metric values for one review, each in `[0, 1]`.
///
/// Serialized as a JSON object keyed by short name, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricVector<T>([T; METRIC_COUNT]);

impl<T: Scalar> MetricVector<T> {
    pub fn new(values: [T; METRIC_COUNT]) -> Result<Self> {
        for (m, &v) in Metric::ALL.iter().zip(&values) {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::Invalid(format!("metric {m} = {v} outside [0, 1]")));
            }
        }
        Ok(Self(values))
    }

    pub fn zeros() -> Self {
        Self([T::zero(); METRIC_COUNT])
    }

    pub fn from_parts(aspects: AspectVector<T>, relevance: T) -> Result<Self> {
        let mut v = [T::zero(); METRIC_COUNT];
        v[..ASPECT_COUNT].copy_from_slice(&aspects.0);
        v[Metric::ReME.index()] = relevance;
        Self::new(v)
    }

    pub fn values(&self) -> &[T; METRIC_COUNT] {
        &self.0
    }

    pub fn get(&self, m: Metric) -> T {
        self.0[m.index()]
    }

    /// Componentwise `self - other`.
    pub fn difference(&self, other: &Self) -> [T; METRIC_COUNT] {
        std::array::from_fn(|i| self.0[i] - other.0[i])
    }
}

impl<T: Serialize> Serialize for MetricVector<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_named(&self.0, s)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for MetricVector<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let named = BTreeMap::<String, T>::deserialize(d)?;
        let values = from_named(named).map_err(de::Error::custom)?;
        MetricVector::new(values).map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightTag {
    Uniform,
    HumanAligned,
    Custom,
}

/// The human-aligned preset: adapted Bradley-Terry weights after min-max
/// scaling, rescaling to a sum of nine and Laplace smoothing.
pub const HUMAN_ALIGNED: [f64; METRIC_COUNT] = [0.01, 0.01, 0.11, 0.01, 0.01, 0.01, 0.01, 0.16, 8.67];

/// Nine non-negative weights in canonical metric order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightVector<T> {
    values: [T; METRIC_COUNT],
    tag: WeightTag,
}

impl<T: Scalar> WeightVector<T> {
    /// All ones, so the reward is the plain sum of the nine metrics.
    pub fn uniform() -> Self {
        Self { values: [T::one(); METRIC_COUNT], tag: WeightTag::Uniform }
    }

    pub fn human_aligned() -> Self {
        Self { values: HUMAN_ALIGNED.map(T::lit), tag: WeightTag::HumanAligned }
    }

    pub fn custom(values: [T; METRIC_COUNT]) -> Result<Self> {
        for (m, &v) in Metric::ALL.iter().zip(&values) {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::Invalid(format!("weight {m} = {v} must be finite and non-negative")));
            }
        }
        Ok(Self { values, tag: WeightTag::Custom })
    }

    /// Parses a weight config: a JSON object with one entry per metric short name.
    pub fn from_config_json(json: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let named: BTreeMap<String, T> = serde_json::from_str(json)?;
        Self::custom(from_named(named)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        Self::from_config_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_config_json(&self) -> String
    where
        T: Serialize,
    {
        struct Named<'a, T>(&'a [T; METRIC_COUNT]);
        impl<T: Serialize> Serialize for Named<'_, T> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                serialize_named(self.0, s)
            }
        }
        serde_json::to_string_pretty(&Named(&self.values)).expect("weights serialize")
    }

    pub fn values(&self) -> &[T; METRIC_COUNT] {
        &self.values
    }

    pub fn tag(&self) -> WeightTag {
        self.tag
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }
}

/// Weighted sum of the metrics.
pub fn hprr<T: Scalar>(v: &MetricVector<T>, w: &WeightVector<T>) -> T {
    dot(&v.0, &w.values)
}

/// Scores a review against its manuscript: aspects from the scorer,
/// normalised by sentence count, plus METEOR relevance.
pub fn compute_metric_vector<T: Scalar, S: AspectScorer<T> + ?Sized>(
    review_id: &str,
    review: &str,
    manuscript: &str,
    scorer: &S,
) -> Result<MetricVector<T>> {
    if review.trim().is_empty() {
        return Err(Error::EmptyReview);
    }
    let sentences = split_sentences(review);
    let labels = scorer.label(review_id, &sentences)?;
    let aspects = normalize(&labels, &sentences)?;
    let relevance = meteor_score::<T>(&tokenize(review), &tokenize(manuscript)).score;
    MetricVector::from_parts(aspects, relevance)
}

/// A review with its metrics and both standard reward totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredReview<T> {
    pub review_id: String,
    pub system: String,
    #[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
    pub metrics: MetricVector<T>,
    pub reward_uniform: T,
    pub reward_human: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward_custom: Option<T>,
}

impl<T: Scalar> ScoredReview<T> {
    pub fn new(review_id: impl Into<String>, system: impl Into<String>, metrics: MetricVector<T>) -> Self {
        Self {
            review_id: review_id.into(),
            system: system.into(),
            reward_uniform: hprr(&metrics, &WeightVector::uniform()),
            reward_human: hprr(&metrics, &WeightVector::human_aligned()),
            reward_custom: None,
            metrics,
        }
    }

    pub fn with_custom(mut self, weights: &WeightVector<T>) -> Self {
        self.reward_custom = Some(hprr(&self.metrics, weights));
        self
    }

    /// Whether the stored totals match a recomputation from the vector.
    pub fn rewards_consistent(&self, tol: T) -> bool {
        (self.reward_uniform - hprr(&self.metrics, &WeightVector::uniform())).abs() <= tol
            && (self.reward_human - hprr(&self.metrics, &WeightVector::human_aligned())).abs() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aspects::LexiconScorer;
    use proptest::prelude::*;

    const HUMAN_ROW: [f64; 9] = [0.212, 0.051, 0.118, 0.558, 0.129, 0.189, 0.193, 0.175, 0.026];

    #[test]
    fn presets() {
        assert_eq!(WeightVector::<f64>::uniform().values(), &[1.0; 9]);
        let h = WeightVector::<f64>::human_aligned();
        assert_eq!(h.values(), &HUMAN_ALIGNED);
        assert!((h.sum() - 9.0).abs() <= 0.02);
        assert_eq!(h.tag(), WeightTag::HumanAligned);
    }

    #[test]
    fn human_row_rewards() {
        let v = MetricVector::new(HUMAN_ROW).unwrap();
        let u = hprr(&v, &WeightVector::uniform());
        assert!((u - 1.651).abs() < 1e-9);
        assert!((u - 1.654).abs() <= 0.005);
        let h = hprr(&v, &WeightVector::human_aligned());
        assert!((h - 0.27972).abs() < 1e-9);
        assert!((h - 0.285).abs() <= 0.01);
        assert_eq!(hprr::<f64>(&MetricVector::zeros(), &WeightVector::human_aligned()), 0.0);
    }

    #[test]
    fn f32_reward() {
        let v = MetricVector::new(HUMAN_ROW.map(|x| x as f32)).unwrap();
        assert!((hprr(&v, &WeightVector::<f32>::human_aligned()) - 0.2797).abs() < 1e-4);
    }

    #[test]
    fn config_round_trip_and_missing_key() {
        let w = WeightVector::<f64>::human_aligned();
        let back = WeightVector::<f64>::from_config_json(&w.to_config_json()).unwrap();
        assert_eq!(back.values(), w.values());
        assert_eq!(back.tag(), WeightTag::Custom);

        let missing = r#"{"Cr":1,"Ex":1,"ImRe":1,"MaMe":1,"Pr":1,"PrRe":1,"ReDi":1,"SuSo":1}"#;
        assert!(matches!(WeightVector::<f64>::from_config_json(missing), Err(Error::MissingWeight("ReME"))));
        let unknown = r#"{"Cr":1,"Ex":1,"ImRe":1,"MaMe":1,"Pr":1,"PrRe":1,"ReDi":1,"SuSo":1,"ReME":1,"Zz":2}"#;
        assert!(matches!(WeightVector::<f64>::from_config_json(unknown), Err(Error::UnknownMetric(_))));
        let negative = r#"{"Cr":-1,"Ex":1,"ImRe":1,"MaMe":1,"Pr":1,"PrRe":1,"ReDi":1,"SuSo":1,"ReME":1}"#;
        assert!(WeightVector::<f64>::from_config_json(negative).is_err());
    }

    #[test]
    fn metric_vector_json() {
        let v = MetricVector::new(HUMAN_ROW).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.starts_with(r#"{"Cr":0.212,"Ex":0.051"#), "{json}");
        let back: MetricVector<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<MetricVector<f64>>(&json.replace("0.026", "1.5")).is_err());
    }

    #[test]
    fn metric_vector_composition() {
        let scorer = LexiconScorer::default();
        let text = "alpha beta gamma delta epsilon zeta eta theta iota kappa";
        let v: MetricVector<f64> = compute_metric_vector("r", text, text, &scorer).unwrap();
        assert!(v.values()[..8].iter().all(|&x| x == 0.0));
        assert!(v.get(Metric::ReME) > 0.99);

        let v: MetricVector<f64> =
            compute_metric_vector("r", "The paper is well written. It lacks of rigor.", "", &scorer).unwrap();
        assert_eq!(v.get(Metric::Pr), 0.5);
        assert_eq!(v.get(Metric::ReME), 0.0);

        assert!(matches!(
            compute_metric_vector::<f64, _>("r", "  \n", "x", &scorer),
            Err(Error::EmptyReview)
        ));
    }

    #[test]
    fn scored_review_recomputes() {
        let s = ScoredReview::new("r", "Human", MetricVector::new(HUMAN_ROW).unwrap());
        assert!(s.rewards_consistent(1e-12));
        let mut tampered = s.clone();
        tampered.reward_human = 1.438;
        assert!(!tampered.rewards_consistent(1e-3));
    }

    proptest! {
        #[test]
        fn hprr_is_linear(
            v in prop::array::uniform9(0.0f64..=1.0),
            w1 in prop::array::uniform9(0.0f64..5.0),
            w2 in prop::array::uniform9(0.0f64..5.0),
            alpha in 0.0f64..=1.0,
        ) {
            let v = MetricVector::new(v).unwrap();
            let a = WeightVector::custom(w1).unwrap();
            let b = WeightVector::custom(w2).unwrap();
            let ab = WeightVector::custom(std::array::from_fn(|i| w1[i] + w2[i])).unwrap();
            prop_assert!((hprr(&v, &ab) - hprr(&v, &a) - hprr(&v, &b)).abs() < 1e-9);
            let scaled = MetricVector::new(v.values().map(|x| alpha * x)).unwrap();
            prop_assert!((hprr(&scaled, &a) - alpha * hprr(&v, &a)).abs() < 1e-9);
        }
    }
}
