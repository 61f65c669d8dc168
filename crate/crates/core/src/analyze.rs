//! Per-system aggregation of scored reviews: means, SEMs, normalized
//! profiles and reward histograms.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prefit::is_header_line;
use crate::reward::{hprr, named_array, Metric, MetricVector, ScoredReview, WeightVector, METRIC_COUNT};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de> + Copy"))]
pub struct SystemSummary<T> {
    pub system: String,
    pub n: usize,
    #[serde(with = "named_array")]
    pub mean: [T; METRIC_COUNT],
    #[serde(with = "named_array")]
    pub sem: [T; METRIC_COUNT],
    pub reward_uniform: T,
    pub reward_human: T,
    pub sem_reward_uniform: T,
    pub sem_reward_human: T,
    /// `n == 1`: SEMs are reported as 0.
    pub sem_undefined: bool,
}

/// Reads scored reviews, one JSON object per line; header lines are skipped.
pub fn read_scored<T, R>(reader: R) -> Result<Vec<ScoredReview<T>>>
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
        out.push(serde_json::from_str(trimmed).map_err(|e| Error::Record { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

/// `(mean, sem)` with the sample standard deviation; SEM is 0 for one value.
fn mean_sem<T: Scalar>(values: &[T]) -> (T, T) {
    let n = T::from_count(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    if values.len() < 2 {
        return (mean, T::zero());
    }
    let ss: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - T::one())).sqrt();
    (mean, sd / n.sqrt())
}

fn summarize_group<T: Scalar>(system: &str, group: &[&ScoredReview<T>]) -> SystemSummary<T> {
    let mut mean = [T::zero(); METRIC_COUNT];
    let mut sem = [T::zero(); METRIC_COUNT];
    for m in Metric::ALL {
        let col: Vec<T> = group.iter().map(|r| r.metrics.get(m)).collect();
        (mean[m.index()], sem[m.index()]) = mean_sem(&col);
    }
    let (uniform, human) = (WeightVector::uniform(), WeightVector::human_aligned());
    let ru: Vec<T> = group.iter().map(|r| hprr(&r.metrics, &uniform)).collect();
    let rh: Vec<T> = group.iter().map(|r| hprr(&r.metrics, &human)).collect();
    let (reward_uniform, sem_reward_uniform) = mean_sem(&ru);
    let (reward_human, sem_reward_human) = mean_sem(&rh);
    SystemSummary {
        system: system.to_owned(),
        n: group.len(),
        mean,
        sem,
        reward_uniform,
        reward_human,
        sem_reward_uniform,
        sem_reward_human,
        sem_undefined: group.len() == 1,
    }
}

/// One summary per system, in order of first appearance. Rewards are
/// recomputed from the metric vectors.
pub fn summarize<T: Scalar>(scored: &[ScoredReview<T>]) -> Result<Vec<SystemSummary<T>>> {
    let mut systems: Vec<&str> = Vec::new();
    for r in scored {
        if r.system.trim().is_empty() {
            return Err(Error::Invalid(format!("review {} has no system label", r.review_id)));
        }
        if !systems.contains(&r.system.as_str()) {
            systems.push(&r.system);
        }
    }
    Ok(systems
        .par_iter()
        .map(|&s| {
            let group: Vec<&ScoredReview<T>> = scored.iter().filter(|r| r.system == s).collect();
            summarize_group(s, &group)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedProfile<T> {
    pub system: String,
    /// Min-max normalized mean per retained metric.
    pub normalized: Vec<(Metric, T)>,
    pub mean: T,
    /// Population variance of the normalized values.
    pub variance: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileReport<T> {
    pub profiles: Vec<NormalizedProfile<T>>,
    /// Metrics constant across systems, left out of every profile.
    pub dropped: Vec<Metric>,
}

/// Min-max normalizes each metric's means across systems, then takes each
/// system's mean and variance over the normalized values.
pub fn normalized_profile<T: Scalar>(summaries: &[SystemSummary<T>]) -> Result<ProfileReport<T>> {
    if summaries.len() < 2 {
        return Err(Error::Invalid("normalized profile needs at least 2 systems".into()));
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for m in Metric::ALL {
        let col = summaries.iter().map(|s| s.mean[m.index()]);
        let lo = col.clone().fold(T::infinity(), T::min);
        let hi = col.fold(T::neg_infinity(), T::max);
        if hi > lo {
            kept.push((m, lo, hi));
        } else {
            log::info!("metric {m} constant across systems; dropped from profile");
            dropped.push(m);
        }
    }
    if kept.is_empty() {
        return Err(Error::Invalid("every metric is constant across systems".into()));
    }
    let k = T::from_count(kept.len());
    let profiles = summaries
        .iter()
        .map(|s| {
            let normalized: Vec<(Metric, T)> =
                kept.iter().map(|&(m, lo, hi)| (m, (s.mean[m.index()] - lo) / (hi - lo))).collect();
            let mean = normalized.iter().map(|p| p.1).sum::<T>() / k;
            let variance = normalized.iter().map(|p| (p.1 - mean) * (p.1 - mean)).sum::<T>() / k;
            NormalizedProfile { system: s.system.clone(), normalized, mean, variance }
        })
        .collect();
    Ok(ProfileReport { profiles, dropped })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin<T> {
    pub bin_low: T,
    pub bin_high: T,
    pub count: usize,
}

/// Counts of uniform reward for one system over `bins` equal-width bins.
///
/// The range defaults to the observed `[min, max]`; the last bin is closed.
/// Values outside an explicit range are not counted.
pub fn reward_histogram<T: Scalar>(
    scored: &[ScoredReview<T>],
    system: &str,
    bins: usize,
    range: Option<(T, T)>,
) -> Result<Vec<HistogramBin<T>>> {
    if bins < 2 {
        return Err(Error::Invalid("histogram needs at least 2 bins".into()));
    }
    let uniform = WeightVector::uniform();
    let values: Vec<T> = scored.iter().filter(|r| r.system == system).map(|r| hprr(&r.metrics, &uniform)).collect();
    let (lo, hi) = match range {
        Some((lo, hi)) if hi < lo => return Err(Error::Invalid("histogram range is reversed".into())),
        Some(r) => r,
        None if values.is_empty() => return Ok(Vec::new()),
        None => (
            values.iter().copied().fold(T::infinity(), T::min),
            values.iter().copied().fold(T::neg_infinity(), T::max),
        ),
    };
    let width = (hi - lo) / T::from_count(bins);
    let mut out: Vec<HistogramBin<T>> = (0..bins)
        .map(|i| HistogramBin {
            bin_low: lo + width * T::from_count(i),
            bin_high: if i + 1 == bins { hi } else { lo + width * T::from_count(i + 1) },
            count: 0,
        })
        .collect();
    for v in values {
        if v < lo || v > hi {
            continue;
        }
        let idx = if width > T::zero() {
            ((v - lo) / width).floor().to_usize().unwrap_or(0).min(bins - 1)
        } else {
            0
        };
        out[idx].count += 1;
    }
    Ok(out)
}

fn metric_header(prefix: &str) -> impl Iterator<Item = String> + '_ {
    Metric::ALL.iter().map(move |m| format!("{prefix}{}", m.short_name()))
}

/// Table-shaped CSV: system, n, nine means, both rewards, then SEMs.
pub fn write_summary_csv<T: Scalar, W: Write>(w: W, summaries: &[SystemSummary<T>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["system".to_owned(), "n".to_owned()];
    header.extend(metric_header(""));
    header.extend(["reward_u".into(), "reward_h".into()]);
    header.extend(metric_header("sem_"));
    header.extend(["sem_reward_u".into(), "sem_reward_h".into(), "sem_undefined".into()]);
    out.write_record(&header)?;
    for s in summaries {
        let mut row = vec![s.system.clone(), s.n.to_string()];
        row.extend(s.mean.iter().map(T::to_string));
        row.extend([s.reward_uniform.to_string(), s.reward_human.to_string()]);
        row.extend(s.sem.iter().map(T::to_string));
        row.extend([s.sem_reward_uniform.to_string(), s.sem_reward_human.to_string(), s.sem_undefined.to_string()]);
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_profile_csv<T: Scalar, W: Write>(w: W, report: &ProfileReport<T>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let metrics: Vec<Metric> = report.profiles.first().map(|p| p.normalized.iter().map(|x| x.0).collect()).unwrap_or_default();
    let mut header = vec!["system".to_owned(), "normalized_mean".to_owned(), "variance".to_owned()];
    header.extend(metrics.iter().map(|m| m.short_name().to_owned()));
    out.write_record(&header)?;
    for p in &report.profiles {
        let mut row = vec![p.system.clone(), p.mean.to_string(), p.variance.to_string()];
        row.extend(p.normalized.iter().map(|x| x.1.to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_histogram_csv<T: Scalar, W: Write>(w: W, bins: &[HistogramBin<T>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["bin_low", "bin_high", "count"])?;
    for b in bins {
        out.write_record([b.bin_low.to_string(), b.bin_high.to_string(), b.count.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Builds a scored review straight from a metric vector.
pub fn scored_from_metrics<T: Scalar>(review_id: &str, system: &str, metrics: [T; METRIC_COUNT]) -> Result<ScoredReview<T>> {
    Ok(ScoredReview::new(review_id, system, MetricVector::new(metrics)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scored(system: &str, v: [f64; 9]) -> ScoredReview<f64> {
        scored_from_metrics("r", system, v).unwrap()
    }

    #[test]
    fn single_review_flags_sem() {
        let s = summarize(&[scored("A", [0.5; 9])]).unwrap();
        assert_eq!(s[0].n, 1);
        assert!(s[0].sem_undefined);
        assert_eq!(s[0].sem, [0.0; 9]);
        assert!((s[0].reward_uniform - 4.5).abs() < 1e-12);
    }

    #[test]
    fn sem_by_hand() {
        let s = summarize(&[scored("A", [0.2; 9]), scored("A", [0.4; 9]), scored("A", [0.9; 9])]).unwrap();
        // mean 0.5, sample sd sqrt(0.13), sem sqrt(0.13/3)
        assert!((s[0].mean[0] - 0.5).abs() < 1e-12);
        assert!((s[0].sem[0] - (0.13f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(!s[0].sem_undefined);
    }

    #[test]
    fn identical_systems_identical_summaries() {
        let s = summarize(&[scored("A", [0.3; 9]), scored("B", [0.3; 9])]).unwrap();
        assert_eq!(s[0].mean, s[1].mean);
        assert_eq!(s[0].reward_human, s[1].reward_human);
        assert_eq!(s[0].system, "A");
        assert!(matches!(normalized_profile(&s), Err(Error::Invalid(_))));
        let mut blank = scored("", [0.3; 9]);
        blank.system = " ".into();
        assert!(summarize(&[blank]).is_err());
    }

    #[test]
    fn two_systems_normalize_to_endpoints() {
        let mut a = [0.1; 9];
        a[3] = 0.9;
        let s = summarize(&[scored("A", a), scored("B", [0.5; 9])]).unwrap();
        let report = normalized_profile(&s).unwrap();
        assert!(report.dropped.is_empty());
        for p in &report.profiles {
            assert!(p.normalized.iter().all(|&(_, v)| v == 0.0 || v == 1.0));
        }
        assert!((report.profiles[1].mean - 8.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn constant_metric_dropped() {
        let mut a = [0.1; 9];
        a[8] = 0.4;
        let mut b = [0.2; 9];
        b[8] = 0.4;
        let s = summarize(&[scored("A", a), scored("B", b)]).unwrap();
        let report = normalized_profile(&s).unwrap();
        assert_eq!(report.dropped, vec![Metric::ReME]);
        assert_eq!(report.profiles[1].normalized.len(), 8);
        assert_eq!(report.profiles[1].mean, 1.0);
        assert_eq!(report.profiles[1].variance, 0.0);
    }

    #[test]
    fn histogram_binning() {
        let reviews: Vec<_> = (0..4).map(|i| scored("H", [i as f64 / 9.0; 9])).collect();
        let h = reward_histogram(&reviews, "H", 4, None).unwrap();
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![1, 1, 1, 1]);
        let h = reward_histogram(&reviews, "H", 4, Some((0.0, 4.0))).unwrap();
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![1, 1, 1, 1]);
        assert_eq!(h[3].bin_high, 4.0);

        let same: Vec<_> = (0..5).map(|_| scored("H", [0.2; 9])).collect();
        let h = reward_histogram(&same, "H", 3, None).unwrap();
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![5, 0, 0]);
        assert!(reward_histogram(&same, "H", 1, None).is_err());
        assert!(reward_histogram(&same, "X", 3, None).unwrap().is_empty());
    }

    #[test]
    fn csv_columns() {
        let s = summarize(&[scored("A", [0.5; 9]), scored("B", [0.25; 9])]).unwrap();
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("system,n,Cr,Ex,ImRe,MaMe,Pr,PrRe,ReDi,SuSo,ReME,reward_u,reward_h,sem_Cr"));
        assert!(text.lines().nth(1).unwrap().starts_with("A,1,0.5,"));

        let mut buf = Vec::new();
        write_histogram_csv(&mut buf, &reward_histogram(&s.iter().map(|_| scored("A", [0.1; 9])).collect::<Vec<_>>(), "A", 2, Some((0.0, 2.0))).unwrap()).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "bin_low,bin_high,count\n0,1,2\n1,2,0\n");
    }

    #[test]
    fn scored_jsonl_round_trip() {
        let r = scored("A", [0.5; 9]);
        let text = format!("{{\"header\":{{\"seed\":42}}}}\n{}\n", serde_json::to_string(&r).unwrap());
        let back: Vec<ScoredReview<f64>> = read_scored(text.as_bytes()).unwrap();
        assert_eq!(back, vec![r]);
    }

    proptest! {
        #[test]
        fn permutation_invariant(vals in prop::collection::vec((0usize..3, 0.0f64..1.0), 1..30), seed in any::<u64>()) {
            let reviews: Vec<_> = vals.iter().map(|&(s, v)| scored(["A", "B", "C"][s], [v; 9])).collect();
            let mut shuffled = reviews.clone();
            use rand::{seq::SliceRandom, SeedableRng};
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let mut a = summarize(&reviews).unwrap();
            let mut b = summarize(&shuffled).unwrap();
            a.sort_by(|x, y| x.system.cmp(&y.system));
            b.sort_by(|x, y| x.system.cmp(&y.system));
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!(x.n, y.n);
                prop_assert!((x.reward_uniform - y.reward_uniform).abs() < 1e-9);
                prop_assert!((x.sem[0] - y.sem[0]).abs() < 1e-9);
            }
        }

        #[test]
        fn profile_in_unit_interval(means in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 9), 2..6)) {
            let reviews: Vec<_> = means.iter().enumerate()
                .map(|(i, m)| scored(&format!("S{i}"), m.clone().try_into().unwrap()))
                .collect();
            let s = summarize(&reviews).unwrap();
            if let Ok(report) = normalized_profile(&s) {
                for p in &report.profiles {
                    prop_assert!(p.mean >= 0.0 && p.mean <= 1.0);
                    prop_assert!(p.variance >= 0.0 && p.variance <= 0.25 + 1e-12);
                    prop_assert!(p.normalized.iter().all(|&(_, v)| (0.0..=1.0).contains(&v)));
                }
            }
        }
    }
}
