//! Stratified k-fold cross-validation with three-way macro F1.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adjust::AdjustedWeights;
use super::{fit_raw, Comparison, EstimatorId, FitOptions, Outcome};
use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

const TAU_STEPS: usize = 20;
const TAU_MAX: f64 = 0.1;

/// Which post-processing stage of the fitted weights scores the test fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightStage {
    Raw,
    Positive,
    #[default]
    Smoothed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub stage: WeightStage,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self { folds: 5, seed: 42, stage: WeightStage::Smoothed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport<T> {
    pub folds: usize,
    pub seed: u64,
    pub stage: WeightStage,
    pub averaging: String,
    pub fold_f1: Vec<T>,
    pub fold_tau: Vec<T>,
    pub mean_f1: T,
}

/// Tie band grid: 21 evenly spaced points on `[0, 0.1]`.
pub fn tau_grid<T: Scalar>() -> Vec<T> {
    (0..=TAU_STEPS).map(|i| T::lit(TAU_MAX * i as f64 / TAU_STEPS as f64)).collect()
}

/// Macro-averaged F1 over A, B and tie. A class with no true or predicted
/// members scores 0.
pub fn macro_f1<T: Scalar>(truth: &[Outcome], pred: &[Outcome]) -> T {
    let mut tp = [0usize; 3];
    let mut fp = [0usize; 3];
    let mut fneg = [0usize; 3];
    for (&t, &p) in truth.iter().zip(pred) {
        if t == p {
            tp[t.index()] += 1;
        } else {
            fp[p.index()] += 1;
            fneg[t.index()] += 1;
        }
    }
    let f1: T = (0..3)
        .map(|k| {
            let denom = 2 * tp[k] + fp[k] + fneg[k];
            if denom == 0 {
                T::zero()
            } else {
                T::from_count(2 * tp[k]) / T::from_count(denom)
            }
        })
        .sum();
    f1 / T::lit(3.0)
}

/// Weights rescaled to unit L1 norm; all-zero weights stay zero.
fn l1_normalized<T: Scalar>(w: &[T]) -> Vec<T> {
    let s: T = w.iter().map(|v| v.abs()).sum();
    if s > T::zero() {
        w.iter().map(|&v| v / s).collect()
    } else {
        w.to_vec()
    }
}

/// Three-way prediction from normalized weights and tie band `tau`.
pub fn predict<T: Scalar>(w: &[T], diff: &[T], tau: T) -> Outcome {
    let delta = dot(w, diff);
    if delta.abs() <= tau {
        Outcome::Tie
    } else if delta > T::zero() {
        Outcome::ABetter
    } else {
        Outcome::BBetter
    }
}

fn score<T: Scalar>(w: &[T], data: &[&Comparison<T>], tau: T) -> T {
    let truth: Vec<Outcome> = data.iter().map(|c| c.outcome).collect();
    let pred: Vec<Outcome> = data.iter().map(|c| predict(w, &c.diff, tau)).collect();
    macro_f1(&truth, &pred)
}

/// Fold index per item, stratified by outcome.
fn assign_folds<T>(data: &[Comparison<T>], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; data.len()];
    let mut next = 0;
    for class in Outcome::ALL {
        let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data[i].outcome == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            fold_of[i] = next % folds;
            next += 1;
        }
    }
    fold_of
}

pub(crate) fn stage_weights<T: Scalar>(raw: &[T], stage: WeightStage, alpha: T) -> Result<Vec<T>> {
    Ok(match stage {
        WeightStage::Raw => raw.to_vec(),
        WeightStage::Positive => AdjustedWeights::compute_or_uniform(raw, alpha)?.positive,
        WeightStage::Smoothed => AdjustedWeights::compute_or_uniform(raw, alpha)?.smoothed,
    })
}

/// Cross-validates `estimator`: per fold, fit on the rest, pick the tie band
/// maximizing train macro F1, and score the held-out fold.
pub fn cross_validate<T: Scalar>(
    data: &[Comparison<T>],
    estimator: EstimatorId,
    fit_opts: &FitOptions<T>,
    opts: &CvOptions,
) -> Result<CvReport<T>> {
    if opts.folds < 2 {
        return Err(Error::Invalid("cross-validation needs at least 2 folds".into()));
    }
    if data.len() < opts.folds {
        return Err(Error::TooFewRecords { needed: opts.folds, got: data.len() });
    }
    let fold_of = assign_folds(data, opts.folds, opts.seed);
    let grid = tau_grid::<T>();

    let per_fold: Vec<(T, T)> = (0..opts.folds)
        .into_par_iter()
        .map(|k| {
            let train: Vec<Comparison<T>> =
                data.iter().zip(&fold_of).filter(|(_, &f)| f != k).map(|(c, _)| c.clone()).collect();
            let test: Vec<&Comparison<T>> = data.iter().zip(&fold_of).filter(|(_, &f)| f == k).map(|(c, _)| c).collect();
            let raw = fit_raw(estimator, &train, fit_opts)?;
            let w = l1_normalized(&stage_weights(&raw.weights, opts.stage, fit_opts.alpha)?);
            let train_refs: Vec<&Comparison<T>> = train.iter().collect();
            let mut best = (T::neg_infinity(), T::zero());
            for &tau in &grid {
                let f = score(&w, &train_refs, tau);
                if f > best.0 {
                    best = (f, tau);
                }
            }
            Ok((score(&w, &test, best.1), best.1))
        })
        .collect::<Result<_>>()?;

    let fold_f1: Vec<T> = per_fold.iter().map(|p| p.0).collect();
    let mean_f1 = fold_f1.iter().copied().sum::<T>() / T::from_count(opts.folds);
    Ok(CvReport {
        folds: opts.folds,
        seed: opts.seed,
        stage: opts.stage,
        averaging: "macro".into(),
        fold_tau: per_fold.iter().map(|p| p.1).collect(),
        fold_f1,
        mean_f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn macro_f1_cases() {
        use Outcome::*;
        let t = [ABetter, BBetter, Tie, ABetter];
        assert_eq!(macro_f1::<f64>(&t, &t), 1.0);
        // tie class absent from truth and predictions counts as 0
        let t2 = [ABetter, BBetter];
        assert!((macro_f1::<f64>(&t2, &t2) - 2.0 / 3.0).abs() < 1e-12);
        // A: tp 1 fp 0 fn 1 -> 2/3; B: tp 1 fp 1 fn 0 -> 2/3; tie: 0
        let p = [ABetter, BBetter, BBetter];
        let t3 = [ABetter, BBetter, ABetter];
        assert!((macro_f1::<f64>(&t3, &p) - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn grid_has_21_points() {
        let g = tau_grid::<f64>();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.0);
        assert!((g[20] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn folds_are_stratified_and_balanced() {
        let data: Vec<Comparison<f64>> = (0..30)
            .map(|i| Comparison::new(vec![0.0], Outcome::ALL[i % 3]))
            .collect();
        let f = assign_folds(&data, 5, 42);
        for k in 0..5 {
            let members: Vec<usize> = (0..30).filter(|&i| f[i] == k).collect();
            assert_eq!(members.len(), 6);
            for class in Outcome::ALL {
                assert_eq!(members.iter().filter(|&&i| data[i].outcome == class).count(), 2);
            }
        }
        assert_eq!(f, assign_folds(&data, 5, 42));
    }

    #[test]
    fn too_few_matches() {
        let data = vec![Comparison::new(vec![1.0], Outcome::ABetter); 3];
        let err = cross_validate(&data, EstimatorId::Abt, &FitOptions::default(), &CvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::TooFewRecords { needed: 5, got: 3 }));
    }

    proptest! {
        #[test]
        fn prediction_scale_invariant(
            w in prop::collection::vec(0.0f64..5.0, 4),
            d in prop::collection::vec(-1.0f64..1.0, 4),
            k in 0.01f64..100.0,
        ) {
            let scaled: Vec<f64> = w.iter().map(|v| v * k).collect();
            let a = predict(&l1_normalized(&w), &d, 0.0);
            let b = predict(&l1_normalized(&scaled), &d, 0.0);
            prop_assert!(a == b || dot(&w, &d).abs() < 1e-12);
        }
    }
}
