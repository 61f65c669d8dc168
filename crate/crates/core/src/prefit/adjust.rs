//! Raw weights to positive, sum-to-dimension, smoothed weights.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Min-max scales `raw` into `[0, 1]` then rescales so the components sum to `raw.len()`.
pub fn min_max_to_sum<T: Scalar>(raw: &[T]) -> Result<Vec<T>> {
    if raw.is_empty() {
        return Err(Error::Invalid("no weights to adjust".into()));
    }
    if let Some(bad) = raw.iter().find(|v| !v.is_finite()) {
        return Err(Error::Invalid(format!("non-finite raw weight {bad}")));
    }
    let lo = raw.iter().copied().fold(T::infinity(), T::min);
    let hi = raw.iter().copied().fold(T::neg_infinity(), T::max);
    let scale = lo.abs().max(hi.abs()).max(T::min_positive_value());
    if hi - lo <= T::epsilon() * T::lit(16.0) * scale {
        return Err(Error::DegenerateMinMax);
    }
    let scaled: Vec<T> = raw.iter().map(|&v| (v - lo) / (hi - lo)).collect();
    let total: T = scaled.iter().copied().sum();
    let target = T::from_count(raw.len());
    Ok(scaled.into_iter().map(|v| v * target / total).collect())
}

/// Additive smoothing `(w + alpha)` renormalized to sum to `w.len()`.
pub fn laplace_smooth<T: Scalar>(w: &[T], alpha: T) -> Vec<T> {
    let total: T = w.iter().map(|&v| v + alpha).sum();
    let target = T::from_count(w.len());
    w.iter().map(|&v| (v + alpha) * target / total).collect()
}

/// Full pipeline: min-max, rescale, smooth. Returns the smoothed weights.
pub fn adjust_weights<T: Scalar>(raw: &[T], alpha: T) -> Result<Vec<T>> {
    Ok(laplace_smooth(&min_max_to_sum(raw)?, alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedWeights<T> {
    pub positive: Vec<T>,
    pub smoothed: Vec<T>,
    pub degenerate: bool,
}

impl<T: Scalar> AdjustedWeights<T> {
    pub fn compute(raw: &[T], alpha: T) -> Result<Self> {
        let positive = min_max_to_sum(raw)?;
        let smoothed = laplace_smooth(&positive, alpha);
        Ok(Self { positive, smoothed, degenerate: false })
    }

    /// Like [`compute`](Self::compute) but a degenerate min-max yields uniform weights.
    pub fn compute_or_uniform(raw: &[T], alpha: T) -> Result<Self> {
        match Self::compute(raw, alpha) {
            Err(Error::DegenerateMinMax) => {
                log::warn!("all raw weights equal; falling back to uniform weights");
                let ones = vec![T::one(); raw.len()];
                Ok(Self { positive: ones.clone(), smoothed: ones, degenerate: true })
            }
            other => other,
        }
    }
}
