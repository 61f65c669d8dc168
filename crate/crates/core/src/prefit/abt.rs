//! Adapted Bradley-Terry: non-negative least squares of the signed outcome on `a - b`.

use super::nnls::nnls;
use super::{comparisons, Comparison, EstimatorId, FitResult, PreferenceMatch, RawFit};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative ridge that picks the minimum-norm solution among NNLS optima.
fn ridge<T: Scalar>() -> T {
    T::lit(1e-8).max(T::epsilon().powf(T::lit(2.0 / 3.0)))
}

pub(crate) fn fit_abt_raw<T: Scalar>(data: &[Comparison<T>]) -> Result<Vec<T>> {
    if data.is_empty() {
        return Err(Error::NoMatches);
    }
    let n = data[0].diff.len();
    if data.iter().all(|c| c.diff.iter().all(|v| *v == T::zero())) {
        return Err(Error::DegenerateDesign);
    }
    if data.len() < n {
        log::warn!("ABT fit on {} matches for {} weights; solution is underdetermined", data.len(), n);
    }
    let max_col_sq = (0..n)
        .map(|j| data.iter().map(|c| c.diff[j] * c.diff[j]).sum::<T>())
        .fold(T::zero(), T::max);
    let lambda = (ridge::<T>() * max_col_sq).sqrt();

    let mut rows: Vec<Vec<T>> = data.iter().map(|c| c.diff.clone()).collect();
    let mut y: Vec<T> = data.iter().map(|c| c.outcome.signed()).collect();
    for j in 0..n {
        let mut r = vec![T::zero(); n];
        r[j] = lambda;
        rows.push(r);
        y.push(T::zero());
    }
    Ok(nnls(&rows, &y))
}

/// Fits non-negative ABT weights.
pub fn fit_abt<T: Scalar>(matches: &[PreferenceMatch<T>]) -> Result<FitResult<T>> {
    let raw = fit_abt_raw(&comparisons(matches))?;
    FitResult::from_raw(EstimatorId::Abt, matches.len(), RawFit { weights: raw, violations: None }, T::lit(0.01))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefit::Outcome;

    fn cmp(diff: &[f64], o: Outcome) -> Comparison<f64> {
        Comparison::new(diff.to_vec(), o)
    }

    #[test]
    fn single_match_minimum_norm() {
        // One equation d.w = 1 with d >= 0: minimum-norm solution d / |d|^2.
        let d = [0.5, 0.2, 0.0];
        let w = fit_abt_raw(&[cmp(&d, Outcome::ABetter)]).unwrap();
        let n2 = 0.29;
        for (wi, di) in w.iter().zip(d) {
            assert!((wi - di / n2).abs() < 1e-6, "{w:?}");
        }
        // Mixed signs: only the positive part can help.
        let w = fit_abt_raw(&[cmp(&[0.4, -0.3], Outcome::ABetter)]).unwrap();
        assert!((w[0] - 2.5).abs() < 1e-6 && w[1] == 0.0);
    }

    #[test]
    fn all_ties_give_zero() {
        let data = vec![cmp(&[0.1, -0.2], Outcome::Tie), cmp(&[0.3, 0.4], Outcome::Tie), cmp(&[-0.5, 0.1], Outcome::Tie)];
        assert_eq!(fit_abt_raw(&data).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn zero_design_is_error() {
        let data = vec![cmp(&[0.0, 0.0], Outcome::ABetter)];
        assert!(matches!(fit_abt_raw(&data), Err(Error::DegenerateDesign)));
    }

    #[test]
    fn proportional_to_last_component() {
        let data: Vec<_> = (0..20)
            .map(|i| {
                let t = (i as f64 - 9.5) / 10.0;
                let mut d = vec![0.05 * ((i * 7 % 5) as f64 - 2.0); 9];
                d[8] = t;
                let o = if t > 0.0 { Outcome::ABetter } else { Outcome::BBetter };
                cmp(&d, o)
            })
            .collect();
        let w = fit_abt_raw(&data).unwrap();
        let argmax = (0..9).max_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap()).unwrap();
        assert_eq!(argmax, 8, "{w:?}");
        assert!(w.iter().all(|&v| v >= 0.0));
    }
}
