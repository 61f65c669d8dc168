//! Bradley-Terry weights: L2-regularized logistic regression on `a - b`, no intercept.

use super::linalg::cholesky_solve;
use super::{comparisons, Comparison, EstimatorId, FitResult, Outcome, PreferenceMatch, RawFit};
use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BtOptions<T> {
    /// Inverse L2 strength: minimizes `|w|^2 / 2 + c * loss`.
    pub c: T,
    pub max_iter: usize,
    pub tol: T,
}

impl<T: Scalar> Default for BtOptions<T> {
    fn default() -> Self {
        Self { c: T::one(), max_iter: 100, tol: T::epsilon().sqrt() * T::lit(1e-2) }
    }
}

/// Logistic rows `(x, label, sample weight)`; a tie becomes two half rows.
fn rows<T: Scalar>(data: &[Comparison<T>]) -> Vec<(&[T], T, T)> {
    let half = T::lit(0.5);
    let mut out = Vec::with_capacity(data.len() * 2);
    for c in data {
        match c.outcome {
            Outcome::ABetter => out.push((c.diff.as_slice(), T::one(), T::one())),
            Outcome::BBetter => out.push((c.diff.as_slice(), T::zero(), T::one())),
            Outcome::Tie => {
                out.push((c.diff.as_slice(), T::one(), half));
                out.push((c.diff.as_slice(), T::zero(), half));
            }
        }
    }
    out
}

fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus<T: Scalar>(z: T) -> T {
    if z > T::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn objective<T: Scalar>(rows: &[(&[T], T, T)], w: &[T], c: T) -> T {
    let reg = dot(w, w) * T::lit(0.5);
    let loss: T = rows
        .iter()
        .map(|&(x, y, s)| {
            let z = dot(x, w);
            // -y log p - (1 - y) log(1 - p) = softplus(z) - y z
            s * (softplus(z) - y * z)
        })
        .sum();
    reg + c * loss
}

pub(crate) fn fit_bt_raw<T: Scalar>(data: &[Comparison<T>], opts: &BtOptions<T>) -> Result<Vec<T>> {
    if data.is_empty() {
        return Err(Error::NoMatches);
    }
    if data.iter().all(|c| c.outcome == Outcome::Tie) {
        return Err(Error::NoDecisiveMatches);
    }
    if !(opts.c > T::zero()) {
        return Err(Error::Invalid("BT regularization constant must be positive".into()));
    }
    let n = data[0].diff.len();
    let rows = rows(data);
    let mut w = vec![T::zero(); n];
    let mut f = objective(&rows, &w, opts.c);

    for _ in 0..opts.max_iter {
        let mut grad = w.clone();
        let mut hess: Vec<Vec<T>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect();
        for &(x, y, s) in &rows {
            let p = sigmoid(dot(x, &w));
            let g = opts.c * s * (p - y);
            let h = opts.c * s * p * (T::one() - p);
            for i in 0..n {
                grad[i] += g * x[i];
                for j in 0..=i {
                    hess[i][j] += h * x[i] * x[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                hess[j][i] = hess[i][j];
            }
        }
        let gnorm = grad.iter().fold(T::zero(), |m, g| m.max(g.abs()));
        if gnorm <= opts.tol {
            break;
        }
        let step = cholesky_solve(&hess, &grad).ok_or_else(|| Error::Solver("singular BT Hessian".into()))?;
        // Backtracking on the Newton direction.
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<T> = w.iter().zip(&step).map(|(&wi, &si)| wi - t * si).collect();
            let ft = objective(&rows, &trial, opts.c);
            if ft <= f {
                w = trial;
                f = ft;
                accepted = true;
                break;
            }
            t *= T::lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    Ok(w)
}

/// Fits Bradley-Terry weights with default options. Raw weights may be negative.
pub fn fit_bt<T: Scalar>(matches: &[PreferenceMatch<T>]) -> Result<FitResult<T>> {
    let raw = fit_bt_raw(&comparisons(matches), &BtOptions::default())?;
    FitResult::from_raw(EstimatorId::Bt, matches.len(), RawFit { weights: raw, violations: None }, T::lit(0.01))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmp(diff: &[f64], o: Outcome) -> Comparison<f64> {
        Comparison::new(diff.to_vec(), o)
    }

    #[test]
    fn all_ties_rejected() {
        let data = vec![cmp(&[0.0, 0.0], Outcome::Tie); 3];
        assert!(matches!(fit_bt_raw(&data, &BtOptions::default()), Err(Error::NoDecisiveMatches)));
        assert!(matches!(fit_bt_raw::<f64>(&[], &BtOptions::default()), Err(Error::NoMatches)));
    }

    #[test]
    fn single_decisive_match_closed_form() {
        // One row x = (1, 0), y = 1: w2 = 0 and w1 solves w1 = c * (1 - sigmoid(w1)).
        let w = fit_bt_raw(&[cmp(&[1.0, 0.0], Outcome::ABetter)], &BtOptions::default()).unwrap();
        assert!(w[1].abs() < 1e-12);
        assert!((w[0] - (1.0 - sigmoid(w[0]))).abs() < 1e-10);
        assert!((w[0] - 0.401058).abs() < 1e-5);
    }

    #[test]
    fn symmetric_ties_cancel() {
        let data = vec![cmp(&[0.5, 0.2], Outcome::Tie), cmp(&[0.3, -0.4], Outcome::ABetter), cmp(&[-0.3, 0.4], Outcome::BBetter)];
        let w = fit_bt_raw(&data, &BtOptions::default()).unwrap();
        // stationarity: w = -c * sum s (p - y) x
        let rows = rows(&data);
        for i in 0..2 {
            let g: f64 = rows.iter().map(|&(x, y, s)| s * (sigmoid(dot(x, &w)) - y) * x[i]).sum();
            assert!((w[i] + g).abs() < 1e-9);
        }
    }

    #[test]
    fn f32_runs() {
        let data = vec![Comparison::new(vec![1.0f32, -0.5], Outcome::ABetter), Comparison::new(vec![-0.2f32, 0.3], Outcome::BBetter)];
        let w = fit_bt_raw(&data, &BtOptions::default()).unwrap();
        assert!(w[0] > 0.0);
    }
}
