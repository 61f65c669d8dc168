//! Constrained reward model: minimum total weight subject to per-vote margins.
//!
//! The LP is solved in `u = c / epsilon`, which turns the margin into 1 and
//! the budget `sum c <= 1` into `sum u <= 1 / epsilon`.

use serde::{Deserialize, Serialize};

use super::simplex::{minimize, Constraint, LpOutcome, Relation};
use super::{comparisons, Comparison, EstimatorId, FitResult, Outcome, PreferenceMatch, RawFit};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrmMode {
    Hard,
    #[default]
    Soft,
}

impl std::str::FromStr for CrmMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard" => Ok(CrmMode::Hard),
            "soft" => Ok(CrmMode::Soft),
            other => Err(Error::Invalid(format!("unknown CRM mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrmOptions<T> {
    pub epsilon: T,
    pub l1_lambda: T,
    pub mode: CrmMode,
    /// Cost per unit of slack, in units of the margin.
    pub slack_penalty: T,
}

impl<T: Scalar> Default for CrmOptions<T> {
    fn default() -> Self {
        Self { epsilon: T::lit(1e-12), l1_lambda: T::lit(0.1), mode: CrmMode::Soft, slack_penalty: T::lit(1e4) }
    }
}

impl<T: Scalar> CrmOptions<T> {
    pub fn hard() -> Self {
        Self { mode: CrmMode::Hard, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrmFit<T> {
    pub weights: Vec<T>,
    /// Votes whose constraint needed slack (always 0 in hard mode).
    pub violations: usize,
    /// `sum c` at the optimum.
    pub total: T,
}

fn solve<T: Scalar>(data: &[Comparison<T>], opts: &CrmOptions<T>, soft: bool) -> Result<Option<CrmFit<T>>> {
    let n = data[0].diff.len();
    let slack_cols: Vec<usize> = data.iter().map(|c| if c.outcome == Outcome::Tie { 2 } else { 1 }).collect();
    let n_slack = if soft { slack_cols.iter().sum() } else { 0 };
    let width = n + n_slack;

    let mut cost = vec![T::one() + opts.l1_lambda; n];
    cost.extend(std::iter::repeat_n(opts.slack_penalty, n_slack));

    let mut cons = Vec::with_capacity(data.len() + 1);
    let mut budget = vec![T::zero(); width];
    budget[..n].iter_mut().for_each(|v| *v = T::one());
    cons.push(Constraint::new(budget, Relation::Le, T::one() / opts.epsilon));

    let mut next_slack = n;
    for (c, &k) in data.iter().zip(&slack_cols) {
        let mut row = vec![T::zero(); width];
        let sign = if c.outcome == Outcome::BBetter { -T::one() } else { T::one() };
        for (r, &d) in row.iter_mut().zip(&c.diff) {
            *r = sign * d;
        }
        let (rel, rhs) = match c.outcome {
            Outcome::Tie => (Relation::Eq, T::zero()),
            _ => (Relation::Ge, T::one()),
        };
        if soft {
            row[next_slack] = T::one();
            if c.outcome == Outcome::Tie {
                row[next_slack + 1] = -T::one();
            }
            next_slack += k;
        }
        cons.push(Constraint::new(row, rel, rhs));
    }

    match minimize(&cost, &cons) {
        LpOutcome::Optimal { x, .. } => {
            let tol = T::lit(1e-7).max(T::epsilon().sqrt());
            let mut violations = 0;
            let mut col = n;
            for &k in &slack_cols {
                if soft {
                    let used: T = x[col..col + k].iter().copied().sum();
                    if used > tol {
                        violations += 1;
                    }
                    col += k;
                }
            }
            let weights: Vec<T> = x[..n].iter().map(|&u| u * opts.epsilon).collect();
            let total = weights.iter().copied().sum();
            Ok(Some(CrmFit { weights, violations, total }))
        }
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Solver("CRM program unbounded".into())),
    }
}

pub(crate) fn fit_crm_raw<T: Scalar>(data: &[Comparison<T>], opts: &CrmOptions<T>) -> Result<CrmFit<T>> {
    if data.is_empty() {
        return Err(Error::NoMatches);
    }
    if !(opts.epsilon > T::zero()) || !(opts.l1_lambda >= T::zero()) || !(opts.slack_penalty > T::zero()) {
        return Err(Error::Invalid("CRM needs epsilon > 0, lambda >= 0, slack penalty > 0".into()));
    }
    match opts.mode {
        CrmMode::Soft => solve(data, opts, true)?.ok_or_else(|| Error::Solver("soft CRM program infeasible".into())),
        CrmMode::Hard => match solve(data, opts, false)? {
            Some(fit) => Ok(fit),
            None => {
                let conflicts = solve(data, opts, true)?.map_or(1, |f| f.violations.max(1));
                Err(Error::Infeasible { conflicts })
            }
        },
    }
}

/// Fits CRM weights. Hard mode errors on contradictory votes; soft mode reports violations.
pub fn fit_crm<T: Scalar>(matches: &[PreferenceMatch<T>], opts: &CrmOptions<T>) -> Result<FitResult<T>> {
    let fit = fit_crm_raw(&comparisons(matches), opts)?;
    FitResult::from_raw(
        EstimatorId::Crm,
        matches.len(),
        RawFit { weights: fit.weights, violations: Some(fit.violations) },
        T::lit(0.01),
    )
}
