//! Lawson-Hanson active-set non-negative least squares.

use super::linalg::least_squares;
use crate::scalar::Scalar;

/// Solves `min |A x - b|` subject to `x >= 0`, `rows` holding A row-major.
pub fn nnls<T: Scalar>(rows: &[Vec<T>], b: &[T]) -> Vec<T> {
    let n = rows.first().map_or(0, Vec::len);
    let mut x = vec![T::zero(); n];
    let mut passive = vec![false; n];
    let scale = rows.iter().flatten().fold(T::zero(), |acc, v| acc.max(v.abs())).max(T::one())
        * b.iter().fold(T::zero(), |acc, v| acc.max(v.abs())).max(T::one());
    let tol = T::epsilon() * T::lit(64.0) * scale * T::from_count(rows.len().max(1));
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let grad = gradient(rows, b, &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && grad[j] > tol)
            .max_by(|&i, &j| grad[i].partial_cmp(&grad[j]).expect("finite gradient"));
        let Some(j) = candidate else { break };
        passive[j] = true;

        loop {
            let cols: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let Some(z) = least_squares(rows, b, &cols) else {
                // Dependent column: drop the one just added and stop growing the set.
                passive[j] = false;
                return x;
            };
            if z.iter().all(|&v| v > T::zero()) {
                for (&c, &v) in cols.iter().zip(&z) {
                    x[c] = v;
                }
                break;
            }
            // Step towards z until the first passive variable hits zero.
            let mut step = T::one();
            for (&c, &v) in cols.iter().zip(&z) {
                if v <= T::zero() {
                    let denom = x[c] - v;
                    if denom > T::zero() {
                        step = step.min(x[c] / denom);
                    }
                }
            }
            for (&c, &v) in cols.iter().zip(&z) {
                x[c] = x[c] + step * (v - x[c]);
                if x[c] <= T::lit(1e-14) * scale {
                    x[c] = T::zero();
                    passive[c] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

/// `A^T (b - A x)`.
fn gradient<T: Scalar>(rows: &[Vec<T>], b: &[T], x: &[T]) -> Vec<T> {
    let n = x.len();
    let mut g = vec![T::zero(); n];
    for (row, &bi) in rows.iter().zip(b) {
        let r = bi - row.iter().zip(x).map(|(&a, &xi)| a * xi).sum::<T>();
        for (gj, &a) in g.iter_mut().zip(row) {
            *gj += a * r;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(rows: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
        rows.iter()
            .zip(b)
            .map(|(r, &bi)| {
                let e = r.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() - bi;
                e * e
            })
            .sum()
    }

    #[test]
    fn unconstrained_optimum_inside() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let x: Vec<f64> = nnls(&rows, &[1.0, 2.0, 3.0]);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn clamps_negative_direction() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let x: Vec<f64> = nnls(&rows, &[-1.0, 2.0]);
        assert_eq!(x[0], 0.0);
        assert!((x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_target_gives_zero() {
        let rows = vec![vec![0.3, -0.2, 0.1], vec![-0.5, 0.4, 0.9]];
        assert_eq!(nnls(&rows, &[0.0, 0.0]), vec![0.0; 3]);
    }

    proptest! {
        // KKT: x >= 0, gradient <= 0 everywhere, and == 0 where x > 0.
        #[test]
        fn kkt_conditions(
            a in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 6..12),
            b_seed in prop::collection::vec(-1.0f64..1.0, 12),
        ) {
            let b = &b_seed[..a.len()];
            let x = nnls(&a, b);
            let g = gradient(&a, b, &x);
            for (xi, gi) in x.iter().zip(&g) {
                prop_assert!(*xi >= 0.0);
                prop_assert!(*gi <= 1e-8, "gradient {gi}");
                if *xi > 1e-9 {
                    prop_assert!(gi.abs() <= 1e-8);
                }
            }
            // No feasible coordinate nudge improves the residual.
            let base = residual(&a, b, &x);
            for j in 0..x.len() {
                let mut y = x.clone();
                y[j] += 1e-4;
                prop_assert!(residual(&a, b, &y) >= base - 1e-12);
            }
        }
    }
}
