//! Small dense solvers on row-major `Vec<Vec<T>>` matrices.

use crate::scalar::Scalar;

/// Cholesky solve of `a x = b` for symmetric positive definite `a`.
pub(crate) fn cholesky_solve<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = b.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= T::zero() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let s: T = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s: T = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    Some(x)
}

/// Least-squares solution of `min |A x - b|` over the columns in `cols`,
/// via Householder QR. `rows` holds A row-major. Returns `None` when the
/// selected columns are numerically rank deficient.
pub(crate) fn least_squares<T: Scalar>(rows: &[Vec<T>], b: &[T], cols: &[usize]) -> Option<Vec<T>> {
    let m = rows.len();
    let n = cols.len();
    if n == 0 {
        return Some(Vec::new());
    }
    if m < n {
        return None;
    }
    // Column-major copy of the selected columns.
    let mut a: Vec<Vec<T>> = cols.iter().map(|&c| rows.iter().map(|r| r[c]).collect()).collect();
    let mut rhs = b.to_vec();
    let scale = a
        .iter()
        .flatten()
        .fold(T::zero(), |acc, v| acc.max(v.abs()))
        .max(T::one());
    let tol = T::lit(1e-12) * scale;
    for k in 0..n {
        let norm = (k..m).map(|i| a[k][i] * a[k][i]).sum::<T>().sqrt();
        if norm <= tol {
            return None;
        }
        let alpha = if a[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..m).map(|i| a[k][i]).collect();
        v[0] -= alpha;
        let vnorm2: T = v.iter().map(|&x| x * x).sum();
        if vnorm2 > T::zero() {
            let reflect = |col: &mut [T]| {
                let s: T = v.iter().zip(&col[k..]).map(|(&vi, &ci)| vi * ci).sum();
                let f = (s + s) / vnorm2;
                for (ci, &vi) in col[k..].iter_mut().zip(&v) {
                    *ci -= f * vi;
                }
            };
            for col in a.iter_mut().skip(k) {
                reflect(col);
            }
            reflect(&mut rhs);
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s: T = (i + 1..n).map(|j| a[j][i] * x[j]).sum();
        x[i] = (rhs[i] - s) / a[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_small() {
        let a = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let x = cholesky_solve(&a, &[2.0, 1.0]).unwrap();
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0f64).abs() < 1e-12);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0f64).abs() < 1e-12);
        assert!(cholesky_solve(&[vec![0.0f64]], &[1.0]).is_none());
    }

    #[test]
    fn least_squares_overdetermined() {
        // y = 2 x fitted through (1, 2), (2, 4.1), (3, 5.9)
        let rows = vec![vec![1.0, 9.0], vec![2.0, 9.0], vec![3.0, 9.0]];
        let x: Vec<f64> = least_squares(&rows, &[2.0, 4.1, 5.9], &[0]).unwrap();
        let expected = (2.0 + 8.2 + 17.7) / 14.0;
        assert!((x[0] - expected).abs() < 1e-12);
        let rank_deficient = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(least_squares(&rank_deficient, &[1.0f64, 1.0], &[0, 1]).is_none());
    }
}
