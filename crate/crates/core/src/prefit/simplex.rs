//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Solves `min c^T x` subject to linear rows and `x >= 0`.

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub(crate) struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub rel: Relation,
    pub rhs: T,
}

impl<T: Scalar> Constraint<T> {
    pub fn new(coeffs: Vec<T>, rel: Relation, rhs: T) -> Self {
        Self { coeffs, rel, rhs }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum LpOutcome<T> {
    Optimal { x: Vec<T>, objective: T },
    Infeasible,
    Unbounded,
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    obj: Vec<T>,
    basis: Vec<usize>,
    width: usize,
    tol: T,
}

impl<T: Scalar> Tableau<T> {
    fn rhs(&self, r: usize) -> T {
        self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<T>| {
            let f = row[c];
            if f != T::zero() {
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = T::zero();
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[r] = c;
    }

    fn set_objective(&mut self, cost: &[T]) {
        let mut obj = vec![T::zero(); self.width + 1];
        obj[..cost.len()].copy_from_slice(cost);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost.get(b).copied().unwrap_or_else(T::zero);
            if cb != T::zero() {
                for (o, &v) in obj.iter_mut().zip(&self.rows[r]) {
                    *o -= cb * v;
                }
            }
        }
        self.obj = obj;
    }

    /// Runs simplex iterations over columns `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.obj[j] < -self.tol) else {
                return true;
            };
            let mut best: Option<(usize, T)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > self.tol {
                    let ratio = self.rhs(r) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bv)) => {
                            if ratio < bv || (ratio == bv && self.basis[r] < self.basis[br]) {
                                Some((r, ratio))
                            } else {
                                Some((br, bv))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = best else { return false };
            self.pivot(r, c);
        }
    }
}

pub(crate) fn minimize<T: Scalar>(cost: &[T], constraints: &[Constraint<T>]) -> LpOutcome<T> {
    let n = cost.len();
    let m = constraints.len();
    let tol = T::epsilon().sqrt() * T::lit(0.1);

    // Flip rows so every right-hand side is non-negative.
    let rows: Vec<Constraint<T>> = constraints
        .iter()
        .map(|c| {
            debug_assert_eq!(c.coeffs.len(), n);
            if c.rhs < T::zero() {
                let rel = match c.rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                Constraint::new(c.coeffs.iter().map(|&v| -v).collect(), rel, -c.rhs)
            } else {
                c.clone()
            }
        })
        .collect();

    let n_slack = rows.iter().filter(|c| c.rel != Relation::Eq).count();
    let n_art = rows.iter().filter(|c| c.rel != Relation::Le).count();
    let art_start = n + n_slack;
    let width = art_start + n_art;

    let mut table = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut s, mut a) = (n, art_start);
    for c in &rows {
        let mut row = vec![T::zero(); width + 1];
        row[..n].copy_from_slice(&c.coeffs);
        row[width] = c.rhs;
        match c.rel {
            Relation::Le => {
                row[s] = T::one();
                basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                row[s] = -T::one();
                s += 1;
                row[a] = T::one();
                basis.push(a);
                a += 1;
            }
            Relation::Eq => {
                row[a] = T::one();
                basis.push(a);
                a += 1;
            }
        }
        table.push(row);
    }

    let mut tab = Tableau { rows: table, obj: Vec::new(), basis, width, tol };

    if n_art > 0 {
        let mut phase1 = vec![T::zero(); width];
        for v in &mut phase1[art_start..] {
            *v = T::one();
        }
        tab.set_objective(&phase1);
        tab.optimize(width);
        let infeasibility = -tab.obj[width];
        let scale = rows.iter().fold(T::one(), |acc, c| {
            if c.rel == Relation::Le {
                acc
            } else {
                acc.max(c.rhs)
            }
        });
        if infeasibility > tol * scale * T::from_count(m.max(1)) {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art_start {
                let col = (0..art_start).find(|&j| tab.rows[r][j].abs() > tol);
                match col {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    tab.set_objective(cost);
    if !tab.optimize(art_start) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![T::zero(); n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(r).max(T::zero());
        }
    }
    let objective = cost.iter().zip(&x).map(|(&c, &v)| c * v).sum();
    LpOutcome::Optimal { x, objective }
}
