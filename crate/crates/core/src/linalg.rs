//! Exact linear algebra.
//!
//! [`Echelon`] keeps a sparse matrix over the rationals in reduced row echelon
//! form while rows are added one at a time. Pivots are always the first
//! nonzero column of a row, so results do not depend on anything but the row
//! contents and the column numbering.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::expr::{Expr, Rational};

/// A sparse row: `(column, value)` pairs with strictly increasing columns and
/// no zero values.
pub type SparseRow = Vec<(usize, Rational)>;

#[derive(Clone, Debug)]
pub struct Echelon {
    ncols: usize,
    // pivot column -> row with a 1 at the pivot and 0 at every other pivot column
    rows: BTreeMap<usize, BTreeMap<usize, Rational>>,
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Echelon {
            ncols,
            rows: BTreeMap::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    /// Reduces a row against the current pivots.
    fn reduce(&self, row: impl IntoIterator<Item = (usize, Rational)>) -> BTreeMap<usize, Rational> {
        let mut r: BTreeMap<usize, Rational> = BTreeMap::new();
        for (c, v) in row {
            assert!(c < self.ncols, "column {c} out of range");
            if !v.is_zero() {
                let e = r.entry(c).or_insert_with(Rational::zero);
                *e += v;
            }
        }
        r.retain(|_, v| !v.is_zero());
        let pivots: Vec<usize> = r.keys().filter(|c| self.rows.contains_key(c)).copied().collect();
        for p in pivots {
            let Some(f) = r.get(&p).cloned() else { continue };
            for (c, v) in &self.rows[&p] {
                let e = r.entry(*c).or_insert_with(Rational::zero);
                *e -= &f * v;
                if e.is_zero() {
                    r.remove(c);
                }
            }
        }
        r
    }

    /// Adds a row; returns `true` if it increased the rank.
    pub fn insert(&mut self, row: impl IntoIterator<Item = (usize, Rational)>) -> bool {
        let mut r = self.reduce(row);
        let Some((&p, lead)) = r.iter().next() else {
            return false;
        };
        let inv = lead.recip();
        for v in r.values_mut() {
            *v *= &inv;
        }
        for other in self.rows.values_mut() {
            if let Some(f) = other.get(&p).cloned() {
                for (c, v) in &r {
                    let e = other.entry(*c).or_insert_with(Rational::zero);
                    *e -= &f * v;
                    if e.is_zero() {
                        other.remove(c);
                    }
                }
            }
        }
        r.retain(|_, v| !v.is_zero());
        self.rows.insert(p, r);
        true
    }

    /// The reduced row whose pivot is `col`.
    pub fn row(&self, col: usize) -> Option<SparseRow> {
        self.rows
            .get(&col)
            .map(|r| r.iter().map(|(c, v)| (*c, v.clone())).collect())
    }

    /// Reduced rows in pivot order.
    pub fn rows(&self) -> impl Iterator<Item = SparseRow> + '_ {
        self.rows
            .values()
            .map(|r| r.iter().map(|(c, v)| (*c, v.clone())).collect())
    }

    /// Basis of the null space, one vector per free column in ascending order.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        (0..self.ncols)
            .filter(|c| !self.rows.contains_key(c))
            .map(|free| {
                let mut v = vec![Rational::zero(); self.ncols];
                v[free] = Rational::one();
                for (p, row) in &self.rows {
                    if let Some(x) = row.get(&free) {
                        v[*p] = -x;
                    }
                }
                v
            })
            .collect()
    }
}

/// Null-space basis of the system whose rows are given.
pub fn nullspace(ncols: usize, rows: impl IntoIterator<Item = SparseRow>) -> Vec<Vec<Rational>> {
    let mut e = Echelon::new(ncols);
    for r in rows {
        e.insert(r);
    }
    e.nullspace()
}

/// A particular solution of `A x = b` (free variables set to zero), or `None`
/// if the system is inconsistent. Each equation is a sparse row of `A` and its
/// right-hand side.
pub fn solve_particular(
    ncols: usize,
    equations: impl IntoIterator<Item = (SparseRow, Rational)>,
) -> Option<Vec<Rational>> {
    let mut e = Echelon::new(ncols + 1);
    for (row, rhs) in equations {
        let mut row = row;
        if !rhs.is_zero() {
            row.push((ncols, rhs));
        }
        e.insert(row);
        if e.rows.contains_key(&ncols) {
            return None;
        }
    }
    let mut x = vec![Rational::zero(); ncols];
    for (p, row) in &e.rows {
        if let Some(v) = row.get(&ncols) {
            x[*p] = v.clone();
        }
    }
    Some(x)
}

/// Rank of a dense rational matrix.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut e = Echelon::new(ncols);
    for r in rows {
        e.insert(r.iter().cloned().enumerate());
    }
    e.rank()
}

/// Solves the square system `a x = b` over rational functions by Gaussian
/// elimination. Returns `None` when `a` is singular.
pub fn solve_dense(a: &[Vec<Expr>], b: &[Expr]) -> Option<Vec<Expr>> {
    let n = a.len();
    assert_eq!(b.len(), n);
    let mut m: Vec<Vec<Expr>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), n, "matrix must be square");
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        let inv = m[col][col].recip().ok()?;
        for v in m[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=n {
                    let d = &f * &m[col][c];
                    m[r][c] = &m[r][c] - &d;
                }
            }
        }
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// Inverse of a square matrix over rational functions, `None` if singular.
pub fn inverse_dense(a: &[Vec<Expr>]) -> Option<Vec<Vec<Expr>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<Expr> = (0..n)
            .map(|i| if i == j { Expr::one() } else { Expr::zero() })
            .collect();
        cols.push(solve_dense(a, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

/// Determinant by fraction-free cofactor expansion along the first row.
pub fn determinant(a: &[Vec<Expr>]) -> Expr {
    let n = a.len();
    match n {
        0 => Expr::one(),
        1 => a[0][0].clone(),
        _ => {
            let mut acc = Expr::zero();
            for j in 0..n {
                if a[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Expr>> = a[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let t = &a[0][j] * &determinant(&minor);
                acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        }
    }
}
