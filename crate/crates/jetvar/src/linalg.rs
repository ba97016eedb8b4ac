//! Exact linear algebra over symbolic expressions and rationals.
#![allow(clippy::needless_range_loop)]
//!
//! Matrices here are small (indexed by top-order jet pairs), so plain
//! Gaussian elimination over the expression field is used; pivots are
//! chosen by exact zero-testing.

use num::{BigRational, One, Zero};

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Row-major matrix of expressions.
#[derive(Clone, Debug)]
pub struct ExprMatrix {
    pub nrows: usize,
    pub ncols: usize,
    data: Vec<Expr>,
}

impl ExprMatrix {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        ExprMatrix { nrows, ncols, data: vec![Expr::zero(); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ExprMatrix::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Expr::one();
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> &Expr {
        &self.data[r * self.ncols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Expr {
        &mut self.data[r * self.ncols + c]
    }

    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|r| (0..r).all(|c| self.at(r, c) == self.at(c, r)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Expr::is_zero)
    }

    pub fn mul(&self, other: &ExprMatrix) -> ExprMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut out = ExprMatrix::zero(self.nrows, other.ncols);
        for r in 0..self.nrows {
            for c in 0..other.ncols {
                let mut acc = Expr::zero();
                for k in 0..self.ncols {
                    acc = &acc + &(self.at(r, k) * other.at(k, c));
                }
                *out.at_mut(r, c) = acc;
            }
        }
        out
    }

    /// Determinant by fraction-field Gaussian elimination.
    pub fn det(&self) -> Result<Expr> {
        assert_eq!(self.nrows, self.ncols, "determinant of a non-square matrix");
        let n = self.nrows;
        let mut a = self.clone();
        let mut det = Expr::one();
        for col in 0..n {
            let pivot_row = (col..n).find(|&r| !a.at(r, col).is_zero());
            let Some(p) = pivot_row else {
                return Ok(Expr::zero());
            };
            if p != col {
                for c in 0..n {
                    let tmp = a.at(p, c).clone();
                    *a.at_mut(p, c) = a.at(col, c).clone();
                    *a.at_mut(col, c) = tmp;
                }
                det = -&det;
            }
            let pivot = a.at(col, col).clone();
            det = &det * &pivot;
            for r in (col + 1)..n {
                if a.at(r, col).is_zero() {
                    continue;
                }
                let factor = a.at(r, col).div(&pivot)?;
                for c in col..n {
                    let v = a.at(r, c) - &(&factor * a.at(col, c));
                    *a.at_mut(r, c) = v;
                }
            }
        }
        Ok(det)
    }

    /// Inverse by Gauss-Jordan; `None` if singular.
    pub fn inverse(&self) -> Result<Option<ExprMatrix>> {
        assert_eq!(self.nrows, self.ncols);
        let n = self.nrows;
        let mut a = self.clone();
        let mut inv = ExprMatrix::identity(n);
        for col in 0..n {
            let pivot_row = (col..n).find(|&r| !a.at(r, col).is_zero());
            let Some(p) = pivot_row else {
                return Ok(None);
            };
            if p != col {
                for c in 0..n {
                    let tmp = a.at(p, c).clone();
                    *a.at_mut(p, c) = a.at(col, c).clone();
                    *a.at_mut(col, c) = tmp;
                    let tmp = inv.at(p, c).clone();
                    *inv.at_mut(p, c) = inv.at(col, c).clone();
                    *inv.at_mut(col, c) = tmp;
                }
            }
            let pivot = a.at(col, col).clone();
            for c in 0..n {
                *a.at_mut(col, c) = a.at(col, c).div(&pivot)?;
                *inv.at_mut(col, c) = inv.at(col, c).div(&pivot)?;
            }
            for r in 0..n {
                if r == col || a.at(r, col).is_zero() {
                    continue;
                }
                let factor = a.at(r, col).clone();
                for c in 0..n {
                    let v = a.at(r, c) - &(&factor * a.at(col, c));
                    *a.at_mut(r, c) = v;
                    let v = inv.at(r, c) - &(&factor * inv.at(col, c));
                    *inv.at_mut(r, c) = v;
                }
            }
        }
        Ok(Some(inv))
    }

    /// Solve `A x = b` for a unique solution.
    pub fn solve(&self, b: &[Expr]) -> Result<Vec<Expr>> {
        assert_eq!(self.nrows, self.ncols);
        assert_eq!(b.len(), self.nrows);
        let inv = self
            .inverse()?
            .ok_or_else(|| Error::SingularMatrix("linear system has no unique solution".into()))?;
        Ok((0..self.nrows)
            .map(|r| {
                let mut acc = Expr::zero();
                for c in 0..self.ncols {
                    acc = &acc + &(inv.at(r, c) * &b[c]);
                }
                acc
            })
            .collect())
    }

    /// Extract a rational matrix if every entry is constant.
    pub fn as_rational(&self) -> Option<Vec<Vec<BigRational>>> {
        let mut out = Vec::with_capacity(self.nrows);
        for r in 0..self.nrows {
            let mut row = Vec::with_capacity(self.ncols);
            for c in 0..self.ncols {
                row.push(self.at(r, c).as_constant()?);
            }
            out.push(row);
        }
        Some(out)
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref_rational(a: &mut [Vec<BigRational>]) -> Vec<usize> {
    let nrows = a.len();
    let ncols = if nrows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row >= nrows {
            break;
        }
        let Some(p) = (row..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = BigRational::one() / a[row][col].clone();
        for c in col..ncols {
            let scaled = &a[row][c] * &inv;
            a[row][c] = scaled;
        }
        for r in 0..nrows {
            if r == row || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..ncols {
                let v = &a[r][c] - &(&f * &a[row][c]);
                a[r][c] = v;
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank_rational(a: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = a.to_vec();
    rref_rational(&mut m).len()
}

/// Basis of the null space of a rational matrix (columns = unknowns).
pub fn nullspace_rational(a: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let ncols = if a.is_empty() { 0 } else { a[0].len() };
    let mut m: Vec<Vec<BigRational>> = a.to_vec();
    let pivots = rref_rational(&mut m);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &f in &free {
        let mut v = vec![BigRational::zero(); ncols];
        v[f] = BigRational::one();
        for (prow, &pcol) in pivots.iter().enumerate() {
            v[pcol] = -m[prow][f].clone();
        }
        basis.push(v);
    }
    basis
}

/// A particular solution of `A x = b` with free unknowns set to zero, or
/// `None` if the system is inconsistent.
pub fn particular_solution_rational(
    a: &[Vec<BigRational>],
    b: &[Expr],
) -> Result<Option<Vec<Expr>>> {
    let nrows = a.len();
    let ncols = if nrows == 0 { 0 } else { a[0].len() };
    // eliminate on the rational coefficients while carrying the symbolic
    // right-hand side along
    let mut m: Vec<Vec<BigRational>> = a.to_vec();
    let mut rhs: Vec<Expr> = b.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row >= nrows {
            break;
        }
        let Some(p) = (row..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        rhs.swap(row, p);
        let inv = BigRational::one() / m[row][col].clone();
        for c in col..ncols {
            let scaled = &m[row][c] * &inv;
            m[row][c] = scaled;
        }
        rhs[row] = &rhs[row] * &Expr::from_rational(inv);
        for r in 0..nrows {
            if r == row || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in col..ncols {
                let v = &m[r][c] - &(&f * &m[row][c]);
                m[r][c] = v;
            }
            let shift = &Expr::from_rational(f) * &rhs[row];
            rhs[r] = &rhs[r] - &shift;
        }
        pivots.push((row, col));
        row += 1;
    }
    // rows of zeros must have zero right-hand side
    for r in row..nrows {
        if !rhs[r].is_zero() {
            return Ok(None);
        }
    }
    let mut x = vec![Expr::zero(); ncols];
    for (prow, pcol) in pivots {
        x[pcol] = rhs[prow].clone();
    }
    Ok(Some(x))
}
