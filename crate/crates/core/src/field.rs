//! Scalar-generic dense linear algebra.
//!
//! The same elimination routines run over exact rationals (where zero is
//! exact) and over floats (where zero means "below tolerance"), so rank and
//! kernel computations share one implementation across both modes.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

use crate::Rational;

/// A field element usable in elimination.
pub trait Field: Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive {
    /// Whether the value counts as zero for pivoting.
    fn negligible(&self) -> bool;

    /// Whether the scalar type is exact.
    const EXACT: bool;
}

impl Field for Rational {
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    const EXACT: bool = true;
}

impl Field for f64 {
    fn negligible(&self) -> bool {
        self.abs() < 1e-10
    }
    const EXACT: bool = false;
}

impl Field for f32 {
    fn negligible(&self) -> bool {
        self.abs() < 1e-5
    }
    const EXACT: bool = false;
}

pub type Matrix<T> = Vec<Vec<T>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<T: Field>(m: &mut Matrix<T>) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // exact: first nonzero; float: largest magnitude
        let pick = if T::EXACT {
            (r..rows).find(|&i| !m[i][c].negligible())
        } else {
            (r..rows)
                .filter(|&i| !m[i][c].negligible())
                .max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap())
        };
        let Some(p) = pick else { continue };
        m.swap(r, p);
        let inv = T::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let v = m[r][j].clone() * f.clone();
                    m[i][j] = m[i][j].clone() - v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<T: Field>(rows: &[Vec<T>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Basis of `{x : A x = 0}` where `A` has the given rows.
pub fn nullspace<T: Field>(rows: &[Vec<T>], cols: usize) -> Vec<Vec<T>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); cols];
            v[f] = T::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Inverse of a square matrix, or `None` when singular.
pub fn inverse<T: Field>(a: &[Vec<T>]) -> Option<Matrix<T>> {
    let n = a.len();
    let mut m: Matrix<T> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `A x = b` for square non-singular `A`.
pub fn solve<T: Field>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = a.len();
    let mut m: Matrix<T> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

/// Greedily picks a maximal linearly independent subset of `rows`, scanning
/// in the given order. Returns the chosen indices.
pub fn independent_rows<T: Field>(rows: &[Vec<T>]) -> Vec<usize> {
    let dim = rows.first().map_or(0, Vec::len);
    let mut chosen = Vec::new();
    // reduced basis rows with their pivot columns
    let mut basis: Vec<(usize, Vec<T>)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if chosen.len() == dim {
            break;
        }
        let mut v = row.clone();
        for (p, b) in &basis {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for j in 0..dim {
                    v[j] = v[j].clone() - b[j].clone() * f.clone();
                }
            }
        }
        let Some(p) = (0..dim)
            .filter(|&j| !v[j].negligible())
            .max_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap())
        else {
            continue;
        };
        let inv = T::one() / v[p].clone();
        for x in v.iter_mut() {
            *x = x.clone() * inv.clone();
            if x.negligible() {
                *x = T::zero();
            }
        }
        v[p] = T::one();
        for (_, b) in basis.iter_mut() {
            if !b[p].is_zero() {
                let f = b[p].clone();
                for j in 0..dim {
                    b[j] = b[j].clone() - v[j].clone() * f.clone();
                }
            }
        }
        basis.push((p, v));
        chosen.push(i);
    }
    chosen
}

pub fn dot<T: Field>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |s, (x, y)| s + x.clone() * y.clone())
}

pub fn mat_vec<T: Field>(m: &[Vec<T>], v: &[T]) -> Vec<T> {
    m.iter().map(|row| dot(row, v)).collect()
}
