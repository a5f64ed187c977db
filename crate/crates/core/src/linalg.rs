//! Exact dense linear algebra over the rationals, enough for rank and
//! nullspace computations on the small matrices that arise here.

use crate::scalar::Q;
use num::{One, Zero};

/// Reduced row echelon form in place; returns the pivot column of each
/// nonzero row, in order.
pub fn rref(m: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = &*x / &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, pv) in row.iter_mut().zip(&pivot_row) {
                    let sub = &f * pv;
                    *x = &*x - &sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

pub fn rank(mut m: Vec<Vec<Q>>) -> usize {
    rref(&mut m).len()
}

/// Basis of the nullspace {v : M v = 0}, echelon-normalized: each vector has
/// a 1 in its free column and zeros in the other free columns.
pub fn kernel_basis(mut m: Vec<Vec<Q>>, cols: usize) -> Vec<Vec<Q>> {
    for row in &m {
        debug_assert_eq!(row.len(), cols);
    }
    let pivots = rref(&mut m);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![Q::zero(); cols];
        v[free] = Q::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[row][free].clone();
        }
        basis.push(v);
    }
    basis
}
