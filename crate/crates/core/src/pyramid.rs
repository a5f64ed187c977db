//! Left-justified pyramids (partitions with tableau bookkeeping).
//!
//! A pyramid for the partition λ = (λ₁ ≤ … ≤ λ_n) has n rows of unit boxes,
//! λ_i boxes in the i-th row, numbered 1..N row by row from the top. Row and
//! column lookups of every box and the column heights q₁..q_l are precomputed
//! at construction.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pyramid {
    parts: Vec<usize>,
    /// 0-based box -> (row, col), both 1-based.
    boxes: Vec<(usize, usize)>,
    col_heights: Vec<usize>,
}

impl Pyramid {
    /// Builds a pyramid from weakly increasing positive parts.
    ///
    /// The input order is significant and is rejected rather than sorted:
    /// the index conventions of everything downstream depend on it.
    pub fn build(parts: &[i64]) -> Result<Pyramid> {
        if parts.is_empty() {
            return Err(Error::EmptyPartition);
        }
        for &p in parts {
            if p < 1 {
                return Err(Error::NonPositivePart(p));
            }
        }
        for w in parts.windows(2) {
            if w[0] > w[1] {
                return Err(Error::NotWeaklyIncreasing(w[0] as usize, w[1] as usize));
            }
        }
        let parts: Vec<usize> = parts.iter().map(|&p| p as usize).collect();
        let mut boxes = Vec::with_capacity(parts.iter().sum());
        for (row, &len) in parts.iter().enumerate() {
            for col in 1..=len {
                boxes.push((row + 1, col));
            }
        }
        let l = *parts.last().unwrap();
        let col_heights = (1..=l)
            .map(|c| parts.iter().filter(|&&p| p >= c).count())
            .collect();
        Ok(Pyramid {
            parts,
            boxes,
            col_heights,
        })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Total number of boxes.
    pub fn boxes(&self) -> usize {
        self.boxes.len()
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.parts.len()
    }

    /// Number of columns (the largest part).
    pub fn cols(&self) -> usize {
        *self.parts.last().unwrap()
    }

    /// Length of row `i` (1-based). Zero outside 1..=rows.
    pub fn part(&self, i: usize) -> usize {
        if i >= 1 && i <= self.parts.len() {
            self.parts[i - 1]
        } else {
            0
        }
    }

    /// λ_s + λ_{s+1} + … + λ_t, zero when s > t. Indices clamped to valid rows.
    pub fn part_range_sum(&self, s: i64, t: i64) -> i64 {
        let mut sum = 0i64;
        let mut i = s.max(1);
        while i <= t {
            sum += self.part(i as usize) as i64;
            i += 1;
        }
        sum
    }

    /// Column heights q₁..q_l.
    pub fn col_heights(&self) -> &[usize] {
        &self.col_heights
    }

    /// (row, col) of the box containing entry `a` (1-based).
    pub fn row_col(&self, a: usize) -> Result<(usize, usize)> {
        self.boxes
            .get(a.wrapping_sub(1))
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index: a,
                max: self.boxes.len(),
            })
    }

    pub fn row_of(&self, a: usize) -> usize {
        self.boxes[a - 1].0
    }

    pub fn col_of(&self, a: usize) -> usize {
        self.boxes[a - 1].1
    }

    /// The nilpotent element of Jordan type λ as an N×N integer matrix:
    /// the sum of e_{a,a+1} over consecutive same-row entries.
    pub fn nilpotent_matrix(&self) -> Vec<Vec<i64>> {
        let n = self.boxes();
        let mut m = vec![vec![0; n]; n];
        for a in 1..n {
            if self.row_of(a) == self.row_of(a + 1) {
                m[a - 1][a] = 1;
            }
        }
        m
    }
}

impl fmt::Display for Pyramid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", strs.join(","))
    }
}

impl fmt::Debug for Pyramid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pyramid({})", self)
    }
}

/// Parses the text form "2,3,5".
pub fn parse_parts(s: &str) -> Result<Pyramid> {
    let parts: std::result::Result<Vec<i64>, _> =
        s.split(',').map(|t| t.trim().parse::<i64>()).collect();
    match parts {
        Ok(v) => Pyramid::build(&v),
        Err(_) => Err(Error::ParseError {
            at: 0,
            msg: format!("`{}` is not a comma-separated integer list", s),
        }),
    }
}
