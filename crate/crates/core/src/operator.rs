//! Sparse real-symmetric operators.
//!
//! Only the upper triangle (`row <= col`) is stored; every accessor treats
//! the stored entry as defining both `(row, col)` and `(col, row)`, so the
//! matrix is symmetric by construction.

use std::collections::BTreeMap;

use faer::Mat;

use crate::basis::BasisTag;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    dim: usize,
    tag: BasisTag,
    /// Sorted by `(row, col)`, `row <= col`, no duplicates, no explicit zeros.
    entries: Vec<(usize, usize, f64)>,
}

/// Accumulates symmetric entries; repeated pairs are summed.
#[derive(Debug, Default)]
pub struct OperatorBuilder {
    dim: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl OperatorBuilder {
    pub fn new(dim: usize) -> Self {
        OperatorBuilder {
            dim,
            entries: BTreeMap::new(),
        }
    }

    /// Adds `value` to the unordered pair `{i, j}`.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i < self.dim && j < self.dim);
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.entries.entry(key).or_insert(0.0) += value;
    }

    pub fn build(self, tag: BasisTag) -> SymmetricOperator {
        let entries = self
            .entries
            .into_iter()
            .filter(|&(_, v)| v != 0.0)
            .map(|((i, j), v)| (i, j, v))
            .collect();
        SymmetricOperator {
            dim: self.dim,
            tag,
            entries,
        }
    }
}

impl SymmetricOperator {
    pub fn zeros(dim: usize, tag: BasisTag) -> Self {
        SymmetricOperator {
            dim,
            tag,
            entries: Vec::new(),
        }
    }

    pub fn from_dense(m: &[Vec<f64>], tag: BasisTag) -> Result<Self> {
        let dim = m.len();
        let mut b = OperatorBuilder::new(dim);
        for (i, row) in m.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidArgument {
                    name: "matrix",
                    reason: "not square".into(),
                });
            }
            for j in i..dim {
                if row[j] != m[j][i] {
                    return Err(Error::InvalidArgument {
                        name: "matrix",
                        reason: format!("not symmetric at ({i}, {j})"),
                    });
                }
                b.add(i, j, row[j]);
            }
        }
        Ok(b.build(tag))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn nnz_upper(&self) -> usize {
        self.entries.len()
    }

    /// Stored upper-triangle entries `(row, col, value)` with `row <= col`.
    pub fn upper_entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.entries
            .binary_search_by(|&(r, c, _)| (r, c).cmp(&key))
            .map(|k| self.entries[k].2)
            .unwrap_or(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.2.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.2.abs()))
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.dim]; self.dim];
        for &(i, j, v) in &self.entries {
            m[i][j] = v;
            m[j][i] = v;
        }
        m
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        y
    }

    /// `v^T A v`.
    pub fn expectation(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.dim);
        self.entries
            .iter()
            .map(|&(i, j, a)| {
                if i == j {
                    a * v[i] * v[i]
                } else {
                    2.0 * a * v[i] * v[j]
                }
            })
            .sum()
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, other: &SymmetricOperator, scale: f64) -> Result<SymmetricOperator> {
        if self.dim != other.dim || self.tag != other.tag {
            return Err(Error::BasisMismatch {
                spectrum: self.tag,
                operator: other.tag,
            });
        }
        let mut b = OperatorBuilder::new(self.dim);
        for &(i, j, v) in &self.entries {
            b.add(i, j, v);
        }
        for &(i, j, v) in &other.entries {
            b.add(i, j, scale * v);
        }
        Ok(b.build(self.tag))
    }

    /// Exact sparse square `A * A`, which is again symmetric.
    pub fn square(&self) -> SymmetricOperator {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.dim];
        for &(i, j, v) in &self.entries {
            rows[i].push((j, v));
            if i != j {
                rows[j].push((i, v));
            }
        }
        let mut b = OperatorBuilder::new(self.dim);
        for (i, row) in rows.iter().enumerate() {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for &(k, a_ik) in row {
                for &(j, a_kj) in &rows[k] {
                    if j >= i {
                        *acc.entry(j).or_insert(0.0) += a_ik * a_kj;
                    }
                }
            }
            for (j, v) in acc {
                b.add(i, j, v);
            }
        }
        b.build(self.tag)
    }

    /// Principal submatrix on `indices` (which must be strictly increasing).
    pub fn restrict(&self, indices: &[usize], tag: BasisTag) -> SymmetricOperator {
        let mut position = vec![usize::MAX; self.dim];
        for (k, &i) in indices.iter().enumerate() {
            position[i] = k;
        }
        let mut b = OperatorBuilder::new(indices.len());
        for &(i, j, v) in &self.entries {
            let (pi, pj) = (position[i], position[j]);
            if pi != usize::MAX && pj != usize::MAX {
                b.add(pi, pj, v);
            }
        }
        b.build(tag)
    }

    /// Largest `|A_ij|` with `i`, `j` in different groups of `group_of`.
    pub fn max_cross_group(&self, group_of: impl Fn(usize) -> u32) -> f64 {
        self.entries
            .iter()
            .filter(|&&(i, j, _)| group_of(i) != group_of(j))
            .fold(0.0, |m, e| m.max(e.2.abs()))
    }
}
