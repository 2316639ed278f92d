//! Sorting encoded as a permutation-matrix feasibility program.
//!
//! A binary matrix `P` with `P[j][k] = 1` places value `r_j` at position
//! `k`. `P` encodes a nondecreasing arrangement of `r` exactly when it is a
//! permutation matrix (unit row and column sums) and every consecutive pair
//! of positions satisfies `sum_j P[j][k] r_j <= sum_j P[j][k+1] r_j`. These
//! three constraint groups are the model; this module provides a builder
//! that produces a canonical feasible `P` and a checker that reports every
//! violated constraint.

use alloc::vec::Vec;

use crate::instance::{stable_sort_order, BinMatrix};

/// The canonical sorting permutation: `P[j][k] = 1` exactly when `r_j`
/// holds sorted position `k` under a stable nondecreasing sort (ties broken
/// by index, so constant vectors map to the identity).
pub fn sort_permutation_matrix(r: &[f64]) -> BinMatrix {
    let order = stable_sort_order(r);
    let mut p = BinMatrix::zeros(r.len());
    for (k, &j) in order.iter().enumerate() {
        p.set(j, k, true);
    }
    p
}

/// One violated constraint of the sorting program.
#[derive(Debug, Clone, PartialEq)]
pub enum SortViolation {
    /// Row `j` of `P` does not sum to 1.
    RowSum { j: usize, sum: usize },
    /// Column `k` of `P` does not sum to 1.
    ColSum { k: usize, sum: usize },
    /// Positions `k` and `k+1` hold values in decreasing order.
    Order { k: usize, left: f64, right: f64 },
}

/// Feasibility report for a candidate sorting permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct SortReport {
    pub feasible: bool,
    pub violations: Vec<SortViolation>,
}

/// Checks whether `P` encodes a nondecreasing arrangement of `r`, listing
/// every violated row-sum, column-sum, or ordering constraint.
pub fn check_sort_feasible(r: &[f64], p: &BinMatrix) -> SortReport {
    let n = r.len();
    let mut violations = Vec::new();
    debug_assert_eq!(p.n(), n);
    for j in 0..n {
        let sum = p.row_sum(j);
        if sum != 1 {
            violations.push(SortViolation::RowSum { j, sum });
        }
    }
    for k in 0..n {
        let sum = p.col_sum(k);
        if sum != 1 {
            violations.push(SortViolation::ColSum { k, sum });
        }
    }
    // Value placed at position k; meaningful whenever column sums hold, and
    // reported regardless so the caller sees every failing index.
    let placed: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|j| p.at(j, k) * r[j]).sum())
        .collect();
    for k in 0..n.saturating_sub(1) {
        if placed[k] > placed[k + 1] {
            violations.push(SortViolation::Order {
                k,
                left: placed[k],
                right: placed[k + 1],
            });
        }
    }
    SortReport {
        feasible: violations.is_empty(),
        violations,
    }
}
