//! Shared fixtures for unit tests.

use alloc::vec;
use alloc::vec::Vec;

use crate::instance::{allocate, BinMatrix, Instance};
use crate::sortperm::sort_permutation_matrix;

/// Three-site instance with costs `[[0,4,7],[2,0,3],[5,6,0]]`, used as the
/// worked example across the test suite.
pub fn e1(p: usize, lambda: Vec<f64>) -> Instance {
    Instance::new(
        3,
        p,
        lambda,
        vec![0.0, 4.0, 7.0, 2.0, 0.0, 3.0, 5.0, 6.0, 0.0],
        None,
        None,
    )
    .unwrap()
}

/// Greedy feasible triple for an open set: cheapest-site allocation and the
/// canonical sorting permutation.
pub fn greedy_triple(instance: &Instance, open: &[usize]) -> (BinMatrix, BinMatrix, Vec<u8>) {
    let n = instance.n();
    let (costs, sites) = allocate(instance, open).unwrap();
    let p = sort_permutation_matrix(&costs);
    let mut x = BinMatrix::zeros(n);
    for (j, &s) in sites.iter().enumerate() {
        x.set(j, s, true);
    }
    let mut y = vec![0u8; n];
    for &l in open {
        y[l] = 1;
    }
    (p, x, y)
}
