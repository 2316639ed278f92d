//! Exhaustive enumeration oracles.
//!
//! These are the slow, obviously-correct solvers the rest of the crate is
//! validated against. [`solve_enumerate`] walks every size-`p` subset of
//! sites and evaluates the ordered median objective directly.
//! [`solve_enumerate_extended`] instead walks explicit binary decision
//! triples — open sites `y`, an allocation matrix `X` restricted to open
//! sites, and a sorting permutation `P` consistent with the realized
//! costs — and minimizes the full quadratic objective, which is the only
//! correct approach once interaction costs make non-greedy allocations
//! attractive.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::{
    allocate, extended_objective, ordered_median_value, stable_sort_order, BinMatrix, Instance,
};
use crate::sortperm::{check_sort_feasible, sort_permutation_matrix};

/// Largest `n` for which subset enumeration is allowed to run.
pub const ENUMERATE_MAX_N: usize = 20;
/// Largest `n` for which the extended configuration enumeration may run.
pub const EXTENDED_MAX_N: usize = 5;

/// Iterator over all size-`p` subsets of `0..n` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    p: usize,
    current: Vec<usize>,
    started: bool,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, p: usize) -> Self {
        Combinations {
            n,
            p,
            current: (0..p).collect(),
            started: false,
            done: p > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.current.clone());
        }
        // Advance the rightmost index that still has room, then pack the
        // tail right behind it.
        let mut i = self.p;
        loop {
            if i == 0 {
                self.done = true;
                return None;
            }
            i -= 1;
            if self.current[i] < self.n - self.p + i {
                break;
            }
        }
        self.current[i] += 1;
        for k in i + 1..self.p {
            self.current[k] = self.current[k - 1] + 1;
        }
        Some(self.current.clone())
    }
}

/// Exact optimum of the plain ordered median objective by enumerating all
/// `C(n, p)` open sets. Returns the optimal value and every open set that
/// attains it within an absolute tolerance of `1e-12`.
///
/// Requires a plain instance (no interaction costs) and `n <= 20`.
pub fn solve_enumerate(instance: &Instance) -> Result<(f64, Vec<Vec<usize>>)> {
    if !instance.is_plain() {
        return Err(Error::Unsupported(String::from(
            "interaction costs present; use solve_enumerate_extended",
        )));
    }
    if instance.n() > ENUMERATE_MAX_N {
        return Err(Error::ResourceLimit(format!(
            "subset enumeration capped at n = {ENUMERATE_MAX_N}, got n = {}",
            instance.n()
        )));
    }
    let mut best = f64::INFINITY;
    for open in Combinations::new(instance.n(), instance.p()) {
        let value = ordered_median_value(instance, &open)?;
        if value < best {
            best = value;
        }
    }
    let mut winners = Vec::new();
    for open in Combinations::new(instance.n(), instance.p()) {
        if ordered_median_value(instance, &open)? <= best + 1e-12 {
            winners.push(open);
        }
    }
    Ok((best, winners))
}

/// An optimal configuration found by the extended oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedSolution {
    pub value: f64,
    /// Sorted open-site indices.
    pub open_sites: Vec<usize>,
    /// Allocation matrix; every row selects one open site.
    pub x: BinMatrix,
    /// Sorting permutation consistent with the costs realized by `x`.
    pub p: BinMatrix,
}

/// Exact optimum of the full quadratic objective over explicit binary
/// configurations. Enumerates open sets, every allocation of clients to
/// open sites, and every permutation that arranges the realized costs
/// nondecreasingly; with both interaction tensors absent a greedy fast
/// path (cheapest open site, canonical sort) is used instead, which is
/// equivalent there. Requires `n <= 5`.
pub fn solve_enumerate_extended(instance: &Instance) -> Result<ExtendedSolution> {
    check_extended_guard(instance)?;
    if instance.is_plain() {
        return greedy_path(instance);
    }
    exhaustive_path(instance)
}

/// The always-exhaustive variant of [`solve_enumerate_extended`], kept
/// callable so the fast path can be validated against it.
pub fn solve_enumerate_extended_exhaustive(instance: &Instance) -> Result<ExtendedSolution> {
    check_extended_guard(instance)?;
    exhaustive_path(instance)
}

fn check_extended_guard(instance: &Instance) -> Result<()> {
    if instance.n() > EXTENDED_MAX_N {
        return Err(Error::ResourceLimit(format!(
            "configuration enumeration capped at n = {EXTENDED_MAX_N}, got n = {}",
            instance.n()
        )));
    }
    Ok(())
}

/// Greedy evaluation per open set: each client takes its cheapest open
/// site, the permutation is the canonical stable sort. Valid when there
/// are no interaction costs: allocation costs are then separable and
/// pointwise-minimal, and every ordering-consistent permutation yields the
/// same sorted cost vector.
fn greedy_path(instance: &Instance) -> Result<ExtendedSolution> {
    let n = instance.n();
    let mut best: Option<ExtendedSolution> = None;
    for open in Combinations::new(n, instance.p()) {
        let (costs, sites) = allocate(instance, &open)?;
        let p = sort_permutation_matrix(&costs);
        let mut x = BinMatrix::zeros(n);
        for (j, &site) in sites.iter().enumerate() {
            x.set(j, site, true);
        }
        let value = extended_objective(instance, &p, &x)?;
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(ExtendedSolution { value, open_sites: open, x, p });
        }
    }
    Ok(best.expect("at least one open set exists"))
}

/// All permutation matrices of size `n`, in lexicographic order of the
/// position-to-client map.
pub fn all_permutation_matrices(n: usize) -> Vec<BinMatrix> {
    let mut perms = Vec::new();
    let mut slots: Vec<usize> = Vec::new();
    let mut used = vec![false; n];
    fn rec(n: usize, slots: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<BinMatrix>) {
        if slots.len() == n {
            let mut p = BinMatrix::zeros(n);
            for (k, &j) in slots.iter().enumerate() {
                p.set(j, k, true);
            }
            out.push(p);
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                slots.push(j);
                rec(n, slots, used, out);
                slots.pop();
                used[j] = false;
            }
        }
    }
    rec(n, &mut slots, &mut used, &mut perms);
    perms
}

fn exhaustive_path(instance: &Instance) -> Result<ExtendedSolution> {
    let n = instance.n();
    let perms = all_permutation_matrices(n);
    let d_active = instance.d().is_some_and(|d| !d.is_zero());
    let mut best: Option<ExtendedSolution> = None;

    for open in Combinations::new(n, instance.p()) {
        // Each client independently picks one open site: p^n allocations,
        // walked as a mixed-radix counter so the order is fixed.
        let mut choice = vec![0usize; n];
        loop {
            let mut x = BinMatrix::zeros(n);
            let mut realized = vec![0.0; n];
            for j in 0..n {
                let site = open[choice[j]];
                x.set(j, site, true);
                realized[j] = instance.cost(j, site);
            }
            if d_active {
                // Ordering interactions distinguish tied permutations, so
                // every consistent one must be tried.
                for p in &perms {
                    if !check_sort_feasible(&realized, p).feasible {
                        continue;
                    }
                    let value = extended_objective(instance, p, &x)?;
                    if best.as_ref().is_none_or(|b| value < b.value) {
                        best = Some(ExtendedSolution {
                            value,
                            open_sites: open.clone(),
                            x: x.clone(),
                            p: p.clone(),
                        });
                    }
                }
            } else {
                // Without ordering interactions all consistent permutations
                // give the same value; the canonical sort represents them.
                let p = sort_permutation_matrix(&realized);
                let value = extended_objective(instance, &p, &x)?;
                if best.as_ref().is_none_or(|b| value < b.value) {
                    best = Some(ExtendedSolution {
                        value,
                        open_sites: open.clone(),
                        x,
                        p,
                    });
                }
            }

            // Advance the counter.
            let mut pos = 0;
            loop {
                if pos == n {
                    break;
                }
                choice[pos] += 1;
                if choice[pos] < open.len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
            if pos == n {
                break;
            }
        }
    }
    Ok(best.expect("at least one configuration exists"))
}

/// Sorted allocation costs of the greedy solution for `open`, used by
/// callers assembling certified solutions.
pub fn sorted_costs(instance: &Instance, open: &[usize]) -> Result<Vec<f64>> {
    let (costs, _) = allocate(instance, open)?;
    let order = stable_sort_order(&costs);
    Ok(order.iter().map(|&j| costs[j]).collect())
}
