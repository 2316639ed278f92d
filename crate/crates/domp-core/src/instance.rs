//! Instance and solution model, and ordered-median objective evaluation.
//!
//! An instance has `n` sites that are also the `n` clients, a nonnegative
//! cost matrix `C` with zero diagonal (a client co-located with an open
//! facility is served for free), a facility budget `p`, and a weight vector
//! `lambda` applied to the client costs after sorting them nondecreasingly.
//! Optional sparse interaction tensors `D` (between ordering decisions) and
//! `H` (between allocation decisions) extend the objective with quadratic
//! terms.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Quadratic interaction costs over pairs of binary assignment entries.
///
/// Entries are indexed by two flattened row-major `(row, col)` pairs of an
/// `n`-by-`n` binary matrix. The map always stores both mirror images of a
/// pair, so lookups need no orientation convention. Absent entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionCosts {
    n: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl InteractionCosts {
    /// Builds from a list of `((j, k), (jp, kp), value)` entries, mirroring
    /// each entry to its transpose. Listing the same cell twice (directly or
    /// via its mirror) with different values is rejected; repeating an equal
    /// value is allowed.
    pub fn from_entries(
        n: usize,
        entries: impl IntoIterator<Item = ((usize, usize), (usize, usize), f64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for ((j, k), (jp, kp), value) in entries {
            if j >= n || k >= n || jp >= n || kp >= n {
                return Err(Error::InvalidArgument(format!(
                    "interaction index ({j},{k}),({jp},{kp}) out of range for n={n}"
                )));
            }
            if !value.is_finite() {
                return Err(Error::InvalidArgument(String::from(
                    "interaction value must be finite",
                )));
            }
            let a = j * n + k;
            let b = jp * n + kp;
            for key in [(a, b), (b, a)] {
                if let Some(old) = map.insert(key, value) {
                    if old != value {
                        return Err(Error::InvalidArgument(format!(
                            "conflicting interaction values {old} and {value} for cell {key:?}"
                        )));
                    }
                }
            }
        }
        Ok(InteractionCosts { n, entries: map })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|v| *v == 0.0)
    }

    /// Value at flattened pair `(a, b)`; zero when absent.
    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.entries.get(&(a, b)).copied().unwrap_or(0.0)
    }

    /// Iterates stored entries `((a, b), value)` in sorted order, both
    /// mirror images included.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    /// One-half of the quadratic form over a flattened binary vector:
    /// `0.5 * sum_{a,b} t_{ab} v_a v_b`.
    pub fn half_quadratic(&self, flat: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for (&(a, b), &value) in &self.entries {
            acc += value * flat(a) * flat(b);
        }
        0.5 * acc
    }
}

/// A DOMP instance. Immutable after construction; all operations are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    p: usize,
    lambda: Vec<f64>,
    /// Row-major `n` by `n`; `costs[j*n + l]` is the cost of serving client
    /// `j` from site `l`.
    costs: Vec<f64>,
    d: Option<InteractionCosts>,
    h: Option<InteractionCosts>,
}

impl Instance {
    /// Validates and builds an instance. Requirements: `2 <= n`,
    /// `1 <= p < n`, `lambda` has length `n` with nonnegative finite
    /// entries, `costs` is row-major `n*n` with nonnegative finite entries
    /// and zero diagonal, and the interaction tensors (when present) match
    /// the instance size.
    pub fn new(
        n: usize,
        p: usize,
        lambda: Vec<f64>,
        costs: Vec<f64>,
        d: Option<InteractionCosts>,
        h: Option<InteractionCosts>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
        }
        if p < 1 || p >= n {
            return Err(Error::InvalidArgument(format!(
                "p must satisfy 1 <= p < n, got p={p}, n={n}"
            )));
        }
        if lambda.len() != n {
            return Err(Error::InvalidArgument(format!(
                "lambda has length {}, expected {n}",
                lambda.len()
            )));
        }
        if lambda.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(String::from(
                "lambda entries must be finite and nonnegative",
            )));
        }
        if costs.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "cost matrix has {} entries, expected {}",
                costs.len(),
                n * n
            )));
        }
        if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidArgument(String::from(
                "costs must be finite and nonnegative",
            )));
        }
        for j in 0..n {
            if costs[j * n + j] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "self-service cost of site {j} must be zero"
                )));
            }
        }
        for (tensor, name) in [(&d, "D"), (&h, "H")] {
            if let Some(t) = tensor {
                if t.n() != n {
                    return Err(Error::LayoutMismatch(format!(
                        "{name} tensor built for n={}, instance has n={n}",
                        t.n()
                    )));
                }
            }
        }
        Ok(Instance { n, p, lambda, costs, d, h })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Cost of serving client `j` from site `l`.
    pub fn cost(&self, j: usize, l: usize) -> f64 {
        self.costs[j * self.n + l]
    }

    /// Row-major cost matrix.
    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Sum of row `j` of the cost matrix.
    pub fn cost_row_sum(&self, j: usize) -> f64 {
        self.costs[j * self.n..(j + 1) * self.n].iter().sum()
    }

    pub fn d(&self) -> Option<&InteractionCosts> {
        self.d.as_ref()
    }

    pub fn h(&self) -> Option<&InteractionCosts> {
        self.h.as_ref()
    }

    /// True when both interaction tensors are absent or all-zero, i.e. the
    /// objective is the plain ordered median.
    pub fn is_plain(&self) -> bool {
        self.d.as_ref().is_none_or(InteractionCosts::is_zero)
            && self.h.as_ref().is_none_or(InteractionCosts::is_zero)
    }

    /// Copy of this instance with every cost multiplied by `factor` and the
    /// interaction tensors dropped. Used to bring cost magnitudes into a
    /// numerically comfortable range; the plain objective scales linearly.
    pub fn scaled_plain(&self, factor: f64) -> Result<Instance> {
        if !factor.is_finite() || factor <= 0.0 {
            return Err(Error::InvalidArgument(String::from(
                "scale factor must be positive and finite",
            )));
        }
        Instance::new(
            self.n,
            self.p,
            self.lambda.clone(),
            self.costs.iter().map(|c| c * factor).collect(),
            None,
            None,
        )
    }
}

/// Dense binary matrix used for assignment and permutation variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinMatrix {
    n: usize,
    data: Vec<u8>,
}

impl BinMatrix {
    pub fn zeros(n: usize) -> Self {
        BinMatrix { n, data: vec![0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BinMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds from row-major 0/1 data.
    pub fn from_rows(n: usize, rows: &[u8]) -> Result<Self> {
        if rows.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries, got {}",
                n * n,
                rows.len()
            )));
        }
        if rows.iter().any(|v| *v > 1) {
            return Err(Error::InvalidArgument(String::from("entries must be 0 or 1")));
        }
        Ok(BinMatrix { n, data: rows.to_vec() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, k: usize) -> bool {
        self.data[j * self.n + k] == 1
    }

    /// Entry as a float, for arithmetic contexts.
    pub fn at(&self, j: usize, k: usize) -> f64 {
        f64::from(self.data[j * self.n + k])
    }

    pub fn set(&mut self, j: usize, k: usize, value: bool) {
        self.data[j * self.n + k] = u8::from(value);
    }

    pub fn row_sum(&self, j: usize) -> usize {
        (0..self.n).filter(|&k| self.get(j, k)).count()
    }

    pub fn col_sum(&self, k: usize) -> usize {
        (0..self.n).filter(|&j| self.get(j, k)).count()
    }

    pub fn is_permutation(&self) -> bool {
        (0..self.n).all(|i| self.row_sum(i) == 1 && self.col_sum(i) == 1)
    }
}

/// An evaluated open-set choice: which sites are open, where each client is
/// served, the sorted order of the clients by allocation cost, and the
/// resulting objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationSolution {
    /// Sorted open-site indices; exactly `p` of them.
    pub open_sites: Vec<usize>,
    /// `allocation[j]` is the open site serving client `j`: the cheapest
    /// open site, ties broken toward the lowest site index.
    pub allocation: Vec<usize>,
    /// `order[k]` is the client whose allocation cost is ranked `k`-th
    /// (nondecreasing; ties broken by client index).
    pub order: Vec<usize>,
    /// Ordered median objective value of this open set.
    pub value: f64,
}

fn check_open_set(n: usize, open_sites: &[usize]) -> Result<()> {
    if open_sites.is_empty() {
        return Err(Error::InvalidArgument(String::from("open set must be nonempty")));
    }
    if open_sites.iter().any(|&l| l >= n) {
        return Err(Error::InvalidArgument(format!(
            "open set {open_sites:?} has a site outside 0..{n}"
        )));
    }
    for w in open_sites.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidArgument(String::from(
                "open set must be strictly increasing (sorted, no duplicates)",
            )));
        }
    }
    Ok(())
}

/// Cost of serving each client from its cheapest open site. Ties resolve to
/// the lowest site index; the chosen sites are recoverable via
/// [`allocate`].
pub fn allocation_costs(instance: &Instance, open_sites: &[usize]) -> Result<Vec<f64>> {
    Ok(allocate(instance, open_sites)?.0)
}

/// Like [`allocation_costs`], also returning the serving site per client.
pub fn allocate(instance: &Instance, open_sites: &[usize]) -> Result<(Vec<f64>, Vec<usize>)> {
    check_open_set(instance.n(), open_sites)?;
    let n = instance.n();
    let mut costs = Vec::with_capacity(n);
    let mut sites = Vec::with_capacity(n);
    for j in 0..n {
        let mut best_site = open_sites[0];
        let mut best_cost = instance.cost(j, best_site);
        for &l in &open_sites[1..] {
            let c = instance.cost(j, l);
            if c < best_cost {
                best_cost = c;
                best_site = l;
            }
        }
        costs.push(best_cost);
        sites.push(best_site);
    }
    Ok((costs, sites))
}

/// Stable nondecreasing ranking of `costs`: returns `order` with `order[k]`
/// the index holding rank `k`, ties broken by index.
pub fn stable_sort_order(costs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[a].partial_cmp(&costs[b]).unwrap().then(a.cmp(&b)));
    order
}

/// The ordered median objective of an open set: allocation costs sorted
/// nondecreasingly, dotted with the weight vector.
pub fn ordered_median_value(instance: &Instance, open_sites: &[usize]) -> Result<f64> {
    let costs = allocation_costs(instance, open_sites)?;
    let order = stable_sort_order(&costs);
    Ok(order
        .iter()
        .enumerate()
        .map(|(k, &j)| instance.lambda()[k] * costs[j])
        .sum())
}

/// Evaluates an open set into a full [`LocationSolution`].
pub fn solution_for_open_set(instance: &Instance, open_sites: &[usize]) -> Result<LocationSolution> {
    let (costs, allocation) = allocate(instance, open_sites)?;
    let order = stable_sort_order(&costs);
    let value = order
        .iter()
        .enumerate()
        .map(|(k, &j)| instance.lambda()[k] * costs[j])
        .sum();
    Ok(LocationSolution {
        open_sites: open_sites.to_vec(),
        allocation,
        order,
        value,
    })
}

/// Full quadratic objective at explicit binary decisions: the ordered
/// median value read through `P` and `X`, plus half the `D` form over `P`
/// and half the `H` form over `X`.
///
/// `P` must be a permutation matrix (`P[j][k] = 1` places client `j` at
/// sorted position `k`); every row of `X` must select exactly one site.
pub fn extended_objective(instance: &Instance, p_mat: &BinMatrix, x_mat: &BinMatrix) -> Result<f64> {
    let n = instance.n();
    if p_mat.n() != n || x_mat.n() != n {
        return Err(Error::LayoutMismatch(format!(
            "matrices sized {} and {} for instance with n={n}",
            p_mat.n(),
            x_mat.n()
        )));
    }
    if !p_mat.is_permutation() {
        return Err(Error::InvalidArgument(String::from("P must be a permutation matrix")));
    }
    for j in 0..n {
        if x_mat.row_sum(j) != 1 {
            return Err(Error::InvalidArgument(format!(
                "row {j} of X must select exactly one site"
            )));
        }
    }

    // Realized cost of client j under X.
    let mut realized = vec![0.0; n];
    for j in 0..n {
        for l in 0..n {
            if x_mat.get(j, l) {
                realized[j] += instance.cost(j, l);
            }
        }
    }
    let mut value = 0.0;
    for k in 0..n {
        for j in 0..n {
            if p_mat.get(j, k) {
                value += instance.lambda()[k] * realized[j];
            }
        }
    }
    if let Some(d) = instance.d() {
        value += d.half_quadratic(|a| p_mat.at(a / n, a % n));
    }
    if let Some(h) = instance.h() {
        value += h.half_quadratic(|a| x_mat.at(a / n, a % n));
    }
    Ok(value)
}
