//! Flat variable vector and equality system of the binary quadratic
//! formulation.
//!
//! The formulation works over one flat vector `phi` of length `3n^2 + 4n`
//! holding, in order: the sorting permutation `P` (row-major), the
//! allocation matrix `X` (row-major), the open-site indicators `y`, the
//! per-position sorted costs `W`, the position-step slacks `xi`, the
//! rank/cost linking slacks `eta` (row-major), and the load slacks `zeta`.
//! All feasible points are entrywise nonnegative; binary feasibility plus
//! a small set of quadratic identities make the formulation exact.
//!
//! [`build_linear_system`] emits the full linear-equality part `A phi = b`
//! in a fixed row order so exports are reproducible; [`complete_slacks`]
//! extends a binary decision triple to a full feasible `phi`;
//! [`check_miqp_feasible`] measures how far an arbitrary `phi` is from
//! satisfying everything; [`surrogate_equivalence_check`] verifies by
//! enumeration that the aggregated load constraint can replace the
//! pairwise allocation bound without changing the feasible set.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::{BinMatrix, Instance};
use crate::oracle::Combinations;
use crate::sortperm::check_sort_feasible;

/// The seven variable groups of the flat vector, in layout order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarGroup {
    /// Sorting permutation entries, `n*n`, row-major.
    P,
    /// Allocation entries, `n*n`, row-major.
    X,
    /// Open-site indicators, `n`.
    Y,
    /// Sorted cost per position, `n`.
    W,
    /// Cost increment between consecutive positions, `n` (last pinned to 0).
    Xi,
    /// Slack linking position costs to allocation costs, `n*n`, row-major.
    Eta,
    /// Remaining capacity of the aggregated load bound, `n`.
    Zeta,
}

impl VarGroup {
    pub const ALL: [VarGroup; 7] = [
        VarGroup::P,
        VarGroup::X,
        VarGroup::Y,
        VarGroup::W,
        VarGroup::Xi,
        VarGroup::Eta,
        VarGroup::Zeta,
    ];
}

/// Index map for the flat vector: block offsets and entry addressing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhiLayout {
    n: usize,
}

impl PhiLayout {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "layout needs n >= 2, got {n}"
            )));
        }
        Ok(PhiLayout { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total variable count `3n^2 + 4n`.
    pub fn dim(&self) -> usize {
        3 * self.n * self.n + 4 * self.n
    }

    pub fn p(&self, j: usize, k: usize) -> usize {
        debug_assert!(j < self.n && k < self.n);
        j * self.n + k
    }

    pub fn x(&self, j: usize, l: usize) -> usize {
        debug_assert!(j < self.n && l < self.n);
        self.n * self.n + j * self.n + l
    }

    pub fn y(&self, l: usize) -> usize {
        debug_assert!(l < self.n);
        2 * self.n * self.n + l
    }

    pub fn w(&self, k: usize) -> usize {
        debug_assert!(k < self.n);
        2 * self.n * self.n + self.n + k
    }

    pub fn xi(&self, k: usize) -> usize {
        debug_assert!(k < self.n);
        2 * self.n * self.n + 2 * self.n + k
    }

    pub fn eta(&self, j: usize, k: usize) -> usize {
        debug_assert!(j < self.n && k < self.n);
        2 * self.n * self.n + 3 * self.n + j * self.n + k
    }

    pub fn zeta(&self, l: usize) -> usize {
        debug_assert!(l < self.n);
        3 * self.n * self.n + 3 * self.n + l
    }

    /// Half-open index range of a variable group.
    pub fn group_range(&self, group: VarGroup) -> core::ops::Range<usize> {
        let nn = self.n * self.n;
        match group {
            VarGroup::P => 0..nn,
            VarGroup::X => nn..2 * nn,
            VarGroup::Y => 2 * nn..2 * nn + self.n,
            VarGroup::W => 2 * nn + self.n..2 * nn + 2 * self.n,
            VarGroup::Xi => 2 * nn + 2 * self.n..2 * nn + 3 * self.n,
            VarGroup::Eta => 2 * nn + 3 * self.n..3 * nn + 3 * self.n,
            VarGroup::Zeta => 3 * nn + 3 * self.n..3 * nn + 4 * self.n,
        }
    }
}

/// Builds the index map for a given size. Fails for `n < 2`.
pub fn build_phi_layout(n: usize) -> Result<PhiLayout> {
    PhiLayout::new(n)
}

/// A flat vector over a [`PhiLayout`]. Feasible points are entrywise
/// nonnegative; the container itself accepts any finite values so that
/// checkers can measure violations instead of refusing them.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiVector {
    layout: PhiLayout,
    values: Vec<f64>,
}

impl PhiVector {
    pub fn zeros(layout: PhiLayout) -> Self {
        PhiVector {
            layout,
            values: vec![0.0; layout.dim()],
        }
    }

    /// Wraps explicit values; every entry must be finite.
    pub fn from_values(layout: PhiLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.dim() {
            return Err(Error::LayoutMismatch(format!(
                "vector of length {} for layout of dimension {}",
                values.len(),
                layout.dim()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(String::from(
                "flat vector entries must be finite",
            )));
        }
        Ok(PhiVector { layout, values })
    }

    /// Smallest entry; negative values indicate an infeasible vector.
    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn layout(&self) -> PhiLayout {
        self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// Overwrites one entry. The nonnegativity invariant is the caller's
    /// responsibility here; checkers treat violations as reportable
    /// residuals rather than panics.
    pub fn set(&mut self, idx: usize, value: f64) {
        self.values[idx] = value;
    }

    pub fn p(&self, j: usize, k: usize) -> f64 {
        self.values[self.layout.p(j, k)]
    }

    pub fn x(&self, j: usize, l: usize) -> f64 {
        self.values[self.layout.x(j, l)]
    }

    pub fn y(&self, l: usize) -> f64 {
        self.values[self.layout.y(l)]
    }

    pub fn w(&self, k: usize) -> f64 {
        self.values[self.layout.w(k)]
    }

    pub fn xi(&self, k: usize) -> f64 {
        self.values[self.layout.xi(k)]
    }

    pub fn eta(&self, j: usize, k: usize) -> f64 {
        self.values[self.layout.eta(j, k)]
    }

    pub fn zeta(&self, l: usize) -> f64 {
        self.values[self.layout.zeta(l)]
    }
}

/// Identity of one equality row, with enough structure to group residuals
/// by family and render a stable human-readable tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowLabel {
    /// Each sorted position holds exactly one client.
    PermCol { k: usize },
    /// Each client occupies exactly one sorted position.
    PermRow { j: usize },
    /// Exactly `p` sites are open.
    OpenCount,
    /// Each client is allocated exactly once.
    AssignRow { j: usize },
    /// A site's load stays within `n - p + 1` of its open indicator,
    /// witnessed by the `zeta` slack.
    LoadSlack { l: usize },
    /// Position cost `W_k` dominates client `j`'s allocation cost whenever
    /// `j` sits at position `k`, witnessed by the `eta` slack.
    RankCostLb { j: usize, k: usize },
    /// Consecutive position costs are nondecreasing, witnessed by `xi`.
    RankMonotone { k: usize },
    /// The position costs sum to the total allocation cost.
    CostTotal,
    /// The unused last `xi` coordinate is pinned to zero.
    XiPin,
}

impl RowLabel {
    /// Family name without indices.
    pub fn family(&self) -> &'static str {
        match self {
            RowLabel::PermCol { .. } => "perm-col",
            RowLabel::PermRow { .. } => "perm-row",
            RowLabel::OpenCount => "open-count",
            RowLabel::AssignRow { .. } => "assign-row",
            RowLabel::LoadSlack { .. } => "load-slack",
            RowLabel::RankCostLb { .. } => "rank-cost-lb",
            RowLabel::RankMonotone { .. } => "rank-monotone",
            RowLabel::CostTotal => "cost-total",
            RowLabel::XiPin => "xi-pin",
        }
    }
}

impl core::fmt::Display for RowLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RowLabel::PermCol { k } => write!(f, "perm-col[k={k}]"),
            RowLabel::PermRow { j } => write!(f, "perm-row[j={j}]"),
            RowLabel::OpenCount => write!(f, "open-count"),
            RowLabel::AssignRow { j } => write!(f, "assign-row[j={j}]"),
            RowLabel::LoadSlack { l } => write!(f, "load-slack[l={l}]"),
            RowLabel::RankCostLb { j, k } => write!(f, "rank-cost-lb[j={j},k={k}]"),
            RowLabel::RankMonotone { k } => write!(f, "rank-monotone[k={k}]"),
            RowLabel::CostTotal => write!(f, "cost-total"),
            RowLabel::XiPin => write!(f, "xi-pin"),
        }
    }
}

/// One row of the equality system, borrowed from a [`LinearSystem`].
#[derive(Debug, Clone, Copy)]
pub struct RowView<'a> {
    pub label: RowLabel,
    pub rhs: f64,
    /// `(column, coefficient)` pairs, sorted by column, zeros omitted.
    pub entries: &'a [(usize, f64)],
}

/// Sparse equality system `A phi = b` with labeled rows in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    layout: PhiLayout,
    entries: Vec<(usize, f64)>,
    row_ptr: Vec<usize>,
    b: Vec<f64>,
    labels: Vec<RowLabel>,
}

impl LinearSystem {
    pub fn layout(&self) -> PhiLayout {
        self.layout
    }

    /// Row count `m`.
    pub fn rows(&self) -> usize {
        self.b.len()
    }

    /// Column count, equal to the layout dimension.
    pub fn cols(&self) -> usize {
        self.layout.dim()
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn labels(&self) -> &[RowLabel] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> RowView<'_> {
        RowView {
            label: self.labels[i],
            rhs: self.b[i],
            entries: &self.entries[self.row_ptr[i]..self.row_ptr[i + 1]],
        }
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = RowView<'_>> {
        (0..self.rows()).map(|i| self.row(i))
    }

    /// All nonzero coefficients as `(row, col, value)`, sorted by row then
    /// column.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows()).flat_map(move |i| {
            self.entries[self.row_ptr[i]..self.row_ptr[i + 1]]
                .iter()
                .map(move |&(c, v)| (i, c, v))
        })
    }

    /// Signed residual `(A phi - b)_i` per row.
    pub fn residuals(&self, phi: &PhiVector) -> Result<Vec<f64>> {
        if phi.layout() != self.layout {
            return Err(Error::LayoutMismatch(String::from(
                "vector layout differs from system layout",
            )));
        }
        Ok((0..self.rows())
            .map(|i| {
                let row = self.row(i);
                let lhs: f64 = row.entries.iter().map(|&(c, v)| v * phi.get(c)).sum();
                lhs - row.rhs
            })
            .collect())
    }

    /// Largest absolute residual of `A phi = b`.
    pub fn max_abs_residual(&self, phi: &PhiVector) -> Result<f64> {
        Ok(self
            .residuals(phi)?
            .into_iter()
            .fold(0.0, |acc, r| acc.max(r.abs())))
    }
}

struct SystemBuilder {
    layout: PhiLayout,
    entries: Vec<(usize, f64)>,
    row_ptr: Vec<usize>,
    b: Vec<f64>,
    labels: Vec<RowLabel>,
}

impl SystemBuilder {
    fn new(layout: PhiLayout) -> Self {
        SystemBuilder {
            layout,
            entries: Vec::new(),
            row_ptr: vec![0],
            b: Vec::new(),
            labels: Vec::new(),
        }
    }

    fn push_row(&mut self, label: RowLabel, mut entries: Vec<(usize, f64)>, rhs: f64) {
        entries.retain(|&(_, v)| v != 0.0);
        entries.sort_by_key(|&(c, _)| c);
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        self.entries.extend_from_slice(&entries);
        self.row_ptr.push(self.entries.len());
        self.b.push(rhs);
        self.labels.push(label);
    }

    fn finish(self) -> LinearSystem {
        LinearSystem {
            layout: self.layout,
            entries: self.entries,
            row_ptr: self.row_ptr,
            b: self.b,
            labels: self.labels,
        }
    }
}

/// Emits the full equality system in a fixed row order: position sums,
/// client sums, the open count, allocation sums, load rows, rank/cost
/// rows, monotonicity rows, the cost balance, and the `xi` pin. The total
/// is `n^2 + 5n + 2` rows. Coefficients that are exactly zero are omitted.
pub fn build_linear_system(instance: &Instance) -> LinearSystem {
    let n = instance.n();
    let layout = PhiLayout::new(n).expect("instance guarantees n >= 2");
    let cap = n - instance.p() + 1;
    let mut builder = SystemBuilder::new(layout);

    for k in 0..n {
        let entries = (0..n).map(|j| (layout.p(j, k), 1.0)).collect();
        builder.push_row(RowLabel::PermCol { k }, entries, 1.0);
    }
    for j in 0..n {
        let entries = (0..n).map(|k| (layout.p(j, k), 1.0)).collect();
        builder.push_row(RowLabel::PermRow { j }, entries, 1.0);
    }
    builder.push_row(
        RowLabel::OpenCount,
        (0..n).map(|l| (layout.y(l), 1.0)).collect(),
        instance.p() as f64,
    );
    for j in 0..n {
        let entries = (0..n).map(|l| (layout.x(j, l), 1.0)).collect();
        builder.push_row(RowLabel::AssignRow { j }, entries, 1.0);
    }
    for l in 0..n {
        let mut entries: Vec<(usize, f64)> = (0..n).map(|j| (layout.x(j, l), 1.0)).collect();
        entries.push((layout.y(l), -(cap as f64)));
        entries.push((layout.zeta(l), 1.0));
        builder.push_row(RowLabel::LoadSlack { l }, entries, 0.0);
    }
    for j in 0..n {
        let row_sum = instance.cost_row_sum(j);
        for k in 0..n {
            let mut entries = vec![(layout.p(j, k), -row_sum), (layout.w(k), 1.0)];
            for l in 0..n {
                entries.push((layout.x(j, l), -instance.cost(j, l)));
            }
            entries.push((layout.eta(j, k), -1.0));
            builder.push_row(RowLabel::RankCostLb { j, k }, entries, -row_sum);
        }
    }
    for k in 0..n - 1 {
        let entries = vec![
            (layout.w(k), 1.0),
            (layout.w(k + 1), -1.0),
            (layout.xi(k), 1.0),
        ];
        builder.push_row(RowLabel::RankMonotone { k }, entries, 0.0);
    }
    {
        let mut entries: Vec<(usize, f64)> = (0..n).map(|k| (layout.w(k), 1.0)).collect();
        for j in 0..n {
            for l in 0..n {
                entries.push((layout.x(j, l), -instance.cost(j, l)));
            }
        }
        builder.push_row(RowLabel::CostTotal, entries, 0.0);
    }
    builder.push_row(RowLabel::XiPin, vec![(layout.xi(n - 1), 1.0)], 0.0);

    let system = builder.finish();
    debug_assert_eq!(system.rows(), n * n + 5 * n + 2);
    system
}

fn validate_triple(
    instance: &Instance,
    p_mat: &BinMatrix,
    x_mat: &BinMatrix,
    y: &[u8],
) -> Result<()> {
    let n = instance.n();
    if p_mat.n() != n || x_mat.n() != n || y.len() != n {
        return Err(Error::LayoutMismatch(format!(
            "triple sized ({}, {}, {}) for instance with n={n}",
            p_mat.n(),
            x_mat.n(),
            y.len()
        )));
    }
    if !p_mat.is_permutation() {
        return Err(Error::InvalidArgument(String::from(
            "P must be a permutation matrix",
        )));
    }
    if (0..n).any(|j| x_mat.row_sum(j) != 1) {
        return Err(Error::InvalidArgument(String::from(
            "every row of X must select exactly one site",
        )));
    }
    if y.iter().any(|v| *v > 1) {
        return Err(Error::InvalidArgument(String::from("y must be binary")));
    }
    let open: usize = y.iter().map(|v| *v as usize).sum();
    if open != instance.p() {
        return Err(Error::InvalidArgument(format!(
            "y opens {open} sites, expected {}",
            instance.p()
        )));
    }
    Ok(())
}

/// Extends a binary decision triple to the full flat vector by computing
/// every slack: position costs from `P` and the realized allocation costs,
/// increments between consecutive positions, rank/cost slacks, and load
/// slacks. Any slack below `-1e-12` means the triple violates the ordering
/// or load constraints and is rejected; tiny negative rounding residue is
/// clamped to zero.
pub fn complete_slacks(
    instance: &Instance,
    p_mat: &BinMatrix,
    x_mat: &BinMatrix,
    y: &[u8],
) -> Result<PhiVector> {
    validate_triple(instance, p_mat, x_mat, y)?;
    let n = instance.n();
    let layout = PhiLayout::new(n)?;
    let mut phi = PhiVector::zeros(layout);

    for j in 0..n {
        for k in 0..n {
            phi.set(layout.p(j, k), p_mat.at(j, k));
            phi.set(layout.x(j, k), x_mat.at(j, k));
        }
    }
    for l in 0..n {
        phi.set(layout.y(l), f64::from(y[l]));
    }

    let realized: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|l| instance.cost(j, l) * x_mat.at(j, l)).sum())
        .collect();

    let clamp = |value: f64, what: &str| -> Result<f64> {
        if value < -1e-12 {
            return Err(Error::InfeasibleInput(format!(
                "{what} slack is negative ({value}); the triple violates the ordering or load constraints"
            )));
        }
        Ok(value.max(0.0))
    };

    let w: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|j| p_mat.at(j, k) * realized[j]).sum())
        .collect();
    for k in 0..n {
        phi.set(layout.w(k), w[k]);
    }
    for k in 0..n - 1 {
        let xi = clamp(w[k + 1] - w[k], "position-step")?;
        phi.set(layout.xi(k), xi);
    }
    for j in 0..n {
        let row_sum = instance.cost_row_sum(j);
        for k in 0..n {
            let eta = clamp(
                w[k] - realized[j] + row_sum * (1.0 - p_mat.at(j, k)),
                "rank-cost",
            )?;
            phi.set(layout.eta(j, k), eta);
        }
    }
    let cap = (n - instance.p() + 1) as f64;
    for l in 0..n {
        let load: f64 = (0..n).map(|j| x_mat.at(j, l)).sum();
        let zeta = clamp(cap * f64::from(y[l]) - load, "load")?;
        phi.set(layout.zeta(l), zeta);
    }
    Ok(phi)
}

/// Residual report of the full (linear + binary + quadratic) feasibility
/// check at a given absolute tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct MiqpReport {
    /// Largest absolute residual of the equality system.
    pub linear: f64,
    /// Largest per-entry binarity gap `|v - v^2|` over the `P` block.
    pub p_gap: f64,
    /// Largest per-entry binarity gap over the `X` block.
    pub x_gap: f64,
    /// Aggregated binarity residual `|sum (P - P^2)|`.
    pub p_sum: f64,
    /// Aggregated binarity residual `|sum (X - X^2)|`.
    pub x_sum: f64,
    /// Largest residual of the position-cost definition
    /// `W_k = sum_j P_jk * sum_l C_jl X_jl`.
    pub w_def: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Measures every feasibility residual of `phi` for the quadratic
/// formulation; passes when all of them are at most `tol`.
pub fn check_miqp_feasible(instance: &Instance, phi: &PhiVector, tol: f64) -> Result<MiqpReport> {
    let n = instance.n();
    let layout = phi.layout();
    if layout.n() != n {
        return Err(Error::LayoutMismatch(format!(
            "vector built for n={}, instance has n={n}",
            layout.n()
        )));
    }
    let system = build_linear_system(instance);
    let linear = system.max_abs_residual(phi)?;

    let gap = |idx: usize| {
        let v = phi.get(idx);
        v - v * v
    };
    let mut p_gap = 0.0f64;
    let mut x_gap = 0.0f64;
    let mut p_sum = 0.0f64;
    let mut x_sum = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let gp = gap(layout.p(j, k));
            let gx = gap(layout.x(j, k));
            p_gap = p_gap.max(gp.abs());
            x_gap = x_gap.max(gx.abs());
            p_sum += gp;
            x_sum += gx;
        }
    }
    let p_sum = p_sum.abs();
    let x_sum = x_sum.abs();

    let mut w_def = 0.0f64;
    for k in 0..n {
        let mut implied = 0.0;
        for j in 0..n {
            let realized: f64 = (0..n).map(|l| instance.cost(j, l) * phi.x(j, l)).sum();
            implied += phi.p(j, k) * realized;
        }
        w_def = w_def.max((phi.w(k) - implied).abs());
    }

    let pass = linear <= tol
        && p_gap <= tol
        && x_gap <= tol
        && p_sum <= tol
        && x_sum <= tol
        && w_def <= tol;
    Ok(MiqpReport {
        linear,
        p_gap,
        x_gap,
        p_sum,
        x_sum,
        w_def,
        tol,
        pass,
    })
}

/// Objective of the quadratic formulation read off a flat vector: the
/// weighted position costs plus half of each interaction form over the
/// corresponding block.
pub fn miqp_objective(instance: &Instance, phi: &PhiVector) -> Result<f64> {
    let n = instance.n();
    if phi.layout().n() != n {
        return Err(Error::LayoutMismatch(format!(
            "vector built for n={}, instance has n={n}",
            phi.layout().n()
        )));
    }
    let mut value: f64 = (0..n).map(|k| instance.lambda()[k] * phi.w(k)).sum();
    if let Some(d) = instance.d() {
        value += d.half_quadratic(|a| phi.p(a / n, a % n));
    }
    if let Some(h) = instance.h() {
        value += h.half_quadratic(|a| phi.x(a / n, a % n));
    }
    Ok(value)
}

/// Verifies by full enumeration that, among binary configurations with a
/// valid permutation, one allocation per client, and `p` open sites, the
/// pairwise bound `X_jl <= y_l` and the aggregated bound
/// `sum_j X_jl <= (n-p+1) y_l` cut out the same set — once attention is
/// restricted to configurations where the permutation sorts the realized
/// costs and every open site serves its own co-located client. The
/// restriction is what makes the aggregated bound tight: self-service at
/// the other `p - 1` open sites leaves at most `n - p + 1` clients for any
/// one site, while a closed site keeps load zero under either bound.
///
/// Requires `n <= 4` (the walk covers `n! * n^n * C(n,p)` configurations).
pub fn surrogate_equivalence_check(instance: &Instance) -> Result<bool> {
    let n = instance.n();
    if n > 4 {
        return Err(Error::ResourceLimit(format!(
            "surrogate enumeration capped at n = 4, got n = {n}"
        )));
    }
    let cap = (n - instance.p() + 1) as f64;
    let perms = crate::oracle::all_permutation_matrices(n);

    for open in Combinations::new(n, instance.p()) {
        let mut y = vec![0u8; n];
        for &l in &open {
            y[l] = 1;
        }
        // Every allocation map, clients to arbitrary sites.
        let total = n.pow(n as u32);
        for code in 0..total {
            let mut x = BinMatrix::zeros(n);
            let mut c = code;
            for j in 0..n {
                x.set(j, c % n, true);
                c /= n;
            }
            let self_service = (0..n).all(|l| y[l] == 0 || x.get(l, l));
            if !self_service {
                continue;
            }
            let realized: Vec<f64> = (0..n)
                .map(|j| (0..n).map(|l| instance.cost(j, l) * x.at(j, l)).sum())
                .collect();
            let pairwise =
                (0..n).all(|l| (0..n).all(|j| !x.get(j, l) || y[l] == 1));
            let aggregated = (0..n).all(|l| {
                let load: f64 = (0..n).map(|j| x.at(j, l)).sum();
                load <= cap * f64::from(y[l])
            });
            if pairwise == aggregated {
                continue;
            }
            // The bounds disagree; the configuration only counts if some
            // permutation sorts its realized costs.
            if perms
                .iter()
                .any(|p| check_sort_feasible(&realized, p).feasible)
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
