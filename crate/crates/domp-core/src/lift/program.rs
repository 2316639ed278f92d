//! Symmetric coefficient sets, conic equality programs, and the builder
//! for the moment relaxation of the quadratic formulation.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::LiftedMatrix;
use crate::error::{Error, Result};
use crate::instance::{Instance, InteractionCosts};
use crate::qform::{build_linear_system, PhiLayout};

/// Which cone a program's matrix variable lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeTag {
    /// Doubly nonnegative: positive semidefinite with nonnegative entries.
    Dnn,
    /// Mixtures of rank-one lifts of feasible binary vectors; used when a
    /// program is evaluated on explicitly constructed lifts rather than
    /// handed to a cone solver.
    ExactLiftVerification,
}

impl ConeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConeTag::Dnn => "dnn",
            ConeTag::ExactLiftVerification => "exact-lift-verification",
        }
    }
}

/// Sparse symmetric matrix of coefficients over the bordered index space,
/// stored as its upper triangle: entries `(r, c, v)` with `r <= c`, sorted
/// and deduplicated, zeros dropped. The represented matrix has `v` at both
/// `(r, c)` and `(c, r)`, so `<A, M> = sum_diag v * M_rr + sum_offdiag
/// 2 * v * M_rc`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymCoeffs {
    entries: Vec<(usize, usize, f64)>,
}

impl SymCoeffs {
    /// Normalizes raw entries: orientation to the upper triangle, sort,
    /// fold duplicates by summing, drop exact zeros.
    pub fn from_entries(raw: Vec<(usize, usize, f64)>) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = raw
            .into_iter()
            .map(|(r, c, v)| if r <= c { (r, c, v) } else { (c, r, v) })
            .collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut folded: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match folded.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => folded.push((r, c, v)),
            }
        }
        folded.retain(|&(_, _, v)| v != 0.0);
        SymCoeffs { entries: folded }
    }

    /// Upper-triangle entries, sorted by `(row, col)`.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Frobenius inner product with a dense symmetric row-major matrix.
    pub fn eval_dense(&self, values: &[f64], dim: usize) -> f64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| {
                let weight = if r == c { 1.0 } else { 2.0 };
                weight * v * values[r * dim + c]
            })
            .sum()
    }

    /// Frobenius inner product with a lifted matrix.
    pub fn eval(&self, m: &LiftedMatrix) -> f64 {
        self.eval_dense(m.values(), m.dim())
    }

    /// Frobenius inner product with another coefficient set.
    pub fn frobenius_with(&self, other: &SymCoeffs) -> f64 {
        let mut acc = 0.0;
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            let a = self.entries[i];
            let b = other.entries[j];
            match (a.0, a.1).cmp(&(b.0, b.1)) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    let weight = if a.0 == a.1 { 1.0 } else { 2.0 };
                    acc += weight * a.2 * b.2;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Squared Frobenius norm of the represented matrix.
    pub fn norm_sq(&self) -> f64 {
        self.frobenius_with(self)
    }

    /// The same coefficient matrix multiplied by a scalar.
    pub fn scaled(&self, factor: f64) -> SymCoeffs {
        SymCoeffs {
            entries: self
                .entries
                .iter()
                .map(|&(r, c, v)| (r, c, factor * v))
                .collect(),
        }
    }

    /// Adds `scale` times the represented matrix (both triangles) into a
    /// dense row-major buffer.
    pub fn add_scaled_into(&self, dense: &mut [f64], dim: usize, scale: f64) {
        for &(r, c, v) in &self.entries {
            dense[r * dim + c] += scale * v;
            if r != c {
                dense[c * dim + r] += scale * v;
            }
        }
    }
}

/// One equality `<coeffs, M> = rhs` with a stable label.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicEquality {
    pub label: String,
    pub rhs: f64,
    pub coeffs: SymCoeffs,
}

/// Linear conic program over the bordered matrix space: minimize
/// `<objective, M>` subject to the labeled equalities and membership of
/// `M` in the tagged cone.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    pub layout: PhiLayout,
    pub objective: SymCoeffs,
    pub equalities: Vec<ConicEquality>,
    pub cone: ConeTag,
}

impl ConicProgram {
    /// Bordered dimension `1 + N`.
    pub fn dim(&self) -> usize {
        1 + self.layout.dim()
    }

    pub fn objective_value(&self, m: &LiftedMatrix) -> f64 {
        self.objective.eval(m)
    }

    /// Signed equality residuals in program order.
    pub fn residuals(&self, m: &LiftedMatrix) -> Vec<f64> {
        self.equalities
            .iter()
            .map(|eq| eq.coeffs.eval(m) - eq.rhs)
            .collect()
    }

    pub fn max_abs_residual(&self, m: &LiftedMatrix) -> f64 {
        self.residuals(m)
            .into_iter()
            .fold(0.0, |acc, r| acc.max(r.abs()))
    }
}

/// Records coefficient `coeff` on border coordinate `i` (the constraint
/// term `coeff * phi_i`).
pub(super) fn push_border(entries: &mut Vec<(usize, usize, f64)>, i: usize, coeff: f64) {
    entries.push((0, 1 + i, coeff / 2.0));
}

/// Records coefficient `coeff` on the inner-block entry `(i, ip)`, counted
/// once (the constraint term `coeff * Phi[i, ip]`).
pub(super) fn push_sym(entries: &mut Vec<(usize, usize, f64)>, i: usize, ip: usize, coeff: f64) {
    let (r, c) = if i <= ip { (i, ip) } else { (ip, i) };
    let v = if r == c { coeff } else { coeff / 2.0 };
    entries.push((1 + r, 1 + c, v));
}

/// Inner-block image of row coefficients contracted against the first
/// permutation row's indicator: `sum_c a_c * sum_{r<n} Phi[c, r]`.
pub(super) fn alpha_contraction_of(n: usize, ents: &[(usize, f64)]) -> Vec<(usize, usize, f64)> {
    let mut entries = Vec::with_capacity(ents.len() * n);
    for &(c, v) in ents {
        for r in 0..n {
            push_sym(&mut entries, c, r, v);
        }
    }
    entries
}

/// Inner-block image of a row's symbolic square `a^T Phi a`.
pub(super) fn square_of(ents: &[(usize, f64)]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::with_capacity(ents.len() * (ents.len() + 1) / 2);
    for i in 0..ents.len() {
        let (c, v) = ents[i];
        push_sym(&mut out, c, c, v * v);
        for &(cp, vp) in &ents[i + 1..] {
            push_sym(&mut out, c, cp, 2.0 * v * vp);
        }
    }
    out
}

fn interaction_entries(
    tensor: &InteractionCosts,
    offset: usize,
    entries: &mut Vec<(usize, usize, f64)>,
) {
    for ((a, b), v) in tensor.iter() {
        if a > b {
            continue;
        }
        let coeff = if a == b { 0.5 * v } else { v };
        push_sym(entries, offset + a, offset + b, coeff);
    }
}

fn objective_entries(instance: &Instance, mu: f64) -> Vec<(usize, usize, f64)> {
    let n = instance.n();
    let layout = PhiLayout::new(n).expect("instance guarantees n >= 2");
    let lambda = instance.lambda();
    let mut entries = Vec::new();
    // Coupling block: lambda_k * C_jl on Phi[P_jk, X_jl].
    for j in 0..n {
        for l in 0..n {
            let c = instance.cost(j, l);
            if c == 0.0 {
                continue;
            }
            for k in 0..n {
                if lambda[k] != 0.0 {
                    push_sym(&mut entries, layout.p(j, k), layout.x(j, l), mu * lambda[k] * c);
                }
            }
        }
    }
    // Rank-cost reading of the same objective through the first
    // permutation row against the position costs.
    if mu != 1.0 {
        for k in 0..n {
            if lambda[k] == 0.0 {
                continue;
            }
            for l in 0..n {
                push_sym(&mut entries, layout.p(0, l), layout.w(k), (1.0 - mu) * lambda[k]);
            }
        }
    }
    if let Some(d) = instance.d() {
        interaction_entries(d, layout.group_range(crate::qform::VarGroup::P).start, &mut entries);
    }
    if let Some(h) = instance.h() {
        interaction_entries(h, layout.group_range(crate::qform::VarGroup::X).start, &mut entries);
    }
    entries
}

/// Objective coefficients blending two readings that agree on every lift:
/// weight `mu` on the coupling form `sum lambda_k C_jl Phi[P_jk, X_jl]`
/// and `1 - mu` on the contracted position costs
/// `sum_k lambda_k sum_l Phi[P_0l, W_k]`. Interaction terms, when present,
/// enter unblended. `mu = 1` is the default objective of [`build_cp0`].
pub fn objective_mu_coeffs(instance: &Instance, mu: f64) -> Result<SymCoeffs> {
    if !mu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "blend weight must be finite, got {mu}"
        )));
    }
    Ok(SymCoeffs::from_entries(objective_entries(instance, mu)))
}

/// Evaluates the blended objective on a lifted matrix. On exact lifts the
/// value is independent of `mu`; on relaxed matrices the two readings can
/// differ, which is exactly what the blend lets callers probe.
pub fn objective_mu(instance: &Instance, lifted: &LiftedMatrix, mu: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::InvalidArgument(format!(
            "blend weight must lie in [0, 1], got {mu}"
        )));
    }
    if lifted.layout().n() != instance.n() {
        return Err(Error::LayoutMismatch(format!(
            "matrix is laid out for n = {}, instance has n = {}",
            lifted.layout().n(),
            instance.n()
        )));
    }
    Ok(objective_mu_coeffs(instance, mu)?.eval(lifted))
}

/// Dense coupling block `F` of size `n^2 x n^2` (permutation index by
/// allocation index, both row-major): `F[(j,k), (j,l)] = lambda_k * C_jl`,
/// zero across distinct clients.
pub fn build_f(instance: &Instance) -> Vec<f64> {
    let n = instance.n();
    let nn = n * n;
    let lambda = instance.lambda();
    let mut f = vec![0.0; nn * nn];
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                f[(j * n + k) * nn + (j * n + l)] = lambda[k] * instance.cost(j, l);
            }
        }
    }
    f
}

/// Dense symmetric objective block `G` of size `2n^2 x 2n^2` over the
/// stacked `[P; X]` coordinates: interaction tensors on the diagonal
/// blocks, the coupling block `F` off-diagonal. The formulation's
/// objective is `0.5 * [P; X]^T G [P; X]` on binary points.
pub fn build_g(instance: &Instance) -> Vec<f64> {
    let n = instance.n();
    let nn = n * n;
    let dim = 2 * nn;
    let f = build_f(instance);
    let mut g = vec![0.0; dim * dim];
    for a in 0..nn {
        for b in 0..nn {
            g[a * dim + (nn + b)] = f[a * nn + b];
            g[(nn + b) * dim + a] = f[a * nn + b];
            if let Some(d) = instance.d() {
                g[a * dim + b] = d.at(a, b);
            }
            if let Some(h) = instance.h() {
                g[(nn + a) * dim + (nn + b)] = h.at(a, b);
            }
        }
    }
    g
}

/// Linear objective vector over the flat coordinates: the weight vector
/// placed on the position-cost block, zero elsewhere. `g^T phi` equals the
/// plain ordered median objective on feasible points.
pub fn build_g_vec(instance: &Instance) -> Vec<f64> {
    let layout = PhiLayout::new(instance.n()).expect("instance guarantees n >= 2");
    let mut g = vec![0.0; layout.dim()];
    for (k, &w) in instance.lambda().iter().enumerate() {
        g[layout.w(k)] = w;
    }
    g
}

/// Builds the moment relaxation of the quadratic formulation: the corner
/// pin, every linear row copied onto the border, every linear row's
/// symbolic square over the inner block, the quadratic definition of each
/// position cost, and the two diagonal-sum identities that tie binary
/// blocks to their lifted diagonals. Row count is `2m + n + 3` for the
/// `m = n^2 + 5n + 2` linear rows.
pub fn build_cp0(instance: &Instance, cone: ConeTag) -> ConicProgram {
    let n = instance.n();
    let system = build_linear_system(instance);
    let layout = system.layout();
    let mut equalities = Vec::with_capacity(2 * system.rows() + n + 3);

    equalities.push(ConicEquality {
        label: String::from("corner"),
        rhs: 1.0,
        coeffs: SymCoeffs::from_entries(vec![(0, 0, 1.0)]),
    });
    for row in system.iter_rows() {
        let mut entries = Vec::with_capacity(row.entries.len());
        for &(c, v) in row.entries {
            push_border(&mut entries, c, v);
        }
        equalities.push(ConicEquality {
            label: format!("phi[{}]", row.label),
            rhs: row.rhs,
            coeffs: SymCoeffs::from_entries(entries),
        });
    }
    for row in system.iter_rows() {
        equalities.push(ConicEquality {
            label: format!("sq[{}]", row.label),
            rhs: row.rhs * row.rhs,
            coeffs: SymCoeffs::from_entries(square_of(row.entries)),
        });
    }
    for k in 0..n {
        let mut entries = Vec::new();
        push_border(&mut entries, layout.w(k), 1.0);
        for j in 0..n {
            for l in 0..n {
                let c = instance.cost(j, l);
                if c != 0.0 {
                    push_sym(&mut entries, layout.p(j, k), layout.x(j, l), -c);
                }
            }
        }
        equalities.push(ConicEquality {
            label: format!("w-def[k={k}]"),
            rhs: 0.0,
            coeffs: SymCoeffs::from_entries(entries),
        });
    }
    {
        let mut entries = Vec::new();
        for j in 0..n {
            for k in 0..n {
                push_border(&mut entries, layout.p(j, k), 1.0);
                push_sym(&mut entries, layout.p(j, k), layout.p(j, k), -1.0);
            }
        }
        equalities.push(ConicEquality {
            label: String::from("perm-diag-sum"),
            rhs: 0.0,
            coeffs: SymCoeffs::from_entries(entries),
        });
    }
    {
        let mut entries = Vec::new();
        for j in 0..n {
            for l in 0..n {
                push_border(&mut entries, layout.x(j, l), 1.0);
                push_sym(&mut entries, layout.x(j, l), layout.x(j, l), -1.0);
            }
        }
        equalities.push(ConicEquality {
            label: String::from("assign-diag-sum"),
            rhs: 0.0,
            coeffs: SymCoeffs::from_entries(entries),
        });
    }

    ConicProgram {
        layout,
        objective: SymCoeffs::from_entries(objective_entries(instance, 1.0)),
        equalities,
        cone,
    }
}
