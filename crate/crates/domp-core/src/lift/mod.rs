//! Moment-matrix lifting of the quadratic formulation.
//!
//! A feasible flat vector `phi` of dimension `N` lifts to the bordered
//! rank-one matrix `M = [1; phi] [1; phi]^T` of size `(1+N) x (1+N)`:
//! the corner holds `1`, the border holds `phi`, and the inner block holds
//! every pairwise product. Convex combinations of such matrices form the
//! feasible set that the conic programs in [`program`] relax: every
//! quadratic identity of the formulation becomes a linear equality in `M`,
//! and the cone constraint (entrywise nonnegative plus positive
//! semidefinite) replaces the intractable "is a mixture of lifts"
//! membership.
//!
//! Recovery goes the other way: contracting the inner block against the
//! indicator of the first permutation row — whose entries sum to one on
//! any feasible point — maps a lifted matrix back to a flat vector, and is
//! exact on mixtures of lifts of a common binary triple.

mod explicit;
mod program;

pub use explicit::{build_cp_explicit, FamilyFix};
pub use program::{
    build_cp0, build_f, build_g, build_g_vec, objective_mu, objective_mu_coeffs, ConeTag,
    ConicEquality, ConicProgram, SymCoeffs,
};

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::eig::symmetric_eigen;
use crate::error::{Error, Result};
use crate::instance::{BinMatrix, Instance};
use crate::oracle::{all_permutation_matrices, Combinations};
use crate::qform::{PhiLayout, PhiVector, VarGroup};
use crate::sortperm::check_sort_feasible;

/// Dense symmetric matrix over the bordered index space: index `0` is the
/// corner, index `1 + i` is flat-vector coordinate `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedMatrix {
    layout: PhiLayout,
    dim: usize,
    values: Vec<f64>,
}

impl LiftedMatrix {
    pub fn zeros(layout: PhiLayout) -> Self {
        let dim = 1 + layout.dim();
        LiftedMatrix {
            layout,
            dim,
            values: vec![0.0; dim * dim],
        }
    }

    /// Wraps a dense row-major matrix of size `(1 + N)^2`. The input must
    /// be finite and symmetric to within `1e-9`; it is symmetrized exactly
    /// on the way in.
    pub fn from_values(layout: PhiLayout, values: Vec<f64>) -> Result<Self> {
        let dim = 1 + layout.dim();
        if values.len() != dim * dim {
            return Err(Error::LayoutMismatch(format!(
                "matrix of {} entries for bordered dimension {dim}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(String::from(
                "lifted matrix entries must be finite",
            )));
        }
        let mut m = LiftedMatrix {
            layout,
            dim,
            values,
        };
        for r in 0..dim {
            for c in r + 1..dim {
                let a = m.values[r * dim + c];
                let b = m.values[c * dim + r];
                if (a - b).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({r}, {c}): {a} vs {b}"
                    )));
                }
                let s = 0.5 * (a + b);
                m.values[r * dim + c] = s;
                m.values[c * dim + r] = s;
            }
        }
        Ok(m)
    }

    pub fn layout(&self) -> PhiLayout {
        self.layout
    }

    /// Bordered dimension `1 + N`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dense row-major storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.dim + c]
    }

    /// Writes both `(r, c)` and `(c, r)`.
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.values[r * self.dim + c] = value;
        self.values[c * self.dim + r] = value;
    }

    /// Corner entry, `1` on any lift.
    pub fn corner(&self) -> f64 {
        self.values[0]
    }

    /// Border entry for flat coordinate `i`.
    pub fn phi_entry(&self, i: usize) -> f64 {
        self.get(0, 1 + i)
    }

    /// Inner-block entry for flat coordinates `(i, ip)`.
    pub fn lifted(&self, i: usize, ip: usize) -> f64 {
        self.get(1 + i, 1 + ip)
    }

    /// Inner-block entry addressed by variable group and within-group flat
    /// offset, covering all pairings of the seven groups.
    pub fn block_entry(&self, ga: VarGroup, ia: usize, gb: VarGroup, ib: usize) -> f64 {
        let ra = self.layout.group_range(ga);
        let rb = self.layout.group_range(gb);
        assert!(ia < ra.len() && ib < rb.len(), "block offset out of range");
        self.lifted(ra.start + ia, rb.start + ib)
    }

    /// Largest absolute deviation from symmetry (zero for matrices built
    /// through [`LiftedMatrix::set`]).
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in r + 1..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r)).abs());
            }
        }
        worst
    }

    /// Smallest entry anywhere in the matrix.
    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Smallest eigenvalue, via the dense symmetric eigensolver.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eigen = symmetric_eigen(&self.values, self.dim)?;
        Ok(eigen.values[0])
    }
}

/// Indicator of the first permutation row in flat coordinates. Any
/// feasible vector satisfies `alpha^T phi = 1`, which is what makes the
/// contraction in [`recover_phi`] exact.
pub fn alpha_vector(layout: PhiLayout) -> Vec<f64> {
    let mut alpha = vec![0.0; layout.dim()];
    for k in 0..layout.n() {
        alpha[layout.p(0, k)] = 1.0;
    }
    alpha
}

/// Rank-one lift `[1; phi] [1; phi]^T` of a nonnegative flat vector.
pub fn lift(phi: &PhiVector) -> Result<LiftedMatrix> {
    if phi.values().iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidArgument(String::from(
            "lifting requires an entrywise nonnegative vector",
        )));
    }
    let mut m = LiftedMatrix::zeros(phi.layout());
    m.set(0, 0, 1.0);
    let n = phi.layout().dim();
    for i in 0..n {
        m.set(0, 1 + i, phi.get(i));
    }
    for i in 0..n {
        let vi = phi.get(i);
        if vi == 0.0 {
            continue;
        }
        for ip in i..n {
            m.set(1 + i, 1 + ip, vi * phi.get(ip));
        }
    }
    Ok(m)
}

/// Convex combination of rank-one lifts. Weights must be nonnegative and
/// sum to one within `1e-12`.
pub fn convex_hull_lift(phis: &[PhiVector], weights: &[f64]) -> Result<LiftedMatrix> {
    if phis.is_empty() || phis.len() != weights.len() {
        return Err(Error::InvalidArgument(format!(
            "{} vectors against {} weights",
            phis.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidArgument(String::from(
            "mixture weights must be finite and nonnegative",
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "mixture weights sum to {total}, expected 1"
        )));
    }
    let layout = phis[0].layout();
    if phis.iter().any(|phi| phi.layout() != layout) {
        return Err(Error::LayoutMismatch(String::from(
            "mixture vectors use different layouts",
        )));
    }
    let mut acc = LiftedMatrix::zeros(layout);
    for (phi, &w) in phis.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let m = lift(phi)?;
        for (dst, src) in acc.values.iter_mut().zip(&m.values) {
            *dst += w * src;
        }
    }
    Ok(acc)
}

/// Contracts the inner block against [`alpha_vector`]: coordinate `i` of
/// the result is `sum_k M[1+i, 1+k]` over the first permutation row's
/// columns. On a lift of a feasible binary vector this reproduces the
/// vector bit for bit; on approximately feasible matrices the result
/// inherits their residuals, including possibly tiny negative entries.
pub fn recover_phi(m: &LiftedMatrix) -> Result<PhiVector> {
    let layout = m.layout();
    let n = layout.n();
    let values: Vec<f64> = (0..layout.dim())
        .map(|i| (0..n).map(|k| m.lifted(i, layout.p(0, k))).sum())
        .collect();
    PhiVector::from_values(layout, values)
}

/// Enumerates every binary triple `(P, X, y)` feasible for the quadratic
/// formulation: `y` opens exactly `p` sites, `X` allocates each client to
/// an open site with no site serving more than `n - p + 1` clients, and
/// `P` sorts the realized allocation costs nondecreasingly. Deterministic
/// order; capped at `n <= 4` (the walk is exponential in `n`).
pub fn enumerate_feasible_triples(
    instance: &Instance,
) -> Result<Vec<(BinMatrix, BinMatrix, Vec<u8>)>> {
    let n = instance.n();
    if n > 4 {
        return Err(Error::ResourceLimit(format!(
            "triple enumeration capped at n = 4, got n = {n}"
        )));
    }
    let p = instance.p();
    let cap = n - p + 1;
    let perms = all_permutation_matrices(n);
    let mut triples = Vec::new();
    for open in Combinations::new(n, p) {
        let mut y = vec![0u8; n];
        for &l in &open {
            y[l] = 1;
        }
        let total = p.pow(n as u32);
        for code in 0..total {
            let mut x = BinMatrix::zeros(n);
            let mut c = code;
            for j in 0..n {
                x.set(j, open[c % p], true);
                c /= p;
            }
            if open.iter().any(|&l| x.col_sum(l) > cap) {
                continue;
            }
            let realized: Vec<f64> = (0..n)
                .map(|j| (0..n).map(|l| instance.cost(j, l) * x.at(j, l)).sum())
                .collect();
            for perm in &perms {
                if check_sort_feasible(&realized, perm).feasible {
                    triples.push((perm.clone(), x.clone(), y.clone()));
                }
            }
        }
    }
    Ok(triples)
}

/// Largest absolute equality residual within one label family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyResidual {
    /// Label with index brackets stripped, e.g. `sq[rank-monotone[k=1]]`
    /// reports under `sq`.
    pub family: String,
    pub max_abs: f64,
}

/// Feasibility report of a lifted matrix against a conic program.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftReport {
    /// Per-family maxima over the equality residuals, in first-appearance
    /// order of the families.
    pub families: Vec<FamilyResidual>,
    /// Largest absolute equality residual overall.
    pub max_residual: f64,
    /// Largest deviation from symmetry.
    pub asymmetry: f64,
    /// Smallest matrix entry (cone membership wants it nonnegative).
    pub min_entry: f64,
    /// Smallest eigenvalue (cone membership wants it nonnegative).
    pub min_eigenvalue: f64,
    pub tol: f64,
    pub pass: bool,
}

fn family_of(label: &str) -> &str {
    label.split('[').next().unwrap_or(label)
}

/// Evaluates every equality of `program` on `m`, folds the residuals by
/// label family, and checks cone membership up to `tol`: asymmetry and
/// residuals at most `tol`, smallest entry and smallest eigenvalue at
/// least `-tol`.
pub fn check_lift_feasible(
    program: &ConicProgram,
    m: &LiftedMatrix,
    tol: f64,
) -> Result<LiftReport> {
    if program.layout != m.layout() {
        return Err(Error::LayoutMismatch(String::from(
            "program and matrix use different layouts",
        )));
    }
    let mut families: Vec<FamilyResidual> = Vec::new();
    let mut max_residual = 0.0f64;
    for eq in &program.equalities {
        let residual = (eq.coeffs.eval(m) - eq.rhs).abs();
        max_residual = max_residual.max(residual);
        let family = family_of(&eq.label);
        match families.iter_mut().find(|f| f.family == family) {
            Some(f) => f.max_abs = f.max_abs.max(residual),
            None => families.push(FamilyResidual {
                family: String::from(family),
                max_abs: residual,
            }),
        }
    }
    let asymmetry = m.asymmetry();
    let min_entry = m.min_entry();
    let min_eigenvalue = m.min_eigenvalue()?;
    let pass = max_residual <= tol
        && asymmetry <= tol
        && min_entry >= -tol
        && min_eigenvalue >= -tol;
    Ok(LiftReport {
        families,
        max_residual,
        asymmetry,
        min_entry,
        min_eigenvalue,
        tol,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;
    use crate::qform::{build_linear_system, complete_slacks};
    use crate::testutil::{e1, greedy_triple};

    #[test]
    fn lift_of_completion_is_rank_one() {
        let inst = e1(1, vec![1.0; 3]);
        let (p, x, y) = greedy_triple(&inst, &[0]);
        let phi = complete_slacks(&inst, &p, &x, &y).unwrap();
        let m = lift(&phi).unwrap();
        assert_eq!(m.corner(), 1.0);
        let layout = phi.layout();
        for i in 0..layout.dim() {
            assert_eq!(m.phi_entry(i), phi.get(i));
            for ip in 0..layout.dim() {
                assert_eq!(m.lifted(i, ip), phi.get(i) * phi.get(ip));
            }
        }
    }

    #[test]
    fn lift_rejects_negative_entries() {
        let inst = e1(1, vec![1.0; 3]);
        let (p, x, y) = greedy_triple(&inst, &[0]);
        let mut phi = complete_slacks(&inst, &p, &x, &y).unwrap();
        let layout = phi.layout();
        phi.set(layout.w(0), -1e-6);
        assert!(matches!(lift(&phi), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn recover_inverts_lift_exactly() {
        let inst = e1(2, vec![1.0; 3]);
        for open in [[0usize, 1], [0, 2], [1, 2]] {
            let (p, x, y) = greedy_triple(&inst, &open);
            let phi = complete_slacks(&inst, &p, &x, &y).unwrap();
            let m = lift(&phi).unwrap();
            let back = recover_phi(&m).unwrap();
            assert_eq!(back.values(), phi.values());
        }
    }

    #[test]
    fn recover_is_exact_on_mixtures_of_a_common_triple() {
        // Mixing lifts of the same vector keeps recovery exact (the
        // contraction is linear and exact on each summand).
        let inst = e1(1, vec![1.0; 3]);
        let (p, x, y) = greedy_triple(&inst, &[1]);
        let phi = complete_slacks(&inst, &p, &x, &y).unwrap();
        let m = convex_hull_lift(
            &[phi.clone(), phi.clone(), phi.clone()],
            &[0.25, 0.5, 0.25],
        )
        .unwrap();
        let back = recover_phi(&m).unwrap();
        for i in 0..phi.layout().dim() {
            assert!((back.get(i) - phi.get(i)).abs() <= 1e-12);
        }
    }

    #[test]
    fn mixture_recovery_solves_the_linear_system() {
        // A mixture of lifts of different triples is no longer rank one,
        // but its recovery still satisfies every linear equality because
        // each summand's does.
        let inst = e1(2, vec![1.0; 3]);
        let system = build_linear_system(&inst);
        let mut phis = Vec::new();
        for open in [[0usize, 1], [0, 2], [1, 2]] {
            let (p, x, y) = greedy_triple(&inst, &open);
            phis.push(complete_slacks(&inst, &p, &x, &y).unwrap());
        }
        let m = convex_hull_lift(&phis, &[0.5, 0.3, 0.2]).unwrap();
        let back = recover_phi(&m).unwrap();
        assert!(system.max_abs_residual(&back).unwrap() <= 1e-12);
    }

    #[test]
    fn hull_weights_are_validated() {
        let inst = e1(1, vec![1.0; 3]);
        let (p, x, y) = greedy_triple(&inst, &[0]);
        let phi = complete_slacks(&inst, &p, &x, &y).unwrap();
        assert!(convex_hull_lift(core::slice::from_ref(&phi), &[0.5]).is_err());
        assert!(convex_hull_lift(core::slice::from_ref(&phi), &[-1.0, 2.0]).is_err());
        assert!(convex_hull_lift(&[], &[]).is_err());
        assert!(convex_hull_lift(&[phi], &[1.0]).is_ok());
    }

    #[test]
    fn alpha_contracts_to_one() {
        let inst = e1(1, vec![1.0; 3]);
        let (p, x, y) = greedy_triple(&inst, &[2]);
        let phi = complete_slacks(&inst, &p, &x, &y).unwrap();
        let alpha = alpha_vector(phi.layout());
        let dot: f64 = alpha
            .iter()
            .zip(phi.values())
            .map(|(a, v)| a * v)
            .sum();
        assert_eq!(dot, 1.0);
        assert_eq!(alpha.iter().filter(|a| **a == 1.0).count(), 3);
    }

    #[test]
    fn block_accessors_cover_all_group_pairs() {
        let inst = e1(1, vec![1.0; 3]);
        let (p, x, y) = greedy_triple(&inst, &[0]);
        let phi = complete_slacks(&inst, &p, &x, &y).unwrap();
        let m = lift(&phi).unwrap();
        let layout = phi.layout();
        for ga in VarGroup::ALL {
            for gb in VarGroup::ALL {
                let ra = layout.group_range(ga);
                let rb = layout.group_range(gb);
                for ia in 0..ra.len() {
                    for ib in 0..rb.len() {
                        let expect = phi.get(ra.start + ia) * phi.get(rb.start + ib);
                        assert_eq!(m.block_entry(ga, ia, gb, ib), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn triple_enumeration_counts() {
        // p = 1: each open set admits exactly one allocation (everyone to
        // the open site), and the distinct realized costs of the worked
        // example admit exactly one sorting permutation.
        let inst = e1(1, vec![1.0; 3]);
        let triples = enumerate_feasible_triples(&inst).unwrap();
        assert_eq!(triples.len(), 3);
        for (p, x, y) in &triples {
            assert!(p.is_permutation());
            assert_eq!(y.iter().map(|v| *v as usize).sum::<usize>(), 1);
            for j in 0..3 {
                assert_eq!(x.row_sum(j), 1);
            }
        }
    }

    #[test]
    fn triple_enumeration_respects_load_cap() {
        // p = 2 leaves capacity n - p + 1 = 2, so no allocation may send
        // all three clients to one site.
        let inst = e1(2, vec![1.0; 3]);
        let triples = enumerate_feasible_triples(&inst).unwrap();
        assert!(!triples.is_empty());
        for (_, x, _) in &triples {
            for l in 0..3 {
                assert!(x.col_sum(l) <= 2);
            }
        }
        // Completion succeeds on every enumerated triple: feasibility of
        // the binary part implies nonnegative slacks.
        for (p, x, y) in &triples {
            complete_slacks(&inst, p, x, y).unwrap();
        }
    }

    #[test]
    fn triple_enumeration_guard() {
        let inst = Instance::new(5, 2, vec![1.0; 5], vec![0.0; 25], None, None).unwrap();
        assert!(matches!(
            enumerate_feasible_triples(&inst),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn from_values_round_trip() {
        let inst = e1(1, vec![1.0; 3]);
        let (p, x, y) = greedy_triple(&inst, &[0]);
        let phi = complete_slacks(&inst, &p, &x, &y).unwrap();
        let m = lift(&phi).unwrap();
        let rebuilt = LiftedMatrix::from_values(m.layout(), m.values().to_vec()).unwrap();
        assert_eq!(rebuilt, m);
        // Asymmetric input is rejected.
        let mut bad = m.values().to_vec();
        bad[1] += 1e-3;
        assert!(LiftedMatrix::from_values(m.layout(), bad).is_err());
    }
}
