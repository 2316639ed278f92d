//! First-order splitting solver for doubly nonnegative relaxations.
//!
//! The conic programs built by [`crate::lift`] ask for a symmetric matrix
//! that satisfies linear equalities and lies in the doubly nonnegative
//! cone (positive semidefinite with nonnegative entries). This module
//! minimizes the linear objective over that set with a three-block
//! consensus splitting: one copy of the variable is projected onto the
//! affine subspace (together with the objective's gradient step), one onto
//! the semidefinite cone, and one onto the nonnegative orthant, with
//! scaled dual variables tying the copies together.
//!
//! The affine projection is precomputed from the constraint Gram matrix via
//! an eigendecomposition-based pseudo-inverse, so each iteration costs one
//! dense eigendecomposition (for the semidefinite projection) plus sparse
//! constraint work. Penalty rebalancing keeps the primal and dual residuals
//! within a bounded ratio of each other without refactoring anything.
//!
//! The returned matrix is the affine-projected iterate: its equality
//! residuals are at floating-point level, while its smallest entry and
//! smallest eigenvalue are bounded below by minus the reported primal
//! residual. The reported bound `<C, Z>` therefore tracks the true conic
//! optimum — a lower bound for the lifted combinatorial problem — to the
//! same accuracy.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::eig::{symmetric_eigen, MAX_DIM};
use crate::error::{Error, Result};
use crate::lift::{ConicProgram, LiftedMatrix, SymCoeffs};
use crate::rng::SplitMix64;

/// Tuning knobs for [`solve_dnn`]. The defaults converge on every desk-scale
/// program in this crate's test suite; the seed only perturbs the starting
/// point and never the answer.
#[derive(Debug, Clone, PartialEq)]
pub struct DnnSettings {
    /// Initial penalty weight of the splitting. Must be positive.
    pub rho: f64,
    /// Stop when both copies agree with the consensus iterate to this
    /// Frobenius distance.
    pub primal_tol: f64,
    /// Stop when the copies move less than this between iterations
    /// (scaled by the penalty).
    pub dual_tol: f64,
    /// Iteration cap; hitting it yields [`DnnStatus::MaxIter`].
    pub max_iters: usize,
    /// Seed for the tiny random symmetric starting point.
    pub seed: u64,
    /// Over-relaxation factor, in `(0, 2)`.
    pub over_relax: f64,
    /// Rebalance the penalty every this many iterations.
    pub balance_every: usize,
    /// Rebalance when one residual exceeds the other by this ratio.
    pub balance_ratio: f64,
    /// Multiplicative penalty step used by rebalancing.
    pub balance_factor: f64,
}

impl Default for DnnSettings {
    fn default() -> Self {
        DnnSettings {
            rho: 1.0,
            primal_tol: 1e-7,
            dual_tol: 1e-7,
            max_iters: 50_000,
            seed: 7,
            over_relax: 1.6,
            balance_every: 100,
            balance_ratio: 10.0,
            balance_factor: 2.0,
        }
    }
}

impl DnnSettings {
    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("solver settings: {what}")));
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return bad("penalty must be positive and finite");
        }
        if !(self.primal_tol.is_finite() && self.primal_tol > 0.0)
            || !(self.dual_tol.is_finite() && self.dual_tol > 0.0)
        {
            return bad("tolerances must be positive and finite");
        }
        if self.max_iters == 0 {
            return bad("iteration cap must be at least 1");
        }
        if !(self.over_relax > 0.0 && self.over_relax < 2.0) {
            return bad("over-relaxation must lie in (0, 2)");
        }
        if self.balance_every == 0 {
            return bad("rebalance period must be at least 1");
        }
        if !(self.balance_ratio.is_finite() && self.balance_ratio > 1.0)
            || !(self.balance_factor.is_finite() && self.balance_factor > 1.0)
        {
            return bad("rebalance ratio and factor must exceed 1");
        }
        Ok(())
    }
}

/// Terminal state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DnnStatus {
    /// Both residuals fell below their tolerances.
    Converged,
    /// The iteration cap was reached first; the result is a best effort.
    MaxIter,
    /// The equalities are mutually inconsistent (no matrix satisfies
    /// them); the result carries no usable bound.
    InfeasibleDetected,
}

impl DnnStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            DnnStatus::Converged => "converged",
            DnnStatus::MaxIter => "max-iter",
            DnnStatus::InfeasibleDetected => "infeasible-detected",
        }
    }
}

/// Outcome of [`solve_dnn`].
#[derive(Debug, Clone, PartialEq)]
pub struct DnnResult {
    /// Objective value `<C, Z>` of the returned matrix; approximates the
    /// conic optimum to roughly the residual level. Zero and meaningless
    /// when the status is [`DnnStatus::InfeasibleDetected`].
    pub bound: f64,
    pub status: DnnStatus,
    /// Iterations actually performed.
    pub iters: usize,
    /// Final consensus disagreement (Frobenius).
    pub primal_res: f64,
    /// Final scaled iterate movement (Frobenius).
    pub dual_res: f64,
    /// Affine-projected final iterate: equalities hold to floating-point
    /// accuracy; entries and eigenvalues are at least `-primal_res`.
    pub matrix: LiftedMatrix,
}

/// Projects a dense row-major symmetric matrix onto the positive
/// semidefinite cone in place (negative eigenvalues clipped to zero).
pub fn project_psd(values: &mut [f64], dim: usize) -> Result<()> {
    let eigen = symmetric_eigen(values, dim)?;
    values.fill(0.0);
    for t in 0..dim {
        let lambda = eigen.values[t];
        if lambda <= 0.0 {
            continue;
        }
        for r in 0..dim {
            let vr = eigen.vectors[r * dim + t] * lambda;
            if vr == 0.0 {
                continue;
            }
            for c in r..dim {
                let add = vr * eigen.vectors[c * dim + t];
                values[r * dim + c] += add;
                if r != c {
                    values[c * dim + r] += add;
                }
            }
        }
    }
    Ok(())
}

/// Orthogonal projector onto `{ Z : <A_i, Z> = b_i }`, built once per
/// solve from the pseudo-inverse of the constraint Gram matrix. Rows are
/// equilibrated to unit Frobenius norm first — that leaves the affine set
/// (and hence the projection) unchanged while flattening the Gram
/// spectrum, so rank decisions stay reliable even when raw coefficient
/// magnitudes span many orders. The projector never depends on the
/// penalty, so rebalancing is free.
struct AffineProjector {
    rows: Vec<SymCoeffs>,
    b: Vec<f64>,
    /// Eigenvectors of the Gram matrix, row-major `m x m`.
    q: Vec<f64>,
    /// Reciprocal eigenvalues above the cutoff, zero below.
    pinv: Vec<f64>,
    m: usize,
}

impl AffineProjector {
    fn new(program: &ConicProgram) -> Result<Self> {
        let m = program.equalities.len();
        let mut rows = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        for eq in &program.equalities {
            let norm = libm::sqrt(eq.coeffs.norm_sq());
            if norm > 0.0 {
                rows.push(eq.coeffs.scaled(1.0 / norm));
                b.push(eq.rhs / norm);
            } else {
                // An all-zero row carries no direction; keep it so an
                // unsatisfiable `0 = rhs` shows up in the residual probe.
                rows.push(eq.coeffs.clone());
                b.push(eq.rhs);
            }
        }
        let mut gram = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = rows[i].frobenius_with(&rows[j]);
                gram[i * m + j] = v;
                gram[j * m + i] = v;
            }
        }
        let eigen = symmetric_eigen(&gram, m)?;
        let cutoff = eigen.values[m - 1].max(0.0) * 1e-12;
        let pinv = eigen
            .values
            .iter()
            .map(|&v| if v > cutoff { 1.0 / v } else { 0.0 })
            .collect();
        Ok(AffineProjector {
            rows,
            b,
            q: eigen.vectors,
            pinv,
            m,
        })
    }

    /// Signed residuals `<A_i, W> - b_i` of the equilibrated rows.
    fn residuals_into(&self, w: &[f64], dim: usize, out: &mut [f64]) {
        for (i, row) in self.rows.iter().enumerate() {
            out[i] = row.eval_dense(w, dim) - self.b[i];
        }
    }

    /// In-place projection of `w`; `r` and `y` are scratch of length `m`.
    fn project(&self, w: &mut [f64], dim: usize, r: &mut [f64], y: &mut [f64]) {
        self.residuals_into(w, dim, r);
        // y = Q diag(pinv) Q^T r, the least-norm multiplier.
        let m = self.m;
        for t in 0..m {
            let mut acc = 0.0;
            for i in 0..m {
                acc += self.q[i * m + t] * r[i];
            }
            y[t] = acc * self.pinv[t];
        }
        for i in 0..m {
            let mut acc = 0.0;
            for t in 0..m {
                acc += self.q[i * m + t] * y[t];
            }
            r[i] = acc;
        }
        for (i, row) in self.rows.iter().enumerate() {
            if r[i] != 0.0 {
                row.add_scaled_into(w, dim, -r[i]);
            }
        }
    }
}

fn frobenius_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    libm::sqrt(acc)
}

/// Minimizes the program's objective over matrices that satisfy its
/// equalities and are doubly nonnegative. The program must pin the corner
/// entry (an equality touching index `(0, 0)`), which every moment
/// relaxation built in this crate does; dimensions and equality counts are
/// capped by the dense eigensolver limit.
pub fn solve_dnn(program: &ConicProgram, settings: &DnnSettings) -> Result<DnnResult> {
    settings.validate()?;
    let dim = program.dim();
    if dim > MAX_DIM {
        return Err(Error::ResourceLimit(format!(
            "bordered dimension {dim} exceeds the solver cap {MAX_DIM}"
        )));
    }
    let m = program.equalities.len();
    if m == 0 {
        return Err(Error::InvalidArgument(String::from(
            "program has no equalities",
        )));
    }
    if m > MAX_DIM {
        return Err(Error::ResourceLimit(format!(
            "{m} equalities exceed the solver cap {MAX_DIM}"
        )));
    }
    let pins_corner = program.equalities.iter().any(|eq| {
        eq.coeffs
            .entries()
            .iter()
            .any(|&(r, c, _)| r == 0 && c == 0)
    });
    if !pins_corner {
        return Err(Error::InvalidArgument(String::from(
            "program does not pin the corner entry; the relaxation would be unbounded below or trivial",
        )));
    }

    let total = dim * dim;
    let mut c_mat = vec![0.0; total];
    program.objective.add_scaled_into(&mut c_mat, dim, 1.0);

    let projector = AffineProjector::new(program)?;
    let mut scratch_r = vec![0.0; m];
    let mut scratch_y = vec![0.0; m];

    // Consistency probe: project the origin and measure how well the
    // equalities can be met at all. An inconsistent system leaves a
    // residual no matrix can remove.
    let mut z = vec![0.0; total];
    projector.project(&mut z, dim, &mut scratch_r, &mut scratch_y);
    projector.residuals_into(&z, dim, &mut scratch_r);
    let worst = scratch_r.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
    let b_scale = projector.b.iter().fold(0.0f64, |acc, b| acc.max(b.abs()));
    if worst > 1e-8 * (1.0 + b_scale) {
        let matrix = LiftedMatrix::from_values(program.layout, z)?;
        return Ok(DnnResult {
            bound: 0.0,
            status: DnnStatus::InfeasibleDetected,
            iters: 0,
            primal_res: worst,
            dual_res: 0.0,
            matrix,
        });
    }

    // Tiny nonnegative symmetric start, seed-dependent but answer-neutral.
    let mut rng = SplitMix64::new(settings.seed);
    let mut y1 = vec![0.0; total];
    for r in 0..dim {
        for c in r..dim {
            let v = 1e-6 * rng.next_f64();
            y1[r * dim + c] = v;
            y1[c * dim + r] = v;
        }
    }
    let mut y2 = y1.clone();
    let mut u1 = vec![0.0; total];
    let mut u2 = vec![0.0; total];
    let mut y1_old = vec![0.0; total];
    let mut y2_old = vec![0.0; total];
    let mut t1 = vec![0.0; total];
    let mut t2 = vec![0.0; total];

    let gamma = settings.over_relax;
    let mut rho = settings.rho;
    let mut status = DnnStatus::MaxIter;
    let mut iters = settings.max_iters;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;

    for iter in 1..=settings.max_iters {
        // Consensus step: unconstrained minimizer of the penalized
        // objective, then the affine projection.
        let inv = 1.0 / (2.0 * rho);
        for idx in 0..total {
            z[idx] = 0.5 * (y1[idx] - u1[idx] + y2[idx] - u2[idx]) - c_mat[idx] * inv;
        }
        projector.project(&mut z, dim, &mut scratch_r, &mut scratch_y);

        y1_old.copy_from_slice(&y1);
        y2_old.copy_from_slice(&y2);

        // Over-relaxed targets, then the two cone projections. Writing the
        // dual update as target minus projection keeps everything exact.
        for idx in 0..total {
            let zh = gamma * z[idx] + (1.0 - gamma) * y1_old[idx];
            t1[idx] = zh + u1[idx];
            let zh2 = gamma * z[idx] + (1.0 - gamma) * y2_old[idx];
            t2[idx] = zh2 + u2[idx];
        }
        y1.copy_from_slice(&t1);
        project_psd(&mut y1, dim)?;
        for idx in 0..total {
            u1[idx] = t1[idx] - y1[idx];
            y2[idx] = t2[idx].max(0.0);
            u2[idx] = t2[idx] - y2[idx];
        }

        primal = frobenius_distance(&z, &y1).max(frobenius_distance(&z, &y2));
        dual = rho
            * frobenius_distance(&y1, &y1_old).max(frobenius_distance(&y2, &y2_old));

        if primal <= settings.primal_tol && dual <= settings.dual_tol {
            status = DnnStatus::Converged;
            iters = iter;
            break;
        }

        if iter % settings.balance_every == 0 {
            let factor = settings.balance_factor;
            if primal > settings.balance_ratio * dual {
                rho *= factor;
                for idx in 0..total {
                    u1[idx] /= factor;
                    u2[idx] /= factor;
                }
            } else if dual > settings.balance_ratio * primal {
                rho /= factor;
                for idx in 0..total {
                    u1[idx] *= factor;
                    u2[idx] *= factor;
                }
            }
        }
    }

    let bound: f64 = c_mat.iter().zip(&z).map(|(c, z)| c * z).sum();
    let matrix = LiftedMatrix::from_values(program.layout, z)?;
    Ok(DnnResult {
        bound,
        status,
        iters,
        primal_res: primal,
        dual_res: dual,
        matrix,
    })
}
