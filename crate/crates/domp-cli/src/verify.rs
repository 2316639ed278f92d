//! Verification campaigns: a configurable battery of machine-checkable
//! properties run against one instance, each producing a pass/fail record
//! with a residual. Guard violations (an instance too large for an
//! exhaustive check) are reported as failing records rather than aborting
//! the campaign, so a report always covers every requested check.

use std::fmt;
use std::str::FromStr;

use domp_core::dnn::{solve_dnn, DnnSettings, DnnStatus};
use domp_core::instance::Instance;
use domp_core::lift::{
    build_cp0, check_lift_feasible, convex_hull_lift, enumerate_feasible_triples, lift,
    objective_mu, recover_phi, ConeTag,
};
use domp_core::oracle::{all_permutation_matrices, solve_enumerate, solve_enumerate_extended};
use domp_core::qform::{build_linear_system, complete_slacks, miqp_objective,
    surrogate_equivalence_check};
use domp_core::rng::SplitMix64;
use domp_core::sortperm::{check_sort_feasible, sort_permutation_matrix};

use crate::formats::CheckDoc;

/// The individual properties `verify` can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// Exact lifts and their convex hulls satisfy the moment program.
    Lift,
    /// Contracting a lift recovers the flat vector exactly.
    Recover,
    /// Pairwise and aggregated load caps carve out the same designs.
    Surrogate,
    /// The blended objective is constant in the blend weight on lifts.
    Mu,
    /// The relaxation bound sits below the exact optimum.
    Bound,
    /// The sorting-permutation program agrees with direct sorting.
    Sort,
}

pub const ALL_CHECKS: [CheckKind; 6] = [
    CheckKind::Lift,
    CheckKind::Recover,
    CheckKind::Surrogate,
    CheckKind::Mu,
    CheckKind::Bound,
    CheckKind::Sort,
];

impl CheckKind {
    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Lift => "lift",
            CheckKind::Recover => "recover",
            CheckKind::Surrogate => "surrogate",
            CheckKind::Mu => "mu",
            CheckKind::Bound => "bound",
            CheckKind::Sort => "sort",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_CHECKS
            .iter()
            .find(|c| c.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown check '{s}' (expected one of lift, recover, surrogate, mu, bound, sort)"))
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub checks: Vec<CheckKind>,
    pub tol: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            checks: ALL_CHECKS.to_vec(),
            tol: 1e-9,
            seed: 7,
        }
    }
}

/// Runs every configured check against `instance`, in the order given.
/// Output is deterministic for a fixed (instance, config).
pub fn run_verification(instance: &Instance, config: &VerifyConfig) -> Vec<CheckDoc> {
    config
        .checks
        .iter()
        .map(|kind| {
            let outcome = match kind {
                CheckKind::Lift => check_lift(instance, config.tol),
                CheckKind::Recover => check_recover(instance),
                CheckKind::Surrogate => check_surrogate(instance),
                CheckKind::Mu => check_mu(instance, config.tol),
                CheckKind::Bound => check_bound(instance, config.seed),
                CheckKind::Sort => check_sort(instance, config.seed),
            };
            match outcome {
                Ok((pass, residual, detail)) => CheckDoc {
                    name: kind.name().to_string(),
                    pass,
                    residual,
                    detail,
                },
                // Guard violations and other errors fail the check but
                // never abort the rest of the campaign.
                Err(err) => CheckDoc {
                    name: kind.name().to_string(),
                    pass: false,
                    residual: f64::NAN,
                    detail: format!("not run: {err}"),
                },
            }
        })
        .collect()
}

type Outcome = Result<(bool, f64, String), domp_core::Error>;

fn check_lift(instance: &Instance, tol: f64) -> Outcome {
    let triples = enumerate_feasible_triples(instance)?;
    let program = build_cp0(instance, ConeTag::Dnn);
    let mut worst_residual = 0.0f64;
    let mut worst_entry = 0.0f64;
    let mut worst_eigen = 0.0f64;
    let mut failures = 0usize;
    let mut phis = Vec::new();
    for (p, x, y) in &triples {
        let phi = complete_slacks(instance, p, x, y)?;
        let lifted = lift(&phi)?;
        let report = check_lift_feasible(&program, &lifted, tol)?;
        worst_residual = worst_residual.max(report.max_residual);
        worst_entry = worst_entry.min(report.min_entry);
        worst_eigen = worst_eigen.min(report.min_eigenvalue);
        failures += usize::from(!report.pass);
        phis.push(phi);
    }
    // A fixed three-point mixture exercises the convex-hull direction.
    if phis.len() >= 3 {
        let hull = convex_hull_lift(&phis[0..3], &[0.5, 0.3, 0.2])?;
        let report = check_lift_feasible(&program, &hull, tol)?;
        worst_residual = worst_residual.max(report.max_residual);
        worst_entry = worst_entry.min(report.min_entry);
        worst_eigen = worst_eigen.min(report.min_eigenvalue);
        failures += usize::from(!report.pass);
    }
    Ok((
        failures == 0,
        worst_residual,
        format!(
            "{} lifts checked; max residual {worst_residual:.2e}, min entry {worst_entry:.2e}, min eigenvalue {worst_eigen:.2e}",
            phis.len()
        ),
    ))
}

fn check_recover(instance: &Instance) -> Outcome {
    let triples = enumerate_feasible_triples(instance)?;
    let layout_dim = build_linear_system(instance).cols();
    let mut worst = 0.0f64;
    for (p, x, y) in &triples {
        let phi = complete_slacks(instance, p, x, y)?;
        let lifted = lift(&phi)?;
        let back = recover_phi(&lifted)?;
        for i in 0..layout_dim {
            worst = worst.max((back.get(i) - phi.get(i)).abs());
        }
    }
    Ok((
        worst <= 1e-15,
        worst,
        format!(
            "{} lifts contracted back; max coordinate error {worst:.2e}",
            triples.len()
        ),
    ))
}

fn check_surrogate(instance: &Instance) -> Outcome {
    let equivalent = surrogate_equivalence_check(instance)?;
    Ok((
        equivalent,
        if equivalent { 0.0 } else { 1.0 },
        String::from(if equivalent {
            "pairwise and aggregated load caps admit the same designs"
        } else {
            "load-cap formulations disagree on some design"
        }),
    ))
}

fn check_mu(instance: &Instance, tol: f64) -> Outcome {
    let triples = enumerate_feasible_triples(instance)?;
    let mut worst = 0.0f64;
    for (p, x, y) in &triples {
        let phi = complete_slacks(instance, p, x, y)?;
        let lifted = lift(&phi)?;
        let reference = miqp_objective(instance, &phi)?;
        for mu in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let value = objective_mu(instance, &lifted, mu)?;
            worst = worst.max((value - reference).abs());
        }
    }
    Ok((
        worst <= tol,
        worst,
        format!(
            "blend weights 0..1 agree on {} lifts to {worst:.2e}",
            triples.len()
        ),
    ))
}

/// Largest power of two at or above `x` (used to normalize costs exactly).
fn power_of_two_at_least(x: f64) -> f64 {
    let mut scale = 1.0;
    while scale < x {
        scale *= 2.0;
    }
    scale
}

fn check_bound(instance: &Instance, seed: u64) -> Outcome {
    // Power-of-two normalization keeps costs exact in floating point and
    // brings the splitting method into its fast regime; the plain
    // objective is homogeneous in the costs, so the bound rescales back.
    let (program, factor) = if instance.is_plain() {
        let max_cost = instance.costs().iter().fold(0.0f64, |a, &c| a.max(c));
        let factor = 1.0 / power_of_two_at_least(max_cost.max(1.0));
        (
            build_cp0(&instance.scaled_plain(factor)?, ConeTag::Dnn),
            factor,
        )
    } else {
        (build_cp0(instance, ConeTag::Dnn), 1.0)
    };
    let settings = DnnSettings {
        seed,
        ..DnnSettings::default()
    };
    let result = solve_dnn(&program, &settings)?;
    let bound = result.bound / factor;
    let optimum = if instance.is_plain() {
        solve_enumerate(instance)?.0
    } else {
        solve_enumerate_extended(instance)?.value
    };
    let converged = result.status == DnnStatus::Converged;
    let gap = bound - optimum;
    Ok((
        converged && gap <= 1e-4,
        gap.max(0.0),
        format!(
            "bound {bound:.6} vs optimum {optimum:.6} ({}, {} iterations)",
            result.status.as_str(),
            result.iters
        ),
    ))
}

fn check_sort(instance: &Instance, seed: u64) -> Outcome {
    let n = instance.n();
    let perms = if n <= 5 {
        all_permutation_matrices(n)
    } else {
        return Err(domp_core::Error::ResourceLimit(format!(
            "exhaustive permutation check capped at n = 5, got n = {n}"
        )));
    };
    let mut rng = SplitMix64::new(seed);
    let mut mismatches = 0usize;
    let rounds = 20;
    for _ in 0..rounds {
        let r: Vec<f64> = (0..n).map(|_| rng.next_in_range(0, 9) as f64).collect();
        // The constructed sorter must be accepted...
        let sorter = sort_permutation_matrix(&r);
        if !check_sort_feasible(&r, &sorter).feasible {
            mismatches += 1;
        }
        // ...and on every permutation the program must agree with a direct
        // nondecreasing test of the arranged values.
        for p in &perms {
            let placed: Vec<f64> = (0..n)
                .map(|k| (0..n).map(|j| p.at(j, k) * r[j]).sum())
                .collect();
            let direct = placed.windows(2).all(|w| w[0] <= w[1]);
            if check_sort_feasible(&r, p).feasible != direct {
                mismatches += 1;
            }
        }
    }
    Ok((
        mismatches == 0,
        mismatches as f64,
        format!(
            "{rounds} draws x {} permutations cross-checked, {mismatches} disagreements",
            perms.len()
        ),
    ))
}
