//! Fully spelled-out variant of the lifted equality system.
//!
//! Where [`super::build_cp0`](crate::lift::build_cp0) derives its rows
//! mechanically from the linear system (border copies plus symbolic
//! squares), this builder writes every family in its traditional
//! spelled-out form: contractions of the linear rows against the first
//! permutation row's indicator, per-family squares, and the quadratic
//! coupling rows — with no corner pin and no border entries at all.
//!
//! Four of the spelled-out families circulate with typos that make them
//! fail on genuine lifts. The builder reproduces those literal forms by
//! default so the defect is machine-checkable, and repairs them when
//! `corrected` is set; either way it returns a log describing each
//! affected family, what the literal form says, and what the repaired
//! form uses.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::program::{alpha_contraction_of, push_sym, square_of};
use super::{ConeTag, ConicEquality, ConicProgram, SymCoeffs};
use crate::instance::Instance;
use crate::qform::{build_linear_system, RowLabel};

/// One spelled-out family whose circulating form is wrong, with the
/// literal reading, the repair, and whether the repair was applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyFix {
    /// Label family the fix concerns.
    pub family: &'static str,
    /// What the literal spelled-out form does.
    pub literal: &'static str,
    /// What the repaired form does instead.
    pub corrected: &'static str,
    /// True when the built program uses the repaired form.
    pub applied: bool,
}

fn fixes(applied: bool) -> Vec<FamilyFix> {
    [
        FamilyFix {
            family: "lift[rank-cost-lb]",
            literal: "contracted rank/cost row adds the eta slack with a plus sign",
            corrected: "eta slack enters with the minus sign of the underlying linear row",
            applied,
        },
        FamilyFix {
            family: "sq[rank-monotone]",
            literal: "cross term -2 W_k xi_{k+1} pairs the step slack with the next position",
            corrected: "cross term -2 W_{k+1} xi_k, from expanding (W_k - W_{k+1} + xi_k)^2",
            applied,
        },
        FamilyFix {
            family: "sq[cost-total]",
            literal: "allocation diagonal weighted by the cost c_jl",
            corrected: "allocation diagonal weighted by c_jl^2, the squared row coefficient",
            applied,
        },
        FamilyFix {
            family: "sq[rank-cost-lb]",
            literal: "cross terms of the position cost and allocation against the permutation and eta carry flipped signs",
            corrected: "all cross terms follow the symbolic square of the rank/cost row",
            applied,
        },
    ]
    .into()
}

/// Builds the spelled-out lifted program. Returns the program together
/// with the log of the four repaired families; `corrected` selects whether
/// the repairs are applied or the literal (defective) forms are kept.
///
/// Row order: contracted permutation-row, permutation-column, open-count,
/// allocation, load, monotonicity, and rank/cost rows; then the square
/// family in its traditional order (permutation columns, permutation rows,
/// open count, allocation rows, monotonicity, load, cost balance,
/// rank/cost); then the three quadratic coupling rows. `2n^2 + 11n + 3`
/// rows in all; none touch the corner or the border.
pub fn build_cp_explicit(instance: &Instance, corrected: bool) -> (ConicProgram, Vec<FamilyFix>) {
    let n = instance.n();
    let p = instance.p();
    let system = build_linear_system(instance);
    let layout = system.layout();

    // The linear system's fixed row order, addressed directly.
    let perm_col = |k: usize| system.row(k);
    let perm_row = |j: usize| system.row(n + j);
    let open_count = || system.row(2 * n);
    let assign_row = |j: usize| system.row(2 * n + 1 + j);
    let load_slack = |l: usize| system.row(3 * n + 1 + l);
    let rank_cost = |j: usize, k: usize| system.row(4 * n + 1 + j * n + k);
    let rank_monotone = |k: usize| system.row(4 * n + 1 + n * n + k);
    let cost_total = || system.row(n * n + 5 * n);
    debug_assert!(matches!(perm_col(0).label, RowLabel::PermCol { k: 0 }));
    debug_assert!(matches!(perm_row(0).label, RowLabel::PermRow { j: 0 }));
    debug_assert!(matches!(open_count().label, RowLabel::OpenCount));
    debug_assert!(matches!(assign_row(0).label, RowLabel::AssignRow { j: 0 }));
    debug_assert!(matches!(load_slack(0).label, RowLabel::LoadSlack { l: 0 }));
    debug_assert!(matches!(
        rank_cost(0, 0).label,
        RowLabel::RankCostLb { j: 0, k: 0 }
    ));
    debug_assert!(matches!(
        rank_monotone(0).label,
        RowLabel::RankMonotone { k: 0 }
    ));
    debug_assert!(matches!(cost_total().label, RowLabel::CostTotal));

    let mut equalities = Vec::with_capacity(2 * n * n + 11 * n + 3);
    let mut push = |label: String, entries: Vec<(usize, usize, f64)>, rhs: f64| {
        equalities.push(ConicEquality {
            label,
            rhs,
            coeffs: SymCoeffs::from_entries(entries),
        });
    };

    // Contracted linear rows.
    for j in 0..n {
        let row = perm_row(j);
        push(
            format!("lift[{}]", row.label),
            alpha_contraction_of(n, row.entries),
            row.rhs,
        );
    }
    for k in 0..n {
        let row = perm_col(k);
        push(
            format!("lift[{}]", row.label),
            alpha_contraction_of(n, row.entries),
            row.rhs,
        );
    }
    {
        let row = open_count();
        push(
            format!("lift[{}]", row.label),
            alpha_contraction_of(n, row.entries),
            row.rhs,
        );
    }
    for j in 0..n {
        let row = assign_row(j);
        push(
            format!("lift[{}]", row.label),
            alpha_contraction_of(n, row.entries),
            row.rhs,
        );
    }
    for l in 0..n {
        let row = load_slack(l);
        push(
            format!("lift[{}]", row.label),
            alpha_contraction_of(n, row.entries),
            row.rhs,
        );
    }
    for k in 0..n - 1 {
        let row = rank_monotone(k);
        push(
            format!("lift[{}]", row.label),
            alpha_contraction_of(n, row.entries),
            row.rhs,
        );
    }
    for j in 0..n {
        for k in 0..n {
            let row = rank_cost(j, k);
            let ents: Vec<(usize, f64)> = if corrected {
                row.entries.to_vec()
            } else {
                // Literal form flips the eta coefficient to +1.
                let eta = layout.eta(j, k);
                row.entries
                    .iter()
                    .map(|&(c, v)| if c == eta { (c, -v) } else { (c, v) })
                    .collect()
            };
            push(
                format!("lift[{}]", row.label),
                alpha_contraction_of(n, &ents),
                row.rhs,
            );
        }
    }

    // Square family.
    for k in 0..n {
        // Diagonal-only square: binary entries square to themselves, so on
        // lifts the diagonal alone reproduces the column sum.
        let mut entries = Vec::with_capacity(n);
        for j in 0..n {
            push_sym(&mut entries, layout.p(j, k), layout.p(j, k), 1.0);
        }
        push(format!("sq[perm-col[k={k}]]"), entries, 1.0);
    }
    for j in 0..n {
        let mut entries = Vec::with_capacity(n);
        for k in 0..n {
            push_sym(&mut entries, layout.p(j, k), layout.p(j, k), 1.0);
        }
        push(format!("sq[perm-row[j={j}]]"), entries, 1.0);
    }
    {
        let row = open_count();
        push(
            format!("sq[{}]", row.label),
            square_of(row.entries),
            (p * p) as f64,
        );
    }
    for j in 0..n {
        let row = assign_row(j);
        push(format!("sq[{}]", row.label), square_of(row.entries), 1.0);
    }
    for k in 0..n - 1 {
        let row = rank_monotone(k);
        let mut entries = square_of(row.entries);
        if !corrected {
            // Literal form re-pairs the -2 cross term onto the next step
            // slack: cancel -2 W_{k+1} xi_k, add -2 W_k xi_{k+1}.
            push_sym(&mut entries, layout.w(k + 1), layout.xi(k), 2.0);
            push_sym(&mut entries, layout.w(k), layout.xi(k + 1), -2.0);
        }
        push(format!("sq[{}]", row.label), entries, 0.0);
    }
    for l in 0..n {
        let row = load_slack(l);
        push(format!("sq[{}]", row.label), square_of(row.entries), 0.0);
    }
    {
        let row = cost_total();
        let mut entries = square_of(row.entries);
        if !corrected {
            // Literal form weights the allocation diagonal by c instead of
            // its square: shift each diagonal coefficient by c - c^2.
            for j in 0..n {
                for l in 0..n {
                    let c = instance.cost(j, l);
                    if c != 0.0 {
                        push_sym(&mut entries, layout.x(j, l), layout.x(j, l), c - c * c);
                    }
                }
            }
        }
        push(format!("sq[{}]", row.label), entries, 0.0);
    }
    for j in 0..n {
        let s = instance.cost_row_sum(j);
        for k in 0..n {
            let row = rank_cost(j, k);
            let mut entries = square_of(row.entries);
            if !corrected {
                // Literal form flips four cross-term groups; adding twice
                // the negated correct coefficient performs each flip.
                push_sym(&mut entries, layout.w(k), layout.p(j, k), 4.0 * s);
                push_sym(&mut entries, layout.w(k), layout.eta(j, k), 4.0);
                for l in 0..n {
                    let c = instance.cost(j, l);
                    if c != 0.0 {
                        push_sym(&mut entries, layout.p(j, k), layout.x(j, l), -4.0 * s * c);
                        push_sym(&mut entries, layout.x(j, l), layout.eta(j, k), -4.0 * c);
                    }
                }
            }
            push(format!("sq[{}]", row.label), entries, s * s);
        }
    }

    // Quadratic coupling rows.
    for k in 0..n {
        let mut entries = Vec::new();
        for l in 0..n {
            push_sym(&mut entries, layout.p(0, l), layout.w(k), 1.0);
        }
        for j in 0..n {
            for l in 0..n {
                let c = instance.cost(j, l);
                if c != 0.0 {
                    push_sym(&mut entries, layout.p(j, k), layout.x(j, l), -c);
                }
            }
        }
        push(format!("w-def[k={k}]"), entries, 0.0);
    }
    {
        let mut entries = Vec::new();
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    push_sym(&mut entries, layout.p(0, l), layout.p(j, k), 1.0);
                }
                push_sym(&mut entries, layout.p(j, k), layout.p(j, k), -1.0);
            }
        }
        push(String::from("perm-diag-sum"), entries, 0.0);
    }
    {
        let mut entries = Vec::new();
        for j in 0..n {
            for l in 0..n {
                for lp in 0..n {
                    push_sym(&mut entries, layout.p(0, lp), layout.x(j, l), 1.0);
                }
                push_sym(&mut entries, layout.x(j, l), layout.x(j, l), -1.0);
            }
        }
        push(String::from("assign-diag-sum"), entries, 0.0);
    }

    let program = ConicProgram {
        layout,
        objective: objective_default(instance),
        equalities,
        cone: ConeTag::ExactLiftVerification,
    };
    (program, fixes(corrected))
}

fn objective_default(instance: &Instance) -> SymCoeffs {
    super::program::objective_mu_coeffs(instance, 1.0).expect("finite blend weight")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::{check_lift_feasible, enumerate_feasible_triples, lift};
    use crate::qform::complete_slacks;
    use crate::testutil::{e1, greedy_triple};

    fn residual_of(program: &ConicProgram, m: &crate::lift::LiftedMatrix, label: &str) -> f64 {
        let eq = program
            .equalities
            .iter()
            .find(|eq| eq.label == label)
            .unwrap_or_else(|| panic!("no row labeled {label}"));
        eq.coeffs.eval(m) - eq.rhs
    }

    #[test]
    fn spelled_out_shape() {
        let inst = e1(1, vec![1.0; 3]);
        let (program, fixes) = build_cp_explicit(&inst, true);
        assert_eq!(program.equalities.len(), 54);
        assert_eq!(fixes.len(), 4);
        assert_eq!(program.cone, ConeTag::ExactLiftVerification);
        // No corner row and no border entries anywhere: the spelled-out
        // system works purely on the inner block.
        for eq in &program.equalities {
            assert_ne!(eq.label, "corner");
            for &(r, _, _) in eq.coeffs.entries() {
                assert!(r >= 1, "{} touches the border", eq.label);
            }
        }
        let mut labels: Vec<&str> = program
            .equalities
            .iter()
            .map(|eq| eq.label.as_str())
            .collect();
        labels.sort_unstable();
        let before = labels.len();
        labels.dedup();
        assert_eq!(labels.len(), before);
    }

    #[test]
    fn corrected_form_vanishes_on_exact_lifts() {
        for p in [1usize, 2] {
            let inst = e1(p, vec![1.0; 3]);
            let (program, fixes) = build_cp_explicit(&inst, true);
            assert!(fixes.iter().all(|f| f.applied));
            for (pm, xm, y) in enumerate_feasible_triples(&inst).unwrap() {
                let phi = complete_slacks(&inst, &pm, &xm, &y).unwrap();
                let m = lift(&phi).unwrap();
                assert_eq!(program.max_abs_residual(&m), 0.0);
            }
        }
    }

    #[test]
    fn literal_form_fails_on_a_genuine_lift() {
        let inst = e1(1, vec![1.0; 3]);
        let (literal, fixes) = build_cp_explicit(&inst, false);
        assert!(fixes.iter().all(|f| !f.applied));
        let (pm, xm, y) = greedy_triple(&inst, &[0]);
        let phi = complete_slacks(&inst, &pm, &xm, &y).unwrap();
        let m = lift(&phi).unwrap();

        // W = (0, 2, 5), xi = (2, 3, 0) at the open set {0}; the literal
        // monotonicity square at k = 0 misses by the miscoupled cross term.
        assert_eq!(residual_of(&literal, &m, "sq[rank-monotone[k=0]]"), 8.0);
        // The literal cost-balance square underweights the allocation
        // diagonal by c - c^2 at the two paid allocations (costs 2 and 5).
        assert_eq!(
            residual_of(&literal, &m, "sq[cost-total]"),
            -((4.0 - 2.0) + (25.0 - 5.0))
        );
        // The literal contracted rank/cost row gains 2 * eta_{01} = 26.
        assert_eq!(
            residual_of(&literal, &m, "lift[rank-cost-lb[j=0,k=1]]"),
            26.0
        );
        // The literal rank/cost square flips the W-eta coupling, gaining
        // 4 * W_1 * eta_{01} = 104.
        assert_eq!(
            residual_of(&literal, &m, "sq[rank-cost-lb[j=0,k=1]]"),
            104.0
        );

        let report = check_lift_feasible(&literal, &m, 1e-9).unwrap();
        assert!(!report.pass);
        let broken: Vec<&str> = report
            .families
            .iter()
            .filter(|f| f.max_abs > 1e-9)
            .map(|f| f.family.as_str())
            .collect();
        assert_eq!(broken, ["lift", "sq"]);
    }

    #[test]
    fn corrected_and_literal_agree_where_no_fix_applies() {
        let inst = e1(2, vec![1.0; 3]);
        let (corrected, _) = build_cp_explicit(&inst, true);
        let (literal, _) = build_cp_explicit(&inst, false);
        assert_eq!(corrected.equalities.len(), literal.equalities.len());
        for (a, b) in corrected.equalities.iter().zip(&literal.equalities) {
            assert_eq!(a.label, b.label);
            assert_eq!(a.rhs, b.rhs);
            let family = a.label.split('[').next().unwrap();
            let fixed_here = (family == "lift" && a.label.contains("rank-cost-lb"))
                || (family == "sq"
                    && (a.label.contains("rank-monotone")
                        || a.label.contains("cost-total")
                        || a.label.contains("rank-cost-lb")));
            if fixed_here {
                assert_ne!(a.coeffs, b.coeffs, "{} should differ", a.label);
            } else {
                assert_eq!(a.coeffs, b.coeffs, "{} should match", a.label);
            }
        }
    }

    #[test]
    fn builds_are_deterministic() {
        let inst = e1(2, vec![0.0, 1.0, 1.0]);
        let (a, fa) = build_cp_explicit(&inst, false);
        let (b, fb) = build_cp_explicit(&inst, false);
        assert_eq!(a, b);
        assert_eq!(fa, fb);
    }
}
