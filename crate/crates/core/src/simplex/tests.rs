use super::*;
use crate::instance::{MilpInstance, Sense};
use crate::standard::{to_standard_form, CscMatrix, INF_BOUND};

fn lp_from_dense(c: &[f64], rows: &[&[f64]], b: &[f64], lo: &[f64], hi: &[f64]) -> StandardLp {
    let n = c.len();
    let mut col_start = vec![0];
    let mut row_idx = Vec::new();
    let mut vals = Vec::new();
    for j in 0..n {
        for (i, r) in rows.iter().enumerate() {
            if r[j] != 0.0 {
                row_idx.push(i);
                vals.push(r[j]);
            }
        }
        col_start.push(row_idx.len());
    }
    StandardLp {
        objective: c.to_vec(),
        matrix: CscMatrix { nrows: rows.len(), col_start, row_idx, vals },
        rhs: b.to_vec(),
        lower: lo.to_vec(),
        upper: hi.to_vec(),
        slack_start: n,
        origin: (0..n).map(crate::standard::ColumnOrigin::Var).collect(),
    }
}

fn two_var() -> StandardLp {
    lp_from_dense(&[-1.0, -2.0], &[&[1.0, 1.0]], &[1.0], &[0.0, 0.0], &[1.0, 1.0])
}

fn assert_certificate(lp: &StandardLp, sol: &LpSolution) {
    let duals = sol.duals.as_ref().unwrap();
    assert!(duals.stationarity_residual(lp) <= 1e-8);
    assert!(duals.y_lb.iter().all(|&v| v >= 0.0));
    assert!(duals.y_ub.iter().all(|&v| v <= 0.0));
    let dual_obj = duals.objective(&lp.rhs, &lp.lower, &lp.upper);
    assert!((dual_obj - sol.objective).abs() <= 1e-8 * (1.0 + sol.objective.abs()));
    assert!(check_complementary_slackness(&sol.x, duals, lp, 1e-8).holds);
    assert!(lp.max_violation(&sol.x, &lp.lower, &lp.upper) <= 1e-7);
}

#[test]
fn picks_the_better_vertex() {
    let lp = two_var();
    let sol = solve_lp(&lp, None, &SimplexOptions::default()).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.x[0] - 0.0).abs() < 1e-12 && (sol.x[1] - 1.0).abs() < 1e-12);
    assert!((sol.objective + 2.0).abs() < 1e-12);
    assert_certificate(&lp, &sol);
}

#[test]
fn zero_objective_is_optimal_at_zero() {
    let lp = lp_from_dense(&[0.0, 0.0, 0.0], &[&[1.0, 2.0, 0.0], &[0.0, 1.0, 1.0]], &[3.0, 2.0], &[0.0; 3], &[5.0; 3]);
    let sol = solve_lp(&lp, None, &SimplexOptions::default()).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert_eq!(sol.objective, 0.0);
    assert_certificate(&lp, &sol);
}

#[test]
fn empty_row_with_improving_ray_is_unbounded() {
    let lp = lp_from_dense(&[-1.0], &[&[0.0]], &[0.0], &[0.0], &[INF_BOUND]);
    let sol = solve_lp(&lp, None, &SimplexOptions::default()).unwrap();
    assert_eq!(sol.status, LpStatus::Unbounded);
}

#[test]
fn detects_infeasibility() {
    // x1 + x2 = 3 with both in [0, 1]
    let lp = lp_from_dense(&[1.0, 1.0], &[&[1.0, 1.0]], &[3.0], &[0.0, 0.0], &[1.0, 1.0]);
    let sol = solve_lp(&lp, None, &SimplexOptions::default()).unwrap();
    assert_eq!(sol.status, LpStatus::Infeasible);
}

#[test]
fn crossed_bounds_are_infeasible() {
    let lp = two_var();
    let sol = solve_lp_bounded(&lp, &[0.7, 0.0], &[0.5, 1.0], None, &SimplexOptions::default()).unwrap();
    assert_eq!(sol.status, LpStatus::Infeasible);
}

#[test]
fn slackness_fails_at_the_other_vertex() {
    let lp = two_var();
    let sol = solve_lp(&lp, None, &SimplexOptions::default()).unwrap();
    let duals = sol.duals.unwrap();
    // Whichever degenerate basis is reported, the non-optimal vertex (1, 0)
    // violates one product by exactly 1.
    let check = check_complementary_slackness(&[1.0, 0.0], &duals, &lp, 1e-9);
    assert!(!check.holds);
    assert!((check.max_violation - 1.0).abs() < 1e-12);
    // x at its lower bound with a positive lower dual contributes zero
    let at_lower = DualValues { y_b: vec![-2.0], y_lb: vec![1.0, 0.0], y_ub: vec![0.0, 0.0] };
    assert!(check_complementary_slackness(&[0.0, 1.0], &at_lower, &lp, 1e-12).holds);
}

fn beale() -> StandardLp {
    lp_from_dense(
        &[0.0, 0.0, 0.0, -0.75, 150.0, -0.02, 6.0],
        &[
            &[1.0, 0.0, 0.0, 0.25, -60.0, -0.04, 9.0],
            &[0.0, 1.0, 0.0, 0.5, -90.0, -0.02, 3.0],
            &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
        ],
        &[0.0, 0.0, 1.0],
        &[0.0; 7],
        &[INF_BOUND; 7],
    )
}

#[test]
fn beale_cycling_example_terminates() {
    let lp = beale();
    for bland_after in [0, 1, 5, 1000] {
        let opts = SimplexOptions { bland_after, ..SimplexOptions::default() };
        let sol = solve_lp(&lp, None, &opts).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 0.05).abs() < 1e-9, "bland_after={bland_after}: {}", sol.objective);
        assert_certificate(&lp, &sol);
    }
}

#[test]
fn iteration_limit_returns_basis_without_duals() {
    let lp = beale();
    let opts = SimplexOptions::default().with_iter_limit(Some(1));
    let sol = solve_lp(&lp, None, &opts).unwrap();
    assert_eq!(sol.status, LpStatus::IterationLimit);
    assert!(sol.duals.is_none());
    assert_eq!(sol.x.len(), 7);
    assert_eq!(sol.basis.set_b().len() + sol.basis.basic().iter().filter(|&&j| j >= 7).count(), 3);
}

#[test]
fn warm_start_after_tightening() {
    let mut inst = MilpInstance::new("warm", 3);
    inst.objective = vec![-3.0, -2.0, -4.0];
    inst.add_row(vec![(0, 1.0), (1, 1.0), (2, 2.0)], Sense::Le, 4.0);
    inst.add_row(vec![(0, 2.0), (2, 3.0)], Sense::Le, 5.0);
    for j in 0..3 {
        inst.upper[j] = 3.0;
    }
    let lp = to_standard_form(&inst);
    let opts = SimplexOptions::default();
    let root = solve_lp(&lp, None, &opts).unwrap();
    assert_eq!(root.status, LpStatus::Optimal);
    let mut upper = lp.upper.clone();
    upper[2] = 0.0;
    let warm = solve_lp_bounded(&lp, &lp.lower, &upper, Some(&root.basis), &opts).unwrap();
    let cold = solve_lp_bounded(&lp, &lp.lower, &upper, None, &opts).unwrap();
    assert_eq!(warm.status, LpStatus::Optimal);
    assert!((warm.objective - cold.objective).abs() < 1e-9);
    let again = solve_lp_bounded(&lp, &lp.lower, &upper, Some(&root.basis), &opts).unwrap();
    assert_eq!(again.basis, warm.basis);
    assert_eq!(again.iterations, warm.iterations);
}

#[test]
fn free_variable_stays_stationary() {
    // min x1 + x2 with x1 free, x1 - x2 = -1, x2 in [0, 2]
    let lp = lp_from_dense(&[1.0, 1.0], &[&[1.0, -1.0]], &[-1.0], &[-INF_BOUND, 0.0], &[INF_BOUND, 2.0]);
    let sol = solve_lp(&lp, None, &SimplexOptions::default()).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective + 1.0).abs() < 1e-12);
    assert_certificate(&lp, &sol);
}
