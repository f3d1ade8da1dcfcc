mod support;

use divekit_core::simplex::{check_complementary_slackness, solve_lp, LpStatus, SimplexOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let opts = SimplexOptions::default();
    for case in 0..250 {
        let n = rng.gen_range(2..=10);
        let m = rng.gen_range(1..=n.min(6));
        let lp = support::random_bounded_lp(&mut rng, n, m);
        let Some(expected) = support::vertex_enumeration_optimum(&lp) else {
            continue;
        };
        let sol = solve_lp(&lp, None, &opts).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
        assert!((sol.objective - expected).abs() <= 1e-6, "case {case}: {} vs {expected}", sol.objective);
        let duals = sol.duals.as_ref().unwrap();
        let dual_obj = duals.objective(&lp.rhs, &lp.lower, &lp.upper);
        assert!((dual_obj - sol.objective).abs() <= 1e-8 * (1.0 + sol.objective.abs()), "case {case}");
        assert!(duals.stationarity_residual(&lp) <= 1e-8, "case {case}");
        assert!(check_complementary_slackness(&sol.x, duals, &lp, 1e-8).holds, "case {case}");
    }
}

#[test]
fn solves_are_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lp = support::random_bounded_lp(&mut rng, 10, 6);
    let opts = SimplexOptions::default();
    let a = solve_lp(&lp, None, &opts).unwrap();
    let b = solve_lp(&lp, None, &opts).unwrap();
    assert_eq!(a, b);
}
