mod support;

use divekit_core::bnb::compute_locks;
use divekit_core::diving::{dive, scorer_by_name, DiveConfig, HEURISTIC_NAMES};
use divekit_core::generate::{generate, FamilyParams, GeneratorConfig};
use divekit_core::graphnet::{GnnDims, GnnParams, Strategy};
use divekit_core::l2dive::{verify_tightened_optimality, L2Dive};
use divekit_core::simplex::{solve_lp, SimplexOptions};
use divekit_core::{to_standard_form, MilpInstance};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tiny_instance(k: u64) -> MilpInstance {
    let params = match k % 3 {
        0 => FamilyParams::SetCover { rows: 8, cols: 12, density: 0.25 },
        1 => FamilyParams::CombAuction { items: 7, bids: 12 },
        _ => FamilyParams::IndepSet { nodes: 12, affinity: 2 },
    };
    generate(&GeneratorConfig::new(params, 500 + k)).unwrap()
}

#[test]
fn tightening_the_violated_bounds_makes_any_feasible_point_optimal() {
    let opts = SimplexOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pairs = 0;
    let mut nonempty = 0;
    for k in 0..40 {
        let inst = tiny_instance(k);
        assert!(inst.num_vars() <= 12);
        let brute = support::brute_force_binary(&inst);
        let mut points = brute.feasible_points.clone();
        points.shuffle(&mut rng);
        for x in points.iter().take(4) {
            let r = verify_tightened_optimality(&inst, x, &opts).unwrap();
            assert!(r.max_violation <= 1e-6, "instance {k}: {r:?}");
            assert!((r.restricted_objective - r.point_objective).abs() <= 1e-6, "instance {k}: {r:?}");
            assert!(r.holds);
            pairs += 1;
            nonempty += !r.tighten.is_empty() as usize;
        }
    }
    assert!(pairs >= 100, "only {pairs} pairs");
    assert!(nonempty * 2 >= pairs, "most points should need tightening, got {nonempty}/{pairs}");
}

// Any optimal primal and dual pair is complementary, so the tighten set is
// empty exactly when the point already attains the LP bound.
#[test]
fn tighten_set_is_empty_exactly_at_lp_optimal_points() {
    let opts = SimplexOptions::default();
    let mut checked = 0;
    for k in 0..30 {
        let inst = tiny_instance(k);
        let lp = to_standard_form(&inst);
        let z_lp = solve_lp(&lp, None, &opts).unwrap().objective;
        for x in support::brute_force_binary(&inst).feasible_points.iter().take(64) {
            let r = verify_tightened_optimality(&inst, x, &opts).unwrap();
            let at_bound = (r.point_objective - z_lp).abs() <= 1e-7;
            assert_eq!(r.tighten.is_empty(), at_bound, "instance {k} x={x:?}");
            checked += 1;
        }
    }
    assert!(checked >= 500);
}

#[test]
fn every_diver_returns_only_feasible_solutions() {
    let cfg = DiveConfig { d_max: 100, ..DiveConfig::default() };
    let model = GnnParams::init(GnnDims::with_hidden(16), 3);
    let mut dives = 0;
    for k in 0..25 {
        let inst = tiny_instance(k);
        let brute = support::brute_force_binary(&inst);
        let lp = to_standard_form(&inst);
        let locks = compute_locks(&inst);
        let start = solve_lp(&lp, None, &cfg.simplex).unwrap();
        let mut names: Vec<&str> = HEURISTIC_NAMES.to_vec();
        names.push("l2dive");
        for name in names {
            let mut learned;
            let mut boxed;
            let scorer: &mut dyn divekit_core::diving::Scorer = if name == "l2dive" {
                learned = L2Dive::new(&model, Strategy::Sample(k));
                &mut learned
            } else {
                boxed = scorer_by_name(name, k).unwrap();
                boxed.as_mut()
            };
            let res = dive(&inst, &lp, &locks, &start, &lp.lower, &lp.upper, &cfg, scorer).unwrap();
            dives += 1;
            assert!(res.depth_reached <= cfg.d_max);
            for (x, z) in &res.solutions {
                assert!(support::independently_feasible(&inst, x, 1e-6), "{name} on {k}");
                let z_ref: f64 = inst.objective.iter().zip(x).map(|(c, v)| c * v).sum();
                assert!((z - z_ref).abs() <= 1e-9);
                assert!(*z >= brute.optimum.unwrap() - 1e-9, "{name} on {k} beat the optimum");
            }
        }
    }
    assert!(dives >= 200, "{dives}");
}
