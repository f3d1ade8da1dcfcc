use divekit_core::bnb::{branch_and_bound, PoolEntry, SolutionPool, SolveConfig};
use divekit_core::clock::WorkClock;
use divekit_core::generate::{generate, FamilyParams, GeneratorConfig};
use divekit_core::graphnet::{bits_for, decode, encode, target_distribution};
use divekit_core::l2dive::compute_tighten_set;
use divekit_core::metrics::primal_dual_gap;
use divekit_core::simplex::DualValues;
use proptest::prelude::*;

fn entries() -> impl Strategy<Value = Vec<(Vec<f64>, f64)>> {
    prop::collection::vec((prop::collection::vec(0u8..2, 4), -20i32..20), 0..40)
        .prop_map(|v| v.into_iter().map(|(x, z)| (x.into_iter().map(f64::from).collect(), z as f64)).collect())
}

proptest! {
    #[test]
    fn pool_is_sorted_bounded_and_unique(items in entries(), cap in 1usize..8) {
        let mut pool = SolutionPool::new(cap, vec![0, 1, 2, 3]);
        for (x, z) in &items {
            pool.insert(x.clone(), *z);
        }
        let e = pool.entries();
        prop_assert!(e.len() <= cap);
        prop_assert!(e.windows(2).all(|w| w[0].objective <= w[1].objective));
        let mut keys: Vec<_> = e.iter().map(|p| pool.key(&p.x)).collect();
        keys.sort();
        keys.dedup();
        prop_assert_eq!(keys.len(), e.len());
        let min = items.iter().map(|i| i.1).fold(f64::INFINITY, f64::min);
        if let Some(b) = pool.best() {
            prop_assert_eq!(b.objective, min);
        } else {
            prop_assert!(items.is_empty());
        }
    }

    #[test]
    fn encoding_round_trips_inside_the_domain(lo in -50i64..50, width in 0i64..300, off in 0i64..300) {
        let hi = lo + width;
        let v = lo + off.min(width);
        let bits = bits_for(lo, hi, 16);
        prop_assert_eq!(decode(encode(v, lo, bits), lo, hi), v);
    }

    #[test]
    fn target_is_a_distribution(items in entries(), tau in 0.05f64..20.0) {
        prop_assume!(!items.is_empty());
        let pool: Vec<PoolEntry> = items.iter().map(|(x, z)| PoolEntry { x: x.clone(), objective: *z }).collect();
        let t = target_distribution(&pool, &[0, 1, 2, 3], tau).unwrap();
        let total: f64 = t.support.iter().map(|s| s.1).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(t.support.iter().all(|s| s.1 > 0.0));
    }

    #[test]
    fn gap_is_a_fraction(p in -1e4f64..1e4, d in -1e4f64..1e4) {
        let g = primal_dual_gap(p.max(d), d.min(p));
        prop_assert!((0.0..=1.0).contains(&g));
    }

    #[test]
    fn tighten_set_matches_the_slackness_products(
        vals in prop::collection::vec(0i32..4, 6),
        lb in prop::collection::vec(0.0f64..2.0, 6),
        ub in prop::collection::vec(-2.0f64..0.0, 6),
    ) {
        let lower = vec![0.0; 6];
        let upper = vec![3.0; 6];
        let v: Vec<f64> = vals.iter().map(|&a| f64::from(a)).collect();
        let d = DualValues { y_b: vec![], y_lb: lb.clone(), y_ub: ub.clone() };
        let idx: Vec<usize> = (0..6).collect();
        let set = compute_tighten_set(&idx, &v, Some(&d), &lower, &upper, 1e-7).unwrap();
        for j in 0..6 {
            prop_assert_eq!(set.lower.contains(&j), v[j] * lb[j] > 1e-7);
            prop_assert_eq!(set.upper.contains(&j), (v[j] - 3.0) * ub[j] > 1e-7);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_is_monotone_and_bounds_never_cross(seed in 0u64..1000, nodes in 1usize..40) {
        let inst = generate(&GeneratorConfig::new(FamilyParams::SetCover { rows: 15, cols: 25, density: 0.15 }, seed)).unwrap();
        let cfg = SolveConfig { node_limit: nodes, ..SolveConfig::default() };
        let out = branch_and_bound(&inst, &cfg, &mut [], &WorkClock::default()).unwrap();
        let pts = &out.trace.points;
        for w in pts.windows(2) {
            prop_assert!(w[0].t <= w[1].t);
            prop_assert!(w[1].primal <= w[0].primal);
            prop_assert!(w[1].dual >= w[0].dual);
        }
        prop_assert!(pts.iter().all(|p| p.dual <= p.primal));
        for e in out.pool.entries() {
            prop_assert!(inst.is_feasible(&e.x, 1e-6));
        }
    }
}
