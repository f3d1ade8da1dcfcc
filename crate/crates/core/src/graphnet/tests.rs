use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::bnb::PoolEntry;
use crate::instance::{MilpInstance, Sense};
use crate::simplex::{solve_lp, SimplexOptions};
use crate::standard::to_standard_form;

fn two_by_two() -> MilpInstance {
    // min -x0 - 2 x1  s.t.  x0 + x1 <= 1.5,  x0 - x1 >= -1,  x binary
    let mut inst = MilpInstance::new("tiny", 2);
    inst.objective = vec![-1.0, -2.0];
    inst.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.5);
    inst.add_row(vec![(0, 1.0), (1, -1.0)], Sense::Ge, -1.0);
    inst.make_binary(0);
    inst.make_binary(1);
    inst
}

fn graph_of(inst: &MilpInstance) -> BipartiteGraph {
    let root = solve_lp(&to_standard_form(inst), None, &SimplexOptions::default()).unwrap();
    extract_graph(inst, &root).unwrap()
}

#[test]
fn hand_computed_features() {
    let g = graph_of(&two_by_two());
    // LP optimum: x1 = 1, x0 = 0.5
    assert_eq!(g.edges.len(), 4);
    assert_eq!(g.candidates, vec![0, 1]);
    assert_eq!(g.domains, vec![(0, 1), (0, 1)]);
    let x0 = g.var_row(0);
    assert_eq!(&x0[..7], &[-0.5, 1.0, 1.0, 1.0, 1.0, 0.5, 0.5]);
    assert_eq!(&x0[8..10], &[0.0, 0.0]);
    assert_eq!(x0[10], 0.5); // one up-lock over degree two
    assert_eq!(x0[11], 0.5);
    assert_eq!(x0[12], 1.0);
    assert_eq!(x0[13], 1.0);
    let x1 = g.var_row(1);
    assert_eq!(x1[5], 1.0);
    assert_eq!(x1[6], 0.0);
    assert_eq!(&x1[8..10], &[0.0, 1.0]);
    let s2 = 2f64.sqrt();
    let c0 = g.cons_row(0);
    assert_eq!(&c0[..3], &[1.0, 0.0, 0.0]);
    assert!((c0[3] - 1.5 / s2).abs() < 1e-15);
    assert_eq!(c0[4], 1.0);
    assert!(c0[6].abs() < 1e-12);
    let c1 = g.cons_row(1);
    assert_eq!(&c1[..3], &[0.0, 1.0, 0.0]);
    assert!((c1[6] - (-1.0 - (0.5 - 1.0)) / s2).abs() < 1e-12);
    assert!((g.edges[3].coef + 1.0 / s2).abs() < 1e-15);
}

#[test]
fn zero_parameters_predict_one_half() {
    let g = graph_of(&two_by_two());
    let p = GnnParams::zeros(GnnDims::default());
    let pred = p.predict(&g).unwrap();
    assert!(pred.means.iter().flatten().all(|&m| m == 0.5));
    assert_eq!(predict_assignment(&pred, Strategy::Mode), vec![0, 0]);
}

#[test]
fn forward_is_permutation_equivariant() {
    let inst = two_by_two();
    let g = graph_of(&inst);
    let mut perm = g.clone();
    // swap the two variables and the two constraints
    perm.var_feats = [g.var_row(1), g.var_row(0)].concat();
    perm.cons_feats = [g.cons_row(1), g.cons_row(0)].concat();
    perm.edges = g.edges.iter().map(|e| Edge { row: 1 - e.row, col: 1 - e.col, coef: e.coef }).collect();
    let p = GnnParams::init(GnnDims::default(), 3);
    let stats = NormStats::from_batch(&[&g]);
    let a = p.logits(&g, &stats).unwrap();
    let b = p.logits(&perm, &stats).unwrap();
    let k = p.dims.heads;
    for h in 0..k {
        assert!((a[h] - b[k + h]).abs() < 1e-12);
        assert!((a[k + h] - b[h]).abs() < 1e-12);
    }
}

fn entry(x: Vec<f64>, objective: f64) -> PoolEntry {
    PoolEntry { x, objective }
}

#[test]
fn target_distribution_cases() {
    let single = target_distribution(&[entry(vec![1.0, 0.0, 0.3], -1.0)], &[0, 1], 1.0).unwrap();
    assert_eq!(single.support, vec![(vec![1, 0], 1.0)]);

    let tau = 2.0;
    let pool = [entry(vec![1.0, 0.0], 3.0), entry(vec![0.0, 1.0], 3.0 + tau * 2f64.ln())];
    let t = target_distribution(&pool, &[0, 1], tau).unwrap();
    assert!((t.support[0].1 - 2.0 / 3.0).abs() < 1e-12);
    assert!((t.support[1].1 - 1.0 / 3.0).abs() < 1e-12);

    let merged = target_distribution(&[entry(vec![1.0, 0.2], 1.0), entry(vec![1.0, 0.7], 1.0)], &[0], 1.0).unwrap();
    assert_eq!(merged.support, vec![(vec![1], 1.0)]);

    assert_eq!(target_distribution(&[], &[0], 1.0), Err(GraphError::EmptyPool));
    assert_eq!(target_distribution(&pool, &[0], 0.0), Err(GraphError::InvalidTemperature));
    assert_eq!(default_temperature(&[3.0, 7.0]), 2.5);
}

fn pred(means: Vec<Vec<f64>>, domains: Vec<(i64, i64)>) -> PredictedDistribution {
    PredictedDistribution { candidates: (0..means.len()).collect(), domains, means }
}

#[test]
fn kl_cases() {
    let matched = pred(vec![vec![0.7]], vec![(0, 1)]);
    let target = TargetDistribution { support: vec![(vec![1], 0.7), (vec![0], 0.3)] };
    assert!(kl_loss(&matched, &target).abs() < 1e-15);

    let half = pred(vec![vec![0.5]], vec![(0, 1)]);
    let point = TargetDistribution::point(vec![1]);
    assert!((kl_loss(&half, &point) - 2f64.ln()).abs() < 1e-15);

    let sure_wrong = pred(vec![vec![0.0]], vec![(0, 1)]);
    assert!((kl_loss(&sure_wrong, &point) - (-(LOG_CLAMP.ln()))).abs() < 1e-9);
}

#[test]
fn decoding_cases() {
    let p = pred(vec![vec![0.9], vec![0.2]], vec![(0, 1), (0, 1)]);
    assert_eq!(predict_assignment(&p, Strategy::Mode), vec![1, 0]);
    let bits = pred(vec![vec![0.9, 0.1, 0.8]], vec![(0, 7)]);
    assert_eq!(predict_assignment(&bits, Strategy::Mode), vec![5]);
    let clamp = pred(vec![vec![0.9, 0.9, 0.9]], vec![(0, 5)]);
    assert_eq!(predict_assignment(&clamp, Strategy::Mode), vec![5]);
    let tie = pred(vec![vec![0.5]], vec![(0, 1)]);
    assert_eq!(predict_assignment(&tie, Strategy::Mode), vec![0]);
    assert_eq!(bits_for(0, 1, 8), 1);
    assert_eq!(bits_for(0, 5, 8), 3);
    assert_eq!(bits_for(0, 7, 8), 3);
    assert_eq!(bits_for(0, 8, 8), 4);
    assert_eq!(bits_for(0, 1 << 20, 8), 8);
    assert_eq!(decode(encode(4, 2, 3), 2, 9), 4);
    assert!((bits.value_prob(0, 5) - 0.9 * 0.9 * 0.8).abs() < 1e-15);
}

#[test]
fn sampling_is_seeded() {
    let p = pred(vec![vec![0.5]; 16], vec![(0, 1); 16]);
    let a = predict_assignment(&p, Strategy::Sample(9));
    assert_eq!(a, predict_assignment(&p, Strategy::Sample(9)));
    assert!(a.iter().any(|&v| v == 1) && a.iter().any(|&v| v == 0));
}

#[test]
fn training_fits_a_toy_corpus() {
    let mut examples = Vec::new();
    for s in 0..20u64 {
        let cfg = crate::generate::GeneratorConfig::new(
            crate::generate::FamilyParams::SetCover { rows: 6, cols: 8, density: 0.3 },
            s,
        );
        let inst = crate::generate::generate(&cfg).unwrap();
        let g = graph_of(&inst);
        // a fixed pseudo-random target per instance
        let x: Vec<i64> = g.candidates.iter().map(|&j| ((j as u64 * 7 + s) % 3 == 0) as i64).collect();
        examples.push(Example { graph: g, target: TargetDistribution::point(x) });
    }
    let mut params = GnnParams::init(GnnDims::with_hidden(16), 1);
    let cfg = TrainingConfig {
        epochs: 100,
        batch_size: 5,
        adam: AdamConfig { learning_rate: 1e-2, ..AdamConfig::default() },
        ..TrainingConfig::default()
    };
    let report = train(&mut params, &examples, &[], &cfg, sequential_map).unwrap();
    let first = report.epochs[0].train_loss;
    let best = report.epochs[report.best_epoch].train_loss;
    assert!(report.epochs.iter().all(|e| e.train_loss >= 0.0));
    assert!(best <= 0.5 * first, "{first} -> {best}");
}
