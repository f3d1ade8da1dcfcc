mod support;

use divekit_core::graphnet::{BipartiteGraph, GnnParams, NormStats, CONS_FEATURES, VAR_FEATURES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-4;
    let mut case = 0;
    let mut near_kink = 0;
    while case < 20 {
        let g = support::random_gnn_graph(&mut rng);
        let target = support::random_gnn_target(&mut rng, &g);
        let params = support::random_gnn_params(&mut rng, 8);
        let stats = NormStats::from_batch(&[&g]);
        // central differences are not an oracle across a ReLU kink
        if params.relu_margin(&g, &stats).unwrap() < 2e-3 {
            near_kink += 1;
            continue;
        }
        let (_, grad) = params.loss_and_grad(&g, &stats, &target).unwrap();
        let mut probe = params.clone();
        let mut worst: f64 = 0.0;
        for i in 0..params.theta.len() {
            let t = params.theta[i];
            probe.theta[i] = t + h;
            let up = probe.loss(&g, &stats, &target).unwrap();
            probe.theta[i] = t - h;
            let down = probe.loss(&g, &stats, &target).unwrap();
            probe.theta[i] = t;
            let fd = (up - down) / (2.0 * h);
            let rel = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1e-6);
            worst = worst.max(rel);
            assert!(rel <= 1e-4, "case {case} param {i}: analytic {} vs numeric {fd}", grad[i]);
        }
        assert!(worst.is_finite());
        case += 1;
    }
    eprintln!("gradient check: 20 pairs, {near_kink} draws skipped for ReLU margin < 2e-3");
}

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// Straight-line forward pass: per-edge messages, no shared helpers.
fn reference_logits(p: &GnnParams, g: &BipartiteGraph, s: &NormStats) -> Vec<f64> {
    let l = p.layout();
    let t = &p.theta;
    let hd = p.dims.hidden;
    let w = |r: &std::ops::Range<usize>, o: usize, i: usize, inp: usize| t[r.start + o * inp + i];
    let b = |r: &std::ops::Range<usize>, o: usize| t[r.start + o];
    let mlp = |x: &[f64], inp: usize, w1: &std::ops::Range<usize>, b1: &std::ops::Range<usize>, w2, b2| {
        let h1: Vec<f64> =
            (0..hd).map(|o| relu(b(b1, o) + (0..inp).map(|i| w(w1, o, i, inp) * x[i]).sum::<f64>())).collect();
        (0..hd).map(|o| relu(b(b2, o) + (0..hd).map(|i| w(w2, o, i, hd) * h1[i]).sum::<f64>())).collect::<Vec<f64>>()
    };
    let hv: Vec<Vec<f64>> = (0..g.num_vars)
        .map(|j| {
            let x: Vec<f64> = (0..VAR_FEATURES)
                .map(|k| {
                    let xh = (g.var_row(j)[k] - s.v_mean[k]) / (s.v_var[k] + 1e-5).sqrt();
                    t[l.bn_v_gamma.start + k] * xh + t[l.bn_v_beta.start + k]
                })
                .collect();
            mlp(&x, VAR_FEATURES, &l.ve1_w, &l.ve1_b, &l.ve2_w, &l.ve2_b)
        })
        .collect();
    let hc: Vec<Vec<f64>> = (0..g.num_cons)
        .map(|i| {
            let x: Vec<f64> = (0..CONS_FEATURES)
                .map(|k| {
                    let xh = (g.cons_row(i)[k] - s.c_mean[k]) / (s.c_var[k] + 1e-5).sqrt();
                    t[l.bn_c_gamma.start + k] * xh + t[l.bn_c_beta.start + k]
                })
                .collect();
            mlp(&x, CONS_FEATURES, &l.ce1_w, &l.ce1_b, &l.ce2_w, &l.ce2_b)
        })
        .collect();
    let conv = |cl: &divekit_core::graphnet::ConvLayout,
                src: &Vec<Vec<f64>>,
                dst: &Vec<Vec<f64>>,
                links: Vec<(usize, usize, f64)>| {
        (0..dst.len())
            .map(|d| {
                let mine: Vec<&(usize, usize, f64)> = links.iter().filter(|e| e.0 == d).collect();
                let mut agg = vec![0.0; hd];
                for &&(_, sidx, e) in &mine {
                    for o in 0..hd {
                        let msg = b(&cl.bm, o)
                            + e * t[cl.we.start + o]
                            + (0..hd).map(|i| w(&cl.wm, o, i, hd) * src[sidx][i]).sum::<f64>();
                        agg[o] += msg;
                    }
                }
                if !mine.is_empty() {
                    let sc = (mine.len() as f64).sqrt();
                    agg.iter_mut().for_each(|a| *a /= sc);
                }
                (0..hd)
                    .map(|o| relu(dst[d][o] + b(&cl.bu, o) + (0..hd).map(|i| w(&cl.u, o, i, hd) * agg[i]).sum::<f64>()))
                    .collect::<Vec<f64>>()
            })
            .collect::<Vec<Vec<f64>>>()
    };
    let hc2 = conv(&l.conv_vc, &hv, &hc, g.edges.iter().map(|e| (e.row, e.col, e.coef)).collect());
    let hv2 = conv(&l.conv_cv, &hc2, &hv, g.edges.iter().map(|e| (e.col, e.row, e.coef)).collect());
    let k = p.dims.heads;
    let mut out = Vec::new();
    for hvj in &hv2 {
        let o1: Vec<f64> = (0..hd)
            .map(|o| relu(b(&l.o1_b, o) + (0..hd).map(|i| w(&l.o1_w, o, i, hd) * hvj[i]).sum::<f64>()))
            .collect();
        for o in 0..k {
            out.push(b(&l.o2_b, o) + (0..hd).map(|i| w(&l.o2_w, o, i, hd) * o1[i]).sum::<f64>());
        }
    }
    out
}

#[test]
fn forward_matches_reference_implementation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let g = support::random_gnn_graph(&mut rng);
        let p = support::random_gnn_params(&mut rng, 64);
        let stats = NormStats::from_batch(&[&g]);
        let fast = p.logits(&g, &stats).unwrap();
        let slow = reference_logits(&p, &g, &stats);
        assert_eq!(fast.len(), slow.len());
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn full_width_gradient_spot_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let h = 1e-4;
    let (g, target, params, stats) = loop {
        let g = support::random_gnn_graph(&mut rng);
        let target = support::random_gnn_target(&mut rng, &g);
        let params = support::random_gnn_params(&mut rng, 64);
        let stats = NormStats::from_batch(&[&g]);
        if params.relu_margin(&g, &stats).unwrap() >= 2e-3 {
            break (g, target, params, stats);
        }
    };
    let (_, grad) = params.loss_and_grad(&g, &stats, &target).unwrap();
    let mut probe = params.clone();
    for _ in 0..3000 {
        let i = rng.gen_range(0..params.theta.len());
        let t = params.theta[i];
        probe.theta[i] = t + h;
        let up = probe.loss(&g, &stats, &target).unwrap();
        probe.theta[i] = t - h;
        let down = probe.loss(&g, &stats, &target).unwrap();
        probe.theta[i] = t;
        let fd = (up - down) / (2.0 * h);
        let rel = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1e-6);
        assert!(rel <= 1e-4, "param {i}: analytic {} vs numeric {fd}", grad[i]);
    }
}
