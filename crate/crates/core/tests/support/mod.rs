//! Independent oracles shared by the integration and acceptance suites.
//! Nothing here calls into the solver paths it is used to check.
#![allow(dead_code)]

use divekit_core::graphnet::{extract_graph, BipartiteGraph, GnnDims, GnnParams, TargetDistribution};
use divekit_core::instance::{MilpInstance, Sense};
use divekit_core::simplex::{solve_lp, SimplexOptions};
use divekit_core::standard::{to_standard_form, ColumnOrigin, CscMatrix, StandardLp};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Gaussian elimination with partial pivoting on a dense square system.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())?;
        if a[p][k].abs() < 1e-10 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let l = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= l * a[k][j];
            }
            b[i] -= l * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

/// Dense copy of the constraint matrix.
pub fn dense(lp: &StandardLp) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; lp.num_cols()]; lp.num_rows()];
    for j in 0..lp.num_cols() {
        for (i, v) in lp.matrix.column(j) {
            a[i][j] = v;
        }
    }
    a
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Optimum over all basic feasible solutions of an LP with finite bounds:
/// every choice of `m` basic columns with every lower/upper assignment of the
/// rest. `None` when no basic solution is feasible.
pub fn vertex_enumeration_optimum(lp: &StandardLp) -> Option<f64> {
    let a = dense(lp);
    let (m, n) = (lp.num_rows(), lp.num_cols());
    let mut best: Option<f64> = None;
    for basis in combinations(n, m) {
        let nonbasic: Vec<usize> = (0..n).filter(|j| !basis.contains(j)).collect();
        for mask in 0u32..(1 << nonbasic.len()) {
            let mut x = vec![0.0; n];
            for (t, &j) in nonbasic.iter().enumerate() {
                x[j] = if mask >> t & 1 == 1 { lp.upper[j] } else { lp.lower[j] };
            }
            let rhs: Vec<f64> =
                (0..m).map(|i| lp.rhs[i] - nonbasic.iter().map(|&j| a[i][j] * x[j]).sum::<f64>()).collect();
            let sub: Vec<Vec<f64>> = (0..m).map(|i| basis.iter().map(|&j| a[i][j]).collect()).collect();
            let Some(xb) = gauss_solve(sub, rhs) else { continue };
            for (t, &j) in basis.iter().enumerate() {
                x[j] = xb[t];
            }
            if (0..n).all(|j| x[j] >= lp.lower[j] - 1e-9 && x[j] <= lp.upper[j] + 1e-9) {
                let z: f64 = (0..n).map(|j| lp.objective[j] * x[j]).sum();
                best = Some(best.map_or(z, |b: f64| b.min(z)));
            }
        }
    }
    best
}

/// Random feasible LP with finite bounds, `n` columns and `m <= n` rows.
pub fn random_bounded_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> StandardLp {
    let mut a = vec![vec![0.0; n]; m];
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            if rng.gen_bool(0.8) {
                *v = (rng.gen_range(-10i32..=10) as f64) / 2.0;
            }
        }
    }
    let lower: Vec<f64> = (0..n).map(|_| -(rng.gen_range(0..=3) as f64)).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + rng.gen_range(1..=4) as f64 * 0.5).collect();
    let x0: Vec<f64> = (0..n).map(|j| rng.gen_range(lower[j]..=upper[j])).collect();
    let rhs: Vec<f64> = a.iter().map(|row| row.iter().zip(&x0).map(|(a, x)| a * x).sum()).collect();
    let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-5i32..=5) as f64).collect();
    let mut col_start = vec![0];
    let mut row_idx = Vec::new();
    let mut vals = Vec::new();
    for j in 0..n {
        for (i, row) in a.iter().enumerate() {
            if row[j] != 0.0 {
                row_idx.push(i);
                vals.push(row[j]);
            }
        }
        col_start.push(row_idx.len());
    }
    StandardLp {
        objective,
        matrix: CscMatrix { nrows: m, col_start, row_idx, vals },
        rhs,
        lower,
        upper,
        slack_start: n,
        origin: (0..n).map(ColumnOrigin::Var).collect(),
    }
}

/// Feasibility of `x` for the original instance, written without the
/// library's own checker.
pub fn independently_feasible(inst: &MilpInstance, x: &[f64], tol: f64) -> bool {
    if x.len() != inst.objective.len() {
        return false;
    }
    for j in 0..x.len() {
        if !(x[j] >= inst.lower[j] - tol && x[j] <= inst.upper[j] + tol) {
            return false;
        }
    }
    for &j in &inst.integers {
        if (x[j] - x[j].round()).abs() > tol {
            return false;
        }
    }
    for (i, row) in inst.rows.iter().enumerate() {
        let act: f64 = row.iter().map(|&(j, a)| a * x[j]).sum();
        let ok = match inst.sense[i] {
            Sense::Le => act <= inst.rhs[i] + tol,
            Sense::Ge => act >= inst.rhs[i] - tol,
            Sense::Eq => (act - inst.rhs[i]).abs() <= tol,
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Exhaustive search over a pure 0/1 instance (every variable binary).
/// Returns the optimum and every optimal assignment, in increasing bitmask
/// order.
pub struct BruteForce {
    pub optimum: Option<f64>,
    pub optimal_points: Vec<Vec<f64>>,
    pub feasible_points: Vec<Vec<f64>>,
}

pub fn brute_force_binary(inst: &MilpInstance) -> BruteForce {
    let n = inst.objective.len();
    assert!(n <= 22, "too many variables for brute force");
    assert!((0..n).all(|j| inst.lower[j] == 0.0 && inst.upper[j] == 1.0 && inst.integers.contains(&j)));
    let mut optimum: Option<f64> = None;
    let mut optimal_points = Vec::new();
    let mut feasible_points = Vec::new();
    for mask in 0u64..(1 << n) {
        let x: Vec<f64> = (0..n).map(|j| (mask >> j & 1) as f64).collect();
        if !independently_feasible(inst, &x, 1e-9) {
            continue;
        }
        let z: f64 = inst.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        match optimum {
            Some(best) if z > best + 1e-9 => {}
            Some(best) if (z - best).abs() <= 1e-9 => optimal_points.push(x.clone()),
            _ => {
                optimum = Some(z);
                optimal_points = vec![x.clone()];
            }
        }
        feasible_points.push(x);
    }
    BruteForce { optimum, optimal_points, feasible_points }
}

/// Three binaries plus one general integer in [0, 5], packed into random
/// `<=` rows with positive right-hand sides.
pub fn random_gnn_graph(rng: &mut ChaCha8Rng) -> BipartiteGraph {
    let n = 4;
    let mut inst = MilpInstance::new("g", n);
    inst.objective = (0..n).map(|_| rng.gen_range(-3.0..1.0)).collect();
    for _ in 0..3 {
        let mut row = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                row.push((j, rng.gen_range(0.2..2.0)));
            }
        }
        if !row.is_empty() {
            inst.add_row(row, Sense::Le, rng.gen_range(1.0..4.0));
        }
    }
    for j in 0..3 {
        inst.make_binary(j);
    }
    inst.upper[3] = 5.0;
    inst.make_integer(3, true);
    let root = solve_lp(&to_standard_form(&inst), None, &SimplexOptions::default()).unwrap();
    extract_graph(&inst, &root).unwrap()
}

pub fn random_gnn_target(rng: &mut ChaCha8Rng, g: &BipartiteGraph) -> TargetDistribution {
    let k = rng.gen_range(1..=3);
    let mut support: Vec<(Vec<i64>, f64)> = (0..k)
        .map(|_| (g.domains.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect(), rng.gen_range(0.1..1.0)))
        .collect();
    let total: f64 = support.iter().map(|s| s.1).sum();
    support.iter_mut().for_each(|s| s.1 /= total);
    TargetDistribution { support }
}

pub fn random_gnn_params(rng: &mut ChaCha8Rng, hidden: usize) -> GnnParams {
    let mut p = GnnParams::init(GnnDims::with_hidden(hidden), rng.gen());
    p.theta.iter_mut().for_each(|t| *t += rng.gen_range(-0.1..0.1));
    p
}
