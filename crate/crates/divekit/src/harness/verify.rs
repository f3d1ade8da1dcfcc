use divekit_core::bnb::{branch_and_bound, SolveConfig, SolveStatus};
use divekit_core::clock::WorkClock;
use divekit_core::generate::{generate, FamilyParams, GeneratorConfig};
use divekit_core::l2dive::verify_tightened_optimality;
use divekit_core::simplex::{check_complementary_slackness, solve_lp, LpStatus, SimplexOptions};
use divekit_core::{to_standard_form, MilpInstance};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub instances: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { instances: 20, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn tiny(k: u64, seed: u64) -> MilpInstance {
    let params = match k % 3 {
        0 => FamilyParams::SetCover { rows: 8, cols: 12, density: 0.25 },
        1 => FamilyParams::CombAuction { items: 7, bids: 12 },
        _ => FamilyParams::IndepSet { nodes: 12, affinity: 2 },
    };
    generate(&GeneratorConfig::new(params, seed.wrapping_add(k))).expect("fixed sizes are valid")
}

/// Every feasible point of a pure 0/1 instance, by enumeration.
fn feasible_points(inst: &MilpInstance) -> Vec<Vec<f64>> {
    let n = inst.num_vars();
    (0u32..1 << n)
        .map(|mask| (0..n).map(|j| f64::from(mask >> j & 1)).collect::<Vec<f64>>())
        .filter(|x| inst.is_feasible(x, 1e-9))
        .collect()
}

/// Self-checks on small generated instances: LP optimality certificates,
/// branch and bound against enumeration, and the claim that tightening the
/// root LP on the slack-violating bounds of any feasible point keeps that
/// point optimal.
pub fn verify(cfg: &VerifyConfig) -> Vec<VerifyCheck> {
    let insts: Vec<MilpInstance> = (0..cfg.instances as u64).map(|k| tiny(k, cfg.seed)).collect();
    let opts = SimplexOptions::default();

    let mut worst_dual_gap: f64 = 0.0;
    let mut worst_cs: f64 = 0.0;
    let mut worst_stat: f64 = 0.0;
    let mut lp_failures = 0;
    for inst in &insts {
        let lp = to_standard_form(inst);
        match solve_lp(&lp, None, &opts) {
            Ok(s) if s.status == LpStatus::Optimal => {
                let d = s.duals.as_ref().expect("optimal solutions carry duals");
                let full = lp.extend_point(inst, &s.x);
                worst_dual_gap = worst_dual_gap.max((d.objective(&lp.rhs, &lp.lower, &lp.upper) - s.objective).abs());
                worst_cs = worst_cs.max(check_complementary_slackness(&full, d, &lp, 1e-6).max_violation);
                worst_stat = worst_stat.max(d.stationarity_residual(&lp));
            }
            _ => lp_failures += 1,
        }
    }
    let worst = worst_dual_gap.max(worst_cs).max(worst_stat);
    let lp_check = VerifyCheck {
        name: "lp-certificates".into(),
        passed: lp_failures == 0 && worst <= 1e-6,
        detail: format!(
            "{} LPs, {lp_failures} not optimal, duality gap {worst_dual_gap:.2e}, slackness {worst_cs:.2e}, stationarity {worst_stat:.2e}",
            insts.len()
        ),
    };

    let mut mismatches = Vec::new();
    let mut prop_pairs = 0;
    let mut prop_failures = Vec::new();
    for (k, inst) in insts.iter().enumerate() {
        let points = feasible_points(inst);
        let brute = points.iter().map(|x| inst.objective_value(x)).fold(f64::INFINITY, f64::min);
        let out = branch_and_bound(inst, &SolveConfig::default(), &mut [], &WorkClock::default());
        let ok = match &out {
            Ok(o) if points.is_empty() => o.status == SolveStatus::Infeasible,
            Ok(o) => o.status == SolveStatus::OptimalProven && (o.primal_bound() - brute).abs() <= 1e-6,
            Err(_) => false,
        };
        if !ok {
            mismatches.push(k);
        }
        // a spread of feasible points, not just the first few in mask order
        let step = (points.len() / 4).max(1);
        for x in points.iter().step_by(step).take(4) {
            prop_pairs += 1;
            match verify_tightened_optimality(inst, x, &opts) {
                Ok(r) if r.holds => {}
                Ok(r) => prop_failures.push(format!("{k}: violation {:.2e}", r.max_violation)),
                Err(e) => prop_failures.push(format!("{k}: {e}")),
            }
        }
    }
    vec![
        lp_check,
        VerifyCheck {
            name: "bnb-vs-enumeration".into(),
            passed: mismatches.is_empty(),
            detail: format!("{} instances, mismatches {:?}", insts.len(), mismatches),
        },
        VerifyCheck {
            name: "tightened-lp-keeps-point-optimal".into(),
            passed: prop_failures.is_empty() && prop_pairs > 0,
            detail: format!("{prop_pairs} points, failures {:?}", prop_failures),
        },
    ]
}
