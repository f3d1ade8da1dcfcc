//! Solver-quality measures: primal-dual gap, its integral over time, and
//! the unnormalized primal gap.

use crate::bnb::SolveTrace;

/// `(primal - dual) / max(|primal|, |dual|)` when `0 < primal * dual < inf`,
/// otherwise 1. Equal bounds give 0 only when that guard holds, so two zero
/// bounds still count as a gap of 1.
pub fn primal_dual_gap(primal: f64, dual: f64) -> f64 {
    let product = primal * dual;
    if product > 0.0 && product.is_finite() {
        (primal - dual) / primal.abs().max(dual.abs())
    } else {
        1.0
    }
}

/// Integral over `[0, horizon]` of the step function given by the trace.
/// The gap is 1 until the first trace point and changes only at points.
pub fn primal_dual_integral(trace: &SolveTrace, horizon: f64) -> f64 {
    let mut total = 0.0;
    let mut t_prev = 0.0;
    let mut gap = 1.0;
    for p in &trace.points {
        let t = p.t.clamp(0.0, horizon);
        total += gap * (t - t_prev);
        t_prev = t;
        gap = primal_dual_gap(p.primal, p.dual);
        if p.t >= horizon {
            break;
        }
    }
    total + gap * (horizon - t_prev)
}

/// `found - best`, deliberately not normalized. A missing solution is
/// passed as `+inf` and stays `+inf`.
pub fn primal_gap(found: f64, best: f64) -> f64 {
    found - best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnb::TracePoint;
    use alloc::vec;

    fn trace(points: &[(f64, f64, f64)]) -> SolveTrace {
        SolveTrace { points: points.iter().map(|&(t, primal, dual)| TracePoint { t, primal, dual }).collect() }
    }

    #[test]
    fn gap_cases() {
        assert_eq!(primal_dual_gap(5.0, 5.0), 0.0);
        assert_eq!(primal_dual_gap(2.0, 1.0), 0.5);
        assert_eq!(primal_dual_gap(1.0, -1.0), 1.0);
        assert_eq!(primal_dual_gap(0.0, 0.0), 1.0);
        assert_eq!(primal_dual_gap(f64::INFINITY, 3.0), 1.0);
        assert_eq!(primal_dual_gap(-4.0, -8.0), 0.5);
    }

    #[test]
    fn integral_cases() {
        assert_eq!(primal_dual_integral(&trace(&[(2.0, 2.0, 1.0)]), 4.0), 3.0);
        assert_eq!(primal_dual_integral(&trace(&[(0.0, 5.0, 5.0)]), 7.0), 0.0);
        assert_eq!(primal_dual_integral(&SolveTrace { points: vec![] }, 10.0), 10.0);
        // events after the horizon are ignored
        assert_eq!(primal_dual_integral(&trace(&[(1.0, 2.0, 1.0), (9.0, 1.0, 1.0)]), 3.0), 2.0);
    }

    #[test]
    fn primal_gap_is_a_plain_difference() {
        assert_eq!(primal_gap(-7.0, -7.0), 0.0);
        assert_eq!(primal_gap(-4.0, -7.0), 3.0);
        assert_eq!(primal_gap(f64::INFINITY, -7.0), f64::INFINITY);
    }
}
