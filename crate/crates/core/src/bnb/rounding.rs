use alloc::vec::Vec;

use crate::instance::{MilpInstance, Sense};
use crate::num;

/// Number of rows that can become violated when a variable moves up or down.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Locks {
    pub up: usize,
    pub down: usize,
}

pub fn compute_locks(inst: &MilpInstance) -> Vec<Locks> {
    let mut locks = alloc::vec![Locks::default(); inst.num_vars()];
    for (i, row) in inst.rows.iter().enumerate() {
        for &(j, a) in row {
            if a == 0.0 {
                continue;
            }
            let (up, down) = match (inst.sense[i], a > 0.0) {
                (Sense::Eq, _) => (true, true),
                (Sense::Le, true) | (Sense::Ge, false) => (true, false),
                (Sense::Le, false) | (Sense::Ge, true) => (false, true),
            };
            locks[j].up += up as usize;
            locks[j].down += down as usize;
        }
    }
    locks
}

/// Tries to turn an LP point into a feasible integral one: the point itself
/// when already integral, then lock-free rounding, then nearest-integer
/// rounding. Each attempt is checked against the original instance.
pub fn round_solution(x: &[f64], inst: &MilpInstance, locks: &[Locks], tol: f64) -> Option<Vec<f64>> {
    let n = inst.num_vars();
    let x = &x[..n];
    let fractional: Vec<usize> = inst.integers.iter().copied().filter(|&j| !num::is_integral(x[j], tol)).collect();

    let snapped = |mut v: Vec<f64>| {
        for &j in &inst.integers {
            v[j] = num::round(v[j]);
        }
        v
    };

    if fractional.is_empty() {
        let cand = snapped(x.to_vec());
        return inst.is_feasible(&cand, tol).then_some(cand);
    }

    let mut lock_rounded = x.to_vec();
    let lock_free = fractional.iter().all(|&j| {
        if locks[j].down == 0 {
            lock_rounded[j] = num::floor(x[j]);
            true
        } else if locks[j].up == 0 {
            lock_rounded[j] = num::ceil(x[j]);
            true
        } else {
            false
        }
    });
    if lock_free {
        let cand = snapped(lock_rounded);
        if inst.is_feasible(&cand, tol) {
            return Some(cand);
        }
    }

    let nearest: Vec<f64> =
        (0..n).map(|j| if fractional.contains(&j) { num::floor(x[j] + 0.5) } else { x[j] }).collect();
    let cand = snapped(nearest);
    inst.is_feasible(&cand, tol).then_some(cand)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn lock_counts_follow_row_senses() {
        let mut inst = MilpInstance::new("locks", 3);
        inst.add_row(vec![(0, 1.0), (1, -2.0)], Sense::Le, 1.0);
        inst.add_row(vec![(1, 1.0), (2, 3.0)], Sense::Eq, 1.0);
        inst.add_row(vec![(2, 1.0)], Sense::Eq, 0.0);
        let locks = compute_locks(&inst);
        assert_eq!(locks[0], Locks { up: 1, down: 0 });
        assert_eq!(locks[1], Locks { up: 1, down: 2 });
        assert_eq!(locks[2], Locks { up: 2, down: 2 });
    }

    #[test]
    fn integral_point_is_returned_unchanged() {
        let mut inst = MilpInstance::new("int", 2);
        inst.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.0);
        inst.make_binary(0);
        inst.make_binary(1);
        let locks = compute_locks(&inst);
        assert_eq!(round_solution(&[1.0, 0.0], &inst, &locks, 1e-6), Some(vec![1.0, 0.0]));
    }

    #[test]
    fn rounds_down_when_down_lock_free() {
        let mut inst = MilpInstance::new("down", 2);
        inst.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.5);
        inst.make_binary(0);
        inst.upper[1] = 1.0;
        let locks = compute_locks(&inst);
        assert_eq!(locks[0].down, 0);
        let r = round_solution(&[0.6, 0.9], &inst, &locks, 1e-6).unwrap();
        assert_eq!(r, vec![0.0, 0.9]);
    }

    #[test]
    fn equality_blocking_both_roundings_gives_none() {
        // x1 + x2 = 1 plus x1 - x2 = 0: no binary point satisfies both
        let mut inst = MilpInstance::new("none", 2);
        inst.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.0);
        inst.add_row(vec![(0, 1.0), (1, -1.0)], Sense::Eq, 0.0);
        inst.make_binary(0);
        inst.make_binary(1);
        let locks = compute_locks(&inst);
        for x0 in [0.0, 1.0] {
            for x1 in [0.0, 1.0] {
                assert!(!inst.is_feasible(&[x0, x1], 1e-9));
            }
        }
        assert_eq!(round_solution(&[0.5, 0.5], &inst, &locks, 1e-6), None);
    }
}
