//! Time sources for solver limits.

use core::cell::Cell;

/// Elapsed-time source consulted by branch and bound.
pub trait Clock {
    /// Seconds since the solve started.
    fn elapsed(&self) -> f64;

    /// Informs the clock that `lp_iterations` simplex pivots were spent.
    fn charge(&self, _lp_iterations: usize) {}
}

/// Deterministic clock that advances only with simplex work, so limits and
/// traces do not depend on machine load.
#[derive(Debug)]
pub struct WorkClock {
    seconds_per_iteration: f64,
    spent: Cell<f64>,
}

impl WorkClock {
    pub fn new(seconds_per_iteration: f64) -> Self {
        WorkClock { seconds_per_iteration, spent: Cell::new(0.0) }
    }
}

impl Default for WorkClock {
    /// One virtual second per 10,000 pivots.
    fn default() -> Self {
        WorkClock::new(1e-4)
    }
}

impl Clock for WorkClock {
    fn elapsed(&self) -> f64 {
        self.spent.get()
    }

    fn charge(&self, lp_iterations: usize) {
        // each LP call costs at least one unit so zero-pivot resolves advance time
        self.spent.set(self.spent.get() + self.seconds_per_iteration * (lp_iterations.max(1) as f64));
    }
}
