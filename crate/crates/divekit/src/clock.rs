use std::time::Instant;

use divekit_core::clock::{Clock, WorkClock};

/// Real elapsed time since construction.
#[derive(Debug)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        WallClock(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Which time source limits and reported times use. `Work` makes every
/// output reproducible; `Wall` measures this machine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockKind {
    #[default]
    Work,
    Wall,
}

impl ClockKind {
    pub fn start(self) -> Box<dyn Clock> {
        match self {
            ClockKind::Work => Box::new(WorkClock::default()),
            ClockKind::Wall => Box::new(WallClock::start()),
        }
    }
}
