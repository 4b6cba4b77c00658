//! Time sources for budget accounting.
//!
//! `Wall` reads a monotonic clock. `Deterministic` is a node budget: time only advances
//! when work is charged to it (one unit per environment call, one per decision), so
//! every budget decision is reproducible across machines and runs.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

/// Virtual duration charged per environment call in deterministic mode.
pub const DEFAULT_UNIT_COST: Duration = Duration::from_micros(5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimingMode {
    #[default]
    Wall,
    Deterministic,
}

impl std::str::FromStr for TimingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wall" => Ok(TimingMode::Wall),
            "deterministic" => Ok(TimingMode::Deterministic),
            other => Err(format!("unknown timing mode {other:?} (wall|deterministic)")),
        }
    }
}

#[derive(Debug)]
enum Source {
    Wall(Instant),
    Virtual { units: AtomicU64, unit_cost: Duration },
}

#[derive(Debug)]
pub struct Clock {
    source: Source,
}

impl Clock {
    pub fn new(mode: TimingMode) -> Clock {
        match mode {
            TimingMode::Wall => Clock::wall(),
            TimingMode::Deterministic => Clock::virtual_with(DEFAULT_UNIT_COST),
        }
    }

    pub fn wall() -> Clock {
        Clock { source: Source::Wall(Instant::now()) }
    }

    pub fn virtual_with(unit_cost: Duration) -> Clock {
        Clock { source: Source::Virtual { units: AtomicU64::new(0), unit_cost } }
    }

    pub fn mode(&self) -> TimingMode {
        match self.source {
            Source::Wall(_) => TimingMode::Wall,
            Source::Virtual { .. } => TimingMode::Deterministic,
        }
    }

    /// Time elapsed since the clock was created.
    pub fn now(&self) -> Duration {
        match &self.source {
            Source::Wall(start) => start.elapsed(),
            Source::Virtual { units, unit_cost } => {
                Duration::from_nanos(unit_cost.as_nanos() as u64 * units.load(Ordering::Relaxed))
            }
        }
    }

    /// Records `n` units of work. No-op on a wall clock.
    pub fn charge(&self, n: u64) {
        if let Source::Virtual { units, .. } = &self.source {
            units.fetch_add(n, Ordering::Relaxed);
        }
    }

    pub fn unit_cost(&self) -> Option<Duration> {
        match &self.source {
            Source::Wall(_) => None,
            Source::Virtual { unit_cost, .. } => Some(*unit_cost),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn virtual_clock_only_moves_when_charged() {
        let c = Clock::virtual_with(Duration::from_micros(10));
        assert_eq!(c.now(), Duration::ZERO);
        c.charge(3);
        assert_eq!(c.now(), Duration::from_micros(30));
        std::thread::sleep(Duration::from_millis(2));
        assert_eq!(c.now(), Duration::from_micros(30));
    }

    #[test]
    fn wall_clock_ignores_charges() {
        let c = Clock::wall();
        c.charge(1_000_000);
        assert!(c.now() < Duration::from_secs(1));
        assert_eq!(c.mode(), TimingMode::Wall);
    }
}
