use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

/// Time source for the samplers.
pub trait Clock: Send + Sync {
    /// Seconds since the Unix epoch.
    fn now(&self) -> f64;

    /// Blocks until `t` or until `stop` is raised. Returns false if stopped.
    fn wait_until(&self, t: f64, stop: &AtomicBool) -> bool;

    /// Timestamp for a reading taken for the tick scheduled at `deadline`.
    fn stamp(&self, _deadline: f64) -> f64 {
        self.now()
    }
}

/// Wall-clock time; readings are stamped when they are taken.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

const STOP_POLL: Duration = Duration::from_millis(50);

impl Clock for SystemClock {
    fn now(&self) -> f64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
    }

    fn wait_until(&self, t: f64, stop: &AtomicBool) -> bool {
        loop {
            if stop.load(Ordering::SeqCst) {
                return false;
            }
            let left = t - self.now();
            if left <= 0.0 {
                return true;
            }
            std::thread::sleep(Duration::from_secs_f64(left).min(STOP_POLL));
        }
    }
}

/// Simulated time starting at `start`: ticks fire immediately and every
/// reading is stamped with its scheduled deadline, so runs are reproducible.
#[derive(Debug, Clone, Copy)]
pub struct SimulatedClock {
    pub start: f64,
}

impl SimulatedClock {
    pub fn new(start: f64) -> Self {
        SimulatedClock { start }
    }
}

impl Clock for SimulatedClock {
    fn now(&self) -> f64 {
        self.start
    }

    fn wait_until(&self, _t: f64, stop: &AtomicBool) -> bool {
        !stop.load(Ordering::SeqCst)
    }

    fn stamp(&self, deadline: f64) -> f64 {
        deadline
    }
}
