//! Per-core hardware counters via `perf_event_open(2)`.

use std::collections::HashMap;

use super::{Source, SourceError};

const PERF_TYPE_HARDWARE: u32 = 0;
const PERF_COUNT_HW_CPU_CYCLES: u64 = 0;
const PERF_COUNT_HW_INSTRUCTIONS: u64 = 1;
const PERF_ATTR_SIZE_VER0: u32 = 64;

/// The first 64 bytes of `struct perf_event_attr`; the kernel accepts this
/// size and zero-fills the rest.
#[repr(C)]
#[derive(Default)]
struct PerfEventAttr {
    type_: u32,
    size: u32,
    config: u64,
    sample_period: u64,
    sample_type: u64,
    read_format: u64,
    flags: u64,
    wakeup_events: u32,
    bp_type: u32,
    config1: u64,
}

struct Counter(libc::c_int);

impl Drop for Counter {
    fn drop(&mut self) {
        // SAFETY: the descriptor came from perf_event_open and is closed once.
        unsafe { libc::close(self.0) };
    }
}

/// Opens counters lazily on first read and keeps them for the agent's life.
pub struct PerfSource {
    open: HashMap<(u32, String), Counter>,
}

impl Default for PerfSource {
    fn default() -> Self {
        Self::new()
    }
}

impl PerfSource {
    pub fn new() -> Self {
        PerfSource { open: HashMap::new() }
    }

    fn open_counter(counter: &str, core: u32) -> Result<Counter, SourceError> {
        let err = |reason: String| SourceError::Perf { counter: counter.into(), core, reason };
        let config = match counter {
            "cycle" => PERF_COUNT_HW_CPU_CYCLES,
            "instret" => PERF_COUNT_HW_INSTRUCTIONS,
            _ => return Err(SourceError::Unsupported(counter.into())),
        };
        let attr = PerfEventAttr { type_: PERF_TYPE_HARDWARE, size: PERF_ATTR_SIZE_VER0, config, ..Default::default() };
        // SAFETY: attr is a valid, fully initialised VER0 attribute block that
        // outlives the call; pid -1 with a concrete cpu counts all tasks on it.
        let fd = unsafe {
            libc::syscall(
                libc::SYS_perf_event_open,
                &attr as *const PerfEventAttr,
                -1 as libc::pid_t,
                core as libc::c_int,
                -1 as libc::c_int,
                0 as libc::c_ulong,
            )
        };
        if fd < 0 {
            return Err(err(std::io::Error::last_os_error().to_string()));
        }
        Ok(Counter(fd as libc::c_int))
    }
}

impl Source for PerfSource {
    fn read(&mut self, metric: &str, core: Option<u32>, _now: f64) -> Result<f64, SourceError> {
        let core = core.ok_or_else(|| SourceError::Unsupported(format!("{metric} without a core")))?;
        let key = (core, metric.to_string());
        if !self.open.contains_key(&key) {
            let c = Self::open_counter(metric, core)?;
            self.open.insert(key.clone(), c);
        }
        let fd = self.open[&key].0;
        let mut value: u64 = 0;
        // SAFETY: reading 8 bytes into a u64 we own.
        let n = unsafe { libc::read(fd, &mut value as *mut u64 as *mut libc::c_void, 8) };
        if n != 8 {
            let reason = std::io::Error::last_os_error().to_string();
            self.open.remove(&key);
            return Err(SourceError::Perf { counter: metric.into(), core, reason });
        }
        Ok(value as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attr_layout_matches_ver0() {
        assert_eq!(std::mem::size_of::<PerfEventAttr>(), PERF_ATTR_SIZE_VER0 as usize);
    }

    #[test]
    fn unknown_counter_and_missing_core() {
        let mut s = PerfSource::new();
        assert!(matches!(s.read("hpm7", Some(0), 0.0), Err(SourceError::Unsupported(_))));
        assert!(matches!(s.read("cycle", None, 0.0), Err(SourceError::Unsupported(_))));
    }

    #[test]
    fn cycles_are_monotone_when_available() {
        // Containers commonly forbid perf; then the error must be a clean SourceError.
        let mut s = PerfSource::new();
        match s.read("cycle", Some(0), 0.0) {
            Ok(a) => {
                let b = s.read("cycle", Some(0), 0.0).unwrap();
                assert!(b >= a);
            }
            Err(e) => assert!(matches!(e, SourceError::Perf { .. }), "{e}"),
        }
    }
}
