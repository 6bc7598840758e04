//! Wall-clock and simulated time sources.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

/// Microseconds since the Unix epoch.
pub trait Clock: Send + Sync {
    fn now_unix_micros(&self) -> u64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_unix_micros(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_micros() as u64)
            .unwrap_or(0)
    }
}

/// A clock that only moves when told to. Clones share the same time.
#[derive(Debug, Clone, Default)]
pub struct ManualClock {
    micros: Arc<AtomicU64>,
}

impl ManualClock {
    pub fn new(unix_micros: u64) -> Self {
        Self {
            micros: Arc::new(AtomicU64::new(unix_micros)),
        }
    }

    pub fn set(&self, unix_micros: u64) {
        self.micros.store(unix_micros, Ordering::SeqCst);
    }

    pub fn advance(&self, micros: u64) {
        self.micros.fetch_add(micros, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_unix_micros(&self) -> u64 {
        self.micros.load(Ordering::SeqCst)
    }
}

/// 2026-01-01T00:00:00Z, the default start of simulated sessions.
pub const SIM_START_UNIX_MICROS: u64 = 1_767_225_600_000_000;
