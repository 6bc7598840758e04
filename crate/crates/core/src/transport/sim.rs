//! In-process simulated radio link with seeded loss, corruption, delay and
//! an optional bandwidth cap.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Link, LinkError};
use crate::clock::Clock;

#[derive(Debug, Clone, PartialEq)]
pub struct SimLinkConfig {
    pub drop_probability: f64,
    pub corrupt_probability: f64,
    pub delay: Duration,
    pub rng_seed: u64,
    /// Serialization rate of the channel; `None` is unlimited.
    pub capacity_bytes_per_sec: Option<u32>,
    /// Frames that would push the transmit backlog past this many bytes
    /// are dropped. Only meaningful with a capacity.
    pub queue_limit_bytes: usize,
}

impl Default for SimLinkConfig {
    fn default() -> Self {
        Self {
            drop_probability: 0.0,
            corrupt_probability: 0.0,
            delay: Duration::ZERO,
            rng_seed: 0,
            capacity_bytes_per_sec: None,
            queue_limit_bytes: 1024,
        }
    }
}

impl SimLinkConfig {
    pub fn lossless(seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..Self::default()
        }
    }

    /// A 57600 baud telemetry radio.
    pub fn radio(seed: u64) -> Self {
        Self {
            rng_seed: seed,
            delay: Duration::from_millis(5),
            capacity_bytes_per_sec: Some(5760),
            queue_limit_bytes: 1024,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        for (name, p) in [
            ("drop_probability", self.drop_probability),
            ("corrupt_probability", self.corrupt_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(LinkError::InvalidConfig(format!(
                    "{name} {p} outside [0, 1]"
                )));
            }
        }
        if self.capacity_bytes_per_sec == Some(0) {
            return Err(LinkError::InvalidConfig("capacity must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SendOutcome {
    Queued { deliver_at_us: u64, corrupted: bool },
    Dropped,
    Congested,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ChannelCounters {
    pub sent: u64,
    pub dropped: u64,
    pub congested: u64,
    pub corrupted: u64,
    pub delivered: u64,
}

#[derive(Debug)]
struct InFlight<T> {
    deliver_at_us: u64,
    bytes: Vec<u8>,
    tag: T,
}

/// One direction of a simulated link. `T` is an out-of-band tag carried with
/// each datagram, invisible to the receiver's protocol logic.
#[derive(Debug)]
pub struct SimChannel<T = ()> {
    cfg: SimLinkConfig,
    rng: ChaCha8Rng,
    queue: VecDeque<InFlight<T>>,
    busy_until_us: u64,
    counters: ChannelCounters,
}

impl<T> SimChannel<T> {
    pub fn new(cfg: SimLinkConfig) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        Self {
            cfg,
            rng,
            queue: VecDeque::new(),
            busy_until_us: 0,
            counters: ChannelCounters::default(),
        }
    }

    pub fn config(&self) -> &SimLinkConfig {
        &self.cfg
    }

    pub fn counters(&self) -> ChannelCounters {
        self.counters
    }

    pub fn in_flight(&self) -> usize {
        self.queue.len()
    }

    pub fn send(&mut self, now_us: u64, mut bytes: Vec<u8>, tag: T) -> SendOutcome {
        self.counters.sent += 1;
        // Both draws happen for every frame so traces stay aligned across configs.
        let drop_draw: f64 = self.rng.random();
        let corrupt_draw: f64 = self.rng.random();
        if drop_draw < self.cfg.drop_probability {
            self.counters.dropped += 1;
            return SendOutcome::Dropped;
        }

        let mut depart_us = now_us;
        if let Some(cap) = self.cfg.capacity_bytes_per_sec {
            let cap = u64::from(cap);
            let start = self.busy_until_us.max(now_us);
            let backlog_bytes = (start - now_us) * cap / 1_000_000;
            if backlog_bytes as usize + bytes.len() > self.cfg.queue_limit_bytes {
                self.counters.congested += 1;
                return SendOutcome::Congested;
            }
            let tx_us = (bytes.len() as u64 * 1_000_000).div_ceil(cap);
            self.busy_until_us = start + tx_us;
            depart_us = self.busy_until_us;
        }

        let corrupted = corrupt_draw < self.cfg.corrupt_probability && !bytes.is_empty();
        if corrupted {
            let bit = self.rng.random_range(0..bytes.len() * 8);
            bytes[bit / 8] ^= 1 << (bit % 8);
            self.counters.corrupted += 1;
        }
        let deliver_at_us = depart_us + self.cfg.delay.as_micros() as u64;
        self.queue.push_back(InFlight {
            deliver_at_us,
            bytes,
            tag,
        });
        SendOutcome::Queued {
            deliver_at_us,
            corrupted,
        }
    }

    /// Datagrams due at or before `now_us`, in send order.
    pub fn poll(&mut self, now_us: u64) -> Vec<(Vec<u8>, T)> {
        let mut out = Vec::new();
        while self
            .queue
            .front()
            .is_some_and(|f| f.deliver_at_us <= now_us)
        {
            let f = self.queue.pop_front().expect("front checked");
            self.counters.delivered += 1;
            out.push((f.bytes, f.tag));
        }
        out
    }
}

/// Both directions of a simulated link.
#[derive(Debug)]
pub struct SimLink<T = ()> {
    pub forward: SimChannel<T>,
    pub backward: SimChannel<T>,
}

impl<T> SimLink<T> {
    pub fn new(cfg: SimLinkConfig) -> Result<Self, LinkError> {
        cfg.validate()?;
        let mut back = cfg.clone();
        back.rng_seed = cfg.rng_seed ^ 0x9E37_79B9_7F4A_7C15;
        Ok(Self {
            forward: SimChannel::new(cfg),
            backward: SimChannel::new(back),
        })
    }
}

struct Shared {
    link: SimLink<()>,
    closed: [bool; 2],
}

/// One end of a simulated link driven by a [`Clock`]. `recv` never blocks:
/// it returns whatever is due at the clock's current time.
pub struct SimEndpoint {
    shared: Arc<Mutex<Shared>>,
    side: usize,
    clock: Arc<dyn Clock>,
}

/// Builds a connected pair of simulated endpoints.
pub fn sim_link(
    cfg: SimLinkConfig,
    clock: Arc<dyn Clock>,
) -> Result<(SimEndpoint, SimEndpoint), LinkError> {
    let shared = Arc::new(Mutex::new(Shared {
        link: SimLink::new(cfg)?,
        closed: [false; 2],
    }));
    Ok((
        SimEndpoint {
            shared: shared.clone(),
            side: 0,
            clock: clock.clone(),
        },
        SimEndpoint {
            shared,
            side: 1,
            clock,
        },
    ))
}

impl Link for SimEndpoint {
    fn send(&mut self, bytes: &[u8]) -> Result<(), LinkError> {
        let now = self.clock.now_unix_micros();
        let mut s = self.shared.lock().expect("sim link poisoned");
        if s.closed[self.side] || s.closed[1 - self.side] {
            return Err(LinkError::Closed);
        }
        let ch = if self.side == 0 {
            &mut s.link.forward
        } else {
            &mut s.link.backward
        };
        ch.send(now, bytes.to_vec(), ());
        Ok(())
    }

    fn recv(&mut self, _timeout: Duration) -> Result<Option<Vec<u8>>, LinkError> {
        let now = self.clock.now_unix_micros();
        let mut s = self.shared.lock().expect("sim link poisoned");
        if s.closed[self.side] {
            return Err(LinkError::Closed);
        }
        let ch = if self.side == 0 {
            &mut s.link.backward
        } else {
            &mut s.link.forward
        };
        // One datagram per call; keep the rest queued.
        if let Some(f) = ch.queue.pop_front_if(|f| f.deliver_at_us <= now) {
            ch.counters.delivered += 1;
            return Ok(Some(f.bytes));
        }
        Ok(None)
    }

    fn close(&mut self) {
        if let Ok(mut s) = self.shared.lock() {
            s.closed[self.side] = true;
        }
    }
}
