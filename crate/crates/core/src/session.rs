//! Deterministic lock-step run of one vehicle and one ground station over
//! a simulated link, with an optional man-in-the-middle hook.
//!
//! Each tick: deliver due datagrams (downlink, then uplink), step the
//! vehicle, poll the GCS, let the tap inject, then push both outboxes
//! through the tap into the link.

use std::sync::Arc;

use crate::clock::{ManualClock, SIM_START_UNIX_MICROS};
use crate::endpoint::{Disposition, Received};
use crate::gcs::{Gcs, GcsConfig};
use crate::signing::{SecretKey, SigningContext};
use crate::transport::{CaptureRecord, Direction, LinkError, SimLink, SimLinkConfig};
use crate::vehicle::{Autopilot, AutopilotConfig, GeoPoint, VehicleState};

/// Who put a datagram on the link. Carried out of band; endpoints never
/// see it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Vehicle,
    Gcs,
    Attacker,
}

/// Hook with full read/write access to the link.
pub trait Tap {
    /// Datagrams to inject this tick. Called before legitimate traffic.
    fn inject(&mut self, _now_us: u64) -> Vec<(Direction, Vec<u8>)> {
        Vec::new()
    }

    /// Sees each legitimate datagram before it enters the link and decides
    /// what is actually sent.
    fn intercept(
        &mut self,
        _now_us: u64,
        _dir: Direction,
        bytes: Vec<u8>,
        origin: Origin,
    ) -> Vec<(Vec<u8>, Origin)> {
        vec![(bytes, origin)]
    }
}

/// A tap that changes nothing.
#[derive(Debug, Default, Clone, Copy)]
pub struct PassThrough;

impl Tap for PassThrough {}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AttackerTally {
    /// Attacker datagrams handed to the link.
    pub injected: u64,
    /// Attacker frames accepted by the receiving endpoint.
    pub accepted_by_vehicle: u64,
    pub accepted_by_gcs: u64,
    pub rejected: u64,
    pub crc_bad: u64,
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub link: SimLinkConfig,
    pub key: Option<SecretKey>,
    pub start_unix_us: u64,
    pub home: GeoPoint,
    pub vehicle: AutopilotConfig,
    pub gcs: GcsConfig,
    pub capture: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            link: SimLinkConfig::lossless(0),
            key: None,
            start_unix_us: SIM_START_UNIX_MICROS,
            home: GeoPoint::new(24.68773, 46.72185, 612.0),
            vehicle: AutopilotConfig::default(),
            gcs: GcsConfig::default(),
            capture: false,
        }
    }
}

pub struct Session {
    clock: ManualClock,
    pub vehicle: Autopilot,
    pub gcs: Gcs,
    /// `forward` carries GCS -> vehicle, `backward` vehicle -> GCS.
    pub link: SimLink<Origin>,
    start_us: u64,
    now_us: u64,
    tick_us: u64,
    tally: AttackerTally,
    capture: Option<Vec<CaptureRecord>>,
}

impl Session {
    pub fn new(cfg: SessionConfig) -> Result<Self, LinkError> {
        let clock = ManualClock::new(cfg.start_unix_us);
        let shared: Arc<ManualClock> = Arc::new(clock.clone());
        let signer = |key: &Option<SecretKey>| {
            key.as_ref()
                .map(|k| SigningContext::new(k.clone(), shared.clone()))
        };
        let tick_us = 1_000_000 / u64::from(cfg.vehicle.params.tick_hz.max(1));
        let vehicle = Autopilot::new(
            cfg.vehicle.clone(),
            VehicleState::on_ground(cfg.home),
            signer(&cfg.key),
            cfg.start_unix_us,
        );
        let gcs = Gcs::new(cfg.gcs.clone(), signer(&cfg.key));
        Ok(Self {
            clock,
            vehicle,
            gcs,
            link: SimLink::new(cfg.link)?,
            start_us: cfg.start_unix_us,
            now_us: cfg.start_unix_us,
            tick_us,
            tally: AttackerTally::default(),
            capture: cfg.capture.then(Vec::new),
        })
    }

    pub fn clock(&self) -> &ManualClock {
        &self.clock
    }

    pub fn now_us(&self) -> u64 {
        self.now_us
    }

    pub fn elapsed_s(&self) -> f64 {
        (self.now_us - self.start_us) as f64 / 1e6
    }

    pub fn tally(&self) -> AttackerTally {
        self.tally
    }

    pub fn take_capture(&mut self) -> Vec<CaptureRecord> {
        self.capture
            .as_mut()
            .map(std::mem::take)
            .unwrap_or_default()
    }

    fn account(&mut self, origin: Origin, dir: Direction, rx: &[Received]) {
        if origin != Origin::Attacker {
            return;
        }
        for r in rx {
            match r.disposition {
                Disposition::Accepted { .. } => match dir {
                    Direction::ToVehicle => self.tally.accepted_by_vehicle += 1,
                    Direction::ToGcs => self.tally.accepted_by_gcs += 1,
                },
                Disposition::Rejected(_) => self.tally.rejected += 1,
                Disposition::CrcBad => self.tally.crc_bad += 1,
                Disposition::Undecodable => {}
            }
        }
    }

    fn send(&mut self, dir: Direction, bytes: Vec<u8>, origin: Origin) {
        if origin == Origin::Attacker {
            self.tally.injected += 1;
        }
        if let Some(cap) = self.capture.as_mut() {
            cap.push(CaptureRecord {
                timestamp_us: self.now_us,
                direction: dir,
                frame: bytes.clone(),
            });
        }
        let ch = match dir {
            Direction::ToVehicle => &mut self.link.forward,
            Direction::ToGcs => &mut self.link.backward,
        };
        ch.send(self.now_us, bytes, origin);
    }

    /// Advances one tick.
    pub fn step(&mut self, tap: &mut dyn Tap) {
        self.now_us += self.tick_us;
        let now = self.now_us;
        self.clock.set(now);

        for (bytes, origin) in self.link.backward.poll(now) {
            let rx = self.gcs.receive_datagram(&bytes, now);
            self.account(origin, Direction::ToGcs, &rx);
        }
        for (bytes, origin) in self.link.forward.poll(now) {
            let rx = self.vehicle.receive_datagram(&bytes, now);
            self.account(origin, Direction::ToVehicle, &rx);
        }

        self.vehicle.step(now);
        self.gcs.poll(now);

        for (dir, bytes) in tap.inject(now) {
            self.send(dir, bytes, Origin::Attacker);
        }
        for bytes in self.vehicle.take_outbox() {
            for (b, o) in tap.intercept(now, Direction::ToGcs, bytes, Origin::Vehicle) {
                self.send(Direction::ToGcs, b, o);
            }
        }
        for bytes in self.gcs.take_outbox() {
            for (b, o) in tap.intercept(now, Direction::ToVehicle, bytes, Origin::Gcs) {
                self.send(Direction::ToVehicle, b, o);
            }
        }
    }

    /// Steps until `seconds` of simulated time have passed.
    pub fn run_for(&mut self, seconds: f64, tap: &mut dyn Tap) {
        let end = self.now_us + (seconds * 1e6) as u64;
        while self.now_us < end {
            self.step(tap);
        }
    }

    /// Steps until `done` holds or `limit_s` passes; true if `done` held.
    pub fn run_until(
        &mut self,
        limit_s: f64,
        tap: &mut dyn Tap,
        mut done: impl FnMut(&Session) -> bool,
    ) -> bool {
        let end = self.now_us + (limit_s * 1e6) as u64;
        while self.now_us < end {
            if done(self) {
                return true;
            }
            self.step(tap);
        }
        done(self)
    }
}
