//! The attacker: full read/write access to the link, no key.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Attack, ReplayFrame};
use crate::catalog::{
    degrees_to_gps_raw, Catalog, CommandAck, CommandLong, GlobalPosition, MavCmd, MavFrame,
    MavMessage, Message, MissionItem,
};
use crate::clock::Clock;
use crate::endpoint::Endpoint;
use crate::frame::{parse_bytes, CrcVerdict, Frame};
use crate::session::{Origin, Tap};
use crate::signing::{SecretKey, SigningContext};
use crate::transport::Direction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversaryParams {
    pub attack: Attack,
    /// Session start, for timeline stamps.
    pub epoch_us: u64,
    pub start_us: u64,
    pub flood_rate_per_s: f64,
    pub replay_frame: ReplayFrame,
    pub spoof_rate_hz: f64,
}

pub struct Adversary {
    p: AdversaryParams,
    catalog: &'static Catalog,
    rng: ChaCha8Rng,
    clock: Arc<dyn Clock>,
    saw_signed: bool,
    forged_gcs: Option<Endpoint>,
    forged_vehicle: Option<Endpoint>,
    captured: Option<Vec<u8>>,
    replayed: bool,
    injected_command: bool,
    flood_sent: u64,
    spoof_sent: u64,
    /// Frames seen on the wire and how many of them decoded.
    pub seen: u64,
    pub decoded: u64,
    pub log: Vec<String>,
}

impl Adversary {
    pub fn new(p: AdversaryParams, seed: u64, clock: Arc<dyn Clock>) -> Self {
        Self {
            p,
            catalog: Catalog::standard(),
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x00A7_7AC4),
            clock,
            saw_signed: false,
            forged_gcs: None,
            forged_vehicle: None,
            captured: None,
            replayed: false,
            injected_command: false,
            flood_sent: 0,
            spoof_sent: 0,
            seen: 0,
            decoded: 0,
            log: Vec::new(),
        }
    }

    fn note(&mut self, now_us: u64, text: impl std::fmt::Display) {
        let t = now_us.saturating_sub(self.p.epoch_us) as f64 / 1e6;
        self.log.push(format!("t={t:.2} attacker {text}"));
    }

    pub fn decoded_fraction(&self) -> f64 {
        if self.seen == 0 {
            0.0
        } else {
            self.decoded as f64 / self.seen as f64
        }
    }

    /// A forging endpoint for `sysid`/`compid`. Once signed traffic has been
    /// seen it signs with a key of its own, which the victim does not share.
    fn forger(&mut self, sysid: u8, compid: u8) -> Endpoint {
        let signer = self
            .saw_signed
            .then(|| SigningContext::new(SecretKey::generate(&mut self.rng), self.clock.clone()));
        let mut e = Endpoint::new(sysid, compid, 0).with_signer(signer);
        // Start somewhere plausible in the sequence space.
        for _ in 0..self.rng.random_range(0..256u32) {
            e.encode(&CommandAck::default().into());
        }
        e
    }

    fn forge_to_vehicle(&mut self, msg: MavMessage) -> Vec<u8> {
        if self.forged_gcs.is_none() {
            self.forged_gcs = Some(self.forger(255, 190));
        }
        self.forged_gcs.as_mut().expect("set above").encode(&msg)
    }

    fn forge_to_gcs(&mut self, msg: MavMessage) -> Vec<u8> {
        if self.forged_vehicle.is_none() {
            self.forged_vehicle = Some(self.forger(1, 1));
        }
        self.forged_vehicle
            .as_mut()
            .expect("set above")
            .encode(&msg)
    }

    fn parse(&self, bytes: &[u8]) -> Option<(Frame, MavMessage)> {
        let (frame, verdict) = parse_bytes(bytes, self.catalog).ok()?;
        if verdict != CrcVerdict::CrcOk {
            return None;
        }
        let msg = MavMessage::decode_frame(self.catalog, &frame).ok()?;
        Some((frame, msg))
    }

    fn wants_capture(&self, msg: &MavMessage) -> bool {
        match (self.p.replay_frame, msg) {
            (ReplayFrame::Mission, MavMessage::MissionItem(item)) => item.seq == 0,
            (ReplayFrame::Arm, MavMessage::CommandLong(c)) => {
                c.command == MavCmd::ArmDisarm as u16 && c.param(1) != 0.0
            }
            _ => false,
        }
    }

    /// Rewrites a mission item to the GLOBAL frame so its altitude is read
    /// as absolute, then reseals the CRC. Any signature is left as is.
    fn tamper(&self, mut frame: Frame) -> Option<Vec<u8>> {
        let desc = self.catalog.get(MissionItem::MSG_ID)?;
        let off = desc.field_offset("frame")?;
        let payload = frame.payload_mut();
        if payload.get(off) != Some(&(MavFrame::GlobalRelativeAlt as u8)) {
            return None;
        }
        payload[off] = MavFrame::Global as u8;
        frame.serialize(desc.crc_seed).ok()
    }
}

impl Tap for Adversary {
    fn inject(&mut self, now_us: u64) -> Vec<(Direction, Vec<u8>)> {
        if now_us < self.p.start_us {
            return Vec::new();
        }
        let since_s = (now_us - self.p.start_us) as f64 / 1e6;
        let mut out = Vec::new();
        match self.p.attack {
            Attack::Replay => {
                if !self.replayed {
                    if let Some(bytes) = self.captured.clone() {
                        self.replayed = true;
                        let text = format!("replays a captured {}-byte frame", bytes.len());
                        self.note(now_us, text);
                        out.push((Direction::ToVehicle, bytes));
                    }
                }
            }
            Attack::InjectCommand => {
                if !self.injected_command {
                    self.injected_command = true;
                    let mut land = CommandLong::new(MavCmd::Land as u16, [0.0; 7]);
                    land.target_system = 1;
                    land.target_component = 1;
                    let bytes = self.forge_to_vehicle(land.into());
                    self.note(now_us, "injects COMMAND_LONG(LAND)");
                    out.push((Direction::ToVehicle, bytes));
                }
            }
            Attack::SpoofPosition => {
                let due = (since_s * self.p.spoof_rate_hz).floor() as u64 + 1;
                if self.spoof_sent == 0 {
                    let text = format!(
                        "starts spoofing GLOBAL_POSITION at {} Hz",
                        self.p.spoof_rate_hz
                    );
                    self.note(now_us, text);
                }
                while self.spoof_sent < due {
                    self.spoof_sent += 1;
                    let fake = GlobalPosition {
                        lat: degrees_to_gps_raw(24.70),
                        lon: degrees_to_gps_raw(46.70),
                        alt: 650_000,
                        relative_alt: 38_000,
                        ..Default::default()
                    };
                    let bytes = self.forge_to_gcs(fake.into());
                    out.push((Direction::ToGcs, bytes));
                }
            }
            Attack::Flood => {
                let due = (since_s * self.p.flood_rate_per_s).floor() as u64;
                // Unsigned junk with a valid CRC; the smallest frame in the catalog.
                let mut junk = Endpoint::new(self.rng.random(), self.rng.random(), 0);
                while self.flood_sent < due {
                    if self.flood_sent == 0 {
                        let text = format!("starts flooding at {}/s", self.p.flood_rate_per_s);
                        self.note(now_us, text);
                    }
                    self.flood_sent += 1;
                    let ack = CommandAck {
                        command: self.rng.random(),
                        result: self.rng.random(),
                    };
                    out.push((Direction::ToVehicle, junk.encode(&ack.into())));
                }
            }
            Attack::Eavesdrop | Attack::Tamper => {}
        }
        out
    }

    fn intercept(
        &mut self,
        now_us: u64,
        dir: Direction,
        bytes: Vec<u8>,
        origin: Origin,
    ) -> Vec<(Vec<u8>, Origin)> {
        self.seen += 1;
        let parsed = self.parse(&bytes);
        let Some((frame, msg)) = parsed else {
            return vec![(bytes, origin)];
        };
        self.decoded += 1;
        if frame.signature().is_some() {
            self.saw_signed = true;
        }
        if dir == Direction::ToVehicle && self.captured.is_none() && self.wants_capture(&msg) {
            self.captured = Some(bytes.clone());
        }
        if self.p.attack == Attack::Tamper
            && dir == Direction::ToVehicle
            && now_us >= self.p.start_us
            && matches!(msg, MavMessage::MissionItem(_))
        {
            if let Some(forged) = self.tamper(frame) {
                self.note(now_us, "rewrites a MISSION_ITEM in flight");
                return vec![(forged, Origin::Attacker)];
            }
        }
        vec![(bytes, origin)]
    }
}
