//! Ground-station logic without I/O: heartbeats, telemetry decoding,
//! command and mission transactions with retries, and anomaly detection.
//!
//! Callers feed received bytes in, call [`Gcs::poll`] regularly and ship
//! whatever [`Gcs::take_outbox`] returns.

pub mod detector;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::catalog::{
    gps_raw_to_degrees, CommandAck, CommandLong, FlightMode, Heartbeat, MavAutopilot, MavFrame,
    MavMessage, MavResult, MavType, Message, MissionItem, ModeFlag, SystemStatus,
};
use crate::endpoint::{Disposition, Endpoint, EndpointCounters, Received};
use crate::frame::Frame;
use crate::signing::SigningContext;
use crate::transport::LinkStats;

pub use detector::{detector_step, Alert, Detector, DetectorConfig, PeerStatus, RuleId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GcsError {
    #[error("mission item {index} has seq {got}, expected {expected}")]
    NonContiguousSeq {
        index: usize,
        expected: u16,
        got: u16,
    },
    #[error("mission is empty")]
    EmptyMission,
    #[error("another transaction is in progress")]
    Busy,
    #[error("mission file line {line}: {reason}")]
    MissionFile { line: usize, reason: String },
}

/// Decoded GLOBAL_POSITION in degrees, meters and m/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PositionFix {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_m: f64,
    pub relative_alt_m: f64,
    pub vn: f64,
    pub ve: f64,
    pub vd: f64,
    pub heading_deg: f64,
}

/// What the ground station knows about one vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleView {
    pub sysid: u8,
    pub last_heartbeat_us: Option<u64>,
    pub heartbeats: u64,
    pub mav_type: Option<u8>,
    pub base_mode: u8,
    pub custom_mode: u32,
    pub mode: Option<FlightMode>,
    pub armed: bool,
    pub system_status: Option<SystemStatus>,
    pub position: Option<PositionFix>,
    pub battery_pct: Option<i8>,
    /// The vehicle's own estimate of its uplink loss.
    pub remote_drop_ratio: f64,
    pub home: Option<MissionItem>,
    pub link: LinkStats,
    pub alive: bool,
    pub heartbeat_period_s: f64,
}

/// Liveness window in heartbeat periods.
pub const LIVENESS_PERIODS: f64 = 3.0;

impl VehicleView {
    pub fn new(sysid: u8) -> Self {
        Self {
            sysid,
            last_heartbeat_us: None,
            heartbeats: 0,
            mav_type: None,
            base_mode: 0,
            custom_mode: 0,
            mode: None,
            armed: false,
            system_status: None,
            position: None,
            battery_pct: None,
            remote_drop_ratio: 0.0,
            home: None,
            link: LinkStats::new(),
            alive: false,
            heartbeat_period_s: 1.0,
        }
    }

    pub fn ingest(&mut self, frame: &Frame, msg: &MavMessage, now_us: u64) {
        self.link.update(frame.seq());
        match msg {
            MavMessage::Heartbeat(hb) => {
                self.last_heartbeat_us = Some(now_us);
                self.heartbeats += 1;
                self.mav_type = Some(hb.mav_type);
                self.base_mode = hb.base_mode;
                self.custom_mode = hb.custom_mode;
                self.mode = FlightMode::from_custom(hb.custom_mode);
                self.armed = hb.base_mode & ModeFlag::Armed.bit() != 0;
                self.system_status = SystemStatus::from_u8(hb.system_status);
            }
            MavMessage::GlobalPosition(p) => {
                self.position = Some(PositionFix {
                    lat_deg: gps_raw_to_degrees(p.lat),
                    lon_deg: gps_raw_to_degrees(p.lon),
                    alt_m: f64::from(p.alt) / 1000.0,
                    relative_alt_m: f64::from(p.relative_alt) / 1000.0,
                    vn: f64::from(p.vx) / 100.0,
                    ve: f64::from(p.vy) / 100.0,
                    vd: f64::from(p.vz) / 100.0,
                    heading_deg: f64::from(p.hdg) / 100.0,
                });
            }
            MavMessage::SysStatus(s) => {
                self.battery_pct = Some(s.battery_remaining);
                self.remote_drop_ratio = f64::from(s.drop_rate_comm) / 10_000.0;
            }
            MavMessage::MissionItem(item) if item.seq == 0 => self.home = Some(*item),
            _ => {}
        }
        self.refresh(now_us);
    }

    pub fn refresh(&mut self, now_us: u64) {
        let window_us = (self.heartbeat_period_s * LIVENESS_PERIODS * 1e6) as u64;
        self.alive = self
            .last_heartbeat_us
            .is_some_and(|t| now_us.saturating_sub(t) <= window_us);
    }

    pub fn peer_status(&self) -> PeerStatus {
        PeerStatus {
            last_heartbeat_us: self.last_heartbeat_us,
            stats: self.link,
        }
    }
}

/// Functional form of [`VehicleView::ingest`].
pub fn ingest(mut view: VehicleView, frame: &Frame, msg: &MavMessage, now_us: u64) -> VehicleView {
    view.ingest(frame, msg, now_us);
    view
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommandOutcome {
    /// An ack arrived. `confirmations` lists the confirmation byte of every
    /// transmission.
    Acked {
        command: u16,
        result: u8,
        confirmations: Vec<u8>,
    },
    Timeout {
        command: u16,
        confirmations: Vec<u8>,
    },
}

impl CommandOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, CommandOutcome::Acked { result, .. } if *result == MavResult::Accepted as u8)
    }

    pub fn confirmations(&self) -> &[u8] {
        match self {
            CommandOutcome::Acked { confirmations, .. }
            | CommandOutcome::Timeout { confirmations, .. } => confirmations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MissionOutcome {
    Complete {
        acked: Vec<u16>,
    },
    Rejected {
        acked: Vec<u16>,
        seq: u16,
        result: u8,
    },
    TimedOut {
        acked: Vec<u16>,
        seq: u16,
    },
}

impl MissionOutcome {
    pub fn acked(&self) -> &[u16] {
        match self {
            MissionOutcome::Complete { acked }
            | MissionOutcome::Rejected { acked, .. }
            | MissionOutcome::TimedOut { acked, .. } => acked,
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, MissionOutcome::Complete { .. })
    }
}

#[derive(Debug, Clone)]
struct CommandTx {
    cmd: CommandLong,
    retries: u32,
    confirmations: Vec<u8>,
    deadline_us: u64,
}

#[derive(Debug, Clone)]
struct UploadTx {
    items: Vec<MissionItem>,
    idx: usize,
    retries: u32,
    attempts: u32,
    acked: Vec<u16>,
    deadline_us: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcsConfig {
    pub sysid: u8,
    pub compid: u8,
    pub link_id: u8,
    pub target_sysid: u8,
    pub target_compid: u8,
    pub heartbeat_period_s: f64,
    pub ack_timeout_s: f64,
    pub retries: u32,
    pub detector: DetectorConfig,
}

impl Default for GcsConfig {
    fn default() -> Self {
        Self {
            sysid: 255,
            compid: 190,
            link_id: 1,
            target_sysid: 1,
            target_compid: 1,
            heartbeat_period_s: 1.0,
            ack_timeout_s: 1.0,
            retries: 3,
            detector: DetectorConfig::default(),
        }
    }
}

/// Checks that seqs are contiguous from the first item's seq.
pub fn validate_mission(items: &[MissionItem], from_home: bool) -> Result<(), GcsError> {
    let first = items.first().ok_or(GcsError::EmptyMission)?.seq;
    let start = if from_home { 0 } else { first };
    for (i, item) in items.iter().enumerate() {
        let expected = start + i as u16;
        if item.seq != expected {
            return Err(GcsError::NonContiguousSeq {
                index: i,
                expected,
                got: item.seq,
            });
        }
    }
    Ok(())
}

/// Parses a mission file: one `seq frame x y z` line per item, `#` starts
/// a comment. Items are addressed to `target`.
pub fn parse_mission_file(text: &str, target: (u8, u8)) -> Result<Vec<MissionItem>, GcsError> {
    let mut items = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: String| GcsError::MissionFile {
            line: i + 1,
            reason,
        };
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 5 {
            return Err(bad(format!("expected 5 columns, got {}", cols.len())));
        }
        let seq = cols[0]
            .parse::<u16>()
            .map_err(|e| bad(format!("seq: {e}")))?;
        let frame = cols[1]
            .parse::<u8>()
            .map_err(|e| bad(format!("frame: {e}")))?;
        if MavFrame::from_u8(frame).is_none() {
            return Err(bad(format!(
                "unsupported frame {frame} (0 = global, 3 = relative)"
            )));
        }
        let mut xyz = [0.0f64; 3];
        for (v, c) in xyz.iter_mut().zip(&cols[2..]) {
            *v = c
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("not a number: {c}")))?;
        }
        items.push(MissionItem {
            target_system: target.0,
            target_component: target.1,
            seq,
            frame,
            x: xyz[0],
            y: xyz[1],
            z: xyz[2],
        });
    }
    validate_mission(&items, true)?;
    Ok(items)
}

#[derive(Debug)]
pub struct Gcs {
    cfg: GcsConfig,
    endpoint: Endpoint,
    views: BTreeMap<u8, VehicleView>,
    detector: Detector,
    command: Option<CommandTx>,
    command_done: Option<CommandOutcome>,
    upload: Option<UploadTx>,
    upload_done: Option<MissionOutcome>,
    next_heartbeat_us: Option<u64>,
    alerts: Vec<Alert>,
}

impl Gcs {
    pub fn new(cfg: GcsConfig, signer: Option<SigningContext>) -> Self {
        let endpoint = Endpoint::new(cfg.sysid, cfg.compid, cfg.link_id).with_signer(signer);
        let detector = Detector::new(cfg.detector.clone());
        Self {
            cfg,
            endpoint,
            views: BTreeMap::new(),
            detector,
            command: None,
            command_done: None,
            upload: None,
            upload_done: None,
            next_heartbeat_us: None,
            alerts: Vec::new(),
        }
    }

    pub fn config(&self) -> &GcsConfig {
        &self.cfg
    }

    pub fn counters(&self) -> EndpointCounters {
        self.endpoint.counters()
    }

    pub fn view(&self, sysid: u8) -> Option<&VehicleView> {
        self.views.get(&sysid)
    }

    /// The view of the configured target vehicle.
    pub fn vehicle(&self) -> Option<&VehicleView> {
        self.view(self.cfg.target_sysid)
    }

    pub fn alerts(&self) -> &[Alert] {
        &self.alerts
    }

    pub fn is_idle(&self) -> bool {
        self.command.is_none() && self.upload.is_none()
    }

    pub fn take_outbox(&mut self) -> Vec<Vec<u8>> {
        self.endpoint.take_outbox()
    }

    pub fn take_command_outcome(&mut self) -> Option<CommandOutcome> {
        self.command_done.take()
    }

    pub fn take_mission_outcome(&mut self) -> Option<MissionOutcome> {
        self.upload_done.take()
    }

    pub fn receive_datagram(&mut self, bytes: &[u8], now_us: u64) -> Vec<Received> {
        let rx = self.endpoint.receive_datagram(bytes);
        self.absorb(rx, now_us)
    }

    pub fn receive_stream(&mut self, bytes: &[u8], now_us: u64) -> Vec<Received> {
        let rx = self.endpoint.receive_stream(bytes);
        self.absorb(rx, now_us)
    }

    fn absorb(&mut self, rx: Vec<Received>, now_us: u64) -> Vec<Received> {
        for r in &rx {
            self.detector.observe_frame(now_us);
            match r.disposition {
                Disposition::Rejected(reason) => self.detector.observe_rejection(now_us, reason),
                Disposition::Accepted { .. } => {
                    let msg = r.message.as_ref().expect("accepted frames carry a message");
                    self.handle(&r.frame, msg, now_us);
                }
                _ => {}
            }
        }
        rx
    }

    fn handle(&mut self, frame: &Frame, msg: &MavMessage, now_us: u64) {
        let sysid = frame.sysid();
        if sysid == self.cfg.sysid {
            return;
        }
        self.views
            .entry(sysid)
            .or_insert_with(|| VehicleView::new(sysid))
            .ingest(frame, msg, now_us);
        if sysid != self.cfg.target_sysid {
            return;
        }
        if let MavMessage::CommandAck(ack) = msg {
            self.on_ack(ack, now_us);
        }
    }

    fn on_ack(&mut self, ack: &CommandAck, now_us: u64) {
        if ack.command == MissionItem::MSG_ID as u16 {
            let Some(mut tx) = self.upload.take() else {
                return;
            };
            let seq = tx.items[tx.idx].seq;
            if ack.result != MavResult::Accepted as u8 {
                self.upload_done = Some(MissionOutcome::Rejected {
                    acked: tx.acked,
                    seq,
                    result: ack.result,
                });
                return;
            }
            tx.acked.push(seq);
            tx.idx += 1;
            if tx.idx == tx.items.len() {
                self.upload_done = Some(MissionOutcome::Complete { acked: tx.acked });
            } else {
                tx.attempts = 0;
                self.send_item(&mut tx, now_us);
                self.upload = Some(tx);
            }
            return;
        }
        if self
            .command
            .as_ref()
            .is_some_and(|tx| tx.cmd.command == ack.command)
        {
            let tx = self.command.take().expect("checked");
            self.command_done = Some(CommandOutcome::Acked {
                command: ack.command,
                result: ack.result,
                confirmations: tx.confirmations,
            });
        }
    }

    fn timeout_us(&self) -> u64 {
        (self.cfg.ack_timeout_s * 1e6) as u64
    }

    fn send_item(&mut self, tx: &mut UploadTx, now_us: u64) {
        let mut item = tx.items[tx.idx];
        item.target_system = self.cfg.target_sysid;
        item.target_component = self.cfg.target_compid;
        self.endpoint.queue(item);
        tx.attempts += 1;
        tx.deadline_us = now_us + self.timeout_us();
    }

    fn transmit_command(&mut self, tx: &mut CommandTx, now_us: u64) {
        let mut cmd = tx.cmd;
        cmd.confirmation = tx.confirmations.len().min(255) as u8;
        cmd.target_system = self.cfg.target_sysid;
        cmd.target_component = self.cfg.target_compid;
        tx.confirmations.push(cmd.confirmation);
        self.endpoint.queue(cmd);
        tx.deadline_us = now_us + self.timeout_us();
    }

    /// Starts a command transaction: sent now with confirmation 0, then
    /// up to `retries` more times on ack timeout.
    pub fn send_command(
        &mut self,
        cmd: CommandLong,
        retries: u32,
        now_us: u64,
    ) -> Result<(), GcsError> {
        if self.command.is_some() {
            return Err(GcsError::Busy);
        }
        self.command_done = None;
        let mut tx = CommandTx {
            cmd,
            retries,
            confirmations: Vec::new(),
            deadline_us: 0,
        };
        self.transmit_command(&mut tx, now_us);
        self.command = Some(tx);
        Ok(())
    }

    /// Uploads a full mission: home item (seq 0) first, contiguous seqs.
    pub fn upload_mission(
        &mut self,
        items: Vec<MissionItem>,
        retries: u32,
        now_us: u64,
    ) -> Result<(), GcsError> {
        validate_mission(&items, true)?;
        self.start_upload(items, retries, now_us)
    }

    /// Rewrites already stored items, e.g. one amended waypoint.
    pub fn update_mission_items(
        &mut self,
        items: Vec<MissionItem>,
        retries: u32,
        now_us: u64,
    ) -> Result<(), GcsError> {
        validate_mission(&items, false)?;
        self.start_upload(items, retries, now_us)
    }

    fn start_upload(
        &mut self,
        items: Vec<MissionItem>,
        retries: u32,
        now_us: u64,
    ) -> Result<(), GcsError> {
        if self.upload.is_some() {
            return Err(GcsError::Busy);
        }
        self.upload_done = None;
        let mut tx = UploadTx {
            items,
            idx: 0,
            retries,
            attempts: 0,
            acked: Vec::new(),
            deadline_us: 0,
        };
        self.send_item(&mut tx, now_us);
        self.upload = Some(tx);
        Ok(())
    }

    /// Heartbeat, retransmissions, liveness and detection.
    pub fn poll(&mut self, now_us: u64) {
        let hb_due = self.next_heartbeat_us.is_none_or(|t| now_us >= t);
        if hb_due {
            self.endpoint.queue(Heartbeat {
                mav_type: MavType::Gcs as u8,
                autopilot: MavAutopilot::Invalid as u8,
                base_mode: 0,
                custom_mode: 0,
                system_status: SystemStatus::Active as u8,
                mavlink_version: 3,
            });
            let period = (self.cfg.heartbeat_period_s * 1e6) as u64;
            let mut next = self.next_heartbeat_us.unwrap_or(now_us) + period;
            if next <= now_us {
                next = now_us + period;
            }
            self.next_heartbeat_us = Some(next);
        }

        if let Some(mut tx) = self.command.take() {
            if now_us >= tx.deadline_us {
                if (tx.confirmations.len() as u32) <= tx.retries {
                    self.transmit_command(&mut tx, now_us);
                    self.command = Some(tx);
                } else {
                    self.command_done = Some(CommandOutcome::Timeout {
                        command: tx.cmd.command,
                        confirmations: tx.confirmations,
                    });
                }
            } else {
                self.command = Some(tx);
            }
        }

        if let Some(mut tx) = self.upload.take() {
            if now_us >= tx.deadline_us {
                if tx.attempts <= tx.retries {
                    self.send_item(&mut tx, now_us);
                    self.upload = Some(tx);
                } else {
                    self.upload_done = Some(MissionOutcome::TimedOut {
                        seq: tx.items[tx.idx].seq,
                        acked: tx.acked,
                    });
                }
            } else {
                self.upload = Some(tx);
            }
        }

        for view in self.views.values_mut() {
            view.refresh(now_us);
        }
        let peer = self
            .vehicle()
            .map(VehicleView::peer_status)
            .unwrap_or_default();
        let fired = self.detector.step(&peer, now_us);
        self.alerts.extend(fired);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mission_file_parsing() {
        let items = parse_mission_file(
            "# home\n0 0 24.5 46.5 612\n1 3 24.6 46.6 10 # wp\n\n",
            (1, 1),
        )
        .unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!((items[1].seq, items[1].frame, items[1].z), (1, 3, 10.0));
        assert!(matches!(
            parse_mission_file("0 0 1 2\n", (1, 1)),
            Err(GcsError::MissionFile { line: 1, .. })
        ));
        assert!(matches!(
            parse_mission_file("0 0 1 2 3\n2 3 1 2 3\n", (1, 1)),
            Err(GcsError::NonContiguousSeq { .. })
        ));
        assert!(matches!(
            parse_mission_file("", (1, 1)),
            Err(GcsError::EmptyMission)
        ));
    }
    use crate::catalog::{GlobalPosition, MavCmd};

    fn vehicle_endpoint() -> Endpoint {
        Endpoint::new(1, 1, 0)
    }

    fn feed(gcs: &mut Gcs, v: &mut Endpoint, msg: impl Into<MavMessage>, now: u64) {
        let bytes = v.encode(&msg.into());
        gcs.receive_datagram(&bytes, now);
    }

    fn sent_commands(gcs: &mut Gcs) -> Vec<CommandLong> {
        let mut rx = Endpoint::new(1, 1, 0);
        gcs.take_outbox()
            .iter()
            .flat_map(|b| rx.receive_datagram(b))
            .filter_map(|r| match r.message {
                Some(MavMessage::CommandLong(c)) => Some(c),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn view_decodes_mode_and_position() {
        let mut gcs = Gcs::new(GcsConfig::default(), None);
        let mut v = vehicle_endpoint();
        feed(
            &mut gcs,
            &mut v,
            Heartbeat {
                custom_mode: 11,
                base_mode: 128 | 4,
                ..Default::default()
            },
            0,
        );
        feed(
            &mut gcs,
            &mut v,
            GlobalPosition {
                lat: 246_877_300,
                ..Default::default()
            },
            10,
        );
        let view = gcs.vehicle().unwrap();
        assert_eq!(view.mode, Some(FlightMode::Rtl));
        assert!(view.armed);
        assert!((view.position.unwrap().lat_deg - 24.68773).abs() < 1e-9);
        assert!(view.alive);
        gcs.poll(3_000_000);
        assert!(gcs.vehicle().unwrap().alive);
        gcs.poll(3_000_001);
        assert!(!gcs.vehicle().unwrap().alive);
    }

    #[test]
    fn command_immediate_ack() {
        let mut gcs = Gcs::new(GcsConfig::default(), None);
        let mut v = vehicle_endpoint();
        gcs.send_command(CommandLong::new(MavCmd::Land as u16, [0.0; 7]), 3, 0)
            .unwrap();
        assert_eq!(
            gcs.send_command(CommandLong::default(), 3, 0),
            Err(GcsError::Busy)
        );
        let sent = sent_commands(&mut gcs);
        assert_eq!(sent.len(), 1);
        assert_eq!(sent[0].confirmation, 0);
        assert_eq!(sent[0].target_system, 1);
        feed(
            &mut gcs,
            &mut v,
            CommandAck {
                command: 21,
                result: 0,
            },
            100,
        );
        let out = gcs.take_command_outcome().unwrap();
        assert!(out.is_accepted());
        assert_eq!(out.confirmations(), &[0]);
    }

    #[test]
    fn command_ack_on_third_try() {
        let mut gcs = Gcs::new(GcsConfig::default(), None);
        let mut v = vehicle_endpoint();
        gcs.send_command(CommandLong::new(22, [0.0; 7]), 5, 0)
            .unwrap();
        gcs.poll(1_000_000);
        gcs.poll(2_000_000);
        let confs: Vec<u8> = sent_commands(&mut gcs)
            .iter()
            .map(|c| c.confirmation)
            .collect();
        assert_eq!(confs, vec![0, 1, 2]);
        feed(
            &mut gcs,
            &mut v,
            CommandAck {
                command: 22,
                result: 0,
            },
            2_100_000,
        );
        assert_eq!(
            gcs.take_command_outcome().unwrap().confirmations(),
            &[0, 1, 2]
        );
    }

    #[test]
    fn command_timeout_sends_n_plus_one() {
        let mut gcs = Gcs::new(GcsConfig::default(), None);
        gcs.send_command(CommandLong::new(400, [1.0, 0., 0., 0., 0., 0., 0.]), 3, 0)
            .unwrap();
        for s in 1..=10 {
            gcs.poll(s * 1_000_000);
        }
        assert_eq!(sent_commands(&mut gcs).len(), 4);
        assert_eq!(
            gcs.take_command_outcome(),
            Some(CommandOutcome::Timeout {
                command: 400,
                confirmations: vec![0, 1, 2, 3]
            })
        );
    }

    #[test]
    fn mission_validation() {
        let item = |seq| MissionItem {
            seq,
            ..Default::default()
        };
        assert_eq!(
            validate_mission(&[item(0), item(2)], true),
            Err(GcsError::NonContiguousSeq {
                index: 1,
                expected: 1,
                got: 2
            })
        );
        assert!(validate_mission(&[item(1)], true).is_err());
        assert!(validate_mission(&[item(3), item(4)], false).is_ok());
        assert_eq!(validate_mission(&[], true), Err(GcsError::EmptyMission));
    }

    #[test]
    fn mission_stop_and_wait() {
        let mut gcs = Gcs::new(GcsConfig::default(), None);
        let mut v = vehicle_endpoint();
        let items: Vec<MissionItem> = (0..3)
            .map(|seq| MissionItem {
                seq,
                frame: 3,
                ..Default::default()
            })
            .collect();
        gcs.upload_mission(items, 2, 0).unwrap();
        assert_eq!(gcs.take_outbox().len(), 1);
        for i in 0..3 {
            feed(
                &mut gcs,
                &mut v,
                CommandAck {
                    command: 39,
                    result: 0,
                },
                100 + i,
            );
        }
        assert_eq!(
            gcs.take_mission_outcome(),
            Some(MissionOutcome::Complete {
                acked: vec![0, 1, 2]
            })
        );
        assert_eq!(gcs.take_outbox().len(), 2);
    }
}
