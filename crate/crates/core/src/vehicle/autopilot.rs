//! The vehicle's MAVLink endpoint wrapped around the simulation.

use super::{
    emit_telemetry, handle_command, FailsafeAction, FailsafeCause, LinkHealth, ScenarioScript,
    SimParams, TelemetrySchedule, VehicleState,
};
use crate::catalog::{MavMessage, MavType};
use crate::endpoint::{Disposition, Endpoint, EndpointCounters, Received};
use crate::gcs::{Alert, Detector, DetectorConfig, PeerStatus};
use crate::signing::SigningContext;
use crate::transport::LinkStats;

#[derive(Debug, Clone, PartialEq)]
pub struct AutopilotConfig {
    pub sysid: u8,
    pub compid: u8,
    pub link_id: u8,
    pub params: SimParams,
    pub detector: DetectorConfig,
}

impl Default for AutopilotConfig {
    fn default() -> Self {
        Self {
            sysid: 1,
            compid: 1,
            link_id: 0,
            params: SimParams::default(),
            detector: DetectorConfig::default(),
        }
    }
}

#[derive(Debug)]
pub struct Autopilot {
    pub state: VehicleState,
    pub params: SimParams,
    endpoint: Endpoint,
    schedule: TelemetrySchedule,
    uplink: LinkStats,
    last_gcs_heartbeat_us: Option<u64>,
    gcs_sysid: Option<u8>,
    detector: Detector,
    alerts: Vec<Alert>,
    script: ScenarioScript,
    start_us: u64,
}

impl Autopilot {
    pub fn new(
        cfg: AutopilotConfig,
        state: VehicleState,
        signer: Option<SigningContext>,
        start_us: u64,
    ) -> Self {
        Self {
            state,
            params: cfg.params,
            endpoint: Endpoint::new(cfg.sysid, cfg.compid, cfg.link_id).with_signer(signer),
            schedule: TelemetrySchedule::default(),
            uplink: LinkStats::new(),
            last_gcs_heartbeat_us: None,
            gcs_sysid: None,
            detector: Detector::new(cfg.detector),
            alerts: Vec::new(),
            script: ScenarioScript::default(),
            start_us,
        }
    }

    pub fn with_script(mut self, script: ScenarioScript) -> Self {
        self.script = script;
        self
    }

    pub fn set_script(&mut self, script: ScenarioScript) {
        self.script = script;
    }

    pub fn sysid(&self) -> u8 {
        self.endpoint.sysid
    }

    pub fn counters(&self) -> EndpointCounters {
        self.endpoint.counters()
    }

    pub fn uplink_stats(&self) -> LinkStats {
        self.uplink
    }

    pub fn alerts(&self) -> &[Alert] {
        &self.alerts
    }

    pub fn last_gcs_heartbeat_us(&self) -> Option<u64> {
        self.last_gcs_heartbeat_us
    }

    pub fn take_outbox(&mut self) -> Vec<Vec<u8>> {
        self.endpoint.take_outbox()
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
                    let msg = r.message.expect("accepted frames carry a message");
                    if matches!(msg, MavMessage::Heartbeat(hb) if hb.mav_type == MavType::Gcs as u8)
                    {
                        self.gcs_sysid = Some(r.frame.sysid());
                    }
                    if self.gcs_sysid == Some(r.frame.sysid()) {
                        self.uplink.update(r.frame.seq());
                    }
                    self.dispatch(&msg, now_us);
                }
                _ => {}
            }
        }
        rx
    }

    fn addressed_to_me(&self, target_system: u8) -> bool {
        target_system == 0 || target_system == self.endpoint.sysid
    }

    fn dispatch(&mut self, msg: &MavMessage, now_us: u64) {
        match msg {
            MavMessage::Heartbeat(hb) if hb.mav_type == MavType::Gcs as u8 => {
                self.last_gcs_heartbeat_us = Some(now_us);
            }
            MavMessage::CommandLong(cmd) if self.addressed_to_me(cmd.target_system) => {
                let resp = handle_command(&mut self.state, cmd);
                self.endpoint.queue(resp.ack);
                if let Some(home) = resp.reply {
                    self.endpoint.queue(home);
                }
            }
            MavMessage::MissionItem(item) if self.addressed_to_me(item.target_system) => {
                let ack = self.state.handle_mission_item(item);
                self.endpoint.queue(ack);
            }
            _ => {}
        }
    }

    /// Advances the simulation by one tick ending at `now_us` and queues
    /// any telemetry that fell due.
    pub fn step(&mut self, now_us: u64) {
        let t_s = now_us.saturating_sub(self.start_us) as f64 / 1e6;
        self.script.apply_due(t_s, &mut self.state, &self.params);
        super::tick(&mut self.state, &self.params, self.params.dt());

        if let (Some(limit), Some(last)) = (self.params.gcs_timeout_s, self.last_gcs_heartbeat_us) {
            if now_us.saturating_sub(last) as f64 / 1e6 > limit {
                self.state
                    .trigger_failsafe(FailsafeCause::GcsLinkLoss, FailsafeAction::Rtl);
            }
        }

        let health = LinkHealth {
            drop_ratio: self.uplink.drop_ratio(),
            errors: self.endpoint.counters().crc_bad,
        };
        for msg in emit_telemetry(
            &self.state,
            &self.params,
            &mut self.schedule,
            now_us,
            health,
        ) {
            self.endpoint.queue(msg);
        }

        let peer = PeerStatus {
            last_heartbeat_us: self.last_gcs_heartbeat_us,
            stats: self.uplink,
        };
        let fired = self.detector.step(&peer, now_us);
        self.alerts.extend(fired);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{CommandAck, CommandLong, FlightMode, Heartbeat, MavCmd};
    use crate::vehicle::GeoPoint;

    #[test]
    fn arms_over_the_wire_and_acks() {
        let mut ap = Autopilot::new(
            AutopilotConfig::default(),
            VehicleState::on_ground(GeoPoint::new(24.0, 46.0, 600.0)),
            None,
            0,
        );
        let mut gcs = Endpoint::new(255, 190, 1);
        let mut cmd = CommandLong::new(MavCmd::ArmDisarm as u16, [1.0, 0., 0., 0., 0., 0., 0.]);
        cmd.target_system = 1;
        let bytes = gcs.encode(&cmd.into());
        let rx = ap.receive_datagram(&bytes, 0);
        assert!(rx[0].disposition.is_accepted());
        assert!(ap.state.armed);
        let out = ap.take_outbox();
        let got = gcs.receive_datagram(&out[0]);
        assert_eq!(
            got[0].message,
            Some(MavMessage::CommandAck(CommandAck {
                command: 400,
                result: 0
            }))
        );
    }

    #[test]
    fn ignores_commands_for_other_systems() {
        let mut ap = Autopilot::new(
            AutopilotConfig::default(),
            VehicleState::on_ground(GeoPoint::new(24.0, 46.0, 600.0)),
            None,
            0,
        );
        let mut gcs = Endpoint::new(255, 190, 1);
        let mut cmd = CommandLong::new(MavCmd::ArmDisarm as u16, [1.0, 0., 0., 0., 0., 0., 0.]);
        cmd.target_system = 7;
        ap.receive_datagram(&gcs.encode(&cmd.into()), 0);
        assert!(!ap.state.armed);
        assert!(ap.take_outbox().is_empty());
    }

    #[test]
    fn gcs_silence_triggers_rtl() {
        let mut ap = Autopilot::new(
            AutopilotConfig::default(),
            VehicleState::on_ground(GeoPoint::new(24.0, 46.0, 600.0)),
            None,
            0,
        );
        let mut gcs = Endpoint::new(255, 190, 1);
        let hb = Heartbeat {
            mav_type: MavType::Gcs as u8,
            ..Default::default()
        };
        ap.receive_datagram(&gcs.encode(&hb.into()), 0);
        ap.state.armed = true;
        ap.state.set_home_here();
        ap.state.position.alt_m += 10.0;
        ap.state.set_mode(FlightMode::Loiter);
        let mut t = 0;
        while t <= 5_000_000 {
            ap.step(t);
            t += 20_000;
        }
        assert_eq!(ap.state.mode, FlightMode::Loiter);
        ap.step(5_020_000);
        assert_eq!(ap.state.mode, FlightMode::Rtl);
    }
}
