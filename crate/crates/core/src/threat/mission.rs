//! The reference mission and the operator who flies it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{CommandLong, FlightMode, MavCmd, MavFrame, MissionItem};
use crate::gcs::{CommandOutcome, MissionOutcome};
use crate::session::Session;
use crate::vehicle::GeoPoint;

pub const TAKEOFF_ALT_M: f64 = 10.0;
/// Relative altitude at which the operator switches to AUTO.
pub const AUTO_SWITCH_ALT_M: f64 = 9.5;

/// Home plus four waypoints, and one amendment to the last waypoint that
/// the operator uploads mid-flight.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionPlan {
    pub home: GeoPoint,
    pub items: Vec<MissionItem>,
    pub amendment: MissionItem,
    pub amend_at_s: f64,
}

impl MissionPlan {
    /// A square-ish circuit of roughly 80 m legs, jittered by `seed`.
    pub fn standard(home: GeoPoint, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6D69_7373_696F_6E00);
        let legs = [(80.0, 0.0), (80.0, 80.0), (0.0, 80.0), (40.0, 40.0)];
        let mut items = vec![MissionItem {
            target_system: 1,
            target_component: 1,
            seq: 0,
            frame: MavFrame::Global as u8,
            x: home.lat_deg,
            y: home.lon_deg,
            z: home.alt_m,
        }];
        for (i, (n, e)) in legs.iter().enumerate() {
            let p = home.moved(
                n + rng.random_range(-10.0..10.0),
                e + rng.random_range(-10.0..10.0),
            );
            items.push(MissionItem {
                target_system: 1,
                target_component: 1,
                seq: i as u16 + 1,
                frame: MavFrame::GlobalRelativeAlt as u8,
                x: p.lat_deg,
                y: p.lon_deg,
                z: rng.random_range(10.0..20.0f64).round(),
            });
        }
        let mut amendment = items[4];
        let moved = GeoPoint::new(amendment.x, amendment.y, 0.0).moved(-10.0, 10.0);
        amendment.x = moved.lat_deg;
        amendment.y = moved.lon_deg;
        amendment.z = 15.0;
        Self {
            home,
            items,
            amendment,
            amend_at_s: 35.0,
        }
    }

    /// Whether `item` is one the operator sent for its seq.
    pub fn is_legitimate(&self, item: &MissionItem) -> bool {
        let same = |a: &MissionItem| {
            a.seq == item.seq
                && a.frame == item.frame
                && a.x == item.x
                && a.y == item.y
                && a.z == item.z
        };
        self.items.get(usize::from(item.seq)).is_some_and(same) || same(&self.amendment)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    WaitLink,
    Uploading,
    Arming,
    TakingOff,
    Climbing,
    Flying,
    Aborted,
}

/// Scripted operator: uploads the plan, arms, takes off, switches to AUTO
/// with the mode switch, and later amends the last waypoint.
#[derive(Debug, Clone)]
pub struct Operator {
    pub plan: MissionPlan,
    pub phase: Phase,
    pub amended: bool,
    pub notes: Vec<String>,
    retries: u32,
}

impl Operator {
    pub fn new(plan: MissionPlan) -> Self {
        Self {
            plan,
            phase: Phase::WaitLink,
            amended: false,
            notes: Vec::new(),
            retries: 3,
        }
    }

    fn note(&mut self, s: &Session, text: impl Into<String>) {
        self.notes
            .push(format!("t={:.2} {}", s.elapsed_s(), text.into()));
    }

    fn command(&mut self, s: &mut Session, cmd: u16, params: [f64; 7]) {
        let now = s.now_us();
        if s.gcs
            .send_command(CommandLong::new(cmd, params), self.retries, now)
            .is_err()
        {
            self.phase = Phase::Aborted;
        }
    }

    fn command_result(&mut self, s: &mut Session) -> Option<bool> {
        let out = s.gcs.take_command_outcome()?;
        let ok = out.is_accepted();
        if let CommandOutcome::Timeout { command, .. } = out {
            self.note(s, format!("command {command} timed out"));
        }
        Some(ok)
    }

    /// Called once per tick before the session steps.
    pub fn drive(&mut self, s: &mut Session) {
        match self.phase {
            Phase::WaitLink => {
                if s.gcs.vehicle().is_some_and(|v| v.alive) {
                    let now = s.now_us();
                    match s
                        .gcs
                        .upload_mission(self.plan.items.clone(), self.retries, now)
                    {
                        Ok(()) => self.phase = Phase::Uploading,
                        Err(_) => self.phase = Phase::Aborted,
                    }
                }
            }
            Phase::Uploading => match s.gcs.take_mission_outcome() {
                Some(MissionOutcome::Complete { .. }) => {
                    self.note(s, "mission uploaded");
                    s.vehicle.state.set_mode(FlightMode::Guided);
                    self.command(
                        s,
                        MavCmd::ArmDisarm as u16,
                        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                    );
                    self.phase = Phase::Arming;
                }
                Some(other) => {
                    self.note(s, format!("upload failed: {other:?}"));
                    self.phase = Phase::Aborted;
                }
                None => {}
            },
            Phase::Arming => match self.command_result(s) {
                Some(true) => {
                    self.note(s, "armed");
                    self.command(
                        s,
                        MavCmd::Takeoff as u16,
                        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, TAKEOFF_ALT_M],
                    );
                    self.phase = Phase::TakingOff;
                }
                Some(false) => self.phase = Phase::Aborted,
                None => {}
            },
            Phase::TakingOff => match self.command_result(s) {
                Some(true) => self.phase = Phase::Climbing,
                Some(false) => self.phase = Phase::Aborted,
                None => {}
            },
            Phase::Climbing => {
                let alt = s
                    .gcs
                    .vehicle()
                    .and_then(|v| v.position)
                    .map(|p| p.relative_alt_m);
                if alt.is_some_and(|a| a >= AUTO_SWITCH_ALT_M) {
                    if s.vehicle.state.set_mode(FlightMode::Auto) {
                        self.note(s, "mode switch to AUTO");
                        self.phase = Phase::Flying;
                    } else {
                        self.phase = Phase::Aborted;
                    }
                }
            }
            Phase::Flying => {
                if !self.amended && s.elapsed_s() >= self.plan.amend_at_s && s.gcs.is_idle() {
                    let now = s.now_us();
                    if s.gcs
                        .update_mission_items(vec![self.plan.amendment], self.retries, now)
                        .is_ok()
                    {
                        self.amended = true;
                        self.note(s, "amending waypoint 4");
                    }
                }
                // Drain the amendment result so it does not linger.
                if let Some(out) = s.gcs.take_mission_outcome() {
                    self.note(s, format!("amendment outcome: {out:?}"));
                }
            }
            Phase::Aborted => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_is_seeded_and_contiguous() {
        let home = GeoPoint::new(24.68773, 46.72185, 612.0);
        let a = MissionPlan::standard(home, 1);
        let b = MissionPlan::standard(home, 1);
        let c = MissionPlan::standard(home, 2);
        assert_eq!(a, b);
        assert_ne!(a.items, c.items);
        assert!(crate::gcs::validate_mission(&a.items, true).is_ok());
        for item in &a.items[1..] {
            assert!((10.0..=20.0).contains(&item.z));
            assert!(a.is_legitimate(item));
        }
        assert!(a.is_legitimate(&a.amendment));
        let mut forged = a.amendment;
        forged.frame = 0;
        assert!(!a.is_legitimate(&forged));
    }
}
