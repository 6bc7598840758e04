//! COMMAND_LONG and MISSION_ITEM handling.

use super::{GeoPoint, VehicleEvent, VehicleState};
use crate::catalog::{
    CommandAck, CommandLong, FlightMode, MavCmd, MavFrame, MavResult, Message, MissionItem,
};

/// Acknowledgement plus an optional data reply (GET_HOME).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommandResponse {
    pub ack: CommandAck,
    pub reply: Option<MissionItem>,
}

fn ack(command: u16, result: MavResult) -> CommandAck {
    CommandAck {
        command,
        result: result as u8,
    }
}

/// Position-holding modes need a 3D fix and HDOP under 2.0 to arm.
pub fn arming_allowed(state: &VehicleState) -> bool {
    match state.mode {
        FlightMode::Loiter | FlightMode::Guided | FlightMode::Auto => {
            state.gps_fix_3d && state.hdop < 2.0
        }
        FlightMode::Stabilize | FlightMode::AltHold => true,
        // Not armable from the return and landing modes.
        FlightMode::Rtl | FlightMode::Land => false,
    }
}

pub fn handle_command(state: &mut VehicleState, cmd: &CommandLong) -> CommandResponse {
    let mut reply = None;
    let result = match MavCmd::from_u16(cmd.command) {
        Some(MavCmd::Takeoff) => {
            if state.armed && state.mode == FlightMode::Guided {
                if state.home.is_none() {
                    state.set_home_here();
                }
                let rel = cmd.param(7).max(0.0);
                state.nav.alt_target = Some(state.reference_alt() + rel);
                state.nav.hold = Some(state.position);
                state.record(VehicleEvent::TakeoffStarted { target_rel_m: rel });
                MavResult::Accepted
            } else {
                MavResult::Denied
            }
        }
        Some(MavCmd::Land) => {
            state.enter_mode(FlightMode::Land);
            MavResult::Accepted
        }
        Some(MavCmd::ArmDisarm) => {
            if cmd.param(1) != 0.0 {
                if state.armed {
                    MavResult::Accepted
                } else if arming_allowed(state) && !state.crashed {
                    state.armed = true;
                    state.record(VehicleEvent::Armed);
                    if state.home.is_none() {
                        state.set_home_here();
                    }
                    MavResult::Accepted
                } else {
                    MavResult::Denied
                }
            } else if !state.armed {
                MavResult::Accepted
            } else if state.relative_alt_m() < 0.5 {
                if state.height_above_ground() < 0.5 {
                    state.position.alt_m = state.ground_alt_m;
                }
                state.disarm();
                MavResult::Accepted
            } else {
                MavResult::Denied
            }
        }
        Some(MavCmd::SetHome) => {
            let home = GeoPoint::new(cmd.param(5), cmd.param(6), cmd.param(7));
            state.home = Some(home);
            state.record(VehicleEvent::HomeSet(home));
            MavResult::Accepted
        }
        Some(MavCmd::GetHome) => match state.home {
            Some(h) => {
                reply = Some(MissionItem {
                    seq: 0,
                    frame: MavFrame::Global as u8,
                    x: h.lat_deg,
                    y: h.lon_deg,
                    z: h.alt_m,
                    ..Default::default()
                });
                MavResult::Accepted
            }
            None => MavResult::Failed,
        },
        None => MavResult::Unsupported,
    };
    CommandResponse {
        ack: ack(cmd.command, result),
        reply,
    }
}

impl VehicleState {
    /// Stores or acts on a MISSION_ITEM. Seq 0 starts a new mission; later
    /// items append or replace. In GUIDED while flying, an item with
    /// seq >= 1 becomes the single guided target instead.
    pub fn handle_mission_item(&mut self, item: &MissionItem) -> CommandAck {
        let id = MissionItem::MSG_ID as u16;
        if MavFrame::from_u8(item.frame).is_none() {
            return ack(id, MavResult::Unsupported);
        }
        if self.mode == FlightMode::Guided && self.armed && self.is_airborne() && item.seq >= 1 {
            self.nav.guided_target = Some(self.item_target(item));
            return ack(id, MavResult::Accepted);
        }
        let seq = usize::from(item.seq);
        if seq == 0 {
            self.mission.clear();
            self.mission.push(*item);
            self.mission_index = 1;
        } else if seq == self.mission.len() && !self.mission.is_empty() {
            self.mission.push(*item);
        } else if seq < self.mission.len() {
            self.mission[seq] = *item;
        } else {
            return ack(id, MavResult::Denied);
        }
        self.record(VehicleEvent::MissionItemStored { seq: item.seq });
        ack(id, MavResult::Accepted)
    }
}
