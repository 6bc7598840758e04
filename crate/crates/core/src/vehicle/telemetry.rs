//! Periodic HEARTBEAT, GLOBAL_POSITION and SYS_STATUS emission.

use super::{SimParams, VehicleState};
use crate::catalog::{
    GlobalPosition, Heartbeat, MavAutopilot, MavMessage, MavType, ModeFlag, SysStatus,
};

/// What the vehicle knows about its uplink, reported in SYS_STATUS.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LinkHealth {
    pub drop_ratio: f64,
    pub errors: u64,
}

/// Next due time of each periodic message, in microseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TelemetrySchedule {
    next_heartbeat_us: Option<u64>,
    next_position_us: Option<u64>,
    next_status_us: Option<u64>,
}

fn due(slot: &mut Option<u64>, now_us: u64, period_s: f64) -> bool {
    let period_us = (period_s * 1e6).round() as u64;
    match *slot {
        Some(t) if now_us < t => false,
        Some(t) => {
            // Keep the cadence fixed; skip missed slots after a stall.
            let mut next = t + period_us;
            if next <= now_us {
                next = now_us + period_us;
            }
            *slot = Some(next);
            true
        }
        None => {
            *slot = Some(now_us + period_us);
            true
        }
    }
}

pub fn heartbeat(state: &VehicleState) -> Heartbeat {
    let mut base_mode = state.mode.base_mode_bits() | ModeFlag::Reserved.bit();
    if state.armed {
        base_mode |= ModeFlag::Armed.bit();
    }
    Heartbeat {
        mav_type: MavType::Quadrotor as u8,
        autopilot: MavAutopilot::ArduPilotMega as u8,
        base_mode,
        custom_mode: state.mode.custom_mode(),
        system_status: state.system_status() as u8,
        mavlink_version: 3,
    }
}

pub fn global_position(state: &VehicleState) -> GlobalPosition {
    let (lat, lon, alt) = state.position.to_wire();
    let cms = |v: f64| (v * 100.0).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
    GlobalPosition {
        lat,
        lon,
        alt,
        relative_alt: state.relative_alt_mm(),
        vx: cms(state.velocity.north),
        vy: cms(state.velocity.east),
        vz: cms(-state.velocity.up),
        hdg: (state.heading_deg * 100.0).round() as u16 % 36000,
    }
}

pub fn sys_status(state: &VehicleState, link: LinkHealth) -> SysStatus {
    // Bits 0..4: inertial and pressure sensors; bit 5: GPS.
    let sensors = 0x1F | if state.gps_fix_3d { 0x20 } else { 0 };
    SysStatus {
        sensors_present: 0x3F,
        sensors_enabled: 0x3F,
        sensors_health: sensors,
        voltage_battery: (10_500.0 + 21.0 * state.battery_pct).round() as u16,
        battery_remaining: state.battery_pct.round() as i8,
        drop_rate_comm: (link.drop_ratio * 10_000.0).round().min(10_000.0) as u16,
        errors_comm: link.errors.min(u64::from(u16::MAX)) as u16,
    }
}

/// Messages due at `now_us`; the first call emits all three.
pub fn emit_telemetry(
    state: &VehicleState,
    params: &SimParams,
    schedule: &mut TelemetrySchedule,
    now_us: u64,
    link: LinkHealth,
) -> Vec<MavMessage> {
    let mut out = Vec::new();
    if due(
        &mut schedule.next_heartbeat_us,
        now_us,
        params.heartbeat_period_s,
    ) {
        out.push(heartbeat(state).into());
    }
    if due(
        &mut schedule.next_position_us,
        now_us,
        1.0 / params.position_rate_hz,
    ) {
        out.push(global_position(state).into());
    }
    if due(
        &mut schedule.next_status_us,
        now_us,
        1.0 / params.status_rate_hz,
    ) {
        out.push(sys_status(state, link).into());
    }
    out
}
