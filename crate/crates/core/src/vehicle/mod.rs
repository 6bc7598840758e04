//! Simulated copter: point-mass kinematics at a fixed tick, the flight-mode
//! state machine, command handling, telemetry and failsafes.

mod autopilot;
mod commands;
mod control;
mod scenario;
mod telemetry;

use std::fmt;

use crate::catalog::{FlightMode, MavFrame, MissionItem, SystemStatus};

pub use autopilot::{Autopilot, AutopilotConfig};
pub use commands::{arming_allowed, handle_command, CommandResponse};
pub use control::tick;
pub use scenario::{parse_scenario, ScenarioAction, ScenarioError, ScenarioEvent, ScenarioScript};
pub use telemetry::{
    emit_telemetry, global_position, heartbeat, sys_status, LinkHealth, TelemetrySchedule,
};

const EARTH_RADIUS_M: f64 = 6_378_137.0;

/// A position with absolute (above mean sea level) altitude.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_m: f64,
}

impl GeoPoint {
    pub fn new(lat_deg: f64, lon_deg: f64, alt_m: f64) -> Self {
        Self {
            lat_deg,
            lon_deg,
            alt_m,
        }
    }

    /// North and east offset in meters from `self` to `other` (flat earth).
    pub fn offset_to(&self, other: &GeoPoint) -> (f64, f64) {
        let north = (other.lat_deg - self.lat_deg).to_radians() * EARTH_RADIUS_M;
        let east = (other.lon_deg - self.lon_deg).to_radians()
            * EARTH_RADIUS_M
            * self.lat_deg.to_radians().cos();
        (north, east)
    }

    pub fn horizontal_distance(&self, other: &GeoPoint) -> f64 {
        let (n, e) = self.offset_to(other);
        n.hypot(e)
    }

    pub fn distance(&self, other: &GeoPoint) -> f64 {
        self.horizontal_distance(other)
            .hypot(other.alt_m - self.alt_m)
    }

    pub fn moved(&self, north_m: f64, east_m: f64) -> GeoPoint {
        let dlat = (north_m / EARTH_RADIUS_M).to_degrees();
        let dlon = (east_m / (EARTH_RADIUS_M * self.lat_deg.to_radians().cos())).to_degrees();
        GeoPoint::new(self.lat_deg + dlat, self.lon_deg + dlon, self.alt_m)
    }

    /// (lat deg x 1e7, lon deg x 1e7, alt mm)
    pub fn to_wire(&self) -> (i32, i32, i32) {
        (
            crate::catalog::degrees_to_gps_raw(self.lat_deg),
            crate::catalog::degrees_to_gps_raw(self.lon_deg),
            (self.alt_m * 1000.0).round() as i32,
        )
    }
}

/// Velocity in m/s, north/east/up.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Velocity {
    pub north: f64,
    pub east: f64,
    pub up: f64,
}

impl Velocity {
    pub fn horizontal(&self) -> f64 {
        self.north.hypot(self.east)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailsafeAction {
    Land,
    Rtl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailsafeCause {
    Battery,
    GcsLinkLoss,
}

/// Tunables. Speeds are in cm/s like the autopilot parameters they model.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub tick_hz: u32,
    pub loiter_speed_cms: f64,
    pub max_accel_cmss: f64,
    /// Vertical acceleration per meter of altitude error, 1/s^2.
    pub alt_p_gain: f64,
    pub land_speed_cms: f64,
    pub battery_failsafe_pct: u8,
    pub failsafe_action: FailsafeAction,
    pub battery_drain_pct_per_s: f64,
    pub heartbeat_period_s: f64,
    pub position_rate_hz: f64,
    pub status_rate_hz: f64,
    pub waypoint_radius_m: f64,
    /// Touching the ground faster than this outside a landing is a crash.
    pub crash_speed_mps: f64,
    /// Seconds without a GCS heartbeat before the link-loss failsafe, once
    /// a GCS has been heard. `None` disables it.
    pub gcs_timeout_s: Option<f64>,
}

impl Default for SimParams {
    fn default() -> Self {
        let loiter_speed_cms = 500.0;
        Self {
            tick_hz: 50,
            loiter_speed_cms,
            max_accel_cmss: loiter_speed_cms / 2.0,
            alt_p_gain: 1.0,
            land_speed_cms: 100.0,
            battery_failsafe_pct: 20,
            failsafe_action: FailsafeAction::Rtl,
            battery_drain_pct_per_s: 0.05,
            heartbeat_period_s: 1.0,
            position_rate_hz: 4.0,
            status_rate_hz: 1.0,
            waypoint_radius_m: 2.0,
            crash_speed_mps: 1.5,
            gcs_timeout_s: Some(5.0),
        }
    }
}

impl SimParams {
    pub fn dt(&self) -> f64 {
        1.0 / f64::from(self.tick_hz)
    }

    pub fn loiter_speed(&self) -> f64 {
        self.loiter_speed_cms / 100.0
    }

    pub fn max_accel(&self) -> f64 {
        self.max_accel_cmss / 100.0
    }

    pub fn land_speed(&self) -> f64 {
        self.land_speed_cms / 100.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VehicleEvent {
    Armed,
    Disarmed,
    HomeSet(GeoPoint),
    ModeChanged {
        from: FlightMode,
        to: FlightMode,
    },
    TakeoffStarted {
        target_rel_m: f64,
    },
    WaypointReached {
        seq: u16,
    },
    MissionComplete,
    MissionItemStored {
        seq: u16,
    },
    Landed,
    GroundCollision {
        speed_mps: f64,
        position: GeoPoint,
    },
    Failsafe {
        cause: FailsafeCause,
        action: FlightMode,
    },
}

impl fmt::Display for VehicleEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VehicleEvent::Armed => write!(f, "armed"),
            VehicleEvent::Disarmed => write!(f, "disarmed"),
            VehicleEvent::HomeSet(p) => write!(
                f,
                "home-set lat={:.7} lon={:.7} alt={:.2}",
                p.lat_deg, p.lon_deg, p.alt_m
            ),
            VehicleEvent::ModeChanged { from, to } => write!(f, "mode {from} -> {to}"),
            VehicleEvent::TakeoffStarted { target_rel_m } => {
                write!(f, "takeoff target={target_rel_m:.2}")
            }
            VehicleEvent::WaypointReached { seq } => write!(f, "waypoint-reached seq={seq}"),
            VehicleEvent::MissionComplete => write!(f, "mission-complete"),
            VehicleEvent::MissionItemStored { seq } => write!(f, "mission-item seq={seq}"),
            VehicleEvent::Landed => write!(f, "landed"),
            VehicleEvent::GroundCollision { speed_mps, .. } => {
                write!(f, "ground-collision speed={speed_mps:.2}")
            }
            VehicleEvent::Failsafe { cause, action } => {
                write!(f, "failsafe cause={cause:?} action={action}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoggedEvent {
    pub t_s: f64,
    pub event: VehicleEvent,
}

/// Controller setpoints; reset on every mode change.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Nav {
    pub hold: Option<GeoPoint>,
    /// Absolute altitude to hold, if any.
    pub alt_target: Option<f64>,
    pub guided_target: Option<GeoPoint>,
    pub rtl_landing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub position: GeoPoint,
    pub home: Option<GeoPoint>,
    /// Terrain height (flat) in meters above mean sea level.
    pub ground_alt_m: f64,
    pub velocity: Velocity,
    pub heading_deg: f64,
    pub mode: FlightMode,
    pub armed: bool,
    pub battery_pct: f64,
    pub gps_fix_3d: bool,
    pub hdop: f64,
    /// Stored mission; index 0 is the home item.
    pub mission: Vec<MissionItem>,
    /// Index of the item AUTO is flying to.
    pub mission_index: usize,
    pub crashed: bool,
    pub failsafe_latched: bool,
    /// Wind in m/s (north, east); only felt in the manual modes.
    pub wind: (f64, f64),
    pub time_s: f64,
    pub log: Vec<LoggedEvent>,
    pub(crate) nav: Nav,
}

impl VehicleState {
    /// Disarmed on the ground at `ground`, in STABILIZE, with a good fix.
    pub fn on_ground(ground: GeoPoint) -> Self {
        Self {
            position: ground,
            home: None,
            ground_alt_m: ground.alt_m,
            velocity: Velocity::default(),
            heading_deg: 0.0,
            mode: FlightMode::Stabilize,
            armed: false,
            battery_pct: 100.0,
            gps_fix_3d: true,
            hdop: 0.9,
            mission: Vec::new(),
            mission_index: 0,
            crashed: false,
            failsafe_latched: false,
            wind: (0.0, 0.0),
            time_s: 0.0,
            log: Vec::new(),
            nav: Nav::default(),
        }
    }

    /// Altitude reference: home if set, else the terrain.
    pub fn reference_alt(&self) -> f64 {
        self.home.map_or(self.ground_alt_m, |h| h.alt_m)
    }

    pub fn relative_alt_m(&self) -> f64 {
        self.position.alt_m - self.reference_alt()
    }

    pub fn height_above_ground(&self) -> f64 {
        self.position.alt_m - self.ground_alt_m
    }

    pub fn is_airborne(&self) -> bool {
        self.height_above_ground() > 0.05
    }

    /// Relative altitude in mm as reported on the wire.
    pub fn relative_alt_mm(&self) -> i32 {
        (self.relative_alt_m() * 1000.0).round() as i32
    }

    pub fn system_status(&self) -> SystemStatus {
        if self.crashed {
            SystemStatus::Emergency
        } else if !self.armed {
            SystemStatus::Standby
        } else if self.failsafe_latched {
            SystemStatus::Critical
        } else {
            SystemStatus::Active
        }
    }

    /// Mission items after the home item.
    pub fn has_waypoints(&self) -> bool {
        self.mission.len() > 1
    }

    /// Absolute-altitude target for a stored item.
    pub fn item_target(&self, item: &MissionItem) -> GeoPoint {
        let alt = match MavFrame::from_u8(item.frame) {
            Some(MavFrame::Global) => item.z,
            _ => self.reference_alt() + item.z,
        };
        GeoPoint::new(item.x, item.y, alt)
    }

    /// Sequence numbers of reached waypoints, in order.
    pub fn reached_waypoints(&self) -> Vec<u16> {
        self.log
            .iter()
            .filter_map(|e| match e.event {
                VehicleEvent::WaypointReached { seq } => Some(seq),
                _ => None,
            })
            .collect()
    }

    pub fn collided(&self) -> bool {
        self.log
            .iter()
            .any(|e| matches!(e.event, VehicleEvent::GroundCollision { .. }))
    }

    pub(crate) fn record(&mut self, event: VehicleEvent) {
        self.log.push(LoggedEvent {
            t_s: self.time_s,
            event,
        });
    }

    /// Requests a mode change. GUIDED and AUTO need a 3D fix, AUTO needs a
    /// stored waypoint and RTL needs a home position.
    pub fn set_mode(&mut self, mode: FlightMode) -> bool {
        let ok = match mode {
            FlightMode::Guided => self.gps_fix_3d,
            FlightMode::Auto => self.gps_fix_3d && self.has_waypoints(),
            FlightMode::Rtl => self.home.is_some(),
            _ => true,
        };
        if ok {
            self.enter_mode(mode);
        }
        ok
    }

    pub(crate) fn enter_mode(&mut self, mode: FlightMode) {
        let from = self.mode;
        if from == mode {
            return;
        }
        self.mode = mode;
        self.nav = Nav {
            hold: Some(self.position),
            alt_target: self.is_airborne().then_some(self.position.alt_m),
            guided_target: None,
            rtl_landing: false,
        };
        if mode == FlightMode::Auto
            && (self.mission_index < 1 || self.mission_index >= self.mission.len())
        {
            self.mission_index = 1;
        }
        self.record(VehicleEvent::ModeChanged { from, to: mode });
    }

    pub(crate) fn set_home_here(&mut self) {
        let home = GeoPoint::new(
            self.position.lat_deg,
            self.position.lon_deg,
            self.ground_alt_m.min(self.position.alt_m),
        );
        self.home = Some(home);
        self.record(VehicleEvent::HomeSet(home));
    }

    pub(crate) fn disarm(&mut self) {
        self.armed = false;
        self.velocity = Velocity::default();
        self.failsafe_latched = false;
        self.nav.alt_target = None;
        self.nav.guided_target = None;
        self.record(VehicleEvent::Disarmed);
    }

    /// Battery check: below the threshold while armed switches to the
    /// failsafe action once until the next disarm.
    pub fn failsafe_check(&mut self, params: &SimParams) {
        if self.armed && self.battery_pct < f64::from(params.battery_failsafe_pct) {
            self.trigger_failsafe(FailsafeCause::Battery, params.failsafe_action);
        }
    }

    pub fn trigger_failsafe(&mut self, cause: FailsafeCause, action: FailsafeAction) {
        if !self.armed || self.failsafe_latched {
            return;
        }
        self.failsafe_latched = true;
        let mode = match action {
            FailsafeAction::Rtl if self.home.is_some() => FlightMode::Rtl,
            _ => FlightMode::Land,
        };
        self.record(VehicleEvent::Failsafe {
            cause,
            action: mode,
        });
        self.enter_mode(mode);
    }
}

/// Functional form of [`VehicleState::failsafe_check`].
pub fn failsafe_check(mut state: VehicleState, params: &SimParams) -> VehicleState {
    state.failsafe_check(params);
    state
}

/// Functional form of [`VehicleState::set_mode`].
pub fn set_mode(mut state: VehicleState, mode: FlightMode) -> (VehicleState, bool) {
    let ok = state.set_mode(mode);
    (state, ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_roundtrip() {
        let a = GeoPoint::new(24.68773, 46.72185, 612.0);
        let b = a.moved(80.0, -30.0);
        let (n, e) = a.offset_to(&b);
        assert!((n - 80.0).abs() < 1e-6);
        assert!((e + 30.0).abs() < 1e-3);
    }

    #[test]
    fn params_defaults_follow_loiter_speed() {
        let p = SimParams::default();
        assert_eq!(p.max_accel_cmss, p.loiter_speed_cms / 2.0);
        assert_eq!(p.loiter_speed(), 5.0);
        assert_eq!(p.max_accel(), 2.5);
    }

    #[test]
    fn mode_preconditions() {
        let mut s = VehicleState::on_ground(GeoPoint::new(0.0, 0.0, 0.0));
        assert!(!s.set_mode(FlightMode::Auto));
        assert!(!s.set_mode(FlightMode::Rtl));
        s.gps_fix_3d = false;
        assert!(!s.set_mode(FlightMode::Guided));
        assert_eq!(s.mode, FlightMode::Stabilize);
        assert!(s.set_mode(FlightMode::AltHold));
    }

    #[test]
    fn battery_failsafe_boundary() {
        let p = SimParams::default();
        let mut s = VehicleState::on_ground(GeoPoint::new(0.0, 0.0, 0.0));
        s.armed = true;
        s.set_home_here();
        s.battery_pct = 20.0;
        s.failsafe_check(&p);
        assert_eq!(s.mode, FlightMode::Stabilize);
        s.battery_pct = 19.0;
        s.failsafe_check(&p);
        assert_eq!(s.mode, FlightMode::Rtl);
        assert!(s.failsafe_latched);

        let mut idle = VehicleState::on_ground(GeoPoint::new(0.0, 0.0, 0.0));
        idle.battery_pct = 5.0;
        idle.failsafe_check(&p);
        assert_eq!(idle.mode, FlightMode::Stabilize);
    }
}
