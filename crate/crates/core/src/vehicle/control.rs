//! Per-tick guidance and point-mass integration.

use super::{GeoPoint, SimParams, VehicleEvent, VehicleState};
use crate::catalog::FlightMode;

enum Vertical {
    /// Hold an absolute altitude.
    Altitude(f64),
    /// Track a climb rate (negative descends).
    Rate(f64),
}

/// Advances `state` by `dt` seconds.
pub fn tick(state: &mut VehicleState, params: &SimParams, dt: f64) {
    state.time_s += dt;
    if !state.armed {
        state.velocity = Default::default();
        return;
    }
    state.battery_pct = (state.battery_pct - params.battery_drain_pct_per_s * dt).max(0.0);
    state.failsafe_check(params);

    let (horizontal, vertical) = setpoints(state, params);
    let on_ground = state.position.alt_m <= state.ground_alt_m;

    // Horizontal: accel-limited tracking of a speed-limited approach.
    let max_accel = params.max_accel();
    let speed_limit = params.loiter_speed();
    let (want_n, want_e) = match horizontal {
        Some(target) => {
            let (dn, de) = state.position.offset_to(&target);
            let dist = dn.hypot(de);
            if dist < 1e-6 {
                (0.0, 0.0)
            } else {
                let speed = speed_limit.min((2.0 * max_accel * dist).sqrt()).min(dist);
                (dn / dist * speed, de / dist * speed)
            }
        }
        None => state.wind,
    };
    let (mut dvn, mut dve) = (want_n - state.velocity.north, want_e - state.velocity.east);
    let dv = dvn.hypot(dve);
    let dv_max = max_accel * dt;
    if dv > dv_max {
        dvn *= dv_max / dv;
        dve *= dv_max / dv;
    }
    state.velocity.north += dvn;
    state.velocity.east += dve;
    let limit = if horizontal.is_some() {
        speed_limit
    } else {
        f64::INFINITY
    };
    let h = state.velocity.horizontal();
    if h > limit {
        state.velocity.north *= limit / h;
        state.velocity.east *= limit / h;
    }

    // Vertical: proportional on altitude error with rate damping.
    let vz = state.velocity.up;
    let accel = match vertical {
        Vertical::Altitude(target) => {
            let kp = params.alt_p_gain;
            kp * (target - state.position.alt_m) - 2.0 * kp.sqrt() * vz
        }
        Vertical::Rate(rate) => (rate - vz) / dt,
    }
    .clamp(-max_accel, max_accel);
    state.velocity.up += accel * dt;

    let wants_up = state.velocity.up > 0.0;
    if on_ground && !wants_up {
        state.velocity = Default::default();
    }

    let v = state.velocity;
    state.position = state.position.moved(v.north * dt, v.east * dt);
    state.position.alt_m += v.up * dt;
    if v.horizontal() > 0.5 {
        state.heading_deg = v.east.atan2(v.north).to_degrees().rem_euclid(360.0);
    }

    ground_contact(state, params, &vertical);
    if state.armed {
        advance_navigation(state, params);
    }
}

fn landing(state: &VehicleState) -> bool {
    state.mode == FlightMode::Land || (state.mode == FlightMode::Rtl && state.nav.rtl_landing)
}

fn setpoints(state: &mut VehicleState, params: &SimParams) -> (Option<GeoPoint>, Vertical) {
    let hold = state.nav.hold.unwrap_or(state.position);
    let alt_hold = |s: &VehicleState| match s.nav.alt_target {
        Some(a) => Vertical::Altitude(a),
        None => Vertical::Rate(0.0),
    };
    match state.mode {
        FlightMode::Stabilize => (None, Vertical::Rate(0.0)),
        FlightMode::AltHold => (None, alt_hold(state)),
        FlightMode::Loiter => (Some(hold), alt_hold(state)),
        FlightMode::Guided => match state.nav.guided_target {
            Some(t) => (Some(t), Vertical::Altitude(t.alt_m)),
            None => (Some(hold), alt_hold(state)),
        },
        FlightMode::Auto => match state.mission.get(state.mission_index) {
            Some(item) => {
                let t = state.item_target(item);
                (Some(t), Vertical::Altitude(t.alt_m))
            }
            None => (Some(hold), alt_hold(state)),
        },
        FlightMode::Rtl => {
            let home = state.home.unwrap_or(hold);
            if !state.nav.rtl_landing
                && state.position.horizontal_distance(&home) < 0.5
                && state.velocity.horizontal() < 0.5
            {
                state.nav.rtl_landing = true;
            }
            if state.nav.rtl_landing {
                (Some(home), Vertical::Rate(-params.land_speed()))
            } else {
                let alt = *state.nav.alt_target.get_or_insert(state.position.alt_m);
                (Some(home), Vertical::Altitude(alt))
            }
        }
        FlightMode::Land => (Some(hold), Vertical::Rate(-params.land_speed())),
    }
}

fn ground_contact(state: &mut VehicleState, params: &SimParams, vertical: &Vertical) {
    if state.position.alt_m > state.ground_alt_m {
        return;
    }
    let descent = -state.velocity.up;
    state.position.alt_m = state.ground_alt_m;
    if descent <= 0.0 {
        state.velocity.up = 0.0;
        return;
    }
    let target_underground = matches!(vertical, Vertical::Altitude(a) if *a < state.ground_alt_m);
    if landing(state) {
        state.velocity = Default::default();
        state.record(VehicleEvent::Landed);
        state.disarm();
    } else if descent > params.crash_speed_mps || target_underground {
        let position = state.position;
        state.record(VehicleEvent::GroundCollision {
            speed_mps: descent,
            position,
        });
        state.crashed = true;
        state.disarm();
    } else {
        state.velocity = Default::default();
    }
}

fn advance_navigation(state: &mut VehicleState, params: &SimParams) {
    if state.mode != FlightMode::Auto {
        return;
    }
    let Some(item) = state.mission.get(state.mission_index).copied() else {
        return;
    };
    let target = state.item_target(&item);
    if state.position.distance(&target) < params.waypoint_radius_m {
        state.record(VehicleEvent::WaypointReached { seq: item.seq });
        state.mission_index += 1;
        if state.mission_index >= state.mission.len() {
            state.nav.hold = Some(target);
            state.nav.alt_target = Some(target.alt_m);
            state.record(VehicleEvent::MissionComplete);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{MavFrame, MissionItem};

    fn airborne_at(rel: f64) -> (VehicleState, SimParams) {
        let p = SimParams::default();
        let mut s = VehicleState::on_ground(GeoPoint::new(24.68773, 46.72185, 612.0));
        s.armed = true;
        s.set_home_here();
        s.position.alt_m += rel;
        s.set_mode(FlightMode::Loiter);
        (s, p)
    }

    #[test]
    fn hover_at_target_needs_no_vertical_accel() {
        let (mut s, p) = airborne_at(10.0);
        tick(&mut s, &p, p.dt());
        assert_eq!(s.velocity.up, 0.0);
        assert_eq!(s.position.alt_m, 622.0);
    }

    #[test]
    fn land_reaches_ground_and_disarms() {
        let (mut s, p) = airborne_at(10.0);
        s.set_mode(FlightMode::Land);
        for _ in 0..(30 * p.tick_hz) {
            tick(&mut s, &p, p.dt());
        }
        assert!(!s.armed);
        assert_eq!(s.relative_alt_m(), 0.0);
        assert!(!s.collided());
    }

    #[test]
    fn auto_flies_items_in_order() {
        let (mut s, p) = airborne_at(10.0);
        let home = s.home.unwrap();
        s.mission.push(MissionItem::default());
        for (i, (n, e)) in [(30.0, 0.0), (30.0, 30.0), (0.0, 30.0)].iter().enumerate() {
            let g = home.moved(*n, *e);
            s.mission.push(MissionItem {
                seq: i as u16 + 1,
                frame: MavFrame::GlobalRelativeAlt as u8,
                x: g.lat_deg,
                y: g.lon_deg,
                z: 12.0,
                ..Default::default()
            });
        }
        assert!(s.set_mode(FlightMode::Auto));
        for _ in 0..(120 * p.tick_hz) {
            tick(&mut s, &p, p.dt());
            assert!(s.velocity.horizontal() <= 5.0 + 1e-9);
        }
        assert_eq!(s.reached_waypoints(), vec![1, 2, 3]);
    }
}
