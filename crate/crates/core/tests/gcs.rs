//! Ground station transactions and anomaly detection over the sim link.

use mavkit_core::catalog::{CommandLong, FlightMode, Heartbeat, MavCmd, MavFrame, MissionItem};
use mavkit_core::gcs::{parse_mission_file, validate_mission, CommandOutcome, GcsError, RuleId};
use mavkit_core::session::{Origin, PassThrough, Tap};
use mavkit_core::signing::SecretKey;
use mavkit_core::transport::{Direction, SimLinkConfig};
use mavkit_core::{Endpoint, Session, SessionConfig};

fn session_with(link: SimLinkConfig, key: Option<SecretKey>) -> Session {
    Session::new(SessionConfig {
        link,
        key,
        ..Default::default()
    })
    .unwrap()
}

fn run(s: &mut Session, tap: &mut dyn Tap, secs: f64) {
    for _ in 0..(secs * 50.0).round() as u64 {
        s.step(tap);
    }
}

fn count(alerts: &[mavkit_core::gcs::Alert], rule: RuleId) -> usize {
    alerts.iter().filter(|a| a.rule == rule).count()
}

/// Swallows everything the vehicle sends after `from_s`.
struct SilenceVehicle {
    from_us: u64,
}

impl Tap for SilenceVehicle {
    fn intercept(
        &mut self,
        now_us: u64,
        _dir: Direction,
        bytes: Vec<u8>,
        origin: Origin,
    ) -> Vec<(Vec<u8>, Origin)> {
        if origin == Origin::Vehicle && now_us >= self.from_us {
            Vec::new()
        } else {
            vec![(bytes, origin)]
        }
    }
}

/// Drops every uplink datagram.
struct BlockUplink;

impl Tap for BlockUplink {
    fn intercept(
        &mut self,
        _now: u64,
        dir: Direction,
        bytes: Vec<u8>,
        origin: Origin,
    ) -> Vec<(Vec<u8>, Origin)> {
        match dir {
            Direction::ToVehicle => Vec::new(),
            Direction::ToGcs => vec![(bytes, origin)],
        }
    }
}

/// Sends `per_tick` forged heartbeats to the GCS every tick.
struct Flooder {
    ep: Endpoint,
    per_tick: usize,
}

impl Tap for Flooder {
    fn inject(&mut self, _now: u64) -> Vec<(Direction, Vec<u8>)> {
        (0..self.per_tick)
            .map(|_| {
                (
                    Direction::ToGcs,
                    self.ep.encode(&Heartbeat::default().into()),
                )
            })
            .collect()
    }
}

#[test]
fn clean_five_minute_session_raises_nothing() {
    for key in [None, Some(SecretKey::from_bytes([3; 32]))] {
        let mut s = session_with(SimLinkConfig::lossless(1), key);
        run(&mut s, &mut PassThrough, 300.0);
        assert!(s.gcs.alerts().is_empty(), "{:?}", s.gcs.alerts());
        assert!(s.vehicle.alerts().is_empty(), "{:?}", s.vehicle.alerts());
        let view = s.gcs.vehicle().unwrap();
        assert!(view.alive);
        assert_eq!(view.link.lost, 0);
        assert!((299..=301).contains(&view.heartbeats));
    }
}

#[test]
fn heartbeat_gap_fires_within_five_seconds_of_silence() {
    let mut s = session_with(SimLinkConfig::lossless(2), None);
    let silence_us = s.now_us() + 10_000_000;
    let mut tap = SilenceVehicle {
        from_us: silence_us,
    };
    run(&mut s, &mut tap, 20.0);
    let gaps: Vec<_> = s
        .gcs
        .alerts()
        .iter()
        .filter(|a| a.rule == RuleId::HeartbeatGap)
        .collect();
    assert_eq!(gaps.len(), 1, "{:?}", s.gcs.alerts());
    let after = (gaps[0].at_us - silence_us) as f64 / 1e6;
    assert!(after > 2.0 && after <= 5.0, "fired {after} s into silence");
    assert!(!s.gcs.vehicle().unwrap().alive);
}

#[test]
fn flood_at_1000_per_second_is_flagged() {
    let mut s = session_with(SimLinkConfig::lossless(3), None);
    run(&mut s, &mut PassThrough, 5.0);
    let mut tap = Flooder {
        ep: Endpoint::new(1, 1, 0),
        per_tick: 20,
    };
    let start = s.now_us();
    run(&mut s, &mut tap, 3.0);
    let floods: Vec<_> = s
        .gcs
        .alerts()
        .iter()
        .filter(|a| a.rule == RuleId::FloodRate)
        .collect();
    // Latched: one alert for the whole burst, raised as soon as the rate
    // crosses the threshold.
    assert_eq!(floods.len(), 1);
    assert!(floods[0].value > floods[0].threshold);
    assert!(floods[0].at_us - start <= 200_000, "{}", floods[0]);
}

#[test]
fn heavy_loss_raises_seq_loss_spike() {
    let link = SimLinkConfig {
        drop_probability: 0.5,
        ..SimLinkConfig::lossless(4)
    };
    let mut s = session_with(link, None);
    run(&mut s, &mut PassThrough, 30.0);
    assert!(count(s.gcs.alerts(), RuleId::SeqLossSpike) >= 1);
    let ratio = s.gcs.vehicle().unwrap().link.drop_ratio();
    assert!((ratio - 0.5).abs() < 0.1, "{ratio}");
}

fn arm() -> CommandLong {
    CommandLong::new(
        MavCmd::ArmDisarm as u16,
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    )
}

fn wait_command(s: &mut Session, tap: &mut dyn Tap) -> CommandOutcome {
    for _ in 0..2000 {
        s.step(tap);
        if let Some(o) = s.gcs.take_command_outcome() {
            return o;
        }
    }
    panic!("no outcome");
}

#[test]
fn unanswered_command_retries_then_times_out() {
    let mut s = session_with(SimLinkConfig::lossless(5), None);
    run(&mut s, &mut PassThrough, 1.0);
    let now = s.now_us();
    s.gcs.send_command(arm(), 3, now).unwrap();
    assert_eq!(s.gcs.send_command(arm(), 3, now), Err(GcsError::Busy));
    let out = wait_command(&mut s, &mut BlockUplink);
    assert_eq!(
        out,
        CommandOutcome::Timeout {
            command: MavCmd::ArmDisarm as u16,
            confirmations: vec![0, 1, 2, 3]
        }
    );
    assert!(!s.vehicle.state.armed);
}

#[test]
fn commands_get_through_a_lossy_link() {
    let link = SimLinkConfig {
        drop_probability: 0.3,
        ..SimLinkConfig::lossless(6)
    };
    let mut s = session_with(link, None);
    run(&mut s, &mut PassThrough, 2.0);
    let mut accepted = 0;
    for _ in 0..20 {
        let now = s.now_us();
        s.gcs.send_command(arm(), 10, now).unwrap();
        let out = wait_command(&mut s, &mut PassThrough);
        let confs = out.confirmations().to_vec();
        assert_eq!(confs, (0..confs.len() as u8).collect::<Vec<_>>());
        accepted += usize::from(out.is_accepted());
    }
    assert_eq!(accepted, 20);
    assert!(s.vehicle.state.armed);
}

fn item(seq: u16) -> MissionItem {
    MissionItem {
        target_system: 1,
        target_component: 1,
        seq,
        frame: MavFrame::GlobalRelativeAlt as u8,
        x: 24.6877 + f64::from(seq) * 1e-4,
        y: 46.7218,
        z: 10.0,
    }
}

#[test]
fn mission_upload_over_lossy_link_stores_in_order() {
    let link = SimLinkConfig {
        drop_probability: 0.2,
        ..SimLinkConfig::lossless(7)
    };
    let mut s = session_with(link, None);
    run(&mut s, &mut PassThrough, 2.0);
    let items: Vec<_> = (0..6).map(item).collect();
    let now = s.now_us();
    s.gcs.upload_mission(items.clone(), 10, now).unwrap();
    let mut outcome = None;
    for _ in 0..5000 {
        s.step(&mut PassThrough);
        if let Some(o) = s.gcs.take_mission_outcome() {
            outcome = Some(o);
            break;
        }
    }
    let outcome = outcome.expect("upload finished");
    assert!(outcome.is_complete());
    assert_eq!(outcome.acked(), &[0, 1, 2, 3, 4, 5]);
    assert_eq!(s.vehicle.state.mission, items);
    assert!(s.vehicle.state.set_mode(FlightMode::Loiter));
}

#[test]
fn mission_validation() {
    assert_eq!(validate_mission(&[], true), Err(GcsError::EmptyMission));
    let gap = [item(0), item(2)];
    assert!(matches!(
        validate_mission(&gap, true),
        Err(GcsError::NonContiguousSeq {
            index: 1,
            expected: 1,
            got: 2
        })
    ));
    assert!(validate_mission(&[item(1)], true).is_err());
    assert!(validate_mission(&[item(3), item(4)], false).is_ok());
}

#[test]
fn mission_files() {
    let text = "# seq frame lat lon alt\n0 0 24.68773 46.72185 612\n1 3 24.6880 46.7220 10\n\n2 3 24.6883 46.7222 15\n";
    let items = parse_mission_file(text, (1, 1)).unwrap();
    assert_eq!(items.len(), 3);
    assert_eq!(items[1].frame, MavFrame::GlobalRelativeAlt as u8);
    assert_eq!(items[2].z, 15.0);
    for bad in ["0 0 1 2", "0 7 1 2 3", "0 0 x 2 3", "1 3 1 2 3"] {
        assert!(parse_mission_file(bad, (1, 1)).is_err(), "{bad}");
    }
}
