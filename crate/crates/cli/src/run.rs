use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Subcommand};
use serde_json::json;

use mavkit_core::catalog::{CommandLong, FlightMode, MavCmd, MavResult};
use mavkit_core::clock::{Clock, SystemClock};
use mavkit_core::gcs::{parse_mission_file, CommandOutcome, MissionOutcome};
use mavkit_core::session::PassThrough;
use mavkit_core::signing::{SecretKey, SigningContext};
use mavkit_core::transport::{
    capture_write, open_tcp_connect, open_tcp_listen, open_udp, CaptureRecord, CaptureWriter,
    Direction, Link, LinkError, SimLinkConfig,
};
use mavkit_core::vehicle::{GeoPoint, ScenarioScript};
use mavkit_core::{
    Autopilot, AutopilotConfig, Gcs, GcsConfig, Session, SessionConfig, VehicleState,
};

use crate::{runtime, CliError, CliResult, KeyArgs};

const TICK_US: u64 = 20_000;

#[derive(Debug, Args)]
pub struct LinkArgs {
    /// UDP address (`:14550` binds all interfaces).
    #[arg(long, conflicts_with = "tcp")]
    udp: Option<String>,
    /// TCP address.
    #[arg(long)]
    tcp: Option<String>,
    /// Require and emit signed frames.
    #[arg(long)]
    signed: bool,
    #[command(flatten)]
    key: KeyArgs,
    /// Record every frame to a capture file.
    #[arg(long)]
    capture: Option<PathBuf>,
    /// JSON output, one object per line.
    #[arg(long)]
    machine: bool,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    link: LinkArgs,
    /// Seed for the in-process link when no socket is given.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Timed events: `t=<sec> set battery N`, `t=<sec> inject wind N E`, ...
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Seconds to run; without a socket the default is 60.
    #[arg(long)]
    duration: Option<f64>,
    /// Home as `lat,lon,alt`.
    #[arg(long, default_value = "24.68773,46.72185,612")]
    home: String,
    /// Drop probability of the in-process link.
    #[arg(long, default_value_t = 0.0)]
    drop: f64,
}

#[derive(Debug, Args)]
pub struct GcsArgs {
    #[command(flatten)]
    link: LinkArgs,
    /// Run against an in-process simulated vehicle instead of a socket.
    #[arg(long, conflicts_with_all = ["udp", "tcp"])]
    loopback: bool,
    /// Loopback only: flight mode set on the vehicle before the action, as
    /// with the transmitter's mode switch.
    #[arg(long)]
    vehicle_mode: Option<String>,
    /// Loopback only: link seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Seconds to wait for the vehicle and for each transaction.
    #[arg(long, default_value_t = 10.0)]
    timeout: f64,
    /// Send ARM and require it to be accepted before the action.
    #[arg(long)]
    arm_first: bool,
    /// Seconds to keep running after the action completes.
    #[arg(long, default_value_t = 0.0)]
    after: f64,
    #[command(subcommand)]
    action: GcsAction,
}

#[derive(Debug, Subcommand)]
enum GcsAction {
    /// Send one COMMAND_LONG and wait for its ack.
    Cmd {
        #[command(subcommand)]
        cmd: CmdKind,
    },
    /// Mission transfer.
    Mission {
        #[command(subcommand)]
        op: MissionOp,
    },
    /// Print vehicle status once per second.
    Watch {
        /// Seconds to watch; without it a socket session runs until killed.
        #[arg(long)]
        duration: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
enum CmdKind {
    Takeoff {
        /// Altitude above home in meters.
        #[arg(long)]
        alt: f64,
    },
    Land,
    Arm,
    Disarm,
}

#[derive(Debug, Subcommand)]
enum MissionOp {
    /// Upload a mission file: one `seq frame x y z` line per item.
    Upload { file: PathBuf },
}

fn parse_home(s: &str) -> Result<GeoPoint, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("--home {s}: {e}")))?;
    match v[..] {
        [lat, lon, alt] if (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) => {
            Ok(GeoPoint::new(lat, lon, alt))
        }
        _ => Err(CliError::Usage(format!("--home {s}: expected lat,lon,alt"))),
    }
}

fn read_text(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn load_script(path: Option<&PathBuf>) -> Result<ScenarioScript, CliError> {
    match path {
        None => Ok(ScenarioScript::default()),
        Some(p) => ScenarioScript::parse(&read_text(p)?)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", p.display()))),
    }
}

enum Socket {
    Datagram(Box<dyn Link>),
    Stream(Box<dyn Link>),
}

impl Socket {
    fn link(&mut self) -> &mut dyn Link {
        match self {
            Socket::Datagram(l) | Socket::Stream(l) => l.as_mut(),
        }
    }

    fn is_stream(&self) -> bool {
        matches!(self, Socket::Stream(_))
    }

    fn send(&mut self, bytes: &[u8]) -> Result<(), CliError> {
        match self.link().send(bytes) {
            // No peer yet: a listening UDP endpoint has not heard from anyone.
            Ok(()) | Err(LinkError::NoPeer) => Ok(()),
            Err(e) => Err(runtime(e)),
        }
    }
}

fn open_socket(args: &LinkArgs, listen: bool) -> Result<Option<Socket>, CliError> {
    if let Some(addr) = &args.udp {
        let link = if listen {
            open_udp(addr, None)
        } else {
            open_udp("0.0.0.0:0", Some(addr))
        }
        .map_err(runtime)?;
        return Ok(Some(Socket::Datagram(Box::new(link))));
    }
    if let Some(addr) = &args.tcp {
        if listen {
            eprintln!("mavkit: waiting for a TCP client on {addr}");
        }
        let link = if listen {
            open_tcp_listen(addr)
        } else {
            open_tcp_connect(addr)
        }
        .map_err(runtime)?;
        return Ok(Some(Socket::Stream(Box::new(link))));
    }
    Ok(None)
}

fn print_event(machine: bool, t_s: f64, text: &str) {
    if machine {
        out!("{}", json!({"t_s": t_s, "event": text}));
    } else {
        out!("event: t={t_s:.2} {text}");
    }
}

fn print_state(machine: bool, t_s: f64, ap: &Autopilot) {
    let s = &ap.state;
    let c = ap.counters();
    let fields = [
        ("t_s", json!(t_s), format!("{t_s:.2}")),
        ("mode", json!(s.mode.name()), s.mode.name().to_string()),
        ("armed", json!(s.armed), s.armed.to_string()),
        ("crashed", json!(s.crashed), s.crashed.to_string()),
        (
            "lat_deg",
            json!(s.position.lat_deg),
            format!("{:.7}", s.position.lat_deg),
        ),
        (
            "lon_deg",
            json!(s.position.lon_deg),
            format!("{:.7}", s.position.lon_deg),
        ),
        (
            "alt_m",
            json!(s.position.alt_m),
            format!("{:.2}", s.position.alt_m),
        ),
        (
            "relative_alt_m",
            json!(s.relative_alt_m()),
            format!("{:.2}", s.relative_alt_m()),
        ),
        (
            "battery_pct",
            json!(s.battery_pct),
            format!("{:.1}", s.battery_pct),
        ),
        ("frames_sent", json!(c.sent), c.sent.to_string()),
        ("frames_accepted", json!(c.accepted), c.accepted.to_string()),
        ("frames_rejected", json!(c.rejected), c.rejected.to_string()),
        ("frames_crc_bad", json!(c.crc_bad), c.crc_bad.to_string()),
        (
            "alerts",
            json!(ap.alerts().len()),
            ap.alerts().len().to_string(),
        ),
    ];
    if machine {
        let obj: serde_json::Map<_, _> = fields
            .iter()
            .map(|(k, v, _)| (k.to_string(), v.clone()))
            .collect();
        out!("{}", serde_json::Value::Object(obj));
    } else {
        for (k, _, text) in fields {
            out!("{k}: {text}");
        }
    }
}

pub fn sim(args: &SimArgs) -> CliResult {
    let key = args.link.key.for_signing(args.link.signed)?;
    let home = parse_home(&args.home)?;
    let script = load_script(args.scenario.as_ref())?;
    if let Some(d) = args.duration {
        if !(d > 0.0 && d.is_finite()) {
            return Err(CliError::Usage("--duration must be positive".into()));
        }
    }
    match open_socket(&args.link, true)? {
        Some(sock) => sim_socket(args, sock, key, home, script),
        None => sim_inprocess(args, key, home, script),
    }
}

/// Vehicle plus a passive ground station over the simulated link.
fn sim_inprocess(
    args: &SimArgs,
    key: Option<SecretKey>,
    home: GeoPoint,
    script: ScenarioScript,
) -> CliResult {
    let link = SimLinkConfig {
        drop_probability: args.drop,
        ..SimLinkConfig::lossless(args.seed)
    };
    let mut session = Session::new(SessionConfig {
        link,
        key,
        home,
        capture: args.link.capture.is_some(),
        ..SessionConfig::default()
    })
    .map_err(|e| CliError::Usage(e.to_string()))?;
    session.vehicle.set_script(script);
    let duration = args.duration.unwrap_or(60.0);
    let mut shown = 0;
    let end = session.now_us() + (duration * 1e6) as u64;
    while session.now_us() < end {
        session.step(&mut PassThrough);
        let log = &session.vehicle.state.log;
        for e in &log[shown..] {
            print_event(args.link.machine, e.t_s, &e.event.to_string());
        }
        shown = log.len();
    }
    if let Some(path) = &args.link.capture {
        capture_write(path, &session.take_capture()).map_err(runtime)?;
    }
    print_state(args.link.machine, session.elapsed_s(), &session.vehicle);
    Ok(())
}

fn sim_socket(
    args: &SimArgs,
    mut sock: Socket,
    key: Option<SecretKey>,
    home: GeoPoint,
    script: ScenarioScript,
) -> CliResult {
    let clock: Arc<dyn Clock> = Arc::new(SystemClock);
    let start = clock.now_unix_micros();
    let signer = key.map(|k| SigningContext::new(k, clock.clone()));
    let mut ap = Autopilot::new(
        AutopilotConfig::default(),
        VehicleState::on_ground(home),
        signer,
        start,
    )
    .with_script(script);
    let mut capture = args
        .link
        .capture
        .as_ref()
        .map(CaptureWriter::create)
        .transpose()
        .map_err(runtime)?;
    let end = args.duration.map(|d| start + (d * 1e6) as u64);
    let mut next = start + TICK_US;
    let mut shown = 0;
    loop {
        let now = clock.now_unix_micros();
        if now >= next {
            ap.step(next);
            for bytes in ap.take_outbox() {
                if let Some(w) = capture.as_mut() {
                    w.write(&CaptureRecord {
                        timestamp_us: next,
                        direction: Direction::ToGcs,
                        frame: bytes.clone(),
                    })
                    .map_err(runtime)?;
                }
                sock.send(&bytes)?;
            }
            for e in &ap.state.log[shown..] {
                print_event(args.link.machine, e.t_s, &e.event.to_string());
            }
            shown = ap.state.log.len();
            if end.is_some_and(|e| next >= e) {
                break;
            }
            next += TICK_US;
            continue;
        }
        let stream = sock.is_stream();
        match sock.link().recv(Duration::from_micros(next - now)) {
            Ok(Some(bytes)) => {
                if let Some(w) = capture.as_mut() {
                    w.write(&CaptureRecord {
                        timestamp_us: now,
                        direction: Direction::ToVehicle,
                        frame: bytes.clone(),
                    })
                    .map_err(runtime)?;
                }
                if stream {
                    ap.receive_stream(&bytes, now);
                } else {
                    ap.receive_datagram(&bytes, now);
                }
            }
            Ok(None) => {}
            Err(LinkError::Closed) => break,
            Err(e) => return Err(runtime(e)),
        }
    }
    if let Some(w) = capture {
        w.finish().map_err(runtime)?;
    }
    print_state(
        args.link.machine,
        (clock.now_unix_micros() - start) as f64 / 1e6,
        &ap,
    );
    Ok(())
}

/// Something that advances a ground station in steps of one tick.
trait Driver {
    fn gcs(&mut self) -> &mut Gcs;
    fn now_us(&self) -> u64;
    fn advance(&mut self) -> CliResult;
    fn finish(&mut self) -> CliResult;
    /// The in-process session, when there is one.
    fn session(&mut self) -> Option<&mut Session> {
        None
    }
}

struct Loopback {
    session: Session,
    capture: Option<PathBuf>,
}

impl Driver for Loopback {
    fn gcs(&mut self) -> &mut Gcs {
        &mut self.session.gcs
    }

    fn now_us(&self) -> u64 {
        self.session.now_us()
    }

    fn advance(&mut self) -> CliResult {
        self.session.step(&mut PassThrough);
        Ok(())
    }

    fn session(&mut self) -> Option<&mut Session> {
        Some(&mut self.session)
    }

    fn finish(&mut self) -> CliResult {
        if let Some(path) = &self.capture {
            capture_write(path, &self.session.take_capture()).map_err(runtime)?;
        }
        Ok(())
    }
}

struct Remote {
    gcs: Gcs,
    sock: Socket,
    clock: SystemClock,
    next: u64,
    capture: Option<CaptureWriter>,
}

impl Remote {
    fn record(&mut self, t: u64, direction: Direction, frame: &[u8]) -> CliResult {
        if let Some(w) = self.capture.as_mut() {
            w.write(&CaptureRecord {
                timestamp_us: t,
                direction,
                frame: frame.to_vec(),
            })
            .map_err(runtime)?;
        }
        Ok(())
    }
}

impl Driver for Remote {
    fn gcs(&mut self) -> &mut Gcs {
        &mut self.gcs
    }

    fn now_us(&self) -> u64 {
        self.clock.now_unix_micros()
    }

    fn advance(&mut self) -> CliResult {
        loop {
            let now = self.clock.now_unix_micros();
            if now >= self.next {
                break;
            }
            let stream = self.sock.is_stream();
            match self
                .sock
                .link()
                .recv(Duration::from_micros(self.next - now))
            {
                Ok(Some(bytes)) => {
                    self.record(now, Direction::ToGcs, &bytes)?;
                    if stream {
                        self.gcs.receive_stream(&bytes, now);
                    } else {
                        self.gcs.receive_datagram(&bytes, now);
                    }
                }
                Ok(None) => {}
                Err(e) => return Err(runtime(e)),
            }
        }
        let now = self.next;
        self.next += TICK_US;
        self.gcs.poll(now);
        for bytes in self.gcs.take_outbox() {
            self.record(now, Direction::ToVehicle, &bytes)?;
            self.sock.send(&bytes)?;
        }
        Ok(())
    }

    fn finish(&mut self) -> CliResult {
        if let Some(w) = self.capture.take() {
            w.finish().map_err(runtime)?;
        }
        Ok(())
    }
}

/// Steps until `done` or `secs` pass; true if `done` held.
fn run_until(
    d: &mut dyn Driver,
    secs: f64,
    mut done: impl FnMut(&mut dyn Driver) -> bool,
) -> Result<bool, CliError> {
    let end = d.now_us() + (secs * 1e6) as u64;
    while d.now_us() < end {
        if done(d) {
            return Ok(true);
        }
        d.advance()?;
    }
    Ok(done(d))
}

fn result_name(result: u8) -> String {
    MavResult::from_u8(result)
        .map_or_else(|| result.to_string(), |r| format!("{r:?}").to_uppercase())
}

fn print_kv(machine: bool, pairs: &[(&str, serde_json::Value)]) {
    if machine {
        let obj: serde_json::Map<_, _> = pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        out!("{}", serde_json::Value::Object(obj));
    } else {
        for (k, v) in pairs {
            match v {
                serde_json::Value::String(s) => out!("{k}: {s}"),
                other => out!("{k}: {other}"),
            }
        }
    }
}

fn print_view(machine: bool, gcs: &Gcs) {
    let Some(v) = gcs.vehicle() else {
        print_kv(machine, &[("vehicle", json!("none"))]);
        return;
    };
    let pos = v.position.unwrap_or_default();
    print_kv(
        machine,
        &[
            ("vehicle.sysid", json!(v.sysid)),
            ("vehicle.alive", json!(v.alive)),
            (
                "vehicle.mode",
                json!(v.mode.map_or("UNKNOWN", |m| m.name())),
            ),
            ("vehicle.armed", json!(v.armed)),
            ("vehicle.lat_deg", json!(pos.lat_deg)),
            ("vehicle.lon_deg", json!(pos.lon_deg)),
            ("vehicle.alt_m", json!((pos.alt_m * 100.0).round() / 100.0)),
            (
                "vehicle.relative_alt_m",
                json!((pos.relative_alt_m * 100.0).round() / 100.0),
            ),
            ("vehicle.battery_pct", json!(v.battery_pct)),
            ("vehicle.heartbeats", json!(v.heartbeats)),
            ("link.drop_ratio", json!(v.link.drop_ratio())),
            ("alerts", json!(gcs.alerts().len())),
        ],
    );
}

fn command_for(kind: &CmdKind) -> CommandLong {
    match kind {
        CmdKind::Takeoff { alt } => {
            CommandLong::new(MavCmd::Takeoff as u16, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, *alt])
        }
        CmdKind::Land => CommandLong::new(MavCmd::Land as u16, [0.0; 7]),
        CmdKind::Arm => CommandLong::new(
            MavCmd::ArmDisarm as u16,
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        ),
        CmdKind::Disarm => CommandLong::new(MavCmd::ArmDisarm as u16, [0.0; 7]),
    }
}

pub fn gcs(args: &GcsArgs) -> CliResult {
    let key = args.link.key.for_signing(args.link.signed)?;
    if !(args.timeout > 0.0 && args.after >= 0.0) {
        return Err(CliError::Usage(
            "--timeout must be positive and --after non-negative".into(),
        ));
    }
    if args.vehicle_mode.is_some() && !args.loopback {
        return Err(CliError::Usage("--vehicle-mode needs --loopback".into()));
    }
    let mut driver: Box<dyn Driver> = if args.loopback {
        let session = Session::new(SessionConfig {
            link: SimLinkConfig::lossless(args.seed),
            key,
            capture: args.link.capture.is_some(),
            ..SessionConfig::default()
        })
        .map_err(runtime)?;
        Box::new(Loopback {
            session,
            capture: args.link.capture.clone(),
        })
    } else {
        let sock = open_socket(&args.link, false)?
            .ok_or_else(|| CliError::Usage("gcs needs --udp, --tcp or --loopback".into()))?;
        let clock = SystemClock;
        let signer = key.map(|k| SigningContext::new(k, Arc::new(clock)));
        let capture = args
            .link
            .capture
            .as_ref()
            .map(CaptureWriter::create)
            .transpose()
            .map_err(runtime)?;
        Box::new(Remote {
            gcs: Gcs::new(GcsConfig::default(), signer),
            sock,
            next: clock.now_unix_micros() + TICK_US,
            clock,
            capture,
        })
    };
    let d = driver.as_mut();
    let machine = args.link.machine;

    if let GcsAction::Watch { duration } = &args.action {
        let res = watch(d, *duration, machine);
        d.finish()?;
        return res;
    }

    if !run_until(d, args.timeout, |d| {
        d.gcs().vehicle().is_some_and(|v| v.alive)
    })? {
        d.finish()?;
        return Err(CliError::Runtime("no vehicle heartbeat".into()));
    }
    if let Some(name) = &args.vehicle_mode {
        let mode = FlightMode::from_name(&name.to_ascii_uppercase())
            .ok_or_else(|| CliError::Usage(format!("unknown flight mode {name}")))?;
        let session = d.session().expect("--vehicle-mode implies --loopback");
        if !session.vehicle.state.set_mode(mode) {
            return Err(CliError::Runtime(format!(
                "vehicle refused mode {}",
                mode.name()
            )));
        }
    }

    if args.arm_first && !send_and_report(d, command_for(&CmdKind::Arm), args.timeout, machine)? {
        print_view(machine, d.gcs());
        d.finish()?;
        return Err(CliError::Runtime("vehicle refused to arm".into()));
    }

    let ok = match &args.action {
        GcsAction::Cmd { cmd } => send_and_report(d, command_for(cmd), args.timeout, machine)?,
        GcsAction::Mission {
            op: MissionOp::Upload { file },
        } => {
            let cfg = d.gcs().config().clone();
            let items =
                parse_mission_file(&read_text(file)?, (cfg.target_sysid, cfg.target_compid))
                    .map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
            let now = d.now_us();
            let n = items.len();
            d.gcs().upload_mission(items, 3, now).map_err(runtime)?;
            let mut outcome = None;
            run_until(d, args.timeout * n as f64, |d| {
                outcome = d.gcs().take_mission_outcome();
                outcome.is_some()
            })?;
            let (text, ok) = match &outcome {
                Some(MissionOutcome::Complete { .. }) => ("COMPLETE".to_string(), true),
                Some(MissionOutcome::Rejected { seq, result, .. }) => (
                    format!("REJECTED seq={seq} result={}", result_name(*result)),
                    false,
                ),
                Some(MissionOutcome::TimedOut { seq, .. }) => (format!("TIMEOUT seq={seq}"), false),
                None => ("TIMEOUT".to_string(), false),
            };
            let acked = outcome.as_ref().map_or(0, |o| o.acked().len());
            print_kv(
                machine,
                &[
                    ("mission_items", json!(n)),
                    ("acked", json!(acked)),
                    ("result", json!(text)),
                ],
            );
            ok
        }
        GcsAction::Watch { .. } => unreachable!("handled above"),
    };

    if args.after > 0.0 {
        run_until(d, args.after, |_| false)?;
    }
    print_view(machine, d.gcs());
    d.finish()?;
    if ok {
        Ok(())
    } else {
        Err(CliError::Runtime(
            "vehicle did not accept the request".into(),
        ))
    }
}

fn send_and_report(
    d: &mut dyn Driver,
    c: CommandLong,
    timeout: f64,
    machine: bool,
) -> Result<bool, CliError> {
    let now = d.now_us();
    d.gcs().send_command(c, 3, now).map_err(runtime)?;
    let mut outcome = None;
    run_until(d, timeout, |d| {
        outcome = d.gcs().take_command_outcome();
        outcome.is_some()
    })?;
    let ok = match outcome {
        Some(CommandOutcome::Acked {
            command,
            result,
            confirmations,
        }) => {
            print_kv(
                machine,
                &[
                    ("command", json!(command)),
                    ("result", json!(result_name(result))),
                    ("transmissions", json!(confirmations.len())),
                ],
            );
            result == MavResult::Accepted as u8
        }
        Some(CommandOutcome::Timeout {
            command,
            confirmations,
        }) => {
            print_kv(
                machine,
                &[
                    ("command", json!(command)),
                    ("result", json!("TIMEOUT")),
                    ("transmissions", json!(confirmations.len())),
                ],
            );
            false
        }
        None => {
            print_kv(
                machine,
                &[("command", json!(c.command)), ("result", json!("TIMEOUT"))],
            );
            false
        }
    };
    Ok(ok)
}

fn watch(d: &mut dyn Driver, duration: Option<f64>, machine: bool) -> CliResult {
    let start = d.now_us();
    let end = duration.map(|s| start + (s * 1e6) as u64);
    let mut next_report = start + 1_000_000;
    let mut alerts_shown = 0;
    while end.is_none_or(|e| d.now_us() < e) {
        d.advance()?;
        let now = d.now_us();
        let alerts = d.gcs().alerts();
        for a in &alerts[alerts_shown..] {
            if machine {
                out!("{}", serde_json::to_string(a).map_err(runtime)?);
            } else {
                out!("{a}");
            }
        }
        alerts_shown = alerts.len();
        if now >= next_report {
            next_report += 1_000_000;
            print_kv(
                machine,
                &[("t_s", json!(((now - start) as f64 / 1e6).round()))],
            );
            print_view(machine, d.gcs());
        }
    }
    Ok(())
}
