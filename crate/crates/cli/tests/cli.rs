//! End-to-end runs of the `mavkit` binary.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use mavkit_core::catalog::{Heartbeat, MavMessage};
use mavkit_core::transport::{capture_write, CaptureRecord, Direction};
use mavkit_core::Endpoint;

fn mavkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mavkit"))
        .args(args)
        .env_remove("MAVKIT_KEYFILE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn heartbeat(custom_mode: u32) -> MavMessage {
    Heartbeat {
        mav_type: 2,
        autopilot: 3,
        base_mode: 81,
        custom_mode,
        system_status: 3,
        mavlink_version: 3,
    }
    .into()
}

#[test]
fn catalog_lists_every_message() {
    let o = mavkit(&["catalog"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let ids: Vec<u32> = text
        .lines()
        .filter_map(|l| l.strip_prefix("msgid: "))
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(ids, vec![0, 1, 2, 33, 39, 76, 77]);
    assert_eq!(text.matches("crc_seed: ").count(), 7);
    let machine = stdout(&mavkit(&["catalog", "--machine"]));
    for line in machine.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["crc_seed"].is_u64());
    }
}

#[test]
fn mavdump_decodes_a_heartbeat_hex() {
    let bytes = Endpoint::new(1, 1, 0).encode(&heartbeat(5));
    let o = mavkit(&["mavdump", &hex::encode(&bytes)]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for want in [
        "msgid: 0",
        "name: HEARTBEAT",
        "field.custom_mode: 5",
        "crc_verdict: CRC OK",
        "signature_verdict: UNSIGNED",
    ] {
        assert!(
            text.lines().any(|l| l == want),
            "missing {want:?} in\n{text}"
        );
    }
}

#[test]
fn mavdump_reads_hex_from_stdin_and_machine_mode() {
    let bytes = Endpoint::new(1, 1, 0).encode(&heartbeat(10));
    let mut child = Command::new(env!("CARGO_BIN_EXE_mavkit"))
        .args(["mavdump", "--machine", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let spaced: Vec<String> = bytes.iter().map(|b| format!("{b:02x}")).collect();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(spaced.join(" ").as_bytes())
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["msgid"], 0);
    assert_eq!(v["fields"]["custom_mode"], 10);
    assert_eq!(v["crc_verdict"], "CRC OK");
}

#[test]
fn empty_input_is_an_empty_listing() {
    let o = mavkit(&["mavdump", ""]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.cap");
    std::fs::write(&path, b"").unwrap();
    let o = mavkit(&["mavdump", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
}

#[test]
fn tampered_capture_frame_shows_one_crc_bad() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flight.cap");
    let mut ep = Endpoint::new(1, 1, 0);
    let mut records: Vec<CaptureRecord> = (0..8u64)
        .map(|i| CaptureRecord {
            timestamp_us: i * 1_000_000,
            direction: Direction::ToGcs,
            frame: ep.encode(&heartbeat(i as u32)),
        })
        .collect();
    records[3].frame[12] ^= 0x10;
    capture_write(&path, &records).unwrap();
    let o = mavkit(&["mavdump", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains("CRC BAD")).count(), 1);
    assert_eq!(text.lines().filter(|l| l.contains("CRC OK")).count(), 7);
    assert!(text.contains("direction: to-gcs"));
}

#[test]
fn truncated_capture_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cut.cap");
    let rec = CaptureRecord {
        timestamp_us: 0,
        direction: Direction::ToVehicle,
        frame: Endpoint::new(1, 1, 0).encode(&heartbeat(0)),
    };
    capture_write(&path, &[rec.clone(), rec]).unwrap();
    let mut raw = std::fs::read(&path).unwrap();
    raw.truncate(raw.len() - 3);
    std::fs::write(&path, raw).unwrap();
    let o = mavkit(&["mavdump", "--capture", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn keygen_then_signed_frames_verify() {
    let dir = tempfile::tempdir().unwrap();
    let key_path = dir.path().join("link.key");
    let key = key_path.to_str().unwrap();
    let o = mavkit(&["keygen", key]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&key_path).unwrap();
    assert_eq!(text.len(), 65);
    assert_eq!(code(&mavkit(&["keygen", key])), 2, "refuses to overwrite");
    assert_eq!(code(&mavkit(&["keygen", "--force", key])), 0);

    // A loopback session records signed traffic with that key.
    let cap = dir.path().join("signed.cap");
    let o = mavkit(&[
        "gcs",
        "--loopback",
        "--signed",
        "--key",
        key,
        "--capture",
        cap.to_str().unwrap(),
        "cmd",
        "arm",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dump = stdout(&mavkit(&["mavdump", "--key", key, cap.to_str().unwrap()]));
    let verdicts: Vec<&str> = dump
        .lines()
        .filter(|l| l.starts_with("signature_verdict"))
        .collect();
    assert!(!verdicts.is_empty());
    assert!(
        verdicts.iter().all(|l| *l == "signature_verdict: SIG OK"),
        "{dump}"
    );

    let other = dir.path().join("other.key");
    mavkit(&["keygen", other.to_str().unwrap()]);
    let dump = stdout(&mavkit(&[
        "mavdump",
        "--key",
        other.to_str().unwrap(),
        cap.to_str().unwrap(),
    ]));
    assert!(dump
        .lines()
        .filter(|l| l.starts_with("signature_verdict"))
        .all(|l| l.ends_with("SIG BAD")));
}

#[test]
fn signed_without_key_is_a_usage_error() {
    assert_eq!(
        code(&mavkit(&["gcs", "--loopback", "--signed", "cmd", "arm"])),
        1
    );
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&mavkit(&["frobnicate"])), 1);
    assert_eq!(code(&mavkit(&[])), 1);
    assert_eq!(code(&mavkit(&["mavdump", "--hex", "zz"])), 1);
    assert_eq!(code(&mavkit(&["--help"])), 0);
}

#[test]
fn headless_sim_runs_a_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("battery.txt");
    std::fs::write(&sc, "t=2 set battery 50\n").unwrap();
    let o = mavkit(&["sim", "--duration", "5", "--scenario", sc.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("mode: STABILIZE"));
    assert!(text.contains("armed: false"));
    assert!(
        text.lines().any(|l| l.starts_with("battery_pct: 50")),
        "{text}"
    );
}

#[test]
fn loopback_takeoff_reaches_622() {
    let o = mavkit(&[
        "gcs",
        "--loopback",
        "--vehicle-mode",
        "guided",
        "--arm-first",
        "--after",
        "25",
        "cmd",
        "takeoff",
        "--alt",
        "10",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.matches("result: ACCEPTED").count(), 2);
    let alt: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("vehicle.alt_m: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((alt - 622.0).abs() <= 0.5, "{alt}");
}

#[test]
fn takeoff_without_arming_is_denied() {
    let o = mavkit(&["gcs", "--loopback", "cmd", "takeoff", "--alt", "10"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("result: DENIED"));
}

#[test]
fn loopback_mission_upload() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("square.mission");
    std::fs::write(
        &m,
        "# seq frame lat lon alt\n0 0 24.68773 46.72185 612\n1 3 24.68800 46.72185 10\n2 3 24.68800 46.72215 10\n",
    )
    .unwrap();
    let o = mavkit(&[
        "gcs",
        "--loopback",
        "mission",
        "upload",
        m.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::write(&m, "0 0 1 2 3\n2 3 1 2 3\n").unwrap();
    assert_eq!(
        code(&mavkit(&[
            "gcs",
            "--loopback",
            "mission",
            "upload",
            m.to_str().unwrap()
        ])),
        1
    );
}

#[test]
fn loopback_watch_prints_status() {
    let o = mavkit(&["gcs", "--loopback", "watch", "--duration", "3"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(
        text.matches("vehicle.mode: STABILIZE").count() >= 2,
        "{text}"
    );
}

#[test]
fn attack_matrix_exits_0() {
    let o = mavkit(&["attack", "--matrix"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.trim_end().ends_with("matrix: PASS"), "{text}");
    // Six attack rows plus the summary line.
    assert_eq!(text.lines().filter(|l| l.ends_with("PASS")).count(), 7);
}

#[test]
fn attack_scenario_with_summary() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("replay.scenario");
    std::fs::write(&sc, "attack = replay\nsigning = on\nseed = 4\n").unwrap();
    let summary = dir.path().join("out.json");
    let o = mavkit(&[
        "attack",
        "--scenario",
        sc.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("verdict: PASS"));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(v["attack"], "replay");
    assert_eq!(v["frames_accepted_by_victim"], 0);
    assert_eq!(v["mission_outcome"], "completed");
    assert_eq!(v["defended"], true);
    assert_eq!(v["target"], "vehicle");
}

#[test]
fn invalid_scenarios_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("bad.scenario");
    std::fs::write(&sc, "attack = replay\ntarget = gcs\n").unwrap();
    assert_eq!(
        code(&mavkit(&["attack", "--scenario", sc.to_str().unwrap()])),
        1
    );
    std::fs::write(&sc, "attack = teleport\n").unwrap();
    assert_eq!(
        code(&mavkit(&["attack", "--scenario", sc.to_str().unwrap()])),
        1
    );
    assert_eq!(code(&mavkit(&["attack"])), 1);
}

#[test]
fn udp_sim_and_gcs_talk() {
    let port = {
        let s = std::net::UdpSocket::bind("127.0.0.1:0").unwrap();
        s.local_addr().unwrap().port()
    };
    let addr = format!("127.0.0.1:{port}");
    let mut sim = Command::new(env!("CARGO_BIN_EXE_mavkit"))
        .args(["sim", "--udp", &format!(":{port}"), "--duration", "8"])
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    std::thread::sleep(std::time::Duration::from_millis(300));
    let o = mavkit(&["gcs", "--udp", &addr, "--timeout", "5", "cmd", "arm"]);
    let _ = sim.kill();
    let _ = sim.wait();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("result: ACCEPTED"));
}

#[test]
fn tcp_sim_and_gcs_watch() {
    let port = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let addr = format!("127.0.0.1:{port}");
    let mut sim = Command::new(env!("CARGO_BIN_EXE_mavkit"))
        .args(["sim", "--tcp", &addr, "--duration", "8"])
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let mut o = None;
    for _ in 0..20 {
        std::thread::sleep(std::time::Duration::from_millis(150));
        let r = mavkit(&[
            "gcs",
            "--tcp",
            &addr,
            "--timeout",
            "5",
            "watch",
            "--duration",
            "2",
        ]);
        if code(&r) == 0 {
            o = Some(r);
            break;
        }
    }
    let _ = sim.kill();
    let _ = sim.wait();
    let o = o.expect("gcs connected over tcp");
    assert!(stdout(&o).contains("vehicle.alive: true"));
}
