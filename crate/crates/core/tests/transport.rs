//! Sim link loss and determinism, sequence statistics, sockets and captures.

use std::sync::Arc;
use std::time::Duration;

use mavkit_core::catalog::{CommandAck, MavMessage};
use mavkit_core::clock::ManualClock;
use mavkit_core::transport::net::{accept_one, tcp_listener};
use mavkit_core::transport::stats::REORDER_THRESHOLD;
use mavkit_core::transport::{
    capture_read, capture_write, open_tcp_connect, open_udp, sim_link, CaptureRecord, Direction,
    Link, LinkStats, SimChannel, SimLinkConfig,
};
use mavkit_core::{Endpoint, Parser};
use proptest::prelude::*;

fn ack() -> MavMessage {
    CommandAck {
        command: 1,
        result: 0,
    }
    .into()
}

#[test]
fn ten_percent_drop_over_10000_frames() {
    let mut tx = Endpoint::new(1, 1, 0);
    let mut ch: SimChannel = SimChannel::new(SimLinkConfig {
        drop_probability: 0.10,
        ..SimLinkConfig::lossless(20260101)
    });
    let mut stats = LinkStats::new();
    for i in 0..10_000u64 {
        ch.send(i * 1000, tx.encode(&ack()), ());
        for (bytes, ()) in ch.poll(i * 1000) {
            stats.update(bytes[4]);
        }
    }
    let c = ch.counters();
    // The channel's own count is the oracle; the SEQ-gap estimate must agree
    // except for drops after the last delivered frame.
    let true_ratio = c.dropped as f64 / c.sent as f64;
    assert_eq!(stats.received, c.delivered);
    assert!(c.dropped - stats.lost <= 5, "{c:?} {stats:?}");
    let r = stats.drop_ratio();
    assert!((r - 0.10).abs() <= 0.01, "measured {r}");
    assert!((true_ratio - 0.10).abs() <= 0.01, "true {true_ratio}");
}

#[test]
fn wraparound_counts_no_loss() {
    let mut s = LinkStats::new();
    for i in 0..1000u32 {
        s.update((i % 256) as u8);
    }
    assert_eq!((s.received, s.lost), (1000, 0));
    let mut s = LinkStats::new();
    s.update(255);
    s.update(0);
    assert_eq!(s.lost, 0);
}

#[test]
fn large_backward_jumps_are_reordering() {
    let mut s = LinkStats::new();
    s.update(100);
    // A gap of exactly the threshold is not counted.
    s.update(100u8.wrapping_add(1).wrapping_add(REORDER_THRESHOLD));
    assert_eq!(s.lost, 0);
    // A late frame arriving one step behind.
    s.update(100u8.wrapping_add(REORDER_THRESHOLD));
    assert_eq!(s.lost, 0);
    // The largest counted gap.
    let mut s = LinkStats::new();
    s.update(0);
    s.update(REORDER_THRESHOLD);
    assert_eq!(s.lost, u64::from(REORDER_THRESHOLD) - 1);
}

proptest! {
    /// Against a straightforward model of which frames arrived.
    #[test]
    fn loss_matches_model(kept in proptest::collection::vec(proptest::bool::weighted(0.8), 1..2000)) {
        let mut s = LinkStats::new();
        let mut first = None;
        let mut last = None;
        let mut run = 0usize;
        let mut max_run = 0usize;
        for (i, k) in kept.iter().enumerate() {
            if *k {
                s.update((i % 256) as u8);
                first.get_or_insert(i);
                last = Some(i);
                run = 0;
            } else {
                run += 1;
                max_run = max_run.max(run);
            }
        }
        prop_assume!(max_run < 128);
        if let (Some(a), Some(b)) = (first, last) {
            let received = kept.iter().filter(|k| **k).count();
            prop_assert_eq!(s.received as usize, received);
            prop_assert_eq!(s.lost as usize, b - a + 1 - received);
        }
    }

    #[test]
    fn same_seed_same_trace(seed in any::<u64>(), drop in 0.0f64..0.5, corrupt in 0.0f64..0.5) {
        let cfg = SimLinkConfig { drop_probability: drop, corrupt_probability: corrupt, ..SimLinkConfig::lossless(seed) };
        let run = || {
            let mut ch: SimChannel = SimChannel::new(cfg.clone());
            let mut trace = Vec::new();
            for i in 0..200u64 {
                ch.send(i, vec![i as u8; 20], ());
                trace.extend(ch.poll(i).into_iter().map(|(b, ())| b));
            }
            trace
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn corruption_flips_exactly_one_bit(seed in any::<u64>()) {
        let mut ch: SimChannel = SimChannel::new(SimLinkConfig { corrupt_probability: 1.0, ..SimLinkConfig::lossless(seed) });
        let original = vec![0x33u8; 40];
        ch.send(0, original.clone(), ());
        let (got, ()) = ch.poll(0).pop().unwrap();
        let flipped: u32 = got.iter().zip(&original).map(|(a, b)| (a ^ b).count_ones()).sum();
        prop_assert_eq!(flipped, 1);
    }
}

#[test]
fn invalid_probabilities_are_rejected() {
    for p in [-0.1, 1.1, f64::NAN] {
        let cfg = SimLinkConfig {
            drop_probability: p,
            ..SimLinkConfig::lossless(0)
        };
        assert!(cfg.validate().is_err());
        assert!(sim_link(cfg, Arc::new(ManualClock::new(0))).is_err());
    }
}

#[test]
fn sim_endpoints_honour_delay() {
    let clock = ManualClock::new(1_000_000);
    let cfg = SimLinkConfig {
        delay: Duration::from_millis(5),
        ..SimLinkConfig::lossless(3)
    };
    let (mut a, mut b) = sim_link(cfg, Arc::new(clock.clone())).unwrap();
    a.send(b"hello").unwrap();
    assert_eq!(b.recv(Duration::ZERO).unwrap(), None);
    clock.advance(5_000);
    assert_eq!(
        b.recv(Duration::ZERO).unwrap().as_deref(),
        Some(&b"hello"[..])
    );
    b.send(b"back").unwrap();
    clock.advance(5_000);
    assert_eq!(
        a.recv(Duration::ZERO).unwrap().as_deref(),
        Some(&b"back"[..])
    );
}

#[test]
fn udp_loopback_exchange() {
    let mut server = open_udp("127.0.0.1:0", None).unwrap();
    let addr = server.local_addr().unwrap().to_string();
    let mut client = open_udp("127.0.0.1:0", Some(&addr)).unwrap();
    let mut tx = Endpoint::new(255, 190, 0);
    let mut rx = Endpoint::new(1, 1, 0);
    for _ in 0..20 {
        client.send(&tx.encode(&ack())).unwrap();
    }
    let mut got = 0;
    while let Some(d) = server.recv(Duration::from_millis(500)).unwrap() {
        got += rx
            .receive_datagram(&d)
            .iter()
            .filter(|r| r.disposition.is_accepted())
            .count();
        if got == 20 {
            break;
        }
    }
    assert_eq!(got, 20);
    // The server learned the client's address and can reply.
    server.send(&rx.encode(&ack())).unwrap();
    let reply = client.recv(Duration::from_millis(500)).unwrap().unwrap();
    assert!(tx.receive_datagram(&reply)[0].disposition.is_accepted());
}

#[test]
fn tcp_loopback_stream_reassembles_frames() {
    let listener = tcp_listener("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let handle = std::thread::spawn(move || {
        let mut client = open_tcp_connect(&addr).unwrap();
        let mut tx = Endpoint::new(255, 190, 0);
        let bytes: Vec<u8> = (0..100).flat_map(|_| tx.encode(&ack())).collect();
        for chunk in bytes.chunks(7) {
            client.send(chunk).unwrap();
        }
        client.close();
    });
    let mut server = accept_one(&listener).unwrap();
    let mut rx = Endpoint::new(1, 1, 0);
    let mut got = 0;
    loop {
        match server.recv(Duration::from_secs(2)) {
            Ok(Some(chunk)) => {
                got += rx
                    .receive_stream(&chunk)
                    .iter()
                    .filter(|r| r.disposition.is_accepted())
                    .count()
            }
            Ok(None) => break,
            Err(_) => break,
        }
    }
    handle.join().unwrap();
    assert_eq!(got, 100);
}

#[test]
fn capture_files_round_trip_and_parse() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.cap");
    let mut tx = Endpoint::new(1, 1, 0);
    let records: Vec<CaptureRecord> = (0..10u64)
        .map(|i| CaptureRecord {
            timestamp_us: i * 20_000,
            direction: if i % 2 == 0 {
                Direction::ToGcs
            } else {
                Direction::ToVehicle
            },
            frame: tx.encode(&ack()),
        })
        .collect();
    capture_write(&path, &records).unwrap();
    let raw = std::fs::read(&path).unwrap();
    assert_eq!(
        raw.len(),
        records.iter().map(|r| 11 + r.frame.len()).sum::<usize>()
    );
    assert_eq!(&raw[..8], &0u64.to_le_bytes());
    assert_eq!(raw[8], 1);
    let back = capture_read(&path).unwrap();
    assert_eq!(back, records);
    let mut p = Parser::new();
    let n: usize = back
        .iter()
        .map(|r| p.feed(&r.frame, mavkit_core::Catalog::standard()).len())
        .sum();
    assert_eq!(n, 10);
}
