//! Frame plumbing shared by the vehicle and the ground station: outgoing
//! sequencing and signing, incoming parsing and signature checks.

use crate::catalog::{Catalog, MavMessage};
use crate::frame::{seq_next, serialize_v1, serialize_v2, CrcVerdict, Frame, Version};
use crate::parser::Parser;
use crate::signing::{RejectReason, SigningContext, Verdict};

/// What happened to one received frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disposition {
    Accepted {
        msgid: u32,
    },
    CrcBad,
    Rejected(RejectReason),
    /// CRC and signature fine but the payload did not decode.
    Undecodable,
}

impl Disposition {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Disposition::Accepted { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Received {
    pub frame: Frame,
    pub raw: Vec<u8>,
    pub disposition: Disposition,
    pub message: Option<MavMessage>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EndpointCounters {
    pub sent: u64,
    pub accepted: u64,
    pub crc_bad: u64,
    pub rejected: u64,
}

/// One MAVLink system's view of a link.
#[derive(Debug)]
pub struct Endpoint {
    pub sysid: u8,
    pub compid: u8,
    pub link_id: u8,
    pub version: Version,
    seq: u8,
    catalog: &'static Catalog,
    signer: Option<SigningContext>,
    parser: Parser,
    counters: EndpointCounters,
    outbox: Vec<Vec<u8>>,
}

impl Endpoint {
    pub fn new(sysid: u8, compid: u8, link_id: u8) -> Self {
        Self {
            sysid,
            compid,
            link_id,
            version: Version::V2,
            seq: 0,
            catalog: Catalog::standard(),
            signer: None,
            parser: Parser::new(),
            counters: EndpointCounters::default(),
            outbox: Vec::new(),
        }
    }

    pub fn with_signer(mut self, signer: Option<SigningContext>) -> Self {
        self.signer = signer;
        self
    }

    pub fn catalog(&self) -> &'static Catalog {
        self.catalog
    }

    pub fn is_signing(&self) -> bool {
        self.signer.is_some()
    }

    pub fn counters(&self) -> EndpointCounters {
        self.counters
    }

    /// Next sequence number to be used.
    pub fn seq(&self) -> u8 {
        self.seq
    }

    /// Encodes `msg` with the next sequence number, signing when enabled.
    pub fn encode(&mut self, msg: &MavMessage) -> Vec<u8> {
        let seed = self
            .catalog
            .get(msg.msgid())
            .expect("typed messages are in the standard catalog")
            .crc_seed;
        let seq = self.seq;
        self.seq = seq_next(seq);
        self.counters.sent += 1;
        let encoded = match (self.version, self.signer.as_mut()) {
            (Version::V1, None) => {
                let f = msg
                    .to_frame_v1(self.catalog, seq, self.sysid, self.compid)
                    .expect("typed message encodes");
                serialize_v1(&f, seed)
            }
            (_, signer) => {
                let mut f = msg
                    .to_frame_v2(self.catalog, seq, self.sysid, self.compid)
                    .expect("typed message encodes");
                if let Some(s) = signer {
                    f = s.sign_frame(f, seed, self.link_id);
                }
                serialize_v2(&f, seed)
            }
        };
        encoded.expect("catalog payloads fit a frame")
    }

    pub fn queue(&mut self, msg: impl Into<MavMessage>) {
        let bytes = self.encode(&msg.into());
        self.outbox.push(bytes);
    }

    pub fn take_outbox(&mut self) -> Vec<Vec<u8>> {
        std::mem::take(&mut self.outbox)
    }

    /// Parses a complete datagram.
    pub fn receive_datagram(&mut self, bytes: &[u8]) -> Vec<Received> {
        let mut parsed = self.parser.feed(bytes, self.catalog);
        parsed.extend(self.parser.finish(self.catalog));
        self.classify(parsed)
    }

    /// Parses a chunk of a byte stream; incomplete frames stay buffered.
    pub fn receive_stream(&mut self, bytes: &[u8]) -> Vec<Received> {
        let parsed = self.parser.feed(bytes, self.catalog);
        self.classify(parsed)
    }

    fn classify(&mut self, parsed: Vec<crate::parser::ParsedFrame>) -> Vec<Received> {
        parsed
            .into_iter()
            .map(|p| {
                let mut message = None;
                let disposition = if p.verdict != CrcVerdict::CrcOk {
                    self.counters.crc_bad += 1;
                    Disposition::CrcBad
                } else {
                    let verdict = match self.signer.as_mut() {
                        Some(s) => s.verify_frame(&p.frame),
                        None => Verdict::Accept,
                    };
                    match verdict {
                        Verdict::Reject(reason) => {
                            self.counters.rejected += 1;
                            Disposition::Rejected(reason)
                        }
                        Verdict::Accept => match MavMessage::decode_frame(self.catalog, &p.frame) {
                            Ok(m) => {
                                self.counters.accepted += 1;
                                message = Some(m);
                                Disposition::Accepted {
                                    msgid: p.frame.msgid(),
                                }
                            }
                            Err(_) => Disposition::Undecodable,
                        },
                    }
                };
                Received {
                    frame: p.frame,
                    raw: p.raw,
                    disposition,
                    message,
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Heartbeat;
    use crate::clock::ManualClock;
    use crate::signing::SecretKey;
    use std::sync::Arc;

    fn signer(key: u8, clock: &ManualClock) -> SigningContext {
        SigningContext::new(SecretKey::from_bytes([key; 32]), Arc::new(clock.clone()))
    }

    #[test]
    fn unsigned_exchange() {
        let mut a = Endpoint::new(1, 1, 0);
        let mut b = Endpoint::new(255, 190, 0);
        a.queue(Heartbeat::default());
        a.queue(Heartbeat::default());
        let out = a.take_outbox();
        assert_eq!(out.len(), 2);
        let got = b.receive_datagram(&out[1]);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].frame.seq(), 1);
        assert!(got[0].disposition.is_accepted());
    }

    #[test]
    fn v1_endpoint_emits_v1() {
        let mut a = Endpoint::new(1, 1, 0);
        a.version = Version::V1;
        let bytes = a.encode(&Heartbeat::default().into());
        assert_eq!(bytes[0], crate::frame::STX_V1);
        assert_eq!(bytes.len(), 8 + 9);
    }

    #[test]
    fn signed_exchange_and_replay() {
        let clock = ManualClock::new(crate::clock::SIM_START_UNIX_MICROS);
        let mut a = Endpoint::new(1, 1, 0).with_signer(Some(signer(7, &clock)));
        let mut b = Endpoint::new(255, 190, 1).with_signer(Some(signer(7, &clock)));
        let bytes = a.encode(&Heartbeat::default().into());
        assert!(b.receive_datagram(&bytes)[0].disposition.is_accepted());
        assert_eq!(
            b.receive_datagram(&bytes)[0].disposition,
            Disposition::Rejected(RejectReason::ReplayOrStale)
        );
        let mut plain = Endpoint::new(1, 1, 0);
        let unsigned = plain.encode(&Heartbeat::default().into());
        assert_eq!(
            b.receive_datagram(&unsigned)[0].disposition,
            Disposition::Rejected(RejectReason::Unsigned)
        );
    }
}
