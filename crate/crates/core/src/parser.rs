//! Streaming frame parser with one-byte-shift resynchronization.

use crate::frame::{
    parse_bytes, CrcVerdict, Frame, SeedLookup, INCOMPAT_SIGNED, SIGNATURE_LEN, STX_V1, STX_V2,
    V1_HEADER_LEN, V1_OVERHEAD, V2_HEADER_LEN, V2_OVERHEAD,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParserMode {
    #[default]
    Idle,
    CollectingV1,
    CollectingV2,
}

/// Monotone parser counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParserCounters {
    pub frames_ok: u64,
    pub frames_bad_crc: u64,
    pub bytes_discarded: u64,
}

/// A frame recovered from the stream, with its exact wire bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedFrame {
    pub frame: Frame,
    pub verdict: CrcVerdict,
    pub raw: Vec<u8>,
}

impl ParsedFrame {
    pub fn is_ok(&self) -> bool {
        self.verdict == CrcVerdict::CrcOk
    }
}

/// Incremental parser for one input stream. Both protocol versions may be
/// interleaved. Signatures are carried through unverified.
#[derive(Debug, Default)]
pub struct Parser {
    buf: Vec<u8>,
    mode: ParserMode,
    counters: ParserCounters,
}

enum Step {
    Emit(ParsedFrame, usize),
    Shift,
    Wait,
}

impl Parser {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mode(&self) -> ParserMode {
        self.mode
    }

    pub fn counters(&self) -> ParserCounters {
        self.counters
    }

    /// Bytes held back waiting for the rest of a candidate frame.
    pub fn pending(&self) -> usize {
        self.buf.len()
    }

    pub fn feed(&mut self, bytes: &[u8], seeds: &dyn SeedLookup) -> Vec<ParsedFrame> {
        self.buf.extend_from_slice(bytes);
        self.scan(seeds, false)
    }

    /// Resolves any incomplete candidate at end of input by shifting past
    /// its start byte and rescanning. Leaves the buffer empty.
    pub fn finish(&mut self, seeds: &dyn SeedLookup) -> Vec<ParsedFrame> {
        self.scan(seeds, true)
    }

    fn scan(&mut self, seeds: &dyn SeedLookup, at_end: bool) -> Vec<ParsedFrame> {
        let mut out = Vec::new();
        let mut pos = 0;
        loop {
            let Some(offset) = self.buf[pos..]
                .iter()
                .position(|&b| b == STX_V1 || b == STX_V2)
            else {
                self.counters.bytes_discarded += (self.buf.len() - pos) as u64;
                pos = self.buf.len();
                self.mode = ParserMode::Idle;
                break;
            };
            self.counters.bytes_discarded += offset as u64;
            pos += offset;

            match self.try_candidate(&self.buf[pos..], seeds) {
                Step::Emit(parsed, used) => {
                    if parsed.is_ok() {
                        self.counters.frames_ok += 1;
                        pos += used;
                    } else {
                        self.counters.frames_bad_crc += 1;
                        self.counters.bytes_discarded += 1;
                        pos += 1;
                    }
                    out.push(parsed);
                }
                Step::Shift => {
                    self.counters.bytes_discarded += 1;
                    pos += 1;
                }
                Step::Wait if at_end => {
                    self.counters.bytes_discarded += 1;
                    pos += 1;
                }
                Step::Wait => {
                    self.mode = if self.buf[pos] == STX_V1 {
                        ParserMode::CollectingV1
                    } else {
                        ParserMode::CollectingV2
                    };
                    break;
                }
            }
        }
        self.buf.drain(..pos);
        if self.buf.is_empty() {
            self.mode = ParserMode::Idle;
        }
        out
    }

    fn try_candidate(&self, cand: &[u8], seeds: &dyn SeedLookup) -> Step {
        let (header_len, msgid, total) = if cand[0] == STX_V1 {
            if cand.len() < V1_HEADER_LEN {
                return Step::Wait;
            }
            (
                V1_HEADER_LEN,
                u32::from(cand[5]),
                V1_OVERHEAD + usize::from(cand[1]),
            )
        } else {
            if cand.len() < V2_HEADER_LEN {
                return Step::Wait;
            }
            let sig = if cand[2] & INCOMPAT_SIGNED != 0 {
                SIGNATURE_LEN
            } else {
                0
            };
            let msgid = u32::from_le_bytes([cand[7], cand[8], cand[9], 0]);
            (
                V2_HEADER_LEN,
                msgid,
                V2_OVERHEAD + usize::from(cand[1]) + sig,
            )
        };
        debug_assert!(cand.len() >= header_len);
        if seeds.crc_seed(msgid).is_none() {
            return Step::Shift;
        }
        if cand.len() < total {
            return Step::Wait;
        }
        let raw = &cand[..total];
        match parse_bytes(raw, seeds) {
            Ok((frame, verdict)) => Step::Emit(
                ParsedFrame {
                    frame,
                    verdict,
                    raw: raw.to_vec(),
                },
                total,
            ),
            Err(_) => Step::Shift,
        }
    }
}
