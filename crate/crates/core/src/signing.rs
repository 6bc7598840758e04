//! MAVLink 2.0 message signing and per-stream replay protection.
//!
//! The 48-bit tag is the first 6 bytes of
//! `SHA-256(key || STX..CRC || link_id || timestamp[6 LE])`.
//! Incoming signed frames are checked in this order: signature, then
//! stream timestamp monotonicity, then clock skew (one minute either way).

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::clock::Clock;
use crate::frame::{Frame, FrameV2, SignatureBlock, INCOMPAT_SIGNED, TIMESTAMP_MASK};

/// 2015-01-01T00:00:00Z in Unix seconds.
pub const SIGNING_EPOCH_UNIX_SECS: u64 = 1_420_070_400;

/// Timestamp units per second (10 microsecond ticks).
pub const TICKS_PER_SECOND: u64 = 100_000;

/// Maximum tolerated distance between a frame timestamp and local time.
pub const SKEW_LIMIT_TICKS: u64 = 60 * TICKS_PER_SECOND;

#[derive(Debug, Error)]
pub enum KeyError {
    #[error("bad key file: {0}")]
    BadKeyFile(String),
    #[error("key file i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// 32-byte shared secret.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey([u8; 32]);

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

impl SecretKey {
    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn generate<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut k = [0u8; 32];
        rng.fill_bytes(&mut k);
        Self(k)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    /// Exactly 64 hex characters, optionally followed by one newline.
    pub fn from_hex_file_contents(text: &str) -> Result<Self, KeyError> {
        let body = text
            .strip_suffix("\r\n")
            .or_else(|| text.strip_suffix('\n'))
            .unwrap_or(text);
        if body.len() != 64 {
            return Err(KeyError::BadKeyFile(format!(
                "expected 64 hex characters, found {}",
                body.len()
            )));
        }
        let mut k = [0u8; 32];
        hex::decode_to_slice(body, &mut k).map_err(|e| KeyError::BadKeyFile(e.to_string()))?;
        Ok(Self(k))
    }
}

pub fn keygen<R: RngCore + ?Sized>(entropy: &mut R) -> SecretKey {
    SecretKey::generate(entropy)
}

pub fn store_key(key: &SecretKey, path: impl AsRef<Path>) -> Result<(), KeyError> {
    fs::write(path, format!("{}\n", key.to_hex()))?;
    Ok(())
}

pub fn load_key(path: impl AsRef<Path>) -> Result<SecretKey, KeyError> {
    let text = fs::read_to_string(path)?;
    SecretKey::from_hex_file_contents(&text)
}

/// Identifies a signing stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StreamKey {
    pub sysid: u8,
    pub compid: u8,
    pub link_id: u8,
}

/// What to do with frames that carry no signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnsignedPolicy {
    #[default]
    Reject,
    Accept,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum RejectReason {
    Unsigned,
    BadSignature,
    ReplayOrStale,
    ClockSkew,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::Unsigned => "unsigned",
            RejectReason::BadSignature => "bad-signature",
            RejectReason::ReplayOrStale => "replay-or-stale",
            RejectReason::ClockSkew => "clock-skew",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }
}

/// Current time in signing ticks.
pub fn timestamp_now(clock: &dyn Clock) -> u64 {
    timestamp_from_unix_micros(clock.now_unix_micros())
}

pub fn timestamp_from_unix_micros(unix_micros: u64) -> u64 {
    let since = unix_micros.saturating_sub(SIGNING_EPOCH_UNIX_SECS * 1_000_000);
    (since / 10) & TIMESTAMP_MASK
}

/// The 48-bit tag for `frame` as carried, with the given link and time.
pub fn compute_sig48(key: &SecretKey, frame: &FrameV2, link_id: u8, timestamp: u64) -> [u8; 6] {
    let mut h = Sha256::new();
    h.update(key.as_bytes());
    h.update(frame.signed_region());
    h.update([link_id]);
    h.update(&timestamp.to_le_bytes()[..6]);
    let digest = h.finalize();
    let mut out = [0u8; 6];
    out.copy_from_slice(&digest[..6]);
    out
}

/// Signing state for one link.
pub struct SigningContext {
    key: SecretKey,
    last_timestamp: HashMap<StreamKey, u64>,
    out_timestamp: u64,
    clock: Arc<dyn Clock>,
    unsigned_policy: UnsignedPolicy,
}

impl fmt::Debug for SigningContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SigningContext")
            .field("streams", &self.last_timestamp.len())
            .field("out_timestamp", &self.out_timestamp)
            .field("unsigned_policy", &self.unsigned_policy)
            .finish()
    }
}

impl SigningContext {
    pub fn new(key: SecretKey, clock: Arc<dyn Clock>) -> Self {
        Self {
            key,
            last_timestamp: HashMap::new(),
            out_timestamp: 0,
            clock,
            unsigned_policy: UnsignedPolicy::Reject,
        }
    }

    pub fn with_unsigned_policy(mut self, policy: UnsignedPolicy) -> Self {
        self.unsigned_policy = policy;
        self
    }

    pub fn unsigned_policy(&self) -> UnsignedPolicy {
        self.unsigned_policy
    }

    pub fn out_timestamp(&self) -> u64 {
        self.out_timestamp
    }

    pub fn last_timestamp(&self, stream: &StreamKey) -> Option<u64> {
        self.last_timestamp.get(stream).copied()
    }

    pub fn now(&self) -> u64 {
        timestamp_now(self.clock.as_ref())
    }

    /// Seals `frame` with `seed`, sets the signed flag and appends a fresh
    /// signature block. Timestamps strictly increase even if the clock
    /// stalls.
    pub fn sign_frame(&mut self, mut frame: FrameV2, seed: u8, link_id: u8) -> FrameV2 {
        let ts = self.now().max(self.out_timestamp + 1) & TIMESTAMP_MASK;
        self.out_timestamp = ts;
        frame.incompat_flags |= INCOMPAT_SIGNED;
        frame.crc = frame.frame_crc(seed);
        let sig48 = compute_sig48(&self.key, &frame, link_id, ts);
        frame.signature = Some(SignatureBlock {
            link_id,
            timestamp: ts,
            sig48,
        });
        frame
    }

    /// Checks a CRC-valid frame. Accepting a signed frame advances its
    /// stream's last timestamp.
    pub fn verify_frame(&mut self, frame: &Frame) -> Verdict {
        let v2 = match frame {
            Frame::V2(f) if f.signature.is_some() => f,
            _ => {
                return match self.unsigned_policy {
                    UnsignedPolicy::Accept => Verdict::Accept,
                    UnsignedPolicy::Reject => Verdict::Reject(RejectReason::Unsigned),
                }
            }
        };
        let sig = v2.signature.expect("checked above");
        if compute_sig48(&self.key, v2, sig.link_id, sig.timestamp) != sig.sig48 {
            return Verdict::Reject(RejectReason::BadSignature);
        }
        let stream = StreamKey {
            sysid: v2.sysid,
            compid: v2.compid,
            link_id: sig.link_id,
        };
        if let Some(&last) = self.last_timestamp.get(&stream) {
            if sig.timestamp <= last {
                return Verdict::Reject(RejectReason::ReplayOrStale);
            }
        }
        if sig.timestamp.abs_diff(self.now()) > SKEW_LIMIT_TICKS {
            return Verdict::Reject(RejectReason::ClockSkew);
        }
        self.last_timestamp.insert(stream, sig.timestamp);
        Verdict::Accept
    }
}
