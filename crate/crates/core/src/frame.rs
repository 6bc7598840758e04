//! MAVLink 1.0 and 2.0 frame layout, checksum and serialization.

use thiserror::Error;

use crate::crc::Crc16;

pub const STX_V1: u8 = 0xFE;
pub const STX_V2: u8 = 0xFD;

/// STX, LEN, SEQ, SYS, COMP, MSG.
pub const V1_HEADER_LEN: usize = 6;
/// STX, LEN, INCOMPAT, COMPAT, SEQ, SYS, COMP, MSGID x3.
pub const V2_HEADER_LEN: usize = 10;
pub const CHECKSUM_LEN: usize = 2;
pub const SIGNATURE_LEN: usize = 13;
pub const MAX_PAYLOAD_LEN: usize = 255;
pub const V1_OVERHEAD: usize = V1_HEADER_LEN + CHECKSUM_LEN;
pub const V2_OVERHEAD: usize = V2_HEADER_LEN + CHECKSUM_LEN;
pub const MAX_MSGID_V2: u32 = 0x00FF_FFFF;

/// Incompatibility flag marking a signed frame.
pub const INCOMPAT_SIGNED: u8 = 0x01;

/// Signature timestamps are 48 bits wide.
pub const TIMESTAMP_MASK: u64 = (1 << 48) - 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("payload of {len} bytes exceeds the 255-byte limit")]
    PayloadTooLong { len: usize },
    #[error("signature presence does not match incompat flag 0x01 (flags {flags:#04x}, signature {present})")]
    FlagSignatureMismatch { flags: u8, present: bool },
    #[error("message id {msgid} does not fit in 24 bits")]
    MsgIdOutOfRange { msgid: u32 },
    #[error("buffer of {len} bytes is too short for a frame")]
    TooShort { len: usize },
    #[error("byte {byte:#04x} is not a start-of-frame marker")]
    BadStx { byte: u8 },
}

/// Protocol version of a frame, derived from its start marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Version {
    V1,
    V2,
}

impl Version {
    pub fn stx(self) -> u8 {
        match self {
            Version::V1 => STX_V1,
            Version::V2 => STX_V2,
        }
    }
}

/// 13-byte trailer on a signed MAVLink 2.0 frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignatureBlock {
    pub link_id: u8,
    /// 10 microsecond ticks since 2015-01-01T00:00:00Z, 48 bits.
    pub timestamp: u64,
    pub sig48: [u8; 6],
}

impl SignatureBlock {
    pub fn to_bytes(&self) -> [u8; SIGNATURE_LEN] {
        let mut out = [0u8; SIGNATURE_LEN];
        out[0] = self.link_id;
        out[1..7].copy_from_slice(&self.timestamp.to_le_bytes()[..6]);
        out[7..13].copy_from_slice(&self.sig48);
        out
    }

    pub fn from_bytes(bytes: &[u8; SIGNATURE_LEN]) -> Self {
        let mut ts = [0u8; 8];
        ts[..6].copy_from_slice(&bytes[1..7]);
        let mut sig48 = [0u8; 6];
        sig48.copy_from_slice(&bytes[7..13]);
        Self {
            link_id: bytes[0],
            timestamp: u64::from_le_bytes(ts),
            sig48,
        }
    }
}

/// A MAVLink 1.0 frame.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrameV1 {
    pub seq: u8,
    pub sysid: u8,
    pub compid: u8,
    pub msgid: u8,
    pub payload: Vec<u8>,
    /// Checksum as carried on the wire (CKA low byte, CKB high byte).
    pub crc: u16,
}

impl FrameV1 {
    pub fn new(seq: u8, sysid: u8, compid: u8, msgid: u8, payload: Vec<u8>) -> Self {
        Self {
            seq,
            sysid,
            compid,
            msgid,
            payload,
            crc: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.payload.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payload.is_empty()
    }

    pub fn wire_len(&self) -> usize {
        V1_OVERHEAD + self.payload.len()
    }

    /// Header bytes after STX: LEN, SEQ, SYS, COMP, MSG.
    fn crc_header(&self) -> [u8; 5] {
        [
            self.payload.len() as u8,
            self.seq,
            self.sysid,
            self.compid,
            self.msgid,
        ]
    }

    /// Checksum over LEN..MSG, the payload and the per-message seed byte.
    pub fn frame_crc(&self, seed: u8) -> u16 {
        let mut crc = Crc16::new();
        crc.update(&self.crc_header());
        crc.update(&self.payload);
        crc.update_byte(seed);
        crc.value()
    }

    /// Stores the freshly computed checksum and returns the frame.
    pub fn sealed(mut self, seed: u8) -> Self {
        self.crc = self.frame_crc(seed);
        self
    }
}

/// A MAVLink 2.0 frame, optionally signed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrameV2 {
    pub incompat_flags: u8,
    /// Preserved verbatim, never interpreted.
    pub compat_flags: u8,
    pub seq: u8,
    pub sysid: u8,
    pub compid: u8,
    /// 24-bit message id.
    pub msgid: u32,
    pub payload: Vec<u8>,
    pub crc: u16,
    pub signature: Option<SignatureBlock>,
}

impl FrameV2 {
    pub fn new(seq: u8, sysid: u8, compid: u8, msgid: u32, payload: Vec<u8>) -> Self {
        Self {
            incompat_flags: 0,
            compat_flags: 0,
            seq,
            sysid,
            compid,
            msgid,
            payload,
            crc: 0,
            signature: None,
        }
    }

    pub fn len(&self) -> usize {
        self.payload.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payload.is_empty()
    }

    pub fn is_signed(&self) -> bool {
        self.incompat_flags & INCOMPAT_SIGNED != 0
    }

    pub fn wire_len(&self) -> usize {
        V2_OVERHEAD
            + self.payload.len()
            + if self.signature.is_some() {
                SIGNATURE_LEN
            } else {
                0
            }
    }

    fn crc_header(&self) -> [u8; 9] {
        let id = self.msgid.to_le_bytes();
        [
            self.payload.len() as u8,
            self.incompat_flags,
            self.compat_flags,
            self.seq,
            self.sysid,
            self.compid,
            id[0],
            id[1],
            id[2],
        ]
    }

    /// Checksum over LEN..MSGID, the payload and the seed; the signature is
    /// not covered.
    pub fn frame_crc(&self, seed: u8) -> u16 {
        let mut crc = Crc16::new();
        crc.update(&self.crc_header());
        crc.update(&self.payload);
        crc.update_byte(seed);
        crc.value()
    }

    pub fn sealed(mut self, seed: u8) -> Self {
        self.crc = self.frame_crc(seed);
        self
    }

    /// Wire bytes from STX through the stored CRC. This is the region the
    /// signature authenticates.
    pub fn signed_region(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(V2_OVERHEAD + self.payload.len());
        out.push(STX_V2);
        out.extend_from_slice(&self.crc_header());
        out.extend_from_slice(&self.payload);
        out.extend_from_slice(&self.crc.to_le_bytes());
        out
    }
}

/// Either protocol version.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Frame {
    V1(FrameV1),
    V2(FrameV2),
}

impl Frame {
    pub fn version(&self) -> Version {
        match self {
            Frame::V1(_) => Version::V1,
            Frame::V2(_) => Version::V2,
        }
    }

    pub fn seq(&self) -> u8 {
        match self {
            Frame::V1(f) => f.seq,
            Frame::V2(f) => f.seq,
        }
    }

    pub fn sysid(&self) -> u8 {
        match self {
            Frame::V1(f) => f.sysid,
            Frame::V2(f) => f.sysid,
        }
    }

    pub fn compid(&self) -> u8 {
        match self {
            Frame::V1(f) => f.compid,
            Frame::V2(f) => f.compid,
        }
    }

    pub fn msgid(&self) -> u32 {
        match self {
            Frame::V1(f) => u32::from(f.msgid),
            Frame::V2(f) => f.msgid,
        }
    }

    pub fn payload(&self) -> &[u8] {
        match self {
            Frame::V1(f) => &f.payload,
            Frame::V2(f) => &f.payload,
        }
    }

    pub fn payload_mut(&mut self) -> &mut Vec<u8> {
        match self {
            Frame::V1(f) => &mut f.payload,
            Frame::V2(f) => &mut f.payload,
        }
    }

    pub fn crc(&self) -> u16 {
        match self {
            Frame::V1(f) => f.crc,
            Frame::V2(f) => f.crc,
        }
    }

    pub fn signature(&self) -> Option<&SignatureBlock> {
        match self {
            Frame::V1(_) => None,
            Frame::V2(f) => f.signature.as_ref(),
        }
    }

    pub fn wire_len(&self) -> usize {
        match self {
            Frame::V1(f) => f.wire_len(),
            Frame::V2(f) => f.wire_len(),
        }
    }

    pub fn frame_crc(&self, seed: u8) -> u16 {
        match self {
            Frame::V1(f) => f.frame_crc(seed),
            Frame::V2(f) => f.frame_crc(seed),
        }
    }

    pub fn serialize(&self, seed: u8) -> Result<Vec<u8>, FrameError> {
        match self {
            Frame::V1(f) => serialize_v1(f, seed),
            Frame::V2(f) => serialize_v2(f, seed),
        }
    }
}

impl From<FrameV1> for Frame {
    fn from(f: FrameV1) -> Self {
        Frame::V1(f)
    }
}

impl From<FrameV2> for Frame {
    fn from(f: FrameV2) -> Self {
        Frame::V2(f)
    }
}

/// Checksum for either version; see [`FrameV1::frame_crc`].
pub fn frame_crc(frame: &Frame, seed: u8) -> u16 {
    frame.frame_crc(seed)
}

/// Serializes a v1 frame. The checksum is always recomputed from `seed`.
pub fn serialize_v1(frame: &FrameV1, seed: u8) -> Result<Vec<u8>, FrameError> {
    if frame.payload.len() > MAX_PAYLOAD_LEN {
        return Err(FrameError::PayloadTooLong {
            len: frame.payload.len(),
        });
    }
    let mut out = Vec::with_capacity(frame.wire_len());
    out.push(STX_V1);
    out.extend_from_slice(&frame.crc_header());
    out.extend_from_slice(&frame.payload);
    out.extend_from_slice(&frame.frame_crc(seed).to_le_bytes());
    Ok(out)
}

/// Serializes a v2 frame, appending the signature block when present.
pub fn serialize_v2(frame: &FrameV2, seed: u8) -> Result<Vec<u8>, FrameError> {
    if frame.payload.len() > MAX_PAYLOAD_LEN {
        return Err(FrameError::PayloadTooLong {
            len: frame.payload.len(),
        });
    }
    if frame.msgid > MAX_MSGID_V2 {
        return Err(FrameError::MsgIdOutOfRange { msgid: frame.msgid });
    }
    if frame.is_signed() != frame.signature.is_some() {
        return Err(FrameError::FlagSignatureMismatch {
            flags: frame.incompat_flags,
            present: frame.signature.is_some(),
        });
    }
    let mut out = Vec::with_capacity(frame.wire_len());
    out.push(STX_V2);
    out.extend_from_slice(&frame.crc_header());
    out.extend_from_slice(&frame.payload);
    out.extend_from_slice(&frame.frame_crc(seed).to_le_bytes());
    if let Some(sig) = &frame.signature {
        out.extend_from_slice(&sig.to_bytes());
    }
    Ok(out)
}

/// Next value of the rolling 8-bit sequence counter.
pub fn seq_next(current: u8) -> u8 {
    current.wrapping_add(1)
}

/// Source of per-message CRC seeds.
pub trait SeedLookup {
    fn crc_seed(&self, msgid: u32) -> Option<u8>;
}

impl<F> SeedLookup for F
where
    F: Fn(u32) -> Option<u8>,
{
    fn crc_seed(&self, msgid: u32) -> Option<u8> {
        self(msgid)
    }
}

/// Checksum verdict attached to every parsed frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum CrcVerdict {
    CrcOk,
    CrcBad,
    /// No seed known for the message id, so the checksum cannot be checked.
    UnknownMsgId,
}

/// Parses one complete frame occupying all of `bytes`.
///
/// The frame layout is taken from the buffer length rather than the LEN
/// byte, so a frame whose LEN disagrees with its actual size still parses
/// and is reported as [`CrcVerdict::CrcBad`].
pub fn parse_bytes(
    bytes: &[u8],
    seeds: &dyn SeedLookup,
) -> Result<(Frame, CrcVerdict), FrameError> {
    let Some(&stx) = bytes.first() else {
        return Err(FrameError::TooShort { len: 0 });
    };
    let n = bytes.len();
    match stx {
        STX_V1 => {
            if n < V1_OVERHEAD {
                return Err(FrameError::TooShort { len: n });
            }
            let payload = bytes[V1_HEADER_LEN..n - CHECKSUM_LEN].to_vec();
            let crc = u16::from_le_bytes([bytes[n - 2], bytes[n - 1]]);
            let frame = FrameV1 {
                seq: bytes[2],
                sysid: bytes[3],
                compid: bytes[4],
                msgid: bytes[5],
                payload,
                crc,
            };
            let len_ok = usize::from(bytes[1]) == frame.payload.len();
            let verdict = verdict_for(
                &bytes[1..n - CHECKSUM_LEN],
                u32::from(frame.msgid),
                crc,
                len_ok,
                seeds,
            );
            Ok((Frame::V1(frame), verdict))
        }
        STX_V2 => {
            if n < V2_OVERHEAD {
                return Err(FrameError::TooShort { len: n });
            }
            let incompat = bytes[2];
            let signed = incompat & INCOMPAT_SIGNED != 0 && n >= V2_OVERHEAD + SIGNATURE_LEN;
            let body_end = if signed { n - SIGNATURE_LEN } else { n };
            let signature = signed.then(|| {
                let mut sig = [0u8; SIGNATURE_LEN];
                sig.copy_from_slice(&bytes[body_end..]);
                SignatureBlock::from_bytes(&sig)
            });
            let payload = bytes[V2_HEADER_LEN..body_end - CHECKSUM_LEN].to_vec();
            let crc = u16::from_le_bytes([bytes[body_end - 2], bytes[body_end - 1]]);
            let msgid = u32::from_le_bytes([bytes[7], bytes[8], bytes[9], 0]);
            let frame = FrameV2 {
                incompat_flags: incompat,
                compat_flags: bytes[3],
                seq: bytes[4],
                sysid: bytes[5],
                compid: bytes[6],
                msgid,
                payload,
                crc,
                signature,
            };
            let len_ok = usize::from(bytes[1]) == frame.payload.len()
                && frame.is_signed() == frame.signature.is_some();
            let verdict = verdict_for(
                &bytes[1..body_end - CHECKSUM_LEN],
                msgid,
                crc,
                len_ok,
                seeds,
            );
            Ok((Frame::V2(frame), verdict))
        }
        byte => Err(FrameError::BadStx { byte }),
    }
}

fn verdict_for(
    covered: &[u8],
    msgid: u32,
    carried: u16,
    len_ok: bool,
    seeds: &dyn SeedLookup,
) -> CrcVerdict {
    let Some(seed) = seeds.crc_seed(msgid) else {
        return CrcVerdict::UnknownMsgId;
    };
    let mut crc = Crc16::new();
    crc.update(covered);
    crc.update_byte(seed);
    if len_ok && crc.value() == carried {
        CrcVerdict::CrcOk
    } else {
        CrcVerdict::CrcBad
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crc::{crc_x25, crc_x25_bitwise};

    fn any_seed(_: u32) -> Option<u8> {
        Some(0x32)
    }

    #[test]
    fn zero_frame_crc_is_crc_of_six_zero_bytes() {
        let f = FrameV1::new(0, 0, 0, 0, vec![]);
        assert_eq!(f.frame_crc(0), crc_x25(&[0u8; 6]));
        assert_eq!(f.frame_crc(0), crc_x25_bitwise(&[0u8; 6]));
    }

    #[test]
    fn v1_size_extremes() {
        let empty = FrameV1::new(0, 1, 1, 0, vec![]);
        assert_eq!(serialize_v1(&empty, 0).unwrap().len(), 8);
        let full = FrameV1::new(0, 1, 1, 0, vec![0xAA; 255]);
        assert_eq!(serialize_v1(&full, 0).unwrap().len(), 263);
        let over = FrameV1::new(0, 1, 1, 0, vec![0; 256]);
        assert_eq!(
            serialize_v1(&over, 0),
            Err(FrameError::PayloadTooLong { len: 256 })
        );
    }

    #[test]
    fn v2_sizes_and_msgid_layout() {
        let mut f = FrameV2::new(0, 1, 1, 0x012345, vec![]);
        let bytes = serialize_v2(&f, 0).unwrap();
        assert_eq!(bytes.len(), 12);
        assert_eq!(&bytes[7..10], &[0x45, 0x23, 0x01]);

        f.incompat_flags = INCOMPAT_SIGNED;
        f.signature = Some(SignatureBlock {
            link_id: 0,
            timestamp: 1,
            sig48: [0; 6],
        });
        assert_eq!(serialize_v2(&f, 0).unwrap().len(), 25);
    }

    #[test]
    fn v2_flag_signature_mismatch() {
        let mut f = FrameV2::new(0, 1, 1, 0, vec![]);
        f.incompat_flags = INCOMPAT_SIGNED;
        assert!(matches!(
            serialize_v2(&f, 0),
            Err(FrameError::FlagSignatureMismatch { .. })
        ));
        let mut g = FrameV2::new(0, 1, 1, 0, vec![]);
        g.signature = Some(SignatureBlock {
            link_id: 0,
            timestamp: 0,
            sig48: [0; 6],
        });
        assert!(matches!(
            serialize_v2(&g, 0),
            Err(FrameError::FlagSignatureMismatch { .. })
        ));
    }

    #[test]
    fn v2_msgid_out_of_range() {
        let f = FrameV2::new(0, 1, 1, 0x0100_0000, vec![]);
        assert!(matches!(
            serialize_v2(&f, 0),
            Err(FrameError::MsgIdOutOfRange { .. })
        ));
    }

    #[test]
    fn signature_block_roundtrip() {
        let sig = SignatureBlock {
            link_id: 7,
            timestamp: 0x0000_BEEF_CAFE_1234 & TIMESTAMP_MASK,
            sig48: [1, 2, 3, 4, 5, 6],
        };
        assert_eq!(SignatureBlock::from_bytes(&sig.to_bytes()), sig);
    }

    #[test]
    fn seq_wraps() {
        assert_eq!(seq_next(0), 1);
        assert_eq!(seq_next(254), 255);
        assert_eq!(seq_next(255), 0);
    }

    #[test]
    fn parse_bytes_roundtrip_signed_v2() {
        let mut f = FrameV2::new(9, 1, 1, 76, vec![1, 2, 3]);
        f.compat_flags = 0x80;
        f.incompat_flags = INCOMPAT_SIGNED;
        f.signature = Some(SignatureBlock {
            link_id: 2,
            timestamp: 12345,
            sig48: [9; 6],
        });
        let f = f.sealed(0x32);
        let bytes = serialize_v2(&f, 0x32).unwrap();
        let (parsed, verdict) = parse_bytes(&bytes, &any_seed).unwrap();
        assert_eq!(verdict, CrcVerdict::CrcOk);
        assert_eq!(parsed, Frame::V2(f));
    }

    #[test]
    fn parse_bytes_rejects_garbage_start() {
        assert_eq!(
            parse_bytes(&[0x00, 1, 2], &any_seed),
            Err(FrameError::BadStx { byte: 0 })
        );
        assert_eq!(
            parse_bytes(&[STX_V1, 0, 0], &any_seed),
            Err(FrameError::TooShort { len: 3 })
        );
    }

    #[test]
    fn parse_bytes_len_disagreement_is_crc_bad() {
        let f = FrameV1::new(0, 1, 1, 0, vec![1, 2, 3]);
        let mut bytes = serialize_v1(&f, 0x32).unwrap();
        bytes[1] = 2;
        let (_, verdict) = parse_bytes(&bytes, &any_seed).unwrap();
        assert_eq!(verdict, CrcVerdict::CrcBad);
    }
}
