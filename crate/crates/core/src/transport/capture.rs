//! Capture file format.
//!
//! A capture is a flat sequence of records:
//! `[u64 timestamp_us LE][u8 direction][u16 length LE][frame bytes]`
//! where direction 0 is towards the vehicle and 1 towards the GCS.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

const RECORD_HEADER_LEN: usize = 8 + 1 + 2;

#[derive(Debug, Error)]
pub enum CaptureError {
    #[error("capture corrupt at byte offset {offset}: {reason}")]
    CaptureCorrupt { offset: usize, reason: String },
    #[error("record of {0} bytes does not fit the 16-bit length field")]
    RecordTooLong(usize),
    #[error("capture i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Direction {
    ToVehicle = 0,
    ToGcs = 1,
}

impl Direction {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Direction::ToVehicle),
            1 => Some(Direction::ToGcs),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureRecord {
    /// Monotonic microseconds.
    pub timestamp_us: u64,
    pub direction: Direction,
    pub frame: Vec<u8>,
}

pub fn encode_record(rec: &CaptureRecord, out: &mut Vec<u8>) -> Result<(), CaptureError> {
    let len =
        u16::try_from(rec.frame.len()).map_err(|_| CaptureError::RecordTooLong(rec.frame.len()))?;
    out.extend_from_slice(&rec.timestamp_us.to_le_bytes());
    out.push(rec.direction as u8);
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(&rec.frame);
    Ok(())
}

pub fn decode_capture(bytes: &[u8]) -> Result<Vec<CaptureRecord>, CaptureError> {
    let mut records = Vec::new();
    let mut off = 0;
    while off < bytes.len() {
        let rest = &bytes[off..];
        if rest.len() < RECORD_HEADER_LEN {
            return Err(CaptureError::CaptureCorrupt {
                offset: off,
                reason: format!(
                    "truncated record header ({} of {RECORD_HEADER_LEN} bytes)",
                    rest.len()
                ),
            });
        }
        let timestamp_us = u64::from_le_bytes(rest[..8].try_into().expect("8 bytes"));
        let direction =
            Direction::from_u8(rest[8]).ok_or_else(|| CaptureError::CaptureCorrupt {
                offset: off + 8,
                reason: format!("bad direction byte {}", rest[8]),
            })?;
        let len = usize::from(u16::from_le_bytes([rest[9], rest[10]]));
        if rest.len() < RECORD_HEADER_LEN + len {
            return Err(CaptureError::CaptureCorrupt {
                offset: off,
                reason: format!(
                    "truncated frame ({} of {len} bytes)",
                    rest.len() - RECORD_HEADER_LEN
                ),
            });
        }
        records.push(CaptureRecord {
            timestamp_us,
            direction,
            frame: rest[RECORD_HEADER_LEN..RECORD_HEADER_LEN + len].to_vec(),
        });
        off += RECORD_HEADER_LEN + len;
    }
    Ok(records)
}

pub fn capture_write(
    path: impl AsRef<Path>,
    records: &[CaptureRecord],
) -> Result<(), CaptureError> {
    let mut w = CaptureWriter::create(path)?;
    for r in records {
        w.write(r)?;
    }
    w.finish()
}

pub fn capture_read(path: impl AsRef<Path>) -> Result<Vec<CaptureRecord>, CaptureError> {
    decode_capture(&std::fs::read(path)?)
}

/// Appends records to a file as they happen.
pub struct CaptureWriter {
    out: BufWriter<File>,
    scratch: Vec<u8>,
}

impl CaptureWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self, CaptureError> {
        Ok(Self {
            out: BufWriter::new(File::create(path)?),
            scratch: Vec::new(),
        })
    }

    pub fn write(&mut self, rec: &CaptureRecord) -> Result<(), CaptureError> {
        self.scratch.clear();
        encode_record(rec, &mut self.scratch)?;
        self.out.write_all(&self.scratch)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CaptureError> {
        self.out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> Vec<CaptureRecord> {
        (0..n)
            .map(|i| CaptureRecord {
                timestamp_us: i as u64 * 20_000,
                direction: if i % 3 == 0 {
                    Direction::ToVehicle
                } else {
                    Direction::ToGcs
                },
                frame: vec![i as u8; i % 40],
            })
            .collect()
    }

    #[test]
    fn write_read_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.cap");
        let recs = sample(1000);
        capture_write(&path, &recs).unwrap();
        assert_eq!(capture_read(&path).unwrap(), recs);
    }

    #[test]
    fn empty_file_is_empty_capture() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.cap");
        std::fs::write(&path, b"").unwrap();
        assert!(capture_read(&path).unwrap().is_empty());
    }

    #[test]
    fn truncated_last_record_names_offset() {
        let recs = sample(4);
        let mut bytes = Vec::new();
        for r in &recs {
            encode_record(r, &mut bytes).unwrap();
        }
        let last_start = bytes.len() - (RECORD_HEADER_LEN + recs[3].frame.len());
        bytes.truncate(bytes.len() - 1);
        match decode_capture(&bytes) {
            Err(CaptureError::CaptureCorrupt { offset, .. }) => assert_eq!(offset, last_start),
            other => panic!("expected corrupt, got {other:?}"),
        }
    }

    #[test]
    fn bad_direction_rejected() {
        let mut bytes = Vec::new();
        encode_record(&sample(1)[0], &mut bytes).unwrap();
        bytes[8] = 7;
        assert!(matches!(
            decode_capture(&bytes),
            Err(CaptureError::CaptureCorrupt { offset: 8, .. })
        ));
    }
}
