//! Message descriptors, payload encoding and the built-in message set.
//!
//! A catalog is loaded from a small line-oriented definition file (see
//! `common.def`). Each descriptor's CRC seed is derived on load from its
//! canonical description string `NAME:type name;type name;...`.

pub mod enums;
pub mod messages;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::crc::crc_x25;
use crate::frame::{SeedLookup, MAX_PAYLOAD_LEN};

pub use enums::*;
pub use messages::*;

const BUILTIN_DEF: &str = include_str!("common.def");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("expected {expected} field values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("field `{field}` expects {expected}, got {got}")]
    TypeMismatch {
        field: String,
        expected: ScalarType,
        got: ScalarType,
    },
    #[error("payload is {got} bytes, descriptor declares {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("message id {0} is not in the catalog")]
    UnknownMessage(u32),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("message id {0} defined twice")]
    DuplicateMsgId(u32),
    #[error("message {name} encodes to {len} bytes, over the 255-byte limit")]
    PayloadTooLong { name: String, len: usize },
    #[error("value {value} out of range for field `{field}`")]
    OutOfRange { field: &'static str, value: i64 },
}

/// Wire scalar types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarType {
    U8,
    U16,
    U32,
    U64,
    I8,
    I16,
    I32,
    F64,
}

impl ScalarType {
    pub fn width(self) -> usize {
        match self {
            ScalarType::U8 | ScalarType::I8 => 1,
            ScalarType::U16 | ScalarType::I16 => 2,
            ScalarType::U32 | ScalarType::I32 => 4,
            ScalarType::U64 | ScalarType::F64 => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarType::U8 => "u8",
            ScalarType::U16 => "u16",
            ScalarType::U32 => "u32",
            ScalarType::U64 => "u64",
            ScalarType::I8 => "i8",
            ScalarType::I16 => "i16",
            ScalarType::I32 => "i32",
            ScalarType::F64 => "float64",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "u8" => ScalarType::U8,
            "u16" => ScalarType::U16,
            "u32" => ScalarType::U32,
            "u64" => ScalarType::U64,
            "i8" => ScalarType::I8,
            "i16" => ScalarType::I16,
            "i32" => ScalarType::I32,
            "float64" | "f64" => ScalarType::F64,
            _ => return None,
        })
    }
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A typed field value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue {
    U8(u8),
    U16(u16),
    U32(u32),
    U64(u64),
    I8(i8),
    I16(i16),
    I32(i32),
    F64(f64),
}

impl FieldValue {
    pub fn scalar_type(&self) -> ScalarType {
        match self {
            FieldValue::U8(_) => ScalarType::U8,
            FieldValue::U16(_) => ScalarType::U16,
            FieldValue::U32(_) => ScalarType::U32,
            FieldValue::U64(_) => ScalarType::U64,
            FieldValue::I8(_) => ScalarType::I8,
            FieldValue::I16(_) => ScalarType::I16,
            FieldValue::I32(_) => ScalarType::I32,
            FieldValue::F64(_) => ScalarType::F64,
        }
    }

    fn write_le(&self, out: &mut Vec<u8>) {
        match *self {
            FieldValue::U8(v) => out.push(v),
            FieldValue::U16(v) => out.extend_from_slice(&v.to_le_bytes()),
            FieldValue::U32(v) => out.extend_from_slice(&v.to_le_bytes()),
            FieldValue::U64(v) => out.extend_from_slice(&v.to_le_bytes()),
            FieldValue::I8(v) => out.extend_from_slice(&v.to_le_bytes()),
            FieldValue::I16(v) => out.extend_from_slice(&v.to_le_bytes()),
            FieldValue::I32(v) => out.extend_from_slice(&v.to_le_bytes()),
            FieldValue::F64(v) => out.extend_from_slice(&v.to_le_bytes()),
        }
    }

    fn read_le(ty: ScalarType, b: &[u8]) -> Self {
        match ty {
            ScalarType::U8 => FieldValue::U8(b[0]),
            ScalarType::U16 => FieldValue::U16(u16::from_le_bytes([b[0], b[1]])),
            ScalarType::U32 => FieldValue::U32(u32::from_le_bytes(b[..4].try_into().unwrap())),
            ScalarType::U64 => FieldValue::U64(u64::from_le_bytes(b[..8].try_into().unwrap())),
            ScalarType::I8 => FieldValue::I8(b[0] as i8),
            ScalarType::I16 => FieldValue::I16(i16::from_le_bytes([b[0], b[1]])),
            ScalarType::I32 => FieldValue::I32(i32::from_le_bytes(b[..4].try_into().unwrap())),
            ScalarType::F64 => FieldValue::F64(f64::from_le_bytes(b[..8].try_into().unwrap())),
        }
    }

    /// Bit-exact equality, so NaN payloads compare equal to themselves.
    pub fn bit_eq(&self, other: &FieldValue) -> bool {
        match (self, other) {
            (FieldValue::F64(a), FieldValue::F64(b)) => a.to_bits() == b.to_bits(),
            _ => self == other,
        }
    }
}

impl fmt::Display for FieldValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldValue::U8(v) => write!(f, "{v}"),
            FieldValue::U16(v) => write!(f, "{v}"),
            FieldValue::U32(v) => write!(f, "{v}"),
            FieldValue::U64(v) => write!(f, "{v}"),
            FieldValue::I8(v) => write!(f, "{v}"),
            FieldValue::I16(v) => write!(f, "{v}"),
            FieldValue::I32(v) => write!(f, "{v}"),
            FieldValue::F64(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDescriptor {
    pub name: String,
    pub ty: ScalarType,
    pub unit: Option<String>,
}

/// One catalog entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageDescriptor {
    pub msgid: u32,
    pub name: String,
    pub fields: Vec<FieldDescriptor>,
    pub crc_seed: u8,
}

impl MessageDescriptor {
    /// Builds a descriptor and derives its CRC seed.
    pub fn new(msgid: u32, name: impl Into<String>, fields: Vec<FieldDescriptor>) -> Self {
        let mut d = Self {
            msgid,
            name: name.into(),
            fields,
            crc_seed: 0,
        };
        d.crc_seed = (crc_x25(d.canonical_string().as_bytes()) & 0xFF) as u8;
        d
    }

    /// `NAME:type name;type name;` in declaration order.
    pub fn canonical_string(&self) -> String {
        let mut s = format!("{}:", self.name);
        for f in &self.fields {
            s.push_str(f.ty.name());
            s.push(' ');
            s.push_str(&f.name);
            s.push(';');
        }
        s
    }

    pub fn payload_len(&self) -> usize {
        self.fields.iter().map(|f| f.ty.width()).sum()
    }

    pub fn field_offset(&self, name: &str) -> Option<usize> {
        let mut off = 0;
        for f in &self.fields {
            if f.name == name {
                return Some(off);
            }
            off += f.ty.width();
        }
        None
    }

    pub fn encode_payload(&self, values: &[FieldValue]) -> Result<Vec<u8>, CatalogError> {
        encode_payload(self, values)
    }

    pub fn decode_payload(&self, payload: &[u8]) -> Result<Vec<FieldValue>, CatalogError> {
        decode_payload(self, payload)
    }
}

/// Encodes `values` in declaration order, little-endian.
pub fn encode_payload(
    desc: &MessageDescriptor,
    values: &[FieldValue],
) -> Result<Vec<u8>, CatalogError> {
    if values.len() != desc.fields.len() {
        return Err(CatalogError::ArityMismatch {
            expected: desc.fields.len(),
            got: values.len(),
        });
    }
    let mut out = Vec::with_capacity(desc.payload_len());
    for (field, value) in desc.fields.iter().zip(values) {
        if value.scalar_type() != field.ty {
            return Err(CatalogError::TypeMismatch {
                field: field.name.clone(),
                expected: field.ty,
                got: value.scalar_type(),
            });
        }
        value.write_le(&mut out);
    }
    Ok(out)
}

pub fn decode_payload(
    desc: &MessageDescriptor,
    payload: &[u8],
) -> Result<Vec<FieldValue>, CatalogError> {
    let expected = desc.payload_len();
    if payload.len() != expected {
        return Err(CatalogError::LengthMismatch {
            expected,
            got: payload.len(),
        });
    }
    let mut off = 0;
    Ok(desc
        .fields
        .iter()
        .map(|f| {
            let v = FieldValue::read_le(f.ty, &payload[off..]);
            off += f.ty.width();
            v
        })
        .collect())
}

/// An immutable set of message descriptors keyed by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    messages: BTreeMap<u32, MessageDescriptor>,
}

impl Catalog {
    /// The message set compiled into the crate.
    pub fn standard() -> &'static Catalog {
        static CATALOG: OnceLock<Catalog> = OnceLock::new();
        CATALOG.get_or_init(|| Catalog::parse(BUILTIN_DEF).expect("built-in catalog is valid"))
    }

    pub fn builtin_definition() -> &'static str {
        BUILTIN_DEF
    }

    pub fn from_descriptors(
        descs: impl IntoIterator<Item = MessageDescriptor>,
    ) -> Result<Self, CatalogError> {
        let mut messages = BTreeMap::new();
        for d in descs {
            let len = d.payload_len();
            if len > MAX_PAYLOAD_LEN {
                return Err(CatalogError::PayloadTooLong { name: d.name, len });
            }
            let id = d.msgid;
            if messages.insert(id, d).is_some() {
                return Err(CatalogError::DuplicateMsgId(id));
            }
        }
        Ok(Self { messages })
    }

    /// Parses the `msg` / `field` definition format.
    pub fn parse(text: &str) -> Result<Self, CatalogError> {
        let mut descs: Vec<(u32, String, Vec<FieldDescriptor>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: &str| CatalogError::Parse {
                line: line_no,
                reason: reason.to_string(),
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "msg" => {
                    if tokens.len() != 3 {
                        return Err(err("expected `msg <id> <NAME>`"));
                    }
                    let id: u32 = tokens[1].parse().map_err(|_| err("bad message id"))?;
                    if id > crate::frame::MAX_MSGID_V2 {
                        return Err(err("message id does not fit in 24 bits"));
                    }
                    descs.push((id, tokens[2].to_string(), Vec::new()));
                }
                "field" => {
                    if !(3..=4).contains(&tokens.len()) {
                        return Err(err("expected `field <type> <name> [unit]`"));
                    }
                    let ty =
                        ScalarType::parse(tokens[1]).ok_or_else(|| err("unknown field type"))?;
                    let current = descs
                        .last_mut()
                        .ok_or_else(|| err("field before any msg"))?;
                    current.2.push(FieldDescriptor {
                        name: tokens[2].to_string(),
                        ty,
                        unit: tokens.get(3).map(|s| s.to_string()),
                    });
                }
                _ => return Err(err("unknown directive")),
            }
        }
        Self::from_descriptors(
            descs
                .into_iter()
                .map(|(id, name, fields)| MessageDescriptor::new(id, name, fields)),
        )
    }

    pub fn get(&self, msgid: u32) -> Option<&MessageDescriptor> {
        self.messages.get(&msgid)
    }

    pub fn by_name(&self, name: &str) -> Option<&MessageDescriptor> {
        self.messages.values().find(|d| d.name == name)
    }

    pub fn descriptor(&self, msgid: u32) -> Result<&MessageDescriptor, CatalogError> {
        self.get(msgid).ok_or(CatalogError::UnknownMessage(msgid))
    }

    pub fn iter(&self) -> impl Iterator<Item = &MessageDescriptor> {
        self.messages.values()
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn decode(&self, msgid: u32, payload: &[u8]) -> Result<Vec<FieldValue>, CatalogError> {
        self.descriptor(msgid)?.decode_payload(payload)
    }
}

impl SeedLookup for Catalog {
    fn crc_seed(&self, msgid: u32) -> Option<u8> {
        self.get(msgid).map(|d| d.crc_seed)
    }
}

/// Raw GPS integer (degrees x 1e7) to degrees.
pub fn gps_raw_to_degrees(raw: i32) -> f64 {
    f64::from(raw) / 1e7
}

pub fn degrees_to_gps_raw(deg: f64) -> i32 {
    (deg * 1e7).round() as i32
}

/// Absolute altitude of a point `relative_m` above ground at `ground_abs_m`.
pub fn absolute_alt_from_relative(ground_abs_m: f64, relative_m: f64) -> f64 {
    ground_abs_m + relative_m
}
