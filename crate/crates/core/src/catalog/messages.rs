//! Typed views of the catalog messages.

use super::{Catalog, CatalogError, FieldValue, ScalarType};
use crate::frame::{Frame, FrameV1, FrameV2};

/// A message with a fixed catalog id and field order.
pub trait Message: Sized {
    const MSG_ID: u32;
    const NAME: &'static str;

    fn to_values(&self) -> Vec<FieldValue>;
    fn from_values(values: &[FieldValue]) -> Result<Self, CatalogError>;
}

struct Reader<'a> {
    values: &'a [FieldValue],
    idx: usize,
}

macro_rules! reader_fn {
    ($name:ident, $variant:ident, $ty:ty) => {
        fn $name(&mut self) -> Result<$ty, CatalogError> {
            match self.next()? {
                FieldValue::$variant(v) => Ok(v),
                other => Err(CatalogError::TypeMismatch {
                    field: format!("#{}", self.idx - 1),
                    expected: ScalarType::$variant,
                    got: other.scalar_type(),
                }),
            }
        }
    };
}

impl<'a> Reader<'a> {
    fn new(values: &'a [FieldValue], expected: usize) -> Result<Self, CatalogError> {
        if values.len() != expected {
            return Err(CatalogError::ArityMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self { values, idx: 0 })
    }

    fn next(&mut self) -> Result<FieldValue, CatalogError> {
        let v = self.values[self.idx];
        self.idx += 1;
        Ok(v)
    }

    reader_fn!(u8, U8, u8);
    reader_fn!(u16, U16, u16);
    reader_fn!(u32, U32, u32);
    reader_fn!(u64, U64, u64);
    reader_fn!(i8, I8, i8);
    reader_fn!(i16, I16, i16);
    reader_fn!(i32, I32, i32);
    reader_fn!(f64, F64, f64);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Heartbeat {
    pub mav_type: u8,
    pub autopilot: u8,
    pub base_mode: u8,
    pub custom_mode: u32,
    pub system_status: u8,
    pub mavlink_version: u8,
}

impl Message for Heartbeat {
    const MSG_ID: u32 = 0;
    const NAME: &'static str = "HEARTBEAT";

    fn to_values(&self) -> Vec<FieldValue> {
        vec![
            FieldValue::U8(self.mav_type),
            FieldValue::U8(self.autopilot),
            FieldValue::U8(self.base_mode),
            FieldValue::U32(self.custom_mode),
            FieldValue::U8(self.system_status),
            FieldValue::U8(self.mavlink_version),
        ]
    }

    fn from_values(values: &[FieldValue]) -> Result<Self, CatalogError> {
        let mut r = Reader::new(values, 6)?;
        Ok(Self {
            mav_type: r.u8()?,
            autopilot: r.u8()?,
            base_mode: r.u8()?,
            custom_mode: r.u32()?,
            system_status: r.u8()?,
            mavlink_version: r.u8()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SysStatus {
    pub sensors_present: u32,
    pub sensors_enabled: u32,
    pub sensors_health: u32,
    /// Millivolts.
    pub voltage_battery: u16,
    /// Percent, or -1 when unknown.
    pub battery_remaining: i8,
    /// Hundredths of a percent.
    pub drop_rate_comm: u16,
    pub errors_comm: u16,
}

impl Message for SysStatus {
    const MSG_ID: u32 = 1;
    const NAME: &'static str = "SYS_STATUS";

    fn to_values(&self) -> Vec<FieldValue> {
        vec![
            FieldValue::U32(self.sensors_present),
            FieldValue::U32(self.sensors_enabled),
            FieldValue::U32(self.sensors_health),
            FieldValue::U16(self.voltage_battery),
            FieldValue::I8(self.battery_remaining),
            FieldValue::U16(self.drop_rate_comm),
            FieldValue::U16(self.errors_comm),
        ]
    }

    fn from_values(values: &[FieldValue]) -> Result<Self, CatalogError> {
        let mut r = Reader::new(values, 7)?;
        Ok(Self {
            sensors_present: r.u32()?,
            sensors_enabled: r.u32()?,
            sensors_health: r.u32()?,
            voltage_battery: r.u16()?,
            battery_remaining: r.i8()?,
            drop_rate_comm: r.u16()?,
            errors_comm: r.u16()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SystemTime {
    pub time_unix_usec: u64,
    pub time_boot_ms: u32,
}

impl Message for SystemTime {
    const MSG_ID: u32 = 2;
    const NAME: &'static str = "SYSTEM_TIME";

    fn to_values(&self) -> Vec<FieldValue> {
        vec![
            FieldValue::U64(self.time_unix_usec),
            FieldValue::U32(self.time_boot_ms),
        ]
    }

    fn from_values(values: &[FieldValue]) -> Result<Self, CatalogError> {
        let mut r = Reader::new(values, 2)?;
        Ok(Self {
            time_unix_usec: r.u64()?,
            time_boot_ms: r.u32()?,
        })
    }
}

/// Filtered global position. Angles in degrees x 1e7, altitudes in mm,
/// velocities in cm/s, heading in centidegrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GlobalPosition {
    pub lat: i32,
    pub lon: i32,
    pub alt: i32,
    pub relative_alt: i32,
    pub vx: i16,
    pub vy: i16,
    pub vz: i16,
    pub hdg: u16,
}

impl Message for GlobalPosition {
    const MSG_ID: u32 = 33;
    const NAME: &'static str = "GLOBAL_POSITION";

    fn to_values(&self) -> Vec<FieldValue> {
        vec![
            FieldValue::I32(self.lat),
            FieldValue::I32(self.lon),
            FieldValue::I32(self.alt),
            FieldValue::I32(self.relative_alt),
            FieldValue::I16(self.vx),
            FieldValue::I16(self.vy),
            FieldValue::I16(self.vz),
            FieldValue::U16(self.hdg),
        ]
    }

    fn from_values(values: &[FieldValue]) -> Result<Self, CatalogError> {
        let mut r = Reader::new(values, 8)?;
        Ok(Self {
            lat: r.i32()?,
            lon: r.i32()?,
            alt: r.i32()?,
            relative_alt: r.i32()?,
            vx: r.i16()?,
            vy: r.i16()?,
            vz: r.i16()?,
            hdg: r.u16()?,
        })
    }
}

/// A mission waypoint. `seq` 0 is the home position; x/y are degrees and
/// z is meters, interpreted according to `frame`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MissionItem {
    pub target_system: u8,
    pub target_component: u8,
    pub seq: u16,
    pub frame: u8,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Message for MissionItem {
    const MSG_ID: u32 = 39;
    const NAME: &'static str = "MISSION_ITEM";

    fn to_values(&self) -> Vec<FieldValue> {
        vec![
            FieldValue::U8(self.target_system),
            FieldValue::U8(self.target_component),
            FieldValue::U16(self.seq),
            FieldValue::U8(self.frame),
            FieldValue::F64(self.x),
            FieldValue::F64(self.y),
            FieldValue::F64(self.z),
        ]
    }

    fn from_values(values: &[FieldValue]) -> Result<Self, CatalogError> {
        let mut r = Reader::new(values, 7)?;
        Ok(Self {
            target_system: r.u8()?,
            target_component: r.u8()?,
            seq: r.u16()?,
            frame: r.u8()?,
            x: r.f64()?,
            y: r.f64()?,
            z: r.f64()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CommandLong {
    pub target_system: u8,
    pub target_component: u8,
    pub command: u16,
    /// 0 on first transmission, incremented on each retry.
    pub confirmation: u8,
    pub params: [f64; 7],
}

impl CommandLong {
    pub fn new(command: u16, params: [f64; 7]) -> Self {
        Self {
            command,
            params,
            ..Default::default()
        }
    }

    /// 1-based parameter access, matching the `paramN` field names.
    pub fn param(&self, n: usize) -> f64 {
        self.params[n - 1]
    }
}

impl Message for CommandLong {
    const MSG_ID: u32 = 76;
    const NAME: &'static str = "COMMAND_LONG";

    fn to_values(&self) -> Vec<FieldValue> {
        let mut v = vec![
            FieldValue::U8(self.target_system),
            FieldValue::U8(self.target_component),
            FieldValue::U16(self.command),
            FieldValue::U8(self.confirmation),
        ];
        v.extend(self.params.iter().map(|&p| FieldValue::F64(p)));
        v
    }

    fn from_values(values: &[FieldValue]) -> Result<Self, CatalogError> {
        let mut r = Reader::new(values, 11)?;
        let target_system = r.u8()?;
        let target_component = r.u8()?;
        let command = r.u16()?;
        let confirmation = r.u8()?;
        let mut params = [0.0; 7];
        for p in &mut params {
            *p = r.f64()?;
        }
        Ok(Self {
            target_system,
            target_component,
            command,
            confirmation,
            params,
        })
    }
}

/// Acknowledgement for a command or a stored mission item. Mission item
/// acks carry `command` = 39, the MISSION_ITEM message id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CommandAck {
    pub command: u16,
    pub result: u8,
}

impl Message for CommandAck {
    const MSG_ID: u32 = 77;
    const NAME: &'static str = "COMMAND_ACK";

    fn to_values(&self) -> Vec<FieldValue> {
        vec![FieldValue::U16(self.command), FieldValue::U8(self.result)]
    }

    fn from_values(values: &[FieldValue]) -> Result<Self, CatalogError> {
        let mut r = Reader::new(values, 2)?;
        Ok(Self {
            command: r.u16()?,
            result: r.u8()?,
        })
    }
}

/// Any message in the standard catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MavMessage {
    Heartbeat(Heartbeat),
    SysStatus(SysStatus),
    SystemTime(SystemTime),
    GlobalPosition(GlobalPosition),
    MissionItem(MissionItem),
    CommandLong(CommandLong),
    CommandAck(CommandAck),
}

impl MavMessage {
    pub fn msgid(&self) -> u32 {
        match self {
            MavMessage::Heartbeat(_) => Heartbeat::MSG_ID,
            MavMessage::SysStatus(_) => SysStatus::MSG_ID,
            MavMessage::SystemTime(_) => SystemTime::MSG_ID,
            MavMessage::GlobalPosition(_) => GlobalPosition::MSG_ID,
            MavMessage::MissionItem(_) => MissionItem::MSG_ID,
            MavMessage::CommandLong(_) => CommandLong::MSG_ID,
            MavMessage::CommandAck(_) => CommandAck::MSG_ID,
        }
    }

    pub fn to_values(&self) -> Vec<FieldValue> {
        match self {
            MavMessage::Heartbeat(m) => m.to_values(),
            MavMessage::SysStatus(m) => m.to_values(),
            MavMessage::SystemTime(m) => m.to_values(),
            MavMessage::GlobalPosition(m) => m.to_values(),
            MavMessage::MissionItem(m) => m.to_values(),
            MavMessage::CommandLong(m) => m.to_values(),
            MavMessage::CommandAck(m) => m.to_values(),
        }
    }

    pub fn encode(&self, catalog: &Catalog) -> Result<Vec<u8>, CatalogError> {
        catalog
            .descriptor(self.msgid())?
            .encode_payload(&self.to_values())
    }

    pub fn decode(catalog: &Catalog, msgid: u32, payload: &[u8]) -> Result<Self, CatalogError> {
        let values = catalog.decode(msgid, payload)?;
        Ok(match msgid {
            Heartbeat::MSG_ID => MavMessage::Heartbeat(Heartbeat::from_values(&values)?),
            SysStatus::MSG_ID => MavMessage::SysStatus(SysStatus::from_values(&values)?),
            SystemTime::MSG_ID => MavMessage::SystemTime(SystemTime::from_values(&values)?),
            GlobalPosition::MSG_ID => {
                MavMessage::GlobalPosition(GlobalPosition::from_values(&values)?)
            }
            MissionItem::MSG_ID => MavMessage::MissionItem(MissionItem::from_values(&values)?),
            CommandLong::MSG_ID => MavMessage::CommandLong(CommandLong::from_values(&values)?),
            CommandAck::MSG_ID => MavMessage::CommandAck(CommandAck::from_values(&values)?),
            other => return Err(CatalogError::UnknownMessage(other)),
        })
    }

    pub fn decode_frame(catalog: &Catalog, frame: &Frame) -> Result<Self, CatalogError> {
        Self::decode(catalog, frame.msgid(), frame.payload())
    }

    /// Unsealed v2 frame carrying this message; the CRC is filled in by
    /// serialization or signing.
    pub fn to_frame_v2(
        &self,
        catalog: &Catalog,
        seq: u8,
        sysid: u8,
        compid: u8,
    ) -> Result<FrameV2, CatalogError> {
        Ok(FrameV2::new(
            seq,
            sysid,
            compid,
            self.msgid(),
            self.encode(catalog)?,
        ))
    }

    pub fn to_frame_v1(
        &self,
        catalog: &Catalog,
        seq: u8,
        sysid: u8,
        compid: u8,
    ) -> Result<FrameV1, CatalogError> {
        Ok(FrameV1::new(
            seq,
            sysid,
            compid,
            self.msgid() as u8,
            self.encode(catalog)?,
        ))
    }
}

macro_rules! impl_from {
    ($($t:ident),*) => {
        $(impl From<$t> for MavMessage {
            fn from(m: $t) -> Self {
                MavMessage::$t(m)
            }
        })*
    };
}

impl_from!(
    Heartbeat,
    SysStatus,
    SystemTime,
    GlobalPosition,
    MissionItem,
    CommandLong,
    CommandAck
);
