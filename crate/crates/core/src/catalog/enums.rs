//! Enumerations carried inside message payloads.

use std::fmt;

/// `MAV_TYPE`. Only the airframes this toolkit talks about are listed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MavType {
    Generic = 0,
    FixedWing = 1,
    Quadrotor = 2,
    Helicopter = 4,
    Gcs = 6,
}

impl MavType {
    pub fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            0 => Self::Generic,
            1 => Self::FixedWing,
            2 => Self::Quadrotor,
            4 => Self::Helicopter,
            6 => Self::Gcs,
            _ => return None,
        })
    }
}

/// `MAV_AUTOPILOT`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MavAutopilot {
    Generic = 0,
    ArduPilotMega = 3,
    Invalid = 8,
    Px4 = 12,
}

/// One bit of the heartbeat `base_mode` field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum ModeFlag {
    Reserved = 1,
    Test = 2,
    Auto = 4,
    Guided = 8,
    Stabilize = 16,
    Hil = 32,
    Manual = 64,
    Armed = 128,
}

impl ModeFlag {
    pub const ALL: [ModeFlag; 8] = [
        ModeFlag::Reserved,
        ModeFlag::Test,
        ModeFlag::Auto,
        ModeFlag::Guided,
        ModeFlag::Stabilize,
        ModeFlag::Hil,
        ModeFlag::Manual,
        ModeFlag::Armed,
    ];

    pub fn bit(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            ModeFlag::Reserved => "RESERVED",
            ModeFlag::Test => "TEST",
            ModeFlag::Auto => "AUTO",
            ModeFlag::Guided => "GUIDED",
            ModeFlag::Stabilize => "STABILIZE",
            ModeFlag::Hil => "HIL",
            ModeFlag::Manual => "MANUAL",
            ModeFlag::Armed => "ARMED",
        }
    }
}

/// Set bits of `base_mode`, lowest bit first.
pub fn decode_base_mode(base_mode: u8) -> Vec<ModeFlag> {
    ModeFlag::ALL
        .into_iter()
        .filter(|f| base_mode & f.bit() != 0)
        .collect()
}

pub fn encode_base_mode(flags: &[ModeFlag]) -> u8 {
    flags.iter().fold(0, |acc, f| acc | f.bit())
}

/// `MAV_STATE`, carried as `system_status`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum SystemStatus {
    Uninit = 0,
    Boot = 1,
    Calibrating = 2,
    Standby = 3,
    Active = 4,
    Critical = 5,
    Emergency = 6,
    Poweroff = 7,
    Terminating = 8,
}

impl SystemStatus {
    pub fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            0 => Self::Uninit,
            1 => Self::Boot,
            2 => Self::Calibrating,
            3 => Self::Standby,
            4 => Self::Active,
            5 => Self::Critical,
            6 => Self::Emergency,
            7 => Self::Poweroff,
            8 => Self::Terminating,
            _ => return None,
        })
    }
}

/// Copter flight modes and their `custom_mode` values.
///
/// `custom_mode` 0 is the manual mode, which the simulator calls STABILIZE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlightMode {
    Stabilize,
    AltHold,
    Guided,
    Loiter,
    Land,
    Auto,
    Rtl,
}

impl FlightMode {
    pub const ALL: [FlightMode; 7] = [
        FlightMode::Stabilize,
        FlightMode::AltHold,
        FlightMode::Guided,
        FlightMode::Loiter,
        FlightMode::Land,
        FlightMode::Auto,
        FlightMode::Rtl,
    ];

    pub fn custom_mode(self) -> u32 {
        match self {
            FlightMode::Stabilize => 0,
            FlightMode::AltHold => 2,
            FlightMode::Guided => 4,
            FlightMode::Loiter => 5,
            FlightMode::Land => 9,
            FlightMode::Auto => 10,
            FlightMode::Rtl => 11,
        }
    }

    pub fn from_custom(custom_mode: u32) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.custom_mode() == custom_mode)
    }

    pub fn name(self) -> &'static str {
        match self {
            FlightMode::Stabilize => "STABILIZE",
            FlightMode::AltHold => "ALT_HOLD",
            FlightMode::Guided => "GUIDED",
            FlightMode::Loiter => "LOITER",
            FlightMode::Land => "LAND",
            FlightMode::Auto => "AUTO",
            FlightMode::Rtl => "RTL",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let upper = name.to_ascii_uppercase();
        Self::ALL.into_iter().find(|m| m.name() == upper)
    }

    /// Modes whose position is held by the autopilot and which therefore
    /// need GPS.
    pub fn needs_position(self) -> bool {
        matches!(
            self,
            FlightMode::Loiter | FlightMode::Guided | FlightMode::Auto | FlightMode::Rtl
        )
    }

    /// `base_mode` bits (without ARMED) advertised while in this mode.
    pub fn base_mode_bits(self) -> u8 {
        match self {
            FlightMode::Stabilize | FlightMode::AltHold => {
                ModeFlag::Manual.bit() | ModeFlag::Stabilize.bit()
            }
            FlightMode::Loiter | FlightMode::Guided => {
                ModeFlag::Stabilize.bit() | ModeFlag::Guided.bit()
            }
            FlightMode::Auto | FlightMode::Rtl | FlightMode::Land => {
                ModeFlag::Stabilize.bit() | ModeFlag::Auto.bit()
            }
        }
    }
}

impl fmt::Display for FlightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Decoded `custom_mode`, or `None` for values outside the mapping.
pub fn flight_mode_from_custom(custom_mode: u32) -> Option<FlightMode> {
    FlightMode::from_custom(custom_mode)
}

/// `MAV_CMD` subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum MavCmd {
    Land = 21,
    Takeoff = 22,
    SetHome = 179,
    ArmDisarm = 400,
    GetHome = 410,
}

impl MavCmd {
    pub fn from_u16(v: u16) -> Option<Self> {
        Some(match v {
            21 => Self::Land,
            22 => Self::Takeoff,
            179 => Self::SetHome,
            400 => Self::ArmDisarm,
            410 => Self::GetHome,
            _ => return None,
        })
    }
}

/// `MAV_FRAME` subset used by mission items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MavFrame {
    /// z is altitude above mean sea level.
    Global = 0,
    /// z is altitude above the home position.
    GlobalRelativeAlt = 3,
}

impl MavFrame {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Self::Global),
            3 => Some(Self::GlobalRelativeAlt),
            _ => None,
        }
    }
}

/// `MAV_RESULT` carried in command acknowledgements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[repr(u8)]
pub enum MavResult {
    Accepted = 0,
    TemporarilyRejected = 1,
    Denied = 2,
    Unsupported = 3,
    Failed = 4,
}

impl MavResult {
    pub fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            0 => Self::Accepted,
            1 => Self::TemporarilyRejected,
            2 => Self::Denied,
            3 => Self::Unsupported,
            4 => Self::Failed,
            _ => return None,
        })
    }
}
