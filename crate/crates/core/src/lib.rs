//! MAVLink 1.0/2.0 toolkit: wire codec, message catalog, message signing,
//! link transports, a simulated copter, ground-station logic and an attack
//! harness for exercising the signing defense.

pub mod catalog;
pub mod clock;
pub mod crc;
pub mod endpoint;
pub mod frame;
pub mod gcs;
pub mod parser;
pub mod session;
pub mod signing;
pub mod threat;
pub mod transport;
pub mod vehicle;

pub use catalog::{Catalog, MavMessage};
pub use endpoint::{Disposition, Endpoint};
pub use frame::{CrcVerdict, Frame, FrameV1, FrameV2, SignatureBlock};
pub use gcs::{Gcs, GcsConfig, VehicleView};
pub use parser::{ParsedFrame, Parser};
pub use session::{Session, SessionConfig};
pub use vehicle::{Autopilot, AutopilotConfig, SimParams, VehicleState};
