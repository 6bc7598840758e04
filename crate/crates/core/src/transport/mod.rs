//! Byte transports: UDP, TCP, and an in-process simulated link.

pub mod capture;
pub mod net;
pub mod sim;
pub mod stats;

use std::time::Duration;

use thiserror::Error;

pub use capture::{
    capture_read, capture_write, CaptureError, CaptureRecord, CaptureWriter, Direction,
};
pub use net::{open_tcp_connect, open_tcp_listen, open_udp, TcpLink, UdpLink};
pub use sim::{sim_link, SendOutcome, SimChannel, SimEndpoint, SimLink, SimLinkConfig};
pub use stats::{stats_update, LinkStats};

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("link is closed")]
    Closed,
    #[error("no remote peer known yet")]
    NoPeer,
    #[error("invalid link configuration: {0}")]
    InvalidConfig(String),
}

impl LinkError {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        LinkError::Io {
            context: context.into(),
            source,
        }
    }
}

/// A bidirectional byte transport. One sender and one receiver may use a
/// link concurrently.
pub trait Link {
    fn send(&mut self, bytes: &[u8]) -> Result<(), LinkError>;
    /// Waits up to `timeout` for the next datagram or stream chunk.
    fn recv(&mut self, timeout: Duration) -> Result<Option<Vec<u8>>, LinkError>;
    fn close(&mut self);
}

impl<L: Link + ?Sized> Link for Box<L> {
    fn send(&mut self, bytes: &[u8]) -> Result<(), LinkError> {
        (**self).send(bytes)
    }

    fn recv(&mut self, timeout: Duration) -> Result<Option<Vec<u8>>, LinkError> {
        (**self).recv(timeout)
    }

    fn close(&mut self) {
        (**self).close()
    }
}
