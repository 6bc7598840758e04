//! UDP and TCP links.

use std::io::{ErrorKind, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs, UdpSocket};
use std::time::Duration;

use super::{Link, LinkError};

fn resolve(addr: &str) -> Result<SocketAddr, LinkError> {
    // Accept ":14550" as shorthand for all interfaces.
    let full = if addr.starts_with(':') {
        format!("0.0.0.0{addr}")
    } else {
        addr.to_string()
    };
    full.to_socket_addrs()
        .map_err(|e| LinkError::io(format!("resolve {addr}"), e))?
        .next()
        .ok_or_else(|| LinkError::InvalidConfig(format!("no address for {addr}")))
}

fn is_timeout(e: &std::io::Error) -> bool {
    matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut)
}

/// One frame per datagram. With no configured remote, replies go to the
/// last sender seen.
#[derive(Debug)]
pub struct UdpLink {
    socket: Option<UdpSocket>,
    remote: Option<SocketAddr>,
}

pub fn open_udp(local: &str, remote: Option<&str>) -> Result<UdpLink, LinkError> {
    let socket =
        UdpSocket::bind(resolve(local)?).map_err(|e| LinkError::io(format!("bind {local}"), e))?;
    let remote = remote.map(resolve).transpose()?;
    Ok(UdpLink {
        socket: Some(socket),
        remote,
    })
}

impl UdpLink {
    pub fn local_addr(&self) -> Result<SocketAddr, LinkError> {
        self.socket
            .as_ref()
            .ok_or(LinkError::Closed)?
            .local_addr()
            .map_err(|e| LinkError::io("local_addr", e))
    }

    pub fn remote(&self) -> Option<SocketAddr> {
        self.remote
    }
}

impl Link for UdpLink {
    fn send(&mut self, bytes: &[u8]) -> Result<(), LinkError> {
        let socket = self.socket.as_ref().ok_or(LinkError::Closed)?;
        let remote = self.remote.ok_or(LinkError::NoPeer)?;
        socket
            .send_to(bytes, remote)
            .map_err(|e| LinkError::io(format!("send to {remote}"), e))?;
        Ok(())
    }

    fn recv(&mut self, timeout: Duration) -> Result<Option<Vec<u8>>, LinkError> {
        let socket = self.socket.as_ref().ok_or(LinkError::Closed)?;
        socket
            .set_read_timeout(Some(timeout.max(Duration::from_micros(1))))
            .map_err(|e| LinkError::io("set timeout", e))?;
        let mut buf = vec![0u8; 65_536];
        match socket.recv_from(&mut buf) {
            Ok((n, from)) => {
                if self.remote.is_none() {
                    self.remote = Some(from);
                }
                buf.truncate(n);
                Ok(Some(buf))
            }
            Err(e) if is_timeout(&e) => Ok(None),
            Err(e) => Err(LinkError::io("recv", e)),
        }
    }

    fn close(&mut self) {
        self.socket = None;
    }
}

/// A byte stream; callers run received chunks through a parser.
#[derive(Debug)]
pub struct TcpLink {
    stream: Option<TcpStream>,
}

pub fn open_tcp_connect(remote: &str) -> Result<TcpLink, LinkError> {
    let stream = TcpStream::connect(resolve(remote)?)
        .map_err(|e| LinkError::io(format!("connect {remote}"), e))?;
    stream.set_nodelay(true).ok();
    Ok(TcpLink {
        stream: Some(stream),
    })
}

/// Binds and accepts exactly one client.
pub fn open_tcp_listen(local: &str) -> Result<TcpLink, LinkError> {
    let listener = tcp_listener(local)?;
    accept_one(&listener)
}

pub fn tcp_listener(local: &str) -> Result<TcpListener, LinkError> {
    TcpListener::bind(resolve(local)?).map_err(|e| LinkError::io(format!("listen {local}"), e))
}

pub fn accept_one(listener: &TcpListener) -> Result<TcpLink, LinkError> {
    let (stream, _) = listener.accept().map_err(|e| LinkError::io("accept", e))?;
    stream.set_nodelay(true).ok();
    Ok(TcpLink {
        stream: Some(stream),
    })
}

impl Link for TcpLink {
    fn send(&mut self, bytes: &[u8]) -> Result<(), LinkError> {
        let stream = self.stream.as_mut().ok_or(LinkError::Closed)?;
        stream
            .write_all(bytes)
            .map_err(|e| LinkError::io("tcp write", e))
    }

    fn recv(&mut self, timeout: Duration) -> Result<Option<Vec<u8>>, LinkError> {
        let stream = self.stream.as_mut().ok_or(LinkError::Closed)?;
        stream
            .set_read_timeout(Some(timeout.max(Duration::from_micros(1))))
            .map_err(|e| LinkError::io("set timeout", e))?;
        let mut buf = vec![0u8; 4096];
        match stream.read(&mut buf) {
            Ok(0) => {
                self.stream = None;
                Err(LinkError::Closed)
            }
            Ok(n) => {
                buf.truncate(n);
                Ok(Some(buf))
            }
            Err(e) if is_timeout(&e) => Ok(None),
            Err(e) => Err(LinkError::io("tcp read", e)),
        }
    }

    fn close(&mut self) {
        if let Some(s) = self.stream.take() {
            let _ = s.shutdown(std::net::Shutdown::Both);
        }
    }
}
