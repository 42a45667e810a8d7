//! Star-topology transport.
//!
//! Clients talk only to the server. Client-to-client payloads are sealed
//! under a [`SecureChannel`] whose keys the two clients agree on through the
//! relay, so the relay forwards bytes it cannot read.
//!
//! Frame layout (network order):
//!
//! ```text
//! len: u32 big-endian (payload length) | version: u8 | msg_type: u8 | payload
//! ```
//!
//! The payload of every frame is an [`Envelope`]: a 32-byte header
//! (session u64, auction u64, sender u32, recipient u32, seq u64, all
//! little-endian) followed by the message body.

mod channel;
mod endpoint;
mod envelope;
mod frame;
mod link;
mod metrics;
mod relay;
mod tamper;
mod tcp;

pub use channel::{ChannelError, Handshake, SecureChannel, CONFIRM_LABEL};
pub use endpoint::{Endpoint, Received, TrafficCounters};
pub use envelope::{Envelope, PartyId, ENVELOPE_HEADER_LEN, RELAY, SERVER};
pub use frame::{read_frame, write_frame, Frame, DEFAULT_MAX_FRAME, FRAME_HEADER_LEN, FRAME_VERSION};
pub use link::{InProcLink, Link};
pub use metrics::{serve_metrics, RelayMetrics};
pub use relay::{Relay, RelayTamper, TamperAction, TranscriptEntry};
pub use tamper::{CorruptFrame, ReplayFrame, Silence};
pub use tcp::{connect, TcpLink, TcpServer};

use thiserror::Error;

use crate::wire::WireError;

/// Relay-originated message types (the protocol catalogue lives in `mpc`).
pub const MSG_ROUTE_ERROR: u8 = 0xF0;
pub const MSG_DISCONNECTED: u8 = 0xF1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("frame truncated")]
    Truncated,
    #[error("unsupported frame version {0}")]
    BadVersion(u8),
    #[error("frame of {0} bytes exceeds the limit")]
    Oversize(usize),
    #[error("i/o: {0}")]
    Io(String),
    #[error("timed out waiting for a message")]
    Timeout,
    #[error("connection closed")]
    Closed,
    #[error("replayed or reordered envelope: session {session} sender {sender} seq {seq}")]
    Replay { session: u64, sender: PartyId, seq: u64 },
    #[error("no route to party {0}")]
    Route(PartyId),
    #[error("party {0} already connected")]
    Duplicate(PartyId),
    #[error("envelope claims sender {claimed} on the link of party {actual}")]
    Spoofed { claimed: PartyId, actual: PartyId },
    #[error("decode: {0}")]
    Decode(#[from] WireError),
    #[error("secure channel: {0}")]
    Channel(#[from] ChannelError),
}

impl From<std::io::Error> for NetError {
    fn from(e: std::io::Error) -> Self {
        match e.kind() {
            std::io::ErrorKind::UnexpectedEof => NetError::Closed,
            std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut => NetError::Timeout,
            _ => NetError::Io(e.to_string()),
        }
    }
}
