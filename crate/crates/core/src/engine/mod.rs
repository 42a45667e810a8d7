//! Orders, matching functionalities and auction orchestration.
//!
//! The functionalities are written twice: [`functionality`] evaluates them
//! in the clear, [`drivers`] runs them against a [`SecureBackend`] that only
//! exposes comparison bits, committed minima and explicit openings. The
//! plaintext backend makes the two comparable; the protocol backend runs
//! the real messages through the relay.

pub mod agent;
pub mod backend;
pub mod bench;
pub mod drivers;
pub mod functionality;
pub mod localsim;
pub mod log;
pub mod order;
pub mod pairing;
pub mod server;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::mpc::ProtocolError;

pub use backend::{MinOutcome, PlainBackend, SecureBackend};
pub use log::{AbortRecord, LogEntry, MatchLog, MatchRecord, PassTag};
pub use order::{load_orders, parse_orders, Book, Order, Universe};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("symbol universe: {0}")]
    Universe(String),
    #[error("order{}: {reason}", row.map(|r| format!(" row {r}")).unwrap_or_default())]
    Order { row: Option<usize>, reason: String },
    #[error("io: {0}")]
    Io(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Functionality {
    B2c,
    C2c,
    Mc,
    Queue,
    RangeB2c,
    RangeC2c,
}

impl Functionality {
    pub const ALL: [Functionality; 6] = [
        Functionality::B2c,
        Functionality::C2c,
        Functionality::Mc,
        Functionality::Queue,
        Functionality::RangeB2c,
        Functionality::RangeC2c,
    ];

    pub fn code(self) -> u8 {
        Self::ALL.iter().position(|&f| f == self).unwrap() as u8
    }

    pub fn from_code(c: u8) -> Option<Self> {
        Self::ALL.get(c as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Functionality::B2c => "b2c",
            Functionality::C2c => "c2c",
            Functionality::Mc => "mc",
            Functionality::Queue => "queue",
            Functionality::RangeB2c => "range-b2c",
            Functionality::RangeC2c => "range-c2c",
        }
    }

    /// The bank (server) holds an order book of its own.
    pub fn has_bank(self) -> bool {
        matches!(self, Functionality::B2c | Functionality::RangeB2c)
    }

    /// Clients register only their actual orders instead of the full grid.
    pub fn sparse_registration(self) -> bool {
        self == Functionality::Queue
    }
}

impl fmt::Display for Functionality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Functionality {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| EngineError::Config(format!("unknown functionality {s:?}")))
    }
}
