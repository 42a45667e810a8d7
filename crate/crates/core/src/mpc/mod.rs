//! Per-party protocol logic.
//!
//! Everything here is a pure state machine: methods consume the previous
//! round's messages and return the next ones, so the same code runs in unit
//! tests, over the in-process relay and over TCP. The engine moves the
//! messages.
//!
//! Roles: two clients in positions 0 and 1 (P_0, P_1) and the server P*.
//! The client in position 1 is the constant holder in every share
//! computation.

pub mod b2c;
pub mod coin;
pub mod malicious;
pub mod messages;
pub mod semi;

pub use messages::{Bound, Message, Side, ValueRef};

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::compare::CompareError;
use crate::net::{ChannelError, NetError, PartyId};
use crate::wire::WireError;

/// Which comparison protocol a batch runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SecurityMode {
    SemiHonest,
    Malicious,
}

impl SecurityMode {
    pub fn code(self) -> u8 {
        match self {
            SecurityMode::SemiHonest => 0,
            SecurityMode::Malicious => 1,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(SecurityMode::SemiHonest),
            1 => Some(SecurityMode::Malicious),
            _ => None,
        }
    }
}

impl std::str::FromStr for SecurityMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "semi" | "semi-honest" | "semi_honest" => Ok(SecurityMode::SemiHonest),
            "malicious" => Ok(SecurityMode::Malicious),
            other => Err(format!("unknown security mode {other:?} (expected semi-honest or malicious)")),
        }
    }
}

impl std::fmt::Display for SecurityMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SecurityMode::SemiHonest => "semi-honest",
            SecurityMode::Malicious => "malicious",
        })
    }
}

/// Abort reasons. Variants raised by a check name the party whose message
/// failed it: `party` is a comparison position (0 or 1) and `instance` the
/// comparison instance within the session.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("invalid local input: {0}")]
    Input(String),
    #[error("malformed {what} from position {party} in instance {instance}")]
    Malformed { what: &'static str, party: u8, instance: u64 },
    #[error("share opening {bit} from position {party} does not match its commitment (instance {instance})")]
    ShareOpeningRejected { party: u8, instance: u64, bit: usize },
    #[error("recombination proof from position {party} rejected (instance {instance})")]
    ComEqRejected { party: u8, instance: u64 },
    #[error("bit proof {bit} from position {party} rejected (instance {instance})")]
    BitProofRejected { party: u8, instance: u64, bit: usize },
    #[error("cross-scheme proof from the bank rejected (instance {instance})")]
    CrossEqRejected { instance: u64 },
    #[error("shares of position {party} disagree with the peer's commitments (instance {instance})")]
    ReconstructionMismatch { party: u8, instance: u64 },
    #[error("neither comparison bit is set (instance {instance})")]
    NoWinner { instance: u64 },
    #[error("one-out-of-many proof from the server rejected (instance {instance})")]
    OneManyRejected { instance: u64 },
    #[error("revealed minimum from position {party} rejected (instance {instance})")]
    RevealRejected { party: u8, instance: u64 },
    #[error("coin toss opening does not match the commitment")]
    CoinTossOpening,
    #[error("secure channel: {0}")]
    Channel(#[from] ChannelError),
    #[error("party {by} aborted: {reason}")]
    PeerAborted { by: PartyId, reason: String, blame: Option<PartyId> },
    /// A check failure resolved to the party whose message failed it.
    #[error("{reason} [blame: {}]", party_label(*party))]
    Attributed { party: PartyId, reason: String },
    #[error("unexpected message type {got:#04x} while waiting for {expected}")]
    Unexpected { expected: &'static str, got: u8 },
    #[error("network: {0}")]
    Net(#[from] NetError),
    #[error("decode: {0}")]
    Wire(#[from] WireError),
}

impl From<AlgebraError> for ProtocolError {
    fn from(e: AlgebraError) -> Self {
        ProtocolError::Input(e.to_string())
    }
}

impl From<CompareError> for ProtocolError {
    fn from(e: CompareError) -> Self {
        ProtocolError::Input(e.to_string())
    }
}

/// "server", "relay" or "party N".
pub fn party_label(id: PartyId) -> String {
    match id {
        crate::net::SERVER => "server".into(),
        crate::net::RELAY => "relay".into(),
        p => format!("party {p}"),
    }
}

/// Who an error points at, before positions are mapped to parties.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Culprit {
    /// The client in this comparison position.
    Position(u8),
    /// The other client of a pair, from the point of view of the party
    /// that saw the error.
    Peer,
    /// The server, including its role as bank.
    Server,
    /// The path between parties: bytes were replayed, reordered or did not
    /// authenticate. The relay or the sending peer is at fault.
    Transport,
    /// Already resolved to a party.
    Party(PartyId),
    /// Local failures, timeouts and anything else with no provable author.
    Unknown,
}

impl Culprit {
    /// `positions[p]` is the party in position p; `peer` is the other
    /// client when the observer is itself a client.
    pub fn resolve(self, positions: [PartyId; 2], peer: Option<PartyId>) -> Option<PartyId> {
        match self {
            Culprit::Position(p) if p < 2 => Some(positions[p as usize]),
            Culprit::Peer => peer,
            Culprit::Server => Some(crate::net::SERVER),
            Culprit::Transport => Some(crate::net::RELAY),
            Culprit::Party(id) => Some(id),
            _ => None,
        }
    }
}

impl ProtocolError {
    pub fn culprit(&self) -> Culprit {
        use ProtocolError::*;
        match self {
            Malformed { party, .. }
            | ShareOpeningRejected { party, .. }
            | ComEqRejected { party, .. }
            | BitProofRejected { party, .. }
            | ReconstructionMismatch { party, .. }
            | RevealRejected { party, .. } => Culprit::Position(*party),
            CrossEqRejected { .. } | OneManyRejected { .. } => Culprit::Server,
            CoinTossOpening => Culprit::Peer,
            Channel(_) | Wire(_) | Net(NetError::Replay { .. }) | Net(NetError::Decode(_)) => Culprit::Transport,
            PeerAborted { blame: Some(p), .. } | Attributed { party: p, .. } => Culprit::Party(*p),
            _ => Culprit::Unknown,
        }
    }

    /// The party this error has been pinned on, if any.
    pub fn blamed(&self) -> Option<PartyId> {
        match self.culprit() {
            Culprit::Party(p) => Some(p),
            _ => None,
        }
    }

    /// Maps position-level blame to a party, keeping the message.
    pub fn attribute(self, positions: [PartyId; 2], peer: Option<PartyId>) -> ProtocolError {
        match (&self, self.culprit()) {
            (ProtocolError::PeerAborted { .. } | ProtocolError::Attributed { .. }, _) => self,
            (_, c) => match c.resolve(positions, peer) {
                Some(party) => ProtocolError::Attributed { party, reason: self.to_string() },
                None => self,
            },
        }
    }
}

/// Binding context for one comparison instance. Proof contexts extend it
/// with a purpose label and the prover's position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct InstanceCtx {
    pub auction: u64,
    pub session: u64,
    pub batch: u32,
    pub instance: u64,
}

impl InstanceCtx {
    pub fn new(auction: u64, session: u64, batch: u32, instance: u64) -> Self {
        InstanceCtx { auction, session, batch, instance }
    }

    pub fn proof_ctx(&self, purpose: &[u8], party: u8) -> Vec<u8> {
        let mut out = Vec::with_capacity(48 + purpose.len());
        out.extend_from_slice(b"primematch/ctx/v1");
        out.extend_from_slice(&self.auction.to_le_bytes());
        out.extend_from_slice(&self.session.to_le_bytes());
        out.extend_from_slice(&self.batch.to_le_bytes());
        out.extend_from_slice(&self.instance.to_le_bytes());
        out.push(party);
        out.extend_from_slice(&(purpose.len() as u32).to_le_bytes());
        out.extend_from_slice(purpose);
        out
    }

    /// Bit proofs get one context per bit index so they cannot be permuted.
    pub fn bit_ctx(&self, party: u8, bit: usize) -> Vec<u8> {
        let mut c = self.proof_ctx(b"bit", party);
        c.extend_from_slice(&(bit as u64).to_le_bytes());
        c
    }
}

/// Length of the one-out-of-many list: n + 1 rounded up to a power of two.
pub fn padded_len(n: usize) -> usize {
    (n + 1).next_power_of_two()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{RELAY, SERVER};

    #[test]
    fn blame_follows_positions() {
        let e = ProtocolError::BitProofRejected { party: 1, instance: 0, bit: 3 };
        let a = e.clone().attribute([4, 9], None);
        assert_eq!(a.blamed(), Some(9));
        assert!(a.to_string().ends_with("[blame: party 9]"));
        assert_eq!(ProtocolError::OneManyRejected { instance: 0 }.attribute([4, 9], None).blamed(), Some(SERVER));
        assert_eq!(ProtocolError::CoinTossOpening.attribute([4, 9], Some(4)).blamed(), Some(4));
        let replay = ProtocolError::Net(NetError::Replay { session: 1, sender: 4, seq: 2 });
        assert_eq!(replay.attribute([4, 9], None).blamed(), Some(RELAY));
        assert_eq!(ProtocolError::Input("x".into()).attribute([4, 9], None).blamed(), None);
        let relayed = ProtocolError::PeerAborted { by: 9, reason: "r".into(), blame: Some(4) };
        assert_eq!(relayed.clone().attribute([4, 9], None), relayed);
    }

    #[test]
    fn contexts_differ_by_field() {
        let a = InstanceCtx::new(1, 2, 3, 4);
        let variants = [
            InstanceCtx::new(9, 2, 3, 4),
            InstanceCtx::new(1, 9, 3, 4),
            InstanceCtx::new(1, 2, 9, 4),
            InstanceCtx::new(1, 2, 3, 9),
        ];
        for v in variants {
            assert_ne!(a.proof_ctx(b"comeq", 0), v.proof_ctx(b"comeq", 0));
        }
        assert_ne!(a.proof_ctx(b"comeq", 0), a.proof_ctx(b"comeq", 1));
        assert_ne!(a.proof_ctx(b"comeq", 0), a.proof_ctx(b"reveal", 0));
        assert_ne!(a.bit_ctx(0, 1), a.bit_ctx(0, 2));
    }

    #[test]
    fn padding() {
        assert_eq!(padded_len(1), 2);
        assert_eq!(padded_len(3), 4);
        assert_eq!(padded_len(4), 8);
        assert_eq!(padded_len(31), 32);
    }

    #[test]
    fn mode_names() {
        assert_eq!("malicious".parse::<SecurityMode>().unwrap(), SecurityMode::Malicious);
        assert_eq!("semi-honest".parse::<SecurityMode>().unwrap(), SecurityMode::SemiHonest);
        assert!("x".parse::<SecurityMode>().is_err());
        for m in [SecurityMode::SemiHonest, SecurityMode::Malicious] {
            assert_eq!(SecurityMode::from_code(m.code()), Some(m));
        }
    }
}
