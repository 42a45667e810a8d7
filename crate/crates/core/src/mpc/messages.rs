//! Message catalogue.
//!
//! Each message is one envelope body; its type code travels in the frame
//! header. Fields are encoded in declaration order with the `wire` rules.
//! Client-to-client messages (0x20..0x2F) never appear on the wire in the
//! clear: they are encoded as `type ‖ body` and carried inside [`Message::Sealed`].
//! Messages that carry ciphertexts start with the public key they are under.

use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use serde::{Deserialize, Serialize};

use super::b2c::{B2cOfferItem, B2cResponseItem, B2cVerdictItem};
use super::malicious::{RevealItem, ShareReport, ShareTransfer};
use crate::algebra::PublicKey;
use crate::wire::{Decode, Encode, Reader, WireError, Writer};
use crate::zkp::PedersenOneMany;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "buy" | "b" | "long" => Ok(Side::Buy),
            "sell" | "s" | "short" => Ok(Side::Sell),
            other => Err(format!("unknown side {other:?}")),
        }
    }
}

/// Which end of an order's range a value refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    Min,
    Max,
}

/// Names one of a client's registered values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueRef {
    pub symbol: String,
    pub side: Side,
    pub bound: Bound,
}

impl ValueRef {
    pub fn new(symbol: impl Into<String>, side: Side, bound: Bound) -> Self {
        ValueRef { symbol: symbol.into(), side, bound }
    }

    pub fn max(symbol: impl Into<String>, side: Side) -> Self {
        ValueRef::new(symbol, side, Bound::Max)
    }
}

impl Encode for ValueRef {
    fn encode(&self, w: &mut Writer) {
        w.str(&self.symbol);
        w.u8(self.side as u8);
        w.u8(self.bound as u8);
    }
}

impl Decode for ValueRef {
    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        let symbol = r.string()?;
        let side = match r.u8()? {
            0 => Side::Buy,
            1 => Side::Sell,
            t => return Err(WireError::InvalidTag(t)),
        };
        let bound = match r.u8()? {
            0 => Bound::Min,
            1 => Bound::Max,
            t => return Err(WireError::InvalidTag(t)),
        };
        Ok(ValueRef { symbol, side, bound })
    }
}

/// One comparison instance of a batch: `refs.0` is the value of the client
/// in position 0, `refs.1` that of position 1. Malicious batches also carry
/// the server's current commitments to both values.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec {
    pub id: u64,
    pub refs: (ValueRef, ValueRef),
    pub commitments: Option<(RistrettoPoint, RistrettoPoint)>,
}

impl Encode for InstanceSpec {
    fn encode(&self, w: &mut Writer) {
        w.put(&self.id).put(&self.refs).put(&self.commitments);
    }
}

impl Decode for InstanceSpec {
    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(InstanceSpec { id: r.get()?, refs: r.get()?, commitments: r.get()? })
    }
}

/// Update of a registered value after a match.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdjustOp {
    /// v -= amount; the server applies the same update to the commitment.
    Subtract,
    /// v = 0 with zero randomness; the server's commitment becomes the identity.
    SetZero,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjustItem {
    pub target: ValueRef,
    pub op: AdjustOp,
    pub amount: u64,
}

impl Encode for AdjustItem {
    fn encode(&self, w: &mut Writer) {
        w.put(&self.target);
        w.u8(match self.op {
            AdjustOp::Subtract => 0,
            AdjustOp::SetZero => 1,
        });
        w.u64(self.amount);
    }
}

impl Decode for AdjustItem {
    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        let target = r.get()?;
        let op = match r.u8()? {
            0 => AdjustOp::Subtract,
            1 => AdjustOp::SetZero,
            t => return Err(WireError::InvalidTag(t)),
        };
        Ok(AdjustItem { target, op, amount: r.u64()? })
    }
}

macro_rules! catalogue {
    ($( $code:literal => $name:ident { $($field:ident : $ty:ty),* $(,)? } ),* $(,)?) => {
        /// Frame type codes by message name.
        #[allow(non_upper_case_globals)]
        pub mod kind {
            $( pub const $name: u8 = $code; )*
        }

        #[derive(Clone, Debug, PartialEq)]
        pub enum Message {
            $( $name { $($field: $ty),* } ),*
        }

        impl Message {
            pub fn msg_type(&self) -> u8 {
                match self { $( Message::$name { .. } => $code ),* }
            }

            pub fn name(&self) -> &'static str {
                match self { $( Message::$name { .. } => stringify!($name) ),* }
            }

            pub fn type_name(code: u8) -> Option<&'static str> {
                match code { $( $code => Some(stringify!($name)), )* _ => None }
            }

            pub fn encode_body(&self) -> Vec<u8> {
                let mut w = Writer::new();
                match self {
                    $( Message::$name { $($field),* } => { $( w.put($field); )* } ),*
                }
                w.into_bytes()
            }

            pub fn decode_body(code: u8, body: &[u8]) -> Result<Message, WireError> {
                let mut r = Reader::new(body);
                let m = match code {
                    $( $code => Message::$name { $($field: r.get::<$ty>()?),* }, )*
                    t => return Err(WireError::InvalidTag(t)),
                };
                r.finish()?;
                Ok(m)
            }
        }
    };
}

catalogue! {
    // Session control, client <-> server.
    0x01 => Hello { party: u32 },
    0x02 => Welcome { auction: u64, n: u32, mode: u8, functionality: u8, symbols: Vec<String> },
    0x03 => Register { entries: Vec<(ValueRef, Option<RistrettoPoint>)> },
    0x04 => Registered { count: u32 },
    0x05 => PairStart { position: u8, peer: u32 },
    0x06 => PairReady {},
    0x07 => PairEnd {},
    0x08 => BatchStart { batch: u32, mode: u8, reveal: bool, instances: Vec<InstanceSpec> },
    0x09 => Adjust { items: Vec<AdjustItem> },
    0x0A => Adjusted { commitments: Vec<Option<RistrettoPoint>> },
    0x0B => OpenRequest { batch: u32, refs: Vec<ValueRef> },
    0x0C => Opened { batch: u32, values: Vec<u64>, proofs: Vec<Option<RevealItem>> },
    0x0D => AuctionDone { records: Vec<String> },
    0x0E => Abort { reason: String, blame: Option<u32> },
    // Client <-> client through the relay.
    0x10 => HandshakeShare { share: RistrettoPoint },
    0x11 => Sealed { ciphertext: Vec<u8> },
    // Sealed payloads.
    0x20 => Confirm { th: Vec<u8> },
    0x21 => CoinCommit { hash: [u8; 32] },
    0x22 => CoinReply { s1: [u8; 32] },
    0x23 => CoinOpen { s0: [u8; 32], nonce: [u8; 32] },
    0x24 => SemiShares { batch: u32, items: Vec<Vec<Scalar>> },
    0x25 => MalShares { batch: u32, items: Vec<ShareTransfer> },
    // Comparison rounds, client <-> server.
    0x30 => SemiReports { batch: u32, items: Vec<(Vec<Scalar>, Vec<Scalar>)> },
    0x31 => SemiVerdicts { batch: u32, bits: Vec<bool> },
    0x32 => SemiReveals { batch: u32, values: Vec<Option<u64>> },
    0x33 => MalReports { batch: u32, items: Vec<ShareReport> },
    0x34 => MalVerdicts { batch: u32, proofs: Vec<Option<PedersenOneMany>> },
    0x35 => MalReveals { batch: u32, items: Vec<Option<RevealItem>> },
    0x36 => MinResults { batch: u32, mins: Vec<u64>, forwarded: Vec<Option<RevealItem>> },
    // Bank-to-client, the server acting as bank.
    0x40 => B2cOffer { batch: u32, pk: PublicKey, refs: Vec<ValueRef>, items: Vec<B2cOfferItem> },
    0x41 => B2cResponse { batch: u32, pk: PublicKey, items: Vec<B2cResponseItem> },
    0x42 => B2cVerdicts { batch: u32, pk: PublicKey, items: Vec<B2cVerdictItem> },
    0x43 => B2cReveals { batch: u32, values: Vec<Option<u64>> },
}

impl Message {
    pub fn is_sealed_payload(code: u8) -> bool {
        (0x20..0x30).contains(&code)
    }

    /// `type ‖ body`, the plaintext of a sealed message.
    pub fn to_sealed_plaintext(&self) -> Vec<u8> {
        let mut out = vec![self.msg_type()];
        out.extend(self.encode_body());
        out
    }

    pub fn from_sealed_plaintext(pt: &[u8]) -> Result<Message, WireError> {
        let (&code, body) = pt.split_first().ok_or(WireError::Truncated)?;
        if !Self::is_sealed_payload(code) {
            return Err(WireError::InvalidTag(code));
        }
        Self::decode_body(code, body)
    }
}
