use super::frame::{Frame, FRAME_HEADER_LEN};
use super::NetError;

pub type PartyId = u32;

/// The server (and bank) is always party 0.
pub const SERVER: PartyId = 0;
/// Sender id used by the relay for its own notices.
pub const RELAY: PartyId = u32::MAX;

pub const ENVELOPE_HEADER_LEN: usize = 32;

/// A routed message. The body is opaque to the relay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub session: u64,
    pub auction: u64,
    pub sender: PartyId,
    pub recipient: PartyId,
    pub seq: u64,
    pub body: Vec<u8>,
}

impl Envelope {
    pub fn header_bytes(&self) -> [u8; ENVELOPE_HEADER_LEN] {
        header(self.session, self.auction, self.sender, self.recipient, self.seq)
    }

    pub fn to_frame(&self, msg_type: u8) -> Frame {
        let mut payload = Vec::with_capacity(ENVELOPE_HEADER_LEN + self.body.len());
        payload.extend_from_slice(&self.header_bytes());
        payload.extend_from_slice(&self.body);
        Frame::new(msg_type, payload)
    }

    pub fn from_payload(payload: &[u8]) -> Result<Envelope, NetError> {
        if payload.len() < ENVELOPE_HEADER_LEN {
            return Err(NetError::Truncated);
        }
        let u64_at = |i: usize| u64::from_le_bytes(payload[i..i + 8].try_into().unwrap());
        let u32_at = |i: usize| u32::from_le_bytes(payload[i..i + 4].try_into().unwrap());
        Ok(Envelope {
            session: u64_at(0),
            auction: u64_at(8),
            sender: u32_at(16),
            recipient: u32_at(20),
            seq: u64_at(24),
            body: payload[ENVELOPE_HEADER_LEN..].to_vec(),
        })
    }

    /// Reads sender and recipient straight from raw frame bytes.
    pub fn peek_route(raw_frame: &[u8]) -> Result<(PartyId, PartyId), NetError> {
        let p = raw_frame.get(FRAME_HEADER_LEN..FRAME_HEADER_LEN + ENVELOPE_HEADER_LEN).ok_or(NetError::Truncated)?;
        let u32_at = |i: usize| u32::from_le_bytes(p[i..i + 4].try_into().unwrap());
        Ok((u32_at(16), u32_at(20)))
    }
}

pub fn header(session: u64, auction: u64, sender: PartyId, recipient: PartyId, seq: u64) -> [u8; ENVELOPE_HEADER_LEN] {
    let mut h = [0u8; ENVELOPE_HEADER_LEN];
    h[0..8].copy_from_slice(&session.to_le_bytes());
    h[8..16].copy_from_slice(&auction.to_le_bytes());
    h[16..20].copy_from_slice(&sender.to_le_bytes());
    h[20..24].copy_from_slice(&recipient.to_le_bytes());
    h[24..32].copy_from_slice(&seq.to_le_bytes());
    h
}
