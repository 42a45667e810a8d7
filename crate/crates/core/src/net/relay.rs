use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{channel, Sender};
use std::sync::{Arc, Mutex};

use super::envelope::{Envelope, PartyId, RELAY, SERVER};
use super::frame::Frame;
use super::link::InProcLink;
use super::metrics::RelayMetrics;
use super::{NetError, MSG_DISCONNECTED, MSG_ROUTE_ERROR};

/// What the relay observed for one forwarded frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub session: u64,
    pub sender: PartyId,
    pub recipient: PartyId,
    pub seq: u64,
    pub msg_type: u8,
    pub body: Vec<u8>,
    pub frame_len: usize,
}

pub enum TamperAction {
    Forward(Vec<u8>),
    Drop,
    ForwardAll(Vec<Vec<u8>>),
}

/// Hook for tests that play a misbehaving relay.
pub trait RelayTamper: Send {
    fn on_frame(&mut self, raw_frame: Vec<u8>) -> TamperAction;
}

/// Routes frames between registered parties without looking past the
/// envelope header.
pub struct Relay {
    routes: Mutex<HashMap<PartyId, Sender<Vec<u8>>>>,
    max_frame: usize,
    transcript: Mutex<Option<Vec<TranscriptEntry>>>,
    tamper: Mutex<Option<Box<dyn RelayTamper>>>,
    notice_seq: AtomicU64,
    pub metrics: RelayMetrics,
}

impl Relay {
    pub fn new(max_frame: usize) -> Arc<Self> {
        Arc::new(Relay {
            routes: Mutex::new(HashMap::new()),
            max_frame,
            transcript: Mutex::new(None),
            tamper: Mutex::new(None),
            notice_seq: AtomicU64::new(1),
            metrics: RelayMetrics::default(),
        })
    }

    pub fn max_frame(&self) -> usize {
        self.max_frame
    }

    pub fn register(&self, party: PartyId, tx: Sender<Vec<u8>>) -> Result<(), NetError> {
        let mut routes = self.routes.lock().unwrap();
        if routes.contains_key(&party) || party == RELAY {
            return Err(NetError::Duplicate(party));
        }
        routes.insert(party, tx);
        Ok(())
    }

    pub fn connect_local(self: &Arc<Self>, party: PartyId) -> Result<InProcLink, NetError> {
        let (tx, rx) = channel();
        self.register(party, tx)?;
        Ok(InProcLink { me: party, relay: Arc::clone(self), inbox: rx })
    }

    pub fn is_connected(&self, party: PartyId) -> bool {
        self.routes.lock().unwrap().contains_key(&party)
    }

    /// Removes the route and tells the server the party is gone.
    pub fn disconnect(&self, party: PartyId) {
        let removed = self.routes.lock().unwrap().remove(&party).is_some();
        if removed && party != SERVER {
            self.notice(SERVER, 0, 0, MSG_DISCONNECTED, party.to_le_bytes().to_vec());
        }
    }

    pub fn record_transcript(&self, on: bool) {
        *self.transcript.lock().unwrap() = if on { Some(Vec::new()) } else { None };
    }

    pub fn take_transcript(&self) -> Vec<TranscriptEntry> {
        self.transcript.lock().unwrap().as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn set_tamper(&self, tamper: Option<Box<dyn RelayTamper>>) {
        *self.tamper.lock().unwrap() = tamper;
    }

    fn notice(&self, to: PartyId, session: u64, auction: u64, msg_type: u8, body: Vec<u8>) {
        let env = Envelope {
            session,
            auction,
            sender: RELAY,
            recipient: to,
            seq: self.notice_seq.fetch_add(1, Ordering::Relaxed),
            body,
        };
        if let Some(tx) = self.routes.lock().unwrap().get(&to) {
            let _ = tx.send(env.to_frame(msg_type).encode());
        }
    }

    /// Forwards one frame sent on the link of `from`.
    ///
    /// An unknown or departed recipient produces a route-error notice to the
    /// sender rather than an error here, so TCP and in-process links behave
    /// alike.
    pub fn route(&self, from: PartyId, raw: Vec<u8>) -> Result<(), NetError> {
        let (frame, _) = Frame::decode_prefix(&raw, self.max_frame)?;
        let env = Envelope::from_payload(&frame.payload)?;
        if env.sender != from {
            self.metrics.rejected.fetch_add(1, Ordering::Relaxed);
            return Err(NetError::Spoofed { claimed: env.sender, actual: from });
        }
        self.metrics.record(frame.msg_type, raw.len());
        if let Some(t) = self.transcript.lock().unwrap().as_mut() {
            t.push(TranscriptEntry {
                session: env.session,
                sender: env.sender,
                recipient: env.recipient,
                seq: env.seq,
                msg_type: frame.msg_type,
                body: env.body.clone(),
                frame_len: raw.len(),
            });
        }
        let outgoing = match self.tamper.lock().unwrap().as_mut() {
            None => vec![raw],
            Some(t) => match t.on_frame(raw) {
                TamperAction::Forward(r) => vec![r],
                TamperAction::Drop => vec![],
                TamperAction::ForwardAll(rs) => rs,
            },
        };
        for out in outgoing {
            let delivered = match self.routes.lock().unwrap().get(&env.recipient) {
                Some(tx) => tx.send(out).is_ok(),
                None => false,
            };
            if !delivered {
                self.metrics.route_errors.fetch_add(1, Ordering::Relaxed);
                self.notice(from, env.session, env.auction, MSG_ROUTE_ERROR, env.recipient.to_le_bytes().to_vec());
            }
        }
        Ok(())
    }
}
