use std::collections::{HashMap, VecDeque};
use std::time::{Duration, Instant};

use super::envelope::{header, Envelope, PartyId, ENVELOPE_HEADER_LEN};
use super::frame::Frame;
use super::link::Link;
use super::NetError;

/// One delivered envelope with its frame type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Received {
    pub msg_type: u8,
    pub env: Envelope,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrafficCounters {
    pub sent_frames: u64,
    pub sent_bytes: u64,
    pub recv_frames: u64,
    pub recv_bytes: u64,
}

/// A party's view of the network: sequence numbering, replay rejection and
/// out-of-order buffering on top of a [`Link`].
///
/// Sequence numbers start at 1 and increase by one per (session, recipient)
/// on the sending side; the receiving side requires them to increase
/// strictly per (session, sender) and fails on anything else.
pub struct Endpoint {
    link: Box<dyn Link>,
    me: PartyId,
    auction: u64,
    timeout: Duration,
    max_frame: usize,
    next_seq: HashMap<(u64, PartyId), u64>,
    last_seen: HashMap<(u64, PartyId), u64>,
    pending: VecDeque<Received>,
    counters: TrafficCounters,
}

impl Endpoint {
    pub fn new(link: Box<dyn Link>, me: PartyId, auction: u64, timeout: Duration, max_frame: usize) -> Self {
        Endpoint {
            link,
            me,
            auction,
            timeout,
            max_frame,
            next_seq: HashMap::new(),
            last_seen: HashMap::new(),
            pending: VecDeque::new(),
            counters: TrafficCounters::default(),
        }
    }

    pub fn me(&self) -> PartyId {
        self.me
    }

    pub fn auction(&self) -> u64 {
        self.auction
    }

    pub fn set_auction(&mut self, auction: u64) {
        self.auction = auction;
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    pub fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = timeout;
    }

    pub fn counters(&self) -> TrafficCounters {
        self.counters
    }

    pub fn send(&mut self, session: u64, to: PartyId, msg_type: u8, body: Vec<u8>) -> Result<(), NetError> {
        self.send_with(session, to, msg_type, |_| Ok::<_, NetError>(body))
    }

    /// Sends a body built from the envelope header it will travel under,
    /// for payloads that authenticate the header.
    pub fn send_with<E: From<NetError>>(
        &mut self,
        session: u64,
        to: PartyId,
        msg_type: u8,
        build: impl FnOnce(&[u8; ENVELOPE_HEADER_LEN]) -> Result<Vec<u8>, E>,
    ) -> Result<(), E> {
        let seq = *self.next_seq.get(&(session, to)).unwrap_or(&1);
        let hdr = header(session, self.auction, self.me, to, seq);
        let body = build(&hdr)?;
        let env = Envelope { session, auction: self.auction, sender: self.me, recipient: to, seq, body };
        let raw = env.to_frame(msg_type).encode();
        if raw.len() > self.max_frame + super::frame::FRAME_HEADER_LEN {
            return Err(NetError::Oversize(raw.len()).into());
        }
        self.counters.sent_frames += 1;
        self.counters.sent_bytes += raw.len() as u64;
        self.link.send(raw)?;
        self.next_seq.insert((session, to), seq + 1);
        Ok(())
    }

    fn pull(&mut self, timeout: Duration) -> Result<Received, NetError> {
        let raw = self.link.recv(timeout)?;
        let frame = Frame::decode(&raw, self.max_frame)?;
        let env = Envelope::from_payload(&frame.payload)?;
        let key = (env.session, env.sender);
        if let Some(&last) = self.last_seen.get(&key) {
            if env.seq <= last {
                return Err(NetError::Replay { session: env.session, sender: env.sender, seq: env.seq });
            }
        }
        self.last_seen.insert(key, env.seq);
        self.counters.recv_frames += 1;
        self.counters.recv_bytes += raw.len() as u64;
        Ok(Received { msg_type: frame.msg_type, env })
    }

    pub fn recv_any(&mut self) -> Result<Received, NetError> {
        if let Some(r) = self.pending.pop_front() {
            return Ok(r);
        }
        self.pull(self.timeout)
    }

    /// Returns the first message satisfying `pred`, buffering the rest.
    /// `stop` is checked against every non-matching message; a hit ends the
    /// wait with that message as an error value for the caller to interpret.
    pub fn recv_where(
        &mut self,
        pred: impl Fn(&Received) -> bool,
        stop: impl Fn(&Received) -> bool,
    ) -> Result<Result<Received, Received>, NetError> {
        if let Some(i) = self.pending.iter().position(&pred) {
            return Ok(Ok(self.pending.remove(i).unwrap()));
        }
        if let Some(i) = self.pending.iter().position(&stop) {
            return Ok(Err(self.pending.remove(i).unwrap()));
        }
        let deadline = Instant::now() + self.timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Err(NetError::Timeout);
            }
            let r = self.pull(left)?;
            if pred(&r) {
                return Ok(Ok(r));
            }
            if stop(&r) {
                return Ok(Err(r));
            }
            self.pending.push_back(r);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{Relay, TamperAction, RelayTamper, DEFAULT_MAX_FRAME};

    fn pair(relay: &std::sync::Arc<Relay>) -> (Endpoint, Endpoint) {
        let t = Duration::from_millis(500);
        (
            Endpoint::new(Box::new(relay.connect_local(1).unwrap()), 1, 1, t, DEFAULT_MAX_FRAME),
            Endpoint::new(Box::new(relay.connect_local(2).unwrap()), 2, 1, t, DEFAULT_MAX_FRAME),
        )
    }

    #[test]
    fn buffers_out_of_order() {
        let relay = Relay::new(DEFAULT_MAX_FRAME);
        let (mut a, mut b) = pair(&relay);
        a.send(1, 2, 10, vec![1]).unwrap();
        a.send(2, 2, 11, vec![2]).unwrap();
        let got = b.recv_where(|r| r.env.session == 2, |_| false).unwrap().unwrap();
        assert_eq!(got.env.body, vec![2]);
        assert_eq!(b.recv_any().unwrap().env.body, vec![1]);
        assert!(matches!(b.recv_any(), Err(NetError::Timeout)));
    }

    struct Duplicate;
    impl RelayTamper for Duplicate {
        fn on_frame(&mut self, raw: Vec<u8>) -> TamperAction {
            TamperAction::ForwardAll(vec![raw.clone(), raw])
        }
    }

    #[test]
    fn replay_rejected() {
        let relay = Relay::new(DEFAULT_MAX_FRAME);
        let (mut a, mut b) = pair(&relay);
        relay.set_tamper(Some(Box::new(Duplicate)));
        a.send(1, 2, 10, vec![1]).unwrap();
        assert!(b.recv_any().is_ok());
        assert_eq!(b.recv_any(), Err(NetError::Replay { session: 1, sender: 1, seq: 1 }));
    }
}
