use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::sync::Arc;
use std::time::Duration;

use super::envelope::PartyId;
use super::relay::Relay;
use super::NetError;

/// A bidirectional pipe of raw frames between one party and the relay.
pub trait Link: Send {
    fn send(&mut self, raw_frame: Vec<u8>) -> Result<(), NetError>;
    fn recv(&mut self, timeout: Duration) -> Result<Vec<u8>, NetError>;
}

/// A party living in the same process as the relay.
pub struct InProcLink {
    pub(super) me: PartyId,
    pub(super) relay: Arc<Relay>,
    pub(super) inbox: Receiver<Vec<u8>>,
}

impl Link for InProcLink {
    fn send(&mut self, raw_frame: Vec<u8>) -> Result<(), NetError> {
        self.relay.route(self.me, raw_frame)
    }

    fn recv(&mut self, timeout: Duration) -> Result<Vec<u8>, NetError> {
        self.inbox.recv_timeout(timeout).map_err(|e| match e {
            RecvTimeoutError::Timeout => NetError::Timeout,
            RecvTimeoutError::Disconnected => NetError::Closed,
        })
    }
}

impl Drop for InProcLink {
    fn drop(&mut self) {
        self.relay.disconnect(self.me);
    }
}
