//! Misbehaving-relay hooks used by the adversary flags and the detection
//! tests. Each acts on the `nth` frame (counting from 1) of one message
//! type and forwards everything else untouched.

use super::frame::FRAME_HEADER_LEN;
use super::relay::{RelayTamper, TamperAction};
use super::ENVELOPE_HEADER_LEN;

fn frame_type(raw: &[u8]) -> Option<u8> {
    raw.get(5).copied()
}

/// Delivers the chosen frame twice.
pub struct ReplayFrame {
    msg_type: u8,
    nth: usize,
    seen: usize,
}

impl ReplayFrame {
    pub fn new(msg_type: u8, nth: usize) -> Self {
        ReplayFrame { msg_type, nth, seen: 0 }
    }
}

impl RelayTamper for ReplayFrame {
    fn on_frame(&mut self, raw: Vec<u8>) -> TamperAction {
        if frame_type(&raw) == Some(self.msg_type) {
            self.seen += 1;
            if self.seen == self.nth {
                return TamperAction::ForwardAll(vec![raw.clone(), raw]);
            }
        }
        TamperAction::Forward(raw)
    }
}

/// Flips the low bit of one body byte of the chosen frame. The envelope
/// header is left alone so the frame still routes.
pub struct CorruptFrame {
    msg_type: u8,
    nth: usize,
    seen: usize,
    offset: usize,
}

impl CorruptFrame {
    /// `offset` counts from the start of the message body and is clamped
    /// to its last byte.
    pub fn new(msg_type: u8, nth: usize, offset: usize) -> Self {
        CorruptFrame { msg_type, nth, seen: 0, offset }
    }
}

impl RelayTamper for CorruptFrame {
    fn on_frame(&mut self, mut raw: Vec<u8>) -> TamperAction {
        let body_start = FRAME_HEADER_LEN + ENVELOPE_HEADER_LEN;
        if frame_type(&raw) == Some(self.msg_type) && raw.len() > body_start {
            self.seen += 1;
            if self.seen == self.nth {
                let at = (body_start + self.offset).min(raw.len() - 1);
                raw[at] ^= 1;
            }
        }
        TamperAction::Forward(raw)
    }
}

/// Drops every frame from `from` once `after` of its frames have passed,
/// as if its connection went quiet.
pub struct Silence {
    from: u32,
    after: usize,
    seen: usize,
}

impl Silence {
    pub fn new(from: u32, after: usize) -> Self {
        Silence { from, after, seen: 0 }
    }
}

impl RelayTamper for Silence {
    fn on_frame(&mut self, raw: Vec<u8>) -> TamperAction {
        match super::Envelope::peek_route(&raw) {
            Ok((sender, _)) if sender == self.from => {
                self.seen += 1;
                if self.seen > self.after {
                    return TamperAction::Drop;
                }
                TamperAction::Forward(raw)
            }
            _ => TamperAction::Forward(raw),
        }
    }
}
