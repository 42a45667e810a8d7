//! Two-party coin toss for the comparison seed.
//!
//! The initiator commits to s_0 with a hash, the responder answers with s_1
//! in the clear, the initiator opens, and both use s_0 XOR s_1. Neither side
//! can bias the seed without breaking the hash, and the server never sees it
//! because all three messages travel inside the sealed client channel.

use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use super::ProtocolError;
use crate::compare::SharedSeed;

fn coin_hash(session: u64, s0: &[u8; 32], nonce: &[u8; 32]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"primematch/coin/v1");
    h.update(session.to_le_bytes());
    h.update(s0);
    h.update(nonce);
    h.finalize().into()
}

fn xor(a: &[u8; 32], b: &[u8; 32]) -> SharedSeed {
    let mut out = [0u8; 32];
    for i in 0..32 {
        out[i] = a[i] ^ b[i];
    }
    SharedSeed(out)
}

pub struct CoinInitiator {
    s0: [u8; 32],
    nonce: [u8; 32],
}

impl CoinInitiator {
    /// Returns the state and the commitment to send.
    pub fn start<R: RngCore + CryptoRng>(session: u64, rng: &mut R) -> (Self, [u8; 32]) {
        let mut s0 = [0u8; 32];
        let mut nonce = [0u8; 32];
        rng.fill_bytes(&mut s0);
        rng.fill_bytes(&mut nonce);
        let c = coin_hash(session, &s0, &nonce);
        (CoinInitiator { s0, nonce }, c)
    }

    /// Consumes the responder's share; returns the seed and the opening
    /// (s_0, nonce) to send.
    pub fn finish(self, s1: &[u8; 32]) -> (SharedSeed, [u8; 32], [u8; 32]) {
        (xor(&self.s0, s1), self.s0, self.nonce)
    }
}

pub struct CoinResponder {
    session: u64,
    commitment: [u8; 32],
    s1: [u8; 32],
}

impl CoinResponder {
    pub fn respond<R: RngCore + CryptoRng>(session: u64, commitment: [u8; 32], rng: &mut R) -> (Self, [u8; 32]) {
        let mut s1 = [0u8; 32];
        rng.fill_bytes(&mut s1);
        (CoinResponder { session, commitment, s1 }, s1)
    }

    pub fn finish(self, s0: &[u8; 32], nonce: &[u8; 32]) -> Result<SharedSeed, ProtocolError> {
        if coin_hash(self.session, s0, nonce) != self.commitment {
            return Err(ProtocolError::CoinTossOpening);
        }
        Ok(xor(s0, &self.s1))
    }
}
