use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::IsIdentity;
use hkdf::Hkdf;
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::{encode_point, random_nonzero_scalar};

pub const CONFIRM_LABEL: &[u8] = b"primematch/channel-confirm/v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChannelError {
    #[error("peer key share is invalid")]
    InvalidKeyShare,
    #[error("authentication failed")]
    Authentication,
    #[error("channel terminated after an earlier failure")]
    Broken,
    #[error("key confirmation mismatch")]
    ConfirmMismatch,
}

/// Ephemeral Diffie–Hellman over Ristretto255, relayed by the server.
///
/// Keys: th = SHA-256("primematch/handshake/v1" ‖ auction ‖ session ‖ E_i ‖ E_r)
/// with E_i the initiator share; PRK = HKDF-Extract(salt = th,
/// ikm = encode(shared) ‖ psk?); k_i2r, k_r2i = HKDF-Expand(PRK,
/// "primematch/i2r" | "primematch/r2i", 32). Each side then sends a sealed
/// confirmation carrying th.
pub struct Handshake {
    secret: Scalar,
    public: RistrettoPoint,
    initiator: bool,
}

impl Handshake {
    pub fn new<R: RngCore + CryptoRng>(initiator: bool, rng: &mut R) -> Self {
        let secret = random_nonzero_scalar(rng);
        Handshake { secret, public: curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT * secret, initiator }
    }

    pub fn public_share(&self) -> RistrettoPoint {
        self.public
    }

    pub fn complete(
        self,
        peer: &RistrettoPoint,
        auction: u64,
        session: u64,
        psk: Option<&[u8; 32]>,
    ) -> Result<SecureChannel, ChannelError> {
        let shared = peer * self.secret;
        if shared.is_identity() {
            return Err(ChannelError::InvalidKeyShare);
        }
        let (e_i, e_r) = if self.initiator { (self.public, *peer) } else { (*peer, self.public) };
        let mut h = Sha256::new();
        h.update(b"primematch/handshake/v1");
        h.update(auction.to_le_bytes());
        h.update(session.to_le_bytes());
        h.update(encode_point(&e_i));
        h.update(encode_point(&e_r));
        let th: [u8; 32] = h.finalize().into();

        let mut ikm = encode_point(&shared).to_vec();
        if let Some(psk) = psk {
            ikm.extend_from_slice(psk);
        }
        let hk = Hkdf::<Sha256>::new(Some(&th), &ikm);
        let mut i2r = [0u8; 32];
        let mut r2i = [0u8; 32];
        hk.expand(b"primematch/i2r", &mut i2r).expect("valid length");
        hk.expand(b"primematch/r2i", &mut r2i).expect("valid length");
        let (send, recv) = if self.initiator { (i2r, r2i) } else { (r2i, i2r) };
        Ok(SecureChannel {
            send: ChaCha20Poly1305::new(Key::from_slice(&send)),
            recv: ChaCha20Poly1305::new(Key::from_slice(&recv)),
            send_ctr: 0,
            recv_ctr: 0,
            broken: false,
            transcript_hash: th,
        })
    }
}

/// ChaCha20-Poly1305 in each direction with a counter nonce
/// (4 zero bytes ‖ u64 little-endian counter). The envelope header is the
/// associated data. The first failed open poisons the channel.
pub struct SecureChannel {
    send: ChaCha20Poly1305,
    recv: ChaCha20Poly1305,
    send_ctr: u64,
    recv_ctr: u64,
    broken: bool,
    transcript_hash: [u8; 32],
}

fn nonce(ctr: u64) -> Nonce {
    let mut n = [0u8; 12];
    n[4..].copy_from_slice(&ctr.to_le_bytes());
    *Nonce::from_slice(&n)
}

impl SecureChannel {
    pub fn transcript_hash(&self) -> [u8; 32] {
        self.transcript_hash
    }

    pub fn seal(&mut self, aad: &[u8], plaintext: &[u8]) -> Result<Vec<u8>, ChannelError> {
        if self.broken {
            return Err(ChannelError::Broken);
        }
        let ct = self
            .send
            .encrypt(&nonce(self.send_ctr), Payload { msg: plaintext, aad })
            .map_err(|_| ChannelError::Authentication)?;
        self.send_ctr += 1;
        Ok(ct)
    }

    pub fn open(&mut self, aad: &[u8], ciphertext: &[u8]) -> Result<Vec<u8>, ChannelError> {
        if self.broken {
            return Err(ChannelError::Broken);
        }
        match self.recv.decrypt(&nonce(self.recv_ctr), Payload { msg: ciphertext, aad }) {
            Ok(pt) => {
                self.recv_ctr += 1;
                Ok(pt)
            }
            Err(_) => {
                self.broken = true;
                Err(ChannelError::Authentication)
            }
        }
    }

    pub fn confirm_message(&self) -> Vec<u8> {
        [CONFIRM_LABEL, &self.transcript_hash].concat()
    }

    pub fn check_confirm(&mut self, plaintext: &[u8]) -> Result<(), ChannelError> {
        if plaintext != self.confirm_message().as_slice() {
            self.broken = true;
            return Err(ChannelError::ConfirmMismatch);
        }
        Ok(())
    }
}
