use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;

use crate::algebra::encode_point;

/// Fiat–Shamir transcript over merlin (STROBE-128 on Keccak-f[1600]).
///
/// Each absorb is framed by merlin as label ‖ u32 length ‖ bytes, so
/// distinct absorb sequences never collide. Challenges squeeze 64 bytes and
/// reduce them mod q.
pub struct Transcript {
    inner: merlin::Transcript,
}

impl Transcript {
    pub fn new(domain: &'static [u8]) -> Self {
        Transcript { inner: merlin::Transcript::new(domain) }
    }

    pub fn absorb(&mut self, label: &'static [u8], bytes: &[u8]) {
        self.inner.append_message(label, bytes);
    }

    pub fn absorb_u64(&mut self, label: &'static [u8], v: u64) {
        self.inner.append_u64(label, v);
    }

    pub fn absorb_point(&mut self, label: &'static [u8], p: &RistrettoPoint) {
        self.absorb(label, &encode_point(p));
    }

    pub fn absorb_scalar(&mut self, label: &'static [u8], s: &Scalar) {
        self.absorb(label, s.as_bytes());
    }

    pub fn challenge(&mut self, label: &'static [u8]) -> Scalar {
        let mut wide = [0u8; 64];
        self.inner.challenge_bytes(label, &mut wide);
        Scalar::from_bytes_mod_order_wide(&wide)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(domain: &'static [u8], msg: &[u8]) -> Scalar {
        let mut t = Transcript::new(domain);
        t.absorb(b"m", msg);
        t.challenge(b"x")
    }

    #[test]
    fn deterministic_and_sensitive() {
        assert_eq!(run(b"d", b"abc"), run(b"d", b"abc"));
        assert_ne!(run(b"d", b"abc"), run(b"d", b"abd"));
        assert_ne!(run(b"d", b"abc"), run(b"e", b"abc"));
    }

    #[test]
    fn framing_separates_splits() {
        let mut a = Transcript::new(b"d");
        a.absorb(b"m", b"ab");
        a.absorb(b"m", b"c");
        let mut b = Transcript::new(b"d");
        b.absorb(b"m", b"a");
        b.absorb(b"m", b"bc");
        assert_ne!(a.challenge(b"x"), b.challenge(b"x"));
    }
}
