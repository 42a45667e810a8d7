use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use rand::{CryptoRng, RngCore};

use super::transcript::Transcript;
use crate::wire::{Decode, Encode, Reader, WireError, Writer};

/// Chaum–Pedersen proof that log_{g1} h1 = log_{g2} h2.
///
/// A1 = g1^k, A2 = g2^k, c from the transcript, z = k + c·w; the verifier
/// checks g1^z = A1·h1^c and g2^z = A2·h2^c.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DleqProof {
    pub a1: RistrettoPoint,
    pub a2: RistrettoPoint,
    pub z: Scalar,
}

fn absorb(t: &mut Transcript, bases: [&RistrettoPoint; 4], a1: &RistrettoPoint, a2: &RistrettoPoint) {
    t.absorb_point(b"dleq.g1", bases[0]);
    t.absorb_point(b"dleq.h1", bases[1]);
    t.absorb_point(b"dleq.g2", bases[2]);
    t.absorb_point(b"dleq.h2", bases[3]);
    t.absorb_point(b"dleq.a1", a1);
    t.absorb_point(b"dleq.a2", a2);
}

/// Continues `t`, so the proof is bound to whatever was absorbed before.
pub fn dleq_prove<R: RngCore + CryptoRng>(
    t: &mut Transcript,
    g1: &RistrettoPoint,
    h1: &RistrettoPoint,
    g2: &RistrettoPoint,
    h2: &RistrettoPoint,
    w: &Scalar,
    rng: &mut R,
) -> DleqProof {
    let k = Scalar::random(rng);
    let (a1, a2) = (g1 * k, g2 * k);
    absorb(t, [g1, h1, g2, h2], &a1, &a2);
    let c = t.challenge(b"dleq.c");
    DleqProof { a1, a2, z: k + c * w }
}

pub fn dleq_verify(
    t: &mut Transcript,
    g1: &RistrettoPoint,
    h1: &RistrettoPoint,
    g2: &RistrettoPoint,
    h2: &RistrettoPoint,
    proof: &DleqProof,
) -> bool {
    absorb(t, [g1, h1, g2, h2], &proof.a1, &proof.a2);
    let c = t.challenge(b"dleq.c");
    g1 * proof.z == proof.a1 + h1 * c && g2 * proof.z == proof.a2 + h2 * c
}

impl Encode for DleqProof {
    fn encode(&self, w: &mut Writer) {
        w.point(&self.a1).point(&self.a2).scalar(&self.z);
    }
}

impl Decode for DleqProof {
    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(DleqProof { a1: r.point()?, a2: r.point()?, z: r.scalar()? })
    }
}
