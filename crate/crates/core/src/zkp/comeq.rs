use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use rand::{CryptoRng, RngCore};

use super::scheme::HomomorphicScheme;
use super::transcript::Transcript;
use super::ZkpError;
use crate::algebra::{Commitment, PedersenParams};
use crate::wire::{Decode, Encode, Reader, WireError, Writer};

/// Proof that two Pedersen commitments hide the same message.
///
/// V0·V1^{-1} = h^{r0-r1}, so a Schnorr proof of knowledge of log_h of the
/// difference suffices: K = h^k, x = H(params, ctx, V0, V1, K),
/// s = (r0 - r1)·x + k, and the verifier checks h^s = (V0·V1^{-1})^x · K.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComEqProof {
    pub k: RistrettoPoint,
    pub s: Scalar,
}

fn challenge(params: &PedersenParams, ctx: &[u8], v0: &RistrettoPoint, v1: &RistrettoPoint, k: &RistrettoPoint) -> Scalar {
    let mut t = Transcript::new(b"primematch/comeq/v1");
    params.absorb_params(&mut t);
    t.absorb(b"ctx", ctx);
    t.absorb_point(b"V0", v0);
    t.absorb_point(b"V1", v1);
    t.absorb_point(b"K", k);
    t.challenge(b"x")
}

pub fn comeq_prove<R: RngCore + CryptoRng>(
    params: &PedersenParams,
    v0: &Commitment,
    v1: &Commitment,
    ctx: &[u8],
    rng: &mut R,
) -> Result<ComEqProof, ZkpError> {
    let (o0, o1) = match (v0.opening, v1.opening) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(ZkpError::MissingOpening),
    };
    if o0.message != o1.message {
        return Err(ZkpError::UnequalMessages);
    }
    Ok(comeq_prove_unchecked(params, v0, v1, ctx, rng))
}

/// Emits a proof without checking that the messages agree; only useful for
/// soundness and tamper testing.
#[doc(hidden)]
pub fn comeq_prove_unchecked<R: RngCore + CryptoRng>(
    params: &PedersenParams,
    v0: &Commitment,
    v1: &Commitment,
    ctx: &[u8],
    rng: &mut R,
) -> ComEqProof {
    let r0 = v0.opening.map(|o| o.randomness).unwrap_or_default();
    let r1 = v1.opening.map(|o| o.randomness).unwrap_or_default();
    let k_scalar = Scalar::random(rng);
    let k = params.h * k_scalar;
    let x = challenge(params, ctx, &v0.point, &v1.point, &k);
    ComEqProof { k, s: (r0 - r1) * x + k_scalar }
}

pub fn comeq_verify(
    params: &PedersenParams,
    proof: &ComEqProof,
    v0: &RistrettoPoint,
    v1: &RistrettoPoint,
    ctx: &[u8],
) -> bool {
    let x = challenge(params, ctx, v0, v1, &proof.k);
    params.h * proof.s == (v0 - v1) * x + proof.k
}

impl Encode for ComEqProof {
    fn encode(&self, w: &mut Writer) {
        w.point(&self.k).scalar(&self.s);
    }
}

impl Decode for ComEqProof {
    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(ComEqProof { k: r.point()?, s: r.scalar()? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::OsRng;

    #[test]
    fn honest_and_unequal() {
        let p = PedersenParams::standard();
        let seven = Scalar::from(7u64);
        let a = p.commit(&seven, &Scalar::random(&mut OsRng));
        let b = p.commit(&seven, &Scalar::random(&mut OsRng));
        let pf = comeq_prove(&p, &a, &b, b"t", &mut OsRng).unwrap();
        assert!(comeq_verify(&p, &pf, &a.point, &b.point, b"t"));
        assert!(!comeq_verify(&p, &pf, &b.point, &a.point, b"t"));
        assert!(!comeq_verify(&p, &pf, &a.point, &b.point, b"u"));

        let c = p.commit(&Scalar::from(8u64), &Scalar::random(&mut OsRng));
        assert_eq!(comeq_prove(&p, &a, &c, b"t", &mut OsRng), Err(ZkpError::UnequalMessages));
        let forged = comeq_prove_unchecked(&p, &a, &c, b"t", &mut OsRng);
        assert!(!comeq_verify(&p, &forged, &a.point, &c.point, b"t"));
        assert_eq!(
            comeq_prove(&p, &a.without_opening(), &b, b"t", &mut OsRng),
            Err(ZkpError::MissingOpening)
        );
    }
}
