use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use rand::{CryptoRng, RngCore};

use super::scheme::HomomorphicScheme;
use super::transcript::Transcript;
use crate::algebra::PedersenParams;
use crate::wire::{Decode, Encode, Reader, WireError, Writer};

/// Proof that a Pedersen commitment V = Com(m; r0) and a value W = S.commit(m; r1)
/// of another homomorphic scheme share the message m.
///
/// K0 = Com(k_m; k0), K1 = S.commit(k_m; k1), x = H(.., V, W, K0, K1);
/// z_m = m·x + k_m, z0 = r0·x + k0, z1 = r1·x + k1. The verifier checks
/// Com(z_m; z0) = V^x·K0 and S.commit(z_m; z1) = W^x·K1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossEqProof<V> {
    pub k0: RistrettoPoint,
    pub k1: V,
    pub zm: Scalar,
    pub z0: Scalar,
    pub z1: Scalar,
}

fn challenge<S: HomomorphicScheme>(
    params: &PedersenParams,
    scheme: &S,
    ctx: &[u8],
    v: &RistrettoPoint,
    w: &S::Value,
    k0: &RistrettoPoint,
    k1: &S::Value,
) -> Scalar {
    let mut t = Transcript::new(b"primematch/crosseq/v1");
    params.absorb_params(&mut t);
    scheme.absorb_params(&mut t);
    t.absorb(b"ctx", ctx);
    t.absorb_point(b"V", v);
    scheme.absorb_value(&mut t, b"W", w);
    t.absorb_point(b"K0", k0);
    scheme.absorb_value(&mut t, b"K1", k1);
    t.challenge(b"x")
}

/// The caller is responsible for the witness; a wrong one yields a proof that
/// fails verification.
#[allow(clippy::too_many_arguments)]
pub fn crosseq_prove<S: HomomorphicScheme, R: RngCore + CryptoRng>(
    params: &PedersenParams,
    scheme: &S,
    v: &RistrettoPoint,
    w: &S::Value,
    m: &Scalar,
    r0: &Scalar,
    r1: &Scalar,
    ctx: &[u8],
    rng: &mut R,
) -> CrossEqProof<S::Value> {
    let (km, k0s, k1s) = (Scalar::random(rng), Scalar::random(rng), Scalar::random(rng));
    let k0 = params.commit_point(&km, &k0s);
    let k1 = scheme.commit(&km, &k1s);
    let x = challenge(params, scheme, ctx, v, w, &k0, &k1);
    CrossEqProof { k0, k1, zm: m * x + km, z0: r0 * x + k0s, z1: r1 * x + k1s }
}

pub fn crosseq_verify<S: HomomorphicScheme>(
    params: &PedersenParams,
    scheme: &S,
    proof: &CrossEqProof<S::Value>,
    v: &RistrettoPoint,
    w: &S::Value,
    ctx: &[u8],
) -> bool {
    if !scheme.accepts(w) || !scheme.accepts(&proof.k1) {
        return false;
    }
    let x = challenge(params, scheme, ctx, v, w, &proof.k0, &proof.k1);
    params.commit_point(&proof.zm, &proof.z0) == v * x + proof.k0
        && scheme.commit(&proof.zm, &proof.z1) == *w * x + proof.k1
}

impl<V: Encode> Encode for CrossEqProof<V> {
    fn encode(&self, w: &mut Writer) {
        w.point(&self.k0).put(&self.k1).scalar(&self.zm).scalar(&self.z0).scalar(&self.z1);
    }
}

impl<V: Decode> Decode for CrossEqProof<V> {
    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(CrossEqProof { k0: r.point()?, k1: r.get()?, zm: r.scalar()?, z0: r.scalar()?, z1: r.scalar()? })
    }
}
