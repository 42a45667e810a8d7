use curve25519_dalek::scalar::Scalar;
use rand::{CryptoRng, RngCore};

use super::scheme::HomomorphicScheme;
use super::transcript::Transcript;
use super::ZkpError;
use crate::wire::{Decode, Encode, Reader, WireError, Writer};

/// Groth–Kohlweiss proof that c = Com(m; r) hides m ∈ {0, 1}.
///
/// Prover: c_a = Com(a; s), c_b = Com(a·m; t), x = H(.., c, c_a, c_b),
/// f = m·x + a, z_a = r·x + s, z_b = r·(x - f) + t.
/// Verifier: c^x·c_a = Com(f; z_a) and c^{x-f}·c_b = Com(0; z_b).
/// The second equation holds for honest provers because m(x - f) + a·m =
/// m(1 - m)·x, which vanishes exactly on bits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BitProof<V> {
    pub ca: V,
    pub cb: V,
    pub f: Scalar,
    pub za: Scalar,
    pub zb: Scalar,
}

fn challenge<S: HomomorphicScheme>(scheme: &S, ctx: &[u8], c: &S::Value, ca: &S::Value, cb: &S::Value) -> Scalar {
    let mut t = Transcript::new(b"primematch/bitproof/v1");
    scheme.absorb_params(&mut t);
    t.absorb(b"ctx", ctx);
    scheme.absorb_value(&mut t, b"c", c);
    scheme.absorb_value(&mut t, b"ca", ca);
    scheme.absorb_value(&mut t, b"cb", cb);
    t.challenge(b"x")
}

pub fn bit_prove<S: HomomorphicScheme, R: RngCore + CryptoRng>(
    scheme: &S,
    c: &S::Value,
    m: &Scalar,
    r: &Scalar,
    ctx: &[u8],
    rng: &mut R,
) -> Result<BitProof<S::Value>, ZkpError> {
    if *m != Scalar::ZERO && *m != Scalar::ONE {
        return Err(ZkpError::NotABit);
    }
    Ok(bit_prove_unchecked(scheme, c, m, r, ctx, rng))
}

/// Runs the prover on any message; only useful for soundness testing.
#[doc(hidden)]
pub fn bit_prove_unchecked<S: HomomorphicScheme, R: RngCore + CryptoRng>(
    scheme: &S,
    c: &S::Value,
    m: &Scalar,
    r: &Scalar,
    ctx: &[u8],
    rng: &mut R,
) -> BitProof<S::Value> {
    let (a, s, t) = (Scalar::random(rng), Scalar::random(rng), Scalar::random(rng));
    let ca = scheme.commit(&a, &s);
    let cb = scheme.commit(&(a * m), &t);
    let x = challenge(scheme, ctx, c, &ca, &cb);
    let f = m * x + a;
    BitProof { ca, cb, f, za: r * x + s, zb: r * (x - f) + t }
}

pub fn bit_verify<S: HomomorphicScheme>(scheme: &S, proof: &BitProof<S::Value>, c: &S::Value, ctx: &[u8]) -> bool {
    if ![c, &proof.ca, &proof.cb].iter().all(|v| scheme.accepts(v)) {
        return false;
    }
    let x = challenge(scheme, ctx, c, &proof.ca, &proof.cb);
    *c * x + proof.ca == scheme.commit(&proof.f, &proof.za)
        && *c * (x - proof.f) + proof.cb == scheme.commit(&Scalar::ZERO, &proof.zb)
}

impl<V: Encode> Encode for BitProof<V> {
    fn encode(&self, w: &mut Writer) {
        w.put(&self.ca).put(&self.cb).scalar(&self.f).scalar(&self.za).scalar(&self.zb);
    }
}

impl<V: Decode> Decode for BitProof<V> {
    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(BitProof { ca: r.get()?, cb: r.get()?, f: r.scalar()?, za: r.scalar()?, zb: r.scalar()? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ElGamalKeypair, PedersenParams};
    use rand::rngs::OsRng;

    #[test]
    fn pedersen_bits() {
        let p = PedersenParams::standard();
        for m in [Scalar::ZERO, Scalar::ONE] {
            let r = Scalar::random(&mut OsRng);
            let c = p.commit_point(&m, &r);
            let pf = bit_prove(&p, &c, &m, &r, b"ctx", &mut OsRng).unwrap();
            assert!(bit_verify(&p, &pf, &c, b"ctx"));
            let other = p.commit_point(&m, &(r + Scalar::ONE));
            assert!(!bit_verify(&p, &pf, &other, b"ctx"));
        }
        let two = Scalar::from(2u64);
        let r = Scalar::random(&mut OsRng);
        let c = p.commit_point(&two, &r);
        assert_eq!(bit_prove(&p, &c, &two, &r, b"ctx", &mut OsRng), Err(ZkpError::NotABit));
        let forced = bit_prove_unchecked(&p, &c, &two, &r, b"ctx", &mut OsRng);
        assert!(!bit_verify(&p, &forced, &c, b"ctx"));
    }

    #[test]
    fn elgamal_bits() {
        let kp = ElGamalKeypair::generate(&mut OsRng);
        let r = Scalar::random(&mut OsRng);
        let c = kp.pk.commit(&Scalar::ONE, &r);
        let pf = bit_prove(&kp.pk, &c, &Scalar::ONE, &r, b"", &mut OsRng).unwrap();
        assert!(bit_verify(&kp.pk, &pf, &c, b""));
        let other_key = ElGamalKeypair::generate(&mut OsRng);
        let c_other = other_key.pk.commit(&Scalar::ONE, &r);
        assert!(!bit_verify(&kp.pk, &pf, &c_other, b""));
    }
}
