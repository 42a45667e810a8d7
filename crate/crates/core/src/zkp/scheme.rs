use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::{Identity, MultiscalarMul};

use super::transcript::Transcript;
use crate::algebra::{Ciphertext, PedersenParams, PublicKey};
use crate::wire::{Decode, Encode};

/// A linearly homomorphic commitment, Com(m; r), over which the sigma
/// protocols are written once.
///
/// Two instances exist: Pedersen (values are points) and exponent ElGamal
/// under a fixed key (values are ciphertexts, Com(m; r) = Enc(m; r)).
pub trait HomomorphicScheme: Sync {
    type Value: Copy
        + PartialEq
        + Debug
        + Send
        + Sync
        + Encode
        + Decode
        + Add<Output = Self::Value>
        + Sub<Output = Self::Value>
        + Neg<Output = Self::Value>
        + Mul<Scalar, Output = Self::Value>;

    fn commit(&self, m: &Scalar, r: &Scalar) -> Self::Value;
    fn identity(&self) -> Self::Value;
    fn msm(&self, scalars: &[Scalar], values: &[Self::Value]) -> Self::Value;
    fn absorb_params(&self, t: &mut Transcript);
    fn absorb_value(&self, t: &mut Transcript, label: &'static [u8], v: &Self::Value);

    /// Whether `v` belongs to this instance (ciphertexts must carry its key).
    fn accepts(&self, _v: &Self::Value) -> bool {
        true
    }
}

impl HomomorphicScheme for PedersenParams {
    type Value = RistrettoPoint;

    fn commit(&self, m: &Scalar, r: &Scalar) -> RistrettoPoint {
        self.commit_point(m, r)
    }

    fn identity(&self) -> RistrettoPoint {
        RistrettoPoint::identity()
    }

    fn msm(&self, scalars: &[Scalar], values: &[RistrettoPoint]) -> RistrettoPoint {
        RistrettoPoint::multiscalar_mul(scalars, values)
    }

    fn absorb_params(&self, t: &mut Transcript) {
        t.absorb(b"scheme", b"pedersen");
        t.absorb_point(b"g", &self.g);
        t.absorb_point(b"h", &self.h);
    }

    fn absorb_value(&self, t: &mut Transcript, label: &'static [u8], v: &RistrettoPoint) {
        t.absorb_point(label, v);
    }
}

impl HomomorphicScheme for PublicKey {
    type Value = Ciphertext;

    fn commit(&self, m: &Scalar, r: &Scalar) -> Ciphertext {
        crate::algebra::elgamal_encrypt(self, m, r)
    }

    fn identity(&self) -> Ciphertext {
        Ciphertext::zero(*self)
    }

    fn msm(&self, scalars: &[Scalar], values: &[Ciphertext]) -> Ciphertext {
        Ciphertext {
            pk: *self,
            c1: RistrettoPoint::multiscalar_mul(scalars, values.iter().map(|v| v.c1)),
            c2: RistrettoPoint::multiscalar_mul(scalars, values.iter().map(|v| v.c2)),
        }
    }

    fn absorb_params(&self, t: &mut Transcript) {
        t.absorb(b"scheme", b"elgamal");
        t.absorb_point(b"g", &curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT);
        t.absorb_point(b"pk", &self.0);
    }

    fn absorb_value(&self, t: &mut Transcript, label: &'static [u8], v: &Ciphertext) {
        t.absorb_point(label, &v.c1);
        t.absorb_point(label, &v.c2);
    }

    fn accepts(&self, v: &Ciphertext) -> bool {
        v.pk == *self
    }
}
