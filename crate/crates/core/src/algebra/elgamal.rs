use std::ops::{Add, Mul, Neg, Sub};

use curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT;
use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::{Identity, MultiscalarMul};
use rand::{CryptoRng, RngCore};

use super::group::random_nonzero_scalar;
use super::AlgebraError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PublicKey(pub RistrettoPoint);

#[derive(Clone, Debug)]
pub struct ElGamalKeypair {
    pub sk: Scalar,
    pub pk: PublicKey,
}

impl ElGamalKeypair {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self::from_secret(random_nonzero_scalar(rng))
    }

    pub fn from_secret(sk: Scalar) -> Self {
        ElGamalKeypair { sk, pk: PublicKey(RISTRETTO_BASEPOINT_POINT * sk) }
    }
}

/// Exponent ElGamal ciphertext (g^r, pk^r g^m), tagged with its key.
///
/// The key travels with the value so homomorphic operations can refuse to
/// mix keys; it is not part of the wire encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    pub pk: PublicKey,
    pub c1: RistrettoPoint,
    pub c2: RistrettoPoint,
}

impl Ciphertext {
    /// Enc(0; 0), the additive identity under `pk`.
    pub fn zero(pk: PublicKey) -> Self {
        Ciphertext { pk, c1: RistrettoPoint::identity(), c2: RistrettoPoint::identity() }
    }

    /// Enc(m; 0), used to inject public constants.
    pub fn trivial(pk: PublicKey, m: &Scalar) -> Self {
        Ciphertext { pk, c1: RistrettoPoint::identity(), c2: RISTRETTO_BASEPOINT_POINT * m }
    }

    pub fn scale(&self, k: &Scalar) -> Self {
        Ciphertext { pk: self.pk, c1: self.c1 * k, c2: self.c2 * k }
    }
}

impl Add for Ciphertext {
    type Output = Ciphertext;
    fn add(self, rhs: Ciphertext) -> Ciphertext {
        assert_eq!(self.pk, rhs.pk, "ciphertexts under different public keys");
        Ciphertext { pk: self.pk, c1: self.c1 + rhs.c1, c2: self.c2 + rhs.c2 }
    }
}

impl Sub for Ciphertext {
    type Output = Ciphertext;
    fn sub(self, rhs: Ciphertext) -> Ciphertext {
        assert_eq!(self.pk, rhs.pk, "ciphertexts under different public keys");
        Ciphertext { pk: self.pk, c1: self.c1 - rhs.c1, c2: self.c2 - rhs.c2 }
    }
}

impl Neg for Ciphertext {
    type Output = Ciphertext;
    fn neg(self) -> Ciphertext {
        Ciphertext { pk: self.pk, c1: -self.c1, c2: -self.c2 }
    }
}

impl Mul<Scalar> for Ciphertext {
    type Output = Ciphertext;
    fn mul(self, k: Scalar) -> Ciphertext {
        self.scale(&k)
    }
}

pub fn elgamal_encrypt(pk: &PublicKey, m: &Scalar, r: &Scalar) -> Ciphertext {
    Ciphertext {
        pk: *pk,
        c1: RISTRETTO_BASEPOINT_POINT * r,
        c2: RistrettoPoint::multiscalar_mul([*r, *m], [pk.0, RISTRETTO_BASEPOINT_POINT]),
    }
}

/// True iff the exponent is 0, i.e. c2 = c1^sk. No discrete log is taken.
pub fn elgamal_is_zero(sk: &Scalar, ct: &Ciphertext) -> bool {
    ct.c2 == ct.c1 * sk
}

/// Encrypts `constant + Σ scalars_i · m_i`, refreshed with Enc(0; rerand).
pub fn ct_scale_add(
    pk: &PublicKey,
    cts: &[Ciphertext],
    scalars: &[Scalar],
    constant: &Scalar,
    rerand: &Scalar,
) -> Result<Ciphertext, AlgebraError> {
    if cts.len() != scalars.len() {
        return Err(AlgebraError::LengthMismatch { ciphertexts: cts.len(), scalars: scalars.len() });
    }
    if cts.iter().any(|c| c.pk != *pk) {
        return Err(AlgebraError::MixedKeys);
    }
    let c1 = RistrettoPoint::multiscalar_mul(
        scalars.iter().chain([rerand]),
        cts.iter().map(|c| c.c1).chain([RISTRETTO_BASEPOINT_POINT]),
    );
    let c2 = RistrettoPoint::multiscalar_mul(
        scalars.iter().chain([rerand, constant]),
        cts.iter().map(|c| c.c2).chain([pk.0, RISTRETTO_BASEPOINT_POINT]),
    );
    Ok(Ciphertext { pk: *pk, c1, c2 })
}
