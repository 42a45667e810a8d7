use curve25519_dalek::scalar::Scalar;

use crate::algebra::{Ciphertext, Commitment, PedersenParams, PublicKey};

/// An element of an F_q-module.
pub trait Carrier: Clone + Send + Sync {
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn scale(&self, k: &Scalar) -> Self;
}

/// How public constants enter a computation over a given carrier.
pub trait Constants<C> {
    fn inject(&self, c: &Scalar) -> C;
}

impl Carrier for Scalar {
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn scale(&self, k: &Scalar) -> Self {
        self * k
    }
}

impl Carrier for Commitment {
    fn add(&self, rhs: &Self) -> Self {
        *self + *rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        *self - *rhs
    }
    fn scale(&self, k: &Scalar) -> Self {
        Commitment::scale(self, k)
    }
}

impl Carrier for Ciphertext {
    fn add(&self, rhs: &Self) -> Self {
        *self + *rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        *self - *rhs
    }
    fn scale(&self, k: &Scalar) -> Self {
        Ciphertext::scale(self, k)
    }
}

/// Constants taken at face value, for computations in the clear.
pub struct PlainConstants;

impl Constants<Scalar> for PlainConstants {
    fn inject(&self, c: &Scalar) -> Scalar {
        *c
    }
}

/// Additive shares: exactly one of the two share holders adds the constant,
/// the other adds zero. By convention the client in position 1 holds them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShareRole {
    ConstantHolder,
    Silent,
}

impl ShareRole {
    pub fn for_position(position: u8) -> Self {
        if position == 1 {
            ShareRole::ConstantHolder
        } else {
            ShareRole::Silent
        }
    }
}

impl Constants<Scalar> for ShareRole {
    fn inject(&self, c: &Scalar) -> Scalar {
        match self {
            ShareRole::ConstantHolder => *c,
            ShareRole::Silent => Scalar::ZERO,
        }
    }
}

/// Commitments to shares: the constant c becomes Com(c; 0) = g^c when the
/// committed share belongs to the constant holder, and the identity otherwise.
pub struct CommitmentConstants {
    pub params: PedersenParams,
    pub role: ShareRole,
}

impl Constants<Commitment> for CommitmentConstants {
    fn inject(&self, c: &Scalar) -> Commitment {
        match self.role {
            ShareRole::ConstantHolder => self.params.constant(c),
            ShareRole::Silent => Commitment::identity(),
        }
    }
}

/// Ciphertexts: the constant c becomes the trivial encryption Enc(c; 0).
pub struct CiphertextConstants(pub PublicKey);

impl Constants<Ciphertext> for CiphertextConstants {
    fn inject(&self, c: &Scalar) -> Ciphertext {
        Ciphertext::trivial(self.0, c)
    }
}
