//! Field and group arithmetic.
//!
//! The group is Ristretto255: prime order q ≈ 2^252, canonical 32-byte point
//! encodings, and scalars in F_q encoded as 32 little-endian bytes. Shares,
//! commitment messages and ElGamal exponents all live in the same field.

mod bits;
mod elgamal;
mod group;
mod pedersen;

pub use bits::{bit_decompose, bit_scalars, recompose, recompose_scalars};
pub use elgamal::{ct_scale_add, elgamal_encrypt, elgamal_is_zero, Ciphertext, ElGamalKeypair, PublicKey};
pub use group::{
    check_bit_width, decode_point, decode_scalar, encode_point, encode_scalar, random_nonzero_scalar,
    scalar_from_i64, scalar_to_u64, GROUP_NAME,
};
pub use pedersen::{pedersen_commit, Commitment, Opening, PedersenParams, PEDERSEN_H_TAG};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("value {value} does not fit in {bits} bits")]
    Range { value: u64, bits: u32 },
    #[error("bit width {0} violates 2 + 4(2^n - 1) < q or exceeds 63")]
    BitWidth(u32),
    #[error("non-canonical point encoding")]
    InvalidPoint,
    #[error("non-canonical scalar encoding")]
    InvalidScalar,
    #[error("ciphertexts under different public keys")]
    MixedKeys,
    #[error("{scalars} scalars supplied for {ciphertexts} ciphertexts")]
    LengthMismatch { ciphertexts: usize, scalars: usize },
}
