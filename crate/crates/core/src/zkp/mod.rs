//! Non-interactive proofs for commitment equality, bit-ness and
//! one-out-of-many zero commitment.
//!
//! Every proof takes a `ctx` byte string that is absorbed into its
//! transcript before any challenge. Protocols put the auction, session,
//! instance and party into it so a proof cannot be replayed elsewhere.

mod bitproof;
mod comeq;
mod crosseq;
mod dleq;
mod onemany;
mod scheme;
mod transcript;

pub use bitproof::{bit_prove, bit_prove_unchecked, bit_verify, BitProof};
pub use comeq::{comeq_prove, comeq_prove_unchecked, comeq_verify, ComEqProof};
pub use crosseq::{crosseq_prove, crosseq_verify, CrossEqProof};
pub use dleq::{dleq_prove, dleq_verify, DleqProof};
pub use onemany::{
    onemany_prove_generic, onemany_verify_generic, ElGamalOneMany, OneManyProof, PedersenOneMany, ZeroLanguage,
    MAX_INDEX_BITS,
};
pub use scheme::HomomorphicScheme;
pub use transcript::Transcript;

use curve25519_dalek::ristretto::RistrettoPoint;
use rand::{CryptoRng, RngCore};
use thiserror::Error;

use crate::algebra::{Commitment, PedersenParams};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZkpError {
    #[error("prover needs commitment openings")]
    MissingOpening,
    #[error("committed messages differ")]
    UnequalMessages,
    #[error("committed message is not a bit")]
    NotABit,
    #[error("no element of the list is a known commitment to zero")]
    NoZeroWitness,
    #[error("list length {0} is not a power of two")]
    ListLength(usize),
}

pub type PedersenBitProof = BitProof<RistrettoPoint>;

/// Bit proof for an opened Pedersen commitment.
pub fn bitproof_prove<R: RngCore + CryptoRng>(
    params: &PedersenParams,
    v: &Commitment,
    ctx: &[u8],
    rng: &mut R,
) -> Result<PedersenBitProof, ZkpError> {
    let o = v.opening.ok_or(ZkpError::MissingOpening)?;
    bit_prove(params, &v.point, &o.message, &o.randomness, ctx, rng)
}

pub fn bitproof_verify(params: &PedersenParams, proof: &PedersenBitProof, v: &RistrettoPoint, ctx: &[u8]) -> bool {
    bit_verify(params, proof, v, ctx)
}

/// One-out-of-many proof over Pedersen commitments; `list[l]` must carry an
/// opening of 0.
pub fn onemany_prove<R: RngCore + CryptoRng>(
    params: &PedersenParams,
    list: &[Commitment],
    l: usize,
    ctx: &[u8],
    rng: &mut R,
) -> Result<PedersenOneMany, ZkpError> {
    let o = list.get(l).and_then(|c| c.opening).ok_or(ZkpError::NoZeroWitness)?;
    if o.message != curve25519_dalek::scalar::Scalar::ZERO {
        return Err(ZkpError::NoZeroWitness);
    }
    let points: Vec<RistrettoPoint> = list.iter().map(|c| c.point).collect();
    onemany_prove_generic(params, params, &points, l, &o.randomness, ctx, rng)
}

pub fn onemany_verify(params: &PedersenParams, proof: &PedersenOneMany, list: &[RistrettoPoint], ctx: &[u8]) -> bool {
    onemany_verify_generic(params, params, proof, list, ctx)
}
