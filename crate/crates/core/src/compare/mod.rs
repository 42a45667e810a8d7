//! The affine-linear comparison function.
//!
//! [`comparison_initial`] is written once over any [`Carrier`]: plain
//! scalars, additive shares, Pedersen commitments or ElGamal ciphertexts.
//! Every step is linear in the input bits, which is what lets two clients
//! run it on shares and commitments without interacting.

mod carrier;
mod randomness;

pub use carrier::{Carrier, CiphertextConstants, CommitmentConstants, Constants, PlainConstants, ShareRole};
pub use randomness::{derive_randomness, uniform_below, ComparisonRandomness, SharedSeed};

use curve25519_dalek::scalar::Scalar;
use thiserror::Error;

use crate::algebra::{bit_decompose, bit_scalars};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompareError {
    #[error("inputs of length {0} and {1} with randomness for {2} bits")]
    Length(usize, usize, usize),
    #[error("permutation is not a bijection on 0..={0}")]
    NotAPermutation(usize),
    #[error("randomising scalar is zero")]
    ZeroScalar,
}

/// The two randomized vectors d_0, d_1, each of length n + 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonOutput<C> {
    pub d0: Vec<C>,
    pub d1: Vec<C>,
}

/// ComparisonInitial on big-endian bit vectors of length n.
///
/// With w_accum starting at 0, for j = 0..n:
///   c_{0,j} = 1 + v_{0,j} - v_{1,j} + w_accum
///   c_{1,j} = -1 + v_{0,j} - v_{1,j} + w_accum
///   w_accum += 2^{2+j} · (v_{0,j} - v_{1,j})
/// then c_{0,n} = c_{1,n} = w_accum and d_{b,j} = s_{b,j} · c_{b,π(j)}.
/// Constants enter only through `constants`, so each share holder decides
/// whether it contributes them.
pub fn comparison_initial<C: Carrier, K: Constants<C>>(
    bits0: &[C],
    bits1: &[C],
    rand: &ComparisonRandomness,
    constants: &K,
) -> Result<ComparisonOutput<C>, CompareError> {
    let n = bits0.len();
    if bits1.len() != n || rand.n() != n {
        return Err(CompareError::Length(n, bits1.len(), rand.n()));
    }
    let one = constants.inject(&Scalar::ONE);
    let minus_one = constants.inject(&-Scalar::ONE);
    let mut w_accum = constants.inject(&Scalar::ZERO);
    let mut weight = Scalar::from(4u64);
    let mut c0 = Vec::with_capacity(n + 1);
    let mut c1 = Vec::with_capacity(n + 1);
    for j in 0..n {
        let w_j = bits0[j].sub(&bits1[j]);
        let t = w_j.add(&w_accum);
        c0.push(one.add(&t));
        c1.push(minus_one.add(&t));
        w_accum = w_accum.add(&w_j.scale(&weight));
        weight += weight;
    }
    c0.push(w_accum.clone());
    c1.push(w_accum);
    let d0 = (0..=n).map(|j| c0[rand.permutation[j]].scale(&rand.s0[j])).collect();
    let d1 = (0..=n).map(|j| c1[rand.permutation[j]].scale(&rand.s1[j])).collect();
    Ok(ComparisonOutput { d0, d1 })
}

/// ComparisonFinal: b_i is true iff some d_{i,j} is zero.
pub fn comparison_final(d0: &[Scalar], d1: &[Scalar]) -> (bool, bool) {
    (d0.contains(&Scalar::ZERO), d1.contains(&Scalar::ZERO))
}

/// Runs the comparison in the clear on two n-bit integers.
pub fn compare_plain(
    v0: u64,
    v1: u64,
    n: u32,
    rand: &ComparisonRandomness,
) -> Result<ComparisonOutput<Scalar>, crate::algebra::AlgebraError> {
    let b0 = bit_scalars(&bit_decompose(v0, n)?);
    let b1 = bit_scalars(&bit_decompose(v1, n)?);
    Ok(comparison_initial(&b0, &b1, rand, &PlainConstants).expect("lengths agree by construction"))
}
