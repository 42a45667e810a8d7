use curve25519_dalek::scalar::Scalar;
use hkdf::Hkdf;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::Sha256;

use super::CompareError;

/// A 32-byte secret shared by the two clients of a pair (the coin-toss
/// output) or derived from one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SharedSeed(pub [u8; 32]);

impl SharedSeed {
    /// Keyed expansion: HKDF-SHA256-Expand with the seed as PRK and `label`
    /// as info, 32 output bytes.
    pub fn expand(&self, label: &[u8]) -> SharedSeed {
        let hk = Hkdf::<Sha256>::from_prk(&self.0).expect("32-byte PRK");
        let mut out = [0u8; 32];
        hk.expand(label, &mut out).expect("32 bytes is a valid HKDF length");
        SharedSeed(out)
    }

    pub fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.0)
    }
}

/// π and the nonzero scalars s_{0,j}, s_{1,j} for one comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonRandomness {
    pub permutation: Vec<usize>,
    pub s0: Vec<Scalar>,
    pub s1: Vec<Scalar>,
}

impl ComparisonRandomness {
    pub fn new(permutation: Vec<usize>, s0: Vec<Scalar>, s1: Vec<Scalar>) -> Result<Self, CompareError> {
        let len = permutation.len();
        if len == 0 || s0.len() != len || s1.len() != len {
            return Err(CompareError::Length(s0.len(), s1.len(), len.saturating_sub(1)));
        }
        let mut seen = vec![false; len];
        for &p in &permutation {
            if p >= len || std::mem::replace(&mut seen[p], true) {
                return Err(CompareError::NotAPermutation(len - 1));
            }
        }
        if s0.iter().chain(&s1).any(|s| *s == Scalar::ZERO) {
            return Err(CompareError::ZeroScalar);
        }
        Ok(ComparisonRandomness { permutation, s0, s1 })
    }

    /// Identity permutation and unit scalars; exposes the pre-shuffle vectors.
    pub fn identity(n: usize) -> Self {
        ComparisonRandomness {
            permutation: (0..=n).collect(),
            s0: vec![Scalar::ONE; n + 1],
            s1: vec![Scalar::ONE; n + 1],
        }
    }

    /// The bit width n; vectors have length n + 1.
    pub fn n(&self) -> usize {
        self.permutation.len() - 1
    }
}

/// Uniform integer in [0, bound) from whole u64 words by rejection.
///
/// A word v is accepted iff v < 2^64 - (2^64 mod bound), then reduced mod
/// bound; rejected words are discarded and the next one is drawn.
pub fn uniform_below<R: RngCore>(rng: &mut R, bound: u64) -> u64 {
    assert!(bound > 0);
    let range = 1u128 << 64;
    let limit = range - range % u128::from(bound);
    loop {
        let v = rng.next_u64();
        if u128::from(v) < limit {
            return v % bound;
        }
    }
}

fn nonzero_scalar<R: RngCore>(rng: &mut R) -> Scalar {
    loop {
        let mut wide = [0u8; 64];
        rng.fill_bytes(&mut wide);
        let s = Scalar::from_bytes_mod_order_wide(&wide);
        if s != Scalar::ZERO {
            return s;
        }
    }
}

/// Derives the comparison coins from a seed.
///
/// Stream: ChaCha20 keyed by the seed (rand_chacha `ChaCha20Rng`, zero
/// nonce, block counter from 0), consumed as consecutive keystream bytes.
/// 1. π: start from the identity on 0..=n; for i = n down to 1, draw
///    j = uniform_below(i + 1) (8-byte little-endian words) and swap π[i], π[j].
/// 2. for j = 0..=n: s_{0,j} then s_{1,j}, each from 64 bytes reduced mod q
///    (little-endian), redrawn while zero.
pub fn derive_randomness(seed: &SharedSeed, n: usize) -> ComparisonRandomness {
    let mut rng = seed.rng();
    let mut permutation: Vec<usize> = (0..=n).collect();
    for i in (1..=n).rev() {
        let j = uniform_below(&mut rng, (i + 1) as u64) as usize;
        permutation.swap(i, j);
    }
    let mut s0 = Vec::with_capacity(n + 1);
    let mut s1 = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        s0.push(nonzero_scalar(&mut rng));
        s1.push(nonzero_scalar(&mut rng));
    }
    ComparisonRandomness { permutation, s0, s1 }
}
