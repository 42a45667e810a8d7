use curve25519_dalek::scalar::Scalar;

use super::AlgebraError;

/// Big-endian bit decomposition: `bits[0]` is the most significant bit.
pub fn bit_decompose(v: u64, n: u32) -> Result<Vec<u8>, AlgebraError> {
    if n == 0 || n > 64 || (n < 64 && v >> n != 0) {
        return Err(AlgebraError::Range { value: v, bits: n });
    }
    Ok((0..n).map(|j| ((v >> (n - 1 - j)) & 1) as u8).collect())
}

pub fn recompose(bits: &[u8]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
}

pub fn bit_scalars(bits: &[u8]) -> Vec<Scalar> {
    bits.iter().map(|&b| Scalar::from(u64::from(b))).collect()
}

/// Σ 2^{n-1-j} · x_j over the field, for x of length n.
pub fn recompose_scalars(xs: &[Scalar]) -> Scalar {
    let two = Scalar::from(2u64);
    xs.iter().fold(Scalar::ZERO, |acc, x| acc * two + x)
}
