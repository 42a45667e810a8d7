use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use rand::{CryptoRng, RngCore};

use super::AlgebraError;

pub const GROUP_NAME: &str = "ristretto255";

pub fn encode_point(p: &RistrettoPoint) -> [u8; 32] {
    p.compress().to_bytes()
}

pub fn decode_point(bytes: &[u8]) -> Result<RistrettoPoint, AlgebraError> {
    let c = CompressedRistretto::from_slice(bytes).map_err(|_| AlgebraError::InvalidPoint)?;
    c.decompress().ok_or(AlgebraError::InvalidPoint)
}

pub fn encode_scalar(s: &Scalar) -> [u8; 32] {
    s.to_bytes()
}

/// Only the reduced representative in [0, q) is accepted.
pub fn decode_scalar(bytes: &[u8]) -> Result<Scalar, AlgebraError> {
    let arr: [u8; 32] = bytes.try_into().map_err(|_| AlgebraError::InvalidScalar)?;
    Option::from(Scalar::from_canonical_bytes(arr)).ok_or(AlgebraError::InvalidScalar)
}

pub fn scalar_from_i64(v: i64) -> Scalar {
    if v < 0 {
        -Scalar::from(v.unsigned_abs())
    } else {
        Scalar::from(v as u64)
    }
}

/// Returns the integer value of `s` if it is below 2^64.
pub fn scalar_to_u64(s: &Scalar) -> Option<u64> {
    let b = s.as_bytes();
    if b[8..].iter().any(|&x| x != 0) {
        return None;
    }
    Some(u64::from_le_bytes(b[..8].try_into().unwrap()))
}

pub fn random_nonzero_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
    loop {
        let s = Scalar::random(rng);
        if s != Scalar::ZERO {
            return s;
        }
    }
}

/// Checks that an n-bit comparison cannot wrap around the group order.
///
/// Every intermediate value of the comparison lies in
/// [-(2 + 4(2^n - 1)), 2 + 4(2^n - 1)], so the bound must stay below q.
/// The bound is computed exactly in u128 and compared with 2^252, which is
/// below q. Widths above 63 are refused because quantities travel as u64.
pub fn check_bit_width(n: u32) -> Result<(), AlgebraError> {
    if n == 0 || n > 63 {
        return Err(AlgebraError::BitWidth(n));
    }
    let bound: u128 = 2 + 4 * ((1u128 << n) - 1);
    let bound_bits = 128 - bound.leading_zeros();
    if bound_bits >= 252 {
        return Err(AlgebraError::BitWidth(n));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT;

    #[test]
    fn point_roundtrip_and_rejection() {
        let p = RISTRETTO_BASEPOINT_POINT * Scalar::from(77u64);
        assert_eq!(decode_point(&encode_point(&p)).unwrap(), p);
        let mut bad = encode_point(&p);
        bad[31] |= 0x80;
        assert_eq!(decode_point(&bad), Err(AlgebraError::InvalidPoint));
        assert!(decode_point(&[0u8; 31]).is_err());
    }

    #[test]
    fn scalar_rejects_unreduced() {
        let s = Scalar::from(12345u64);
        assert_eq!(decode_scalar(&encode_scalar(&s)).unwrap(), s);
        assert_eq!(decode_scalar(&[0xff; 32]), Err(AlgebraError::InvalidScalar));
    }

    #[test]
    fn signed_and_small_values() {
        assert_eq!(scalar_from_i64(-4) + Scalar::from(4u64), Scalar::ZERO);
        assert_eq!(scalar_to_u64(&Scalar::from(99u64)), Some(99));
        assert_eq!(scalar_to_u64(&scalar_from_i64(-1)), None);
    }

    #[test]
    fn bit_width_bounds() {
        assert!(check_bit_width(31).is_ok());
        assert!(check_bit_width(63).is_ok());
        assert!(check_bit_width(0).is_err());
        assert!(check_bit_width(64).is_err());
    }
}
