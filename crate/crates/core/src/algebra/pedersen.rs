use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT;
use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::{Identity, MultiscalarMul};
use sha2::Sha512;

use super::group::encode_point;

pub const PEDERSEN_H_TAG: &[u8] = b"primematch-pedersen-h";

/// Generators for Com(m; r) = g^m h^r.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PedersenParams {
    pub g: RistrettoPoint,
    pub h: RistrettoPoint,
}

impl PedersenParams {
    /// g is the Ristretto basepoint; h = hash-to-group(encode(g) ‖ tag).
    pub fn standard() -> Self {
        static PARAMS: OnceLock<PedersenParams> = OnceLock::new();
        *PARAMS.get_or_init(|| {
            let g = RISTRETTO_BASEPOINT_POINT;
            let mut input = encode_point(&g).to_vec();
            input.extend_from_slice(PEDERSEN_H_TAG);
            PedersenParams { g, h: RistrettoPoint::hash_from_bytes::<Sha512>(&input) }
        })
    }

    pub fn commit_point(&self, m: &Scalar, r: &Scalar) -> RistrettoPoint {
        RistrettoPoint::multiscalar_mul([*m, *r], [self.g, self.h])
    }

    pub fn commit(&self, m: &Scalar, r: &Scalar) -> Commitment {
        Commitment {
            point: self.commit_point(m, r),
            opening: Some(Opening { message: *m, randomness: *r }),
        }
    }

    /// Com(m; 0), the form constants take inside linear computations.
    pub fn constant(&self, m: &Scalar) -> Commitment {
        Commitment {
            point: self.g * m,
            opening: Some(Opening { message: *m, randomness: Scalar::ZERO }),
        }
    }
}

pub fn pedersen_commit(params: &PedersenParams, m: &Scalar, r: &Scalar) -> Commitment {
    params.commit(m, r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Opening {
    pub message: Scalar,
    pub randomness: Scalar,
}

/// A commitment point, with its opening when the holder knows it.
///
/// Arithmetic keeps openings in step with points: the product of two opened
/// commitments carries the sum of the openings, and an unopened operand makes
/// the result unopened.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Commitment {
    pub point: RistrettoPoint,
    pub opening: Option<Opening>,
}

impl Commitment {
    pub fn public(point: RistrettoPoint) -> Self {
        Commitment { point, opening: None }
    }

    pub fn identity() -> Self {
        Commitment {
            point: RistrettoPoint::identity(),
            opening: Some(Opening { message: Scalar::ZERO, randomness: Scalar::ZERO }),
        }
    }

    pub fn without_opening(&self) -> Self {
        Commitment::public(self.point)
    }

    pub fn opens_correctly(&self, params: &PedersenParams) -> bool {
        match self.opening {
            Some(o) => params.commit_point(&o.message, &o.randomness) == self.point,
            None => false,
        }
    }

    pub fn scale(&self, k: &Scalar) -> Self {
        Commitment {
            point: self.point * k,
            opening: self.opening.map(|o| Opening { message: o.message * k, randomness: o.randomness * k }),
        }
    }
}

fn join(a: Option<Opening>, b: Option<Opening>, f: impl Fn(Scalar, Scalar) -> Scalar) -> Option<Opening> {
    match (a, b) {
        (Some(a), Some(b)) => Some(Opening {
            message: f(a.message, b.message),
            randomness: f(a.randomness, b.randomness),
        }),
        _ => None,
    }
}

impl Add for Commitment {
    type Output = Commitment;
    fn add(self, rhs: Commitment) -> Commitment {
        Commitment { point: self.point + rhs.point, opening: join(self.opening, rhs.opening, |a, b| a + b) }
    }
}

impl Sub for Commitment {
    type Output = Commitment;
    fn sub(self, rhs: Commitment) -> Commitment {
        Commitment { point: self.point - rhs.point, opening: join(self.opening, rhs.opening, |a, b| a - b) }
    }
}

impl Neg for Commitment {
    type Output = Commitment;
    fn neg(self) -> Commitment {
        Commitment {
            point: -self.point,
            opening: self.opening.map(|o| Opening { message: -o.message, randomness: -o.randomness }),
        }
    }
}

impl Mul<Scalar> for Commitment {
    type Output = Commitment;
    fn mul(self, k: Scalar) -> Commitment {
        self.scale(&k)
    }
}
