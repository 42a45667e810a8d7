//! Server-aided private inventory matching.
//!
//! Two clients compare secret quantities by doing only linear work on
//! additive shares and Pedersen commitments; a relay server reconstructs a
//! randomized vector and learns nothing but the comparison bits. On top of
//! the comparison sit the matching functionalities (bank-to-client,
//! client-to-client, multi-client, queue and range variants).
//!
//! Module map:
//!
//! * [`algebra`]: Ristretto255 scalars and points, Pedersen commitments,
//!   exponent ElGamal.
//! * [`wire`]: canonical binary encodings shared by proofs and messages.
//! * [`zkp`]: Fiat–Shamir proofs of commitment equality, bit-ness and
//!   one-out-of-many zero commitment.
//! * [`compare`]: the affine-linear comparison function over any linear
//!   carrier.
//! * [`mpc`]: per-party protocol state machines.
//! * [`net`]: framing, envelopes, relay, secure client channels, transports.
//! * [`engine`]: orders, functionalities, auction orchestration, localsim.
//! * [`config`]: TOML configuration with environment overrides.

pub mod algebra;
pub mod compare;
pub mod config;
pub mod engine;
pub mod mpc;
pub mod net;
pub mod wire;
pub mod zkp;

pub use curve25519_dalek::ristretto::RistrettoPoint;
pub use curve25519_dalek::scalar::Scalar;
