//! Comparison against a semi-honest adversary.
//!
//! Each client shares its bits additively, keeps its own half and sends the
//! other half to the peer over the sealed channel. Both clients run the
//! comparison on their halves with the shared randomness and send the
//! resulting d shares to the server, which adds them and runs
//! `comparison_final`. After seeding this is three rounds: share exchange,
//! d shares to the server, bits back to the clients.

use curve25519_dalek::scalar::Scalar;
use rand::{CryptoRng, RngCore};

use super::ProtocolError;
use crate::algebra::{bit_decompose, check_bit_width};
use crate::compare::{comparison_final, comparison_initial, ComparisonRandomness, ShareRole};

pub struct SemiClient {
    n: u32,
    position: u8,
    instance: u64,
    value: u64,
    kept: Vec<Scalar>,
}

/// (⟨d_0⟩_i, ⟨d_1⟩_i)
pub type DShares = (Vec<Scalar>, Vec<Scalar>);

impl SemiClient {
    /// Returns the state and the peer's halves of this client's bits.
    pub fn start<R: RngCore + CryptoRng>(
        n: u32,
        position: u8,
        instance: u64,
        value: u64,
        rng: &mut R,
    ) -> Result<(SemiClient, Vec<Scalar>), ProtocolError> {
        check_bit_width(n)?;
        if position > 1 {
            return Err(ProtocolError::Input(format!("position {position}")));
        }
        let bits = bit_decompose(value, n)?;
        let mut kept = Vec::with_capacity(bits.len());
        let mut sent = Vec::with_capacity(bits.len());
        for b in bits {
            let other = Scalar::random(rng);
            kept.push(Scalar::from(b as u64) - other);
            sent.push(other);
        }
        Ok((SemiClient { n, position, instance, value, kept }, sent))
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn receive(&self, peer_half: &[Scalar], rand: &ComparisonRandomness) -> Result<DShares, ProtocolError> {
        if peer_half.len() != self.n as usize {
            return Err(ProtocolError::Malformed { what: "bit shares", party: 1 - self.position, instance: self.instance });
        }
        let (x0, x1) = if self.position == 0 { (&self.kept[..], peer_half) } else { (peer_half, &self.kept[..]) };
        let out = comparison_initial(x0, x1, rand, &ShareRole::for_position(self.position))?;
        Ok((out.d0, out.d1))
    }
}

/// The server's step: reconstruct d and read off the bits.
pub fn semi_decide(n: u32, instance: u64, reports: [&DShares; 2]) -> Result<(bool, bool), ProtocolError> {
    let len = n as usize + 1;
    for (p, r) in reports.iter().enumerate() {
        if r.0.len() != len || r.1.len() != len {
            return Err(ProtocolError::Malformed { what: "d shares", party: p as u8, instance });
        }
    }
    let add = |a: &[Scalar], b: &[Scalar]| -> Vec<Scalar> { a.iter().zip(b).map(|(x, y)| x + y).collect() };
    let bits = comparison_final(&add(&reports[0].0, &reports[1].0), &add(&reports[0].1, &reports[1].1));
    if !bits.0 && !bits.1 {
        return Err(ProtocolError::NoWinner { instance });
    }
    Ok(bits)
}

/// The minimum from the winners' revealed values.
pub fn semi_min(bits: (bool, bool), reveals: [Option<u64>; 2], instance: u64) -> Result<u64, ProtocolError> {
    let won = [bits.0, bits.1];
    let mut min = None;
    for p in 0..2 {
        match (won[p], reveals[p]) {
            (true, Some(v)) => match min {
                Some(m) if m != v => return Err(ProtocolError::RevealRejected { party: p as u8, instance }),
                _ => min = Some(v),
            },
            (false, None) => {}
            _ => return Err(ProtocolError::RevealRejected { party: p as u8, instance }),
        }
    }
    min.ok_or(ProtocolError::NoWinner { instance })
}
