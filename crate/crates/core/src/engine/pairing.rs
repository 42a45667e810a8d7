use rand::seq::SliceRandom;
use sha2::{Digest, Sha256};

use crate::compare::SharedSeed;
use crate::net::PartyId;

/// The auction-level seed behind every ordering decision, derived from the
/// configured integer seed.
pub fn auction_seed(seed: u64) -> SharedSeed {
    let mut h = Sha256::new();
    h.update(b"primematch/auction-seed/v1");
    h.update(seed.to_le_bytes());
    SharedSeed(h.finalize().into())
}

/// All unordered client pairs (lower id first), shuffled by the seed.
pub fn pair_order(seed: &SharedSeed, clients: &[PartyId]) -> Vec<(PartyId, PartyId)> {
    let mut ids = clients.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let mut pairs = Vec::with_capacity(ids.len() * ids.len().saturating_sub(1) / 2);
    for (k, &a) in ids.iter().enumerate() {
        for &b in &ids[k + 1..] {
            pairs.push((a, b));
        }
    }
    pairs.shuffle(&mut seed.expand(b"pair-order").rng());
    pairs
}

/// A seeded permutation of the clients.
pub fn client_order(seed: &SharedSeed, clients: &[PartyId]) -> Vec<PartyId> {
    let mut ids = clients.to_vec();
    ids.sort_unstable();
    ids.shuffle(&mut seed.expand(b"client-order").rng());
    ids
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_complete() {
        let s = auction_seed(42);
        let a = pair_order(&s, &[3, 1, 2, 4]);
        assert_eq!(a, pair_order(&s, &[1, 2, 3, 4]));
        assert_eq!(a.len(), 6);
        let mut sorted = a.clone();
        sorted.sort();
        assert_eq!(sorted, vec![(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]);
        assert!(pair_order(&s, &[7]).is_empty());
    }

    #[test]
    fn seeds_change_the_order() {
        let clients: Vec<PartyId> = (1..=8).collect();
        let orders: std::collections::HashSet<_> = (0..20).map(|k| pair_order(&auction_seed(k), &clients)).collect();
        assert!(orders.len() > 15);
        let c = client_order(&auction_seed(1), &clients);
        let mut sorted = c.clone();
        sorted.sort();
        assert_eq!(sorted, clients);
    }
}
