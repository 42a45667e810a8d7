use std::collections::BTreeMap;

use crate::mpc::messages::{AdjustItem, AdjustOp};
use crate::mpc::{ProtocolError, ValueRef};
use crate::net::PartyId;

/// Outcome of one committed-minimum instance between clients a and b:
/// `bits = (v_a ≤ v_b, v_b ≤ v_a)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinOutcome {
    pub bits: (bool, bool),
    pub min: u64,
}

/// What the drivers may ask of the clients' registered values. Each
/// instance list is oriented as (value of a, value of b).
pub trait SecureBackend {
    fn pair_min(&mut self, a: PartyId, b: PartyId, refs: &[(ValueRef, ValueRef)]) -> Result<Vec<MinOutcome>, ProtocolError>;

    /// Comparison bits only; no value is revealed.
    fn pair_compare(&mut self, a: PartyId, b: PartyId, refs: &[(ValueRef, ValueRef)]) -> Result<Vec<(bool, bool)>, ProtocolError>;

    /// Opens registered values of one client.
    fn open(&mut self, client: PartyId, refs: &[ValueRef]) -> Result<Vec<u64>, ProtocolError>;

    fn adjust(&mut self, client: PartyId, items: &[AdjustItem]) -> Result<(), ProtocolError>;

    /// Minimum between the bank's value and the client's registered value,
    /// one per item.
    fn bank_min(&mut self, client: PartyId, items: &[(u64, ValueRef)]) -> Result<Vec<u64>, ProtocolError>;
}

/// Values held in the clear; the reference the protocol backend is checked
/// against.
#[derive(Clone, Debug, Default)]
pub struct PlainBackend {
    values: BTreeMap<PartyId, BTreeMap<ValueRef, u64>>,
}

impl PlainBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, client: PartyId, values: impl IntoIterator<Item = (ValueRef, u64)>) {
        self.values.entry(client).or_default().extend(values);
    }

    pub fn value(&self, client: PartyId, r: &ValueRef) -> u64 {
        self.values.get(&client).and_then(|m| m.get(r)).copied().unwrap_or(0)
    }
}

impl SecureBackend for PlainBackend {
    fn pair_min(&mut self, a: PartyId, b: PartyId, refs: &[(ValueRef, ValueRef)]) -> Result<Vec<MinOutcome>, ProtocolError> {
        Ok(refs
            .iter()
            .map(|(ra, rb)| {
                let (va, vb) = (self.value(a, ra), self.value(b, rb));
                MinOutcome { bits: (va <= vb, vb <= va), min: va.min(vb) }
            })
            .collect())
    }

    fn pair_compare(&mut self, a: PartyId, b: PartyId, refs: &[(ValueRef, ValueRef)]) -> Result<Vec<(bool, bool)>, ProtocolError> {
        Ok(self.pair_min(a, b, refs)?.into_iter().map(|o| o.bits).collect())
    }

    fn open(&mut self, client: PartyId, refs: &[ValueRef]) -> Result<Vec<u64>, ProtocolError> {
        Ok(refs.iter().map(|r| self.value(client, r)).collect())
    }

    fn adjust(&mut self, client: PartyId, items: &[AdjustItem]) -> Result<(), ProtocolError> {
        let m = self.values.entry(client).or_default();
        for it in items {
            let v = m.entry(it.target.clone()).or_insert(0);
            *v = match it.op {
                AdjustOp::Subtract => v
                    .checked_sub(it.amount)
                    .ok_or_else(|| ProtocolError::Input(format!("adjustment below zero on {}", it.target.symbol)))?,
                AdjustOp::SetZero => 0,
            };
        }
        Ok(())
    }

    fn bank_min(&mut self, client: PartyId, items: &[(u64, ValueRef)]) -> Result<Vec<u64>, ProtocolError> {
        Ok(items.iter().map(|(bank, r)| (*bank).min(self.value(client, r))).collect())
    }
}
