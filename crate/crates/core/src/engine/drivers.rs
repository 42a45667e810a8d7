//! The functionalities run against a [`SecureBackend`]: the server learns
//! comparison bits, minima and explicit openings, nothing else.

use std::collections::BTreeMap;

use super::backend::SecureBackend;
use super::functionality::DIRECTIONS;
use super::log::{MatchLog, MatchRecord, PassTag};
use super::order::{Book, Universe};
use super::pairing::{client_order, pair_order};
use super::{EngineError, Functionality};
use crate::compare::SharedSeed;
use crate::mpc::messages::{AdjustItem, AdjustOp};
use crate::mpc::{Bound, ProtocolError, Side, ValueRef};
use crate::net::{PartyId, SERVER};

/// Everything the server knows before matching starts.
pub struct AuctionPlan<'a> {
    pub functionality: Functionality,
    pub universe: &'a Universe,
    /// Registered clients in ascending id (registration) order.
    pub clients: Vec<PartyId>,
    pub bank: Option<&'a Book>,
    pub seed: SharedSeed,
    /// Queue mode: per symbol, the (long, short) queues in registration order.
    pub queues: BTreeMap<String, (Vec<PartyId>, Vec<PartyId>)>,
}

pub fn run_auction<B: SecureBackend>(plan: &AuctionPlan<'_>, backend: &mut B, log: &mut MatchLog) -> Result<(), EngineError> {
    let u = plan.universe;
    let bank = || plan.bank.ok_or_else(|| EngineError::Config(format!("{} needs a bank order book", plan.functionality)));
    let two = || match plan.clients[..] {
        [a, b] => Ok((a, b)),
        _ => Err(EngineError::Config(format!("{} needs exactly two clients, got {}", plan.functionality, plan.clients.len()))),
    };
    match plan.functionality {
        Functionality::B2c => run_b2c(u, bank()?, &plan.clients, backend, log),
        Functionality::C2c => {
            let (a, b) = two()?;
            run_c2c(u, a, b, backend, log);
        }
        Functionality::Mc => run_mc(u, &pair_order(&plan.seed, &plan.clients), backend, log),
        Functionality::Queue => run_queue(&plan.queues, backend, log),
        Functionality::RangeB2c => run_range_b2c(u, bank()?, &client_order(&plan.seed, &plan.clients), backend, log),
        Functionality::RangeC2c => {
            let (a, b) = two()?;
            run_range_c2c(u, a, b, backend, log);
        }
    }
    Ok(())
}

/// (side of a, symbol) for every instance of a client pair, in order.
fn grid(u: &Universe) -> Vec<(Side, &str)> {
    DIRECTIONS.iter().flat_map(|&(sa, _)| u.symbols().iter().map(move |s| (sa, s.as_str()))).collect()
}

fn sub(target: ValueRef, amount: u64) -> AdjustItem {
    AdjustItem { target, op: AdjustOp::Subtract, amount }
}

fn abort(log: &mut MatchLog, parties: [PartyId; 2], e: &ProtocolError) {
    log.push_abort(parties, e.to_string(), e.blamed());
}

pub fn run_b2c<B: SecureBackend>(u: &Universe, bank: &Book, clients: &[PartyId], backend: &mut B, log: &mut MatchLog) {
    let mut res: BTreeMap<(String, Side), u64> = BTreeMap::new();
    for s in u.symbols() {
        for side in [Side::Buy, Side::Sell] {
            res.insert((s.clone(), side), bank.amount(s, side));
        }
    }
    for &c in clients {
        let g = grid(u);
        let items: Vec<(u64, ValueRef)> = g.iter().map(|&(bs, s)| (res[&(s.to_string(), bs)], ValueRef::max(s, bs.opposite()))).collect();
        log.tick();
        match backend.bank_min(c, &items) {
            Ok(mins) => {
                for (&(bs, s), q) in g.iter().zip(mins) {
                    if q > 0 {
                        *res.get_mut(&(s.to_string(), bs)).unwrap() -= q;
                        log.push_match(MatchRecord::new(s, SERVER, bs, c, q, PassTag::Plain));
                    }
                }
            }
            Err(e) => abort(log, [SERVER, c], &e),
        }
    }
}

pub fn run_c2c<B: SecureBackend>(u: &Universe, a: PartyId, b: PartyId, backend: &mut B, log: &mut MatchLog) {
    let g = grid(u);
    let refs: Vec<_> = g.iter().map(|&(sa, s)| (ValueRef::max(s, sa), ValueRef::max(s, sa.opposite()))).collect();
    log.tick();
    match backend.pair_min(a, b, &refs) {
        Ok(out) => {
            for (&(sa, s), o) in g.iter().zip(out) {
                if o.min > 0 {
                    log.push_match(MatchRecord::new(s, a, sa, b, o.min, PassTag::Plain));
                }
            }
        }
        Err(e) => abort(log, [a, b], &e),
    }
}

pub fn run_mc<B: SecureBackend>(u: &Universe, order: &[(PartyId, PartyId)], backend: &mut B, log: &mut MatchLog) {
    let g = grid(u);
    let refs: Vec<_> = g.iter().map(|&(sa, s)| (ValueRef::max(s, sa), ValueRef::max(s, sa.opposite()))).collect();
    for &(a, b) in order {
        log.tick();
        let out = match backend.pair_min(a, b, &refs) {
            Ok(out) => out,
            Err(e) => {
                abort(log, [a, b], &e);
                continue;
            }
        };
        let (mut adj_a, mut adj_b) = (Vec::new(), Vec::new());
        for ((&(sa, s), (ra, rb)), o) in g.iter().zip(&refs).zip(&out) {
            if o.min > 0 {
                log.push_match(MatchRecord::new(s, a, sa, b, o.min, PassTag::Plain));
                adj_a.push(sub(ra.clone(), o.min));
                adj_b.push(sub(rb.clone(), o.min));
            }
        }
        log.tick();
        for (c, adj) in [(a, adj_a), (b, adj_b)] {
            if !adj.is_empty() {
                if let Err(e) = backend.adjust(c, &adj) {
                    abort(log, [a, b], &e);
                }
            }
        }
    }
}

/// Rounds over all symbols at once: each round compares every symbol's
/// queue fronts, grouped into one batch per (long, short) pair of clients.
pub fn run_queue<B: SecureBackend>(
    queues: &BTreeMap<String, (Vec<PartyId>, Vec<PartyId>)>,
    backend: &mut B,
    log: &mut MatchLog,
) {
    let mut q: BTreeMap<&str, (usize, usize)> = queues.keys().map(|s| (s.as_str(), (0, 0))).collect();
    loop {
        let mut groups: BTreeMap<(PartyId, PartyId), Vec<&str>> = BTreeMap::new();
        for (s, &(li, si)) in &q {
            let (long, short) = &queues[*s];
            if li < long.len() && si < short.len() {
                groups.entry((long[li], short[si])).or_default().push(s);
            }
        }
        if groups.is_empty() {
            return;
        }
        log.tick();
        for ((l, s), syms) in groups {
            let refs: Vec<_> = syms.iter().map(|&sym| (ValueRef::max(sym, Side::Buy), ValueRef::max(sym, Side::Sell))).collect();
            let out = match backend.pair_min(l, s, &refs) {
                Ok(out) => out,
                Err(e) => {
                    abort(log, [l, s], &e);
                    for sym in syms {
                        let p = q.get_mut(sym).unwrap();
                        *p = (p.0 + 1, p.1 + 1);
                    }
                    continue;
                }
            };
            let (mut adj_l, mut adj_s) = (Vec::new(), Vec::new());
            for ((sym, (rl, rs)), o) in syms.iter().zip(refs).zip(&out) {
                if o.min > 0 {
                    log.push_match(MatchRecord::new(sym, l, Side::Buy, s, o.min, PassTag::Plain));
                    adj_l.push(sub(rl, o.min));
                    adj_s.push(sub(rs, o.min));
                }
                let p = q.get_mut(sym).unwrap();
                // the smaller residual reaches zero and leaves its queue
                *p = (p.0 + o.bits.0 as usize, p.1 + o.bits.1 as usize);
            }
            for (c, adj) in [(l, adj_l), (s, adj_s)] {
                if !adj.is_empty() {
                    if let Err(e) = backend.adjust(c, &adj) {
                        abort(log, [l, s], &e);
                    }
                }
            }
        }
    }
}

pub fn run_range_b2c<B: SecureBackend>(u: &Universe, bank: &Book, order: &[PartyId], backend: &mut B, log: &mut MatchLog) {
    let mut res: BTreeMap<(String, Side), u64> = BTreeMap::new();
    for s in u.symbols() {
        for side in [Side::Buy, Side::Sell] {
            res.insert((s.clone(), side), bank.amount(s, side));
        }
    }
    let g = grid(u);
    let mut dead: Vec<PartyId> = Vec::new();
    for (pass, bound) in [(PassTag::MinPass, Bound::Min), (PassTag::MaxPass, Bound::Max)] {
        for &c in order {
            if dead.contains(&c) {
                continue;
            }
            let items: Vec<(u64, ValueRef)> =
                g.iter().map(|&(bs, s)| (res[&(s.to_string(), bs)], ValueRef::new(s, bs.opposite(), bound))).collect();
            log.tick();
            let mins = match backend.bank_min(c, &items) {
                Ok(m) => m,
                Err(e) => {
                    abort(log, [SERVER, c], &e);
                    dead.push(c);
                    continue;
                }
            };
            let mut adj = Vec::new();
            for (&(bs, s), q) in g.iter().zip(mins) {
                if q > 0 {
                    *res.get_mut(&(s.to_string(), bs)).unwrap() -= q;
                    log.push_match(MatchRecord::new(s, SERVER, bs, c, q, pass));
                    // the max bound becomes the remaining capacity
                    adj.push(sub(ValueRef::max(s, bs.opposite()), q));
                }
            }
            if !adj.is_empty() {
                if let Err(e) = backend.adjust(c, &adj) {
                    abort(log, [SERVER, c], &e);
                    dead.push(c);
                }
            }
        }
    }
}

/// One range instance between the pair: a symbol and who buys.
struct RangeInst<'u> {
    symbol: &'u str,
    side_a: Side,
    buyer: PartyId,
    seller: PartyId,
}

impl RangeInst<'_> {
    fn lmin(&self) -> ValueRef {
        ValueRef::new(self.symbol, Side::Buy, Bound::Min)
    }
    fn lmax(&self) -> ValueRef {
        ValueRef::new(self.symbol, Side::Buy, Bound::Max)
    }
    fn smin(&self) -> ValueRef {
        ValueRef::new(self.symbol, Side::Sell, Bound::Min)
    }
    fn smax(&self) -> ValueRef {
        ValueRef::new(self.symbol, Side::Sell, Bound::Max)
    }
}

/// A comparison "x's value ≤ y's value" oriented for the pair (a, b).
struct Orient {
    a: PartyId,
}

impl Orient {
    /// (refs as (a, b), whether the answer is bit 0)
    fn le(&self, x: PartyId, rx: ValueRef, ry: ValueRef) -> ((ValueRef, ValueRef), bool) {
        if x == self.a {
            ((rx, ry), true)
        } else {
            ((ry, rx), false)
        }
    }
}

fn pick(bits: (bool, bool), first: bool) -> bool {
    if first {
        bits.0
    } else {
        bits.1
    }
}

pub fn run_range_c2c<B: SecureBackend>(u: &Universe, a: PartyId, b: PartyId, backend: &mut B, log: &mut MatchLog) {
    let insts: Vec<RangeInst> = grid(u)
        .into_iter()
        .map(|(side_a, symbol)| {
            let (buyer, seller) = if side_a == Side::Buy { (a, b) } else { (b, a) };
            RangeInst { symbol, side_a, buyer, seller }
        })
        .collect();
    let mut records: Vec<Vec<MatchRecord>> = insts.iter().map(|_| Vec::new()).collect();
    let result = range_c2c_steps(&insts, a, b, backend, log, &mut records);
    for r in records.into_iter().flatten() {
        log.push_match(r);
    }
    if let Err(e) = result {
        abort(log, [a, b], &e);
    }
}

fn range_c2c_steps<B: SecureBackend>(
    insts: &[RangeInst<'_>],
    a: PartyId,
    b: PartyId,
    backend: &mut B,
    log: &mut MatchLog,
    records: &mut [Vec<MatchRecord>],
) -> Result<(), ProtocolError> {
    let o = Orient { a };
    let record = |k: usize, q: u64, pass: PassTag| MatchRecord::new(insts[k].symbol, a, insts[k].side_a, b, q, pass);

    // step 1: Lmin ≤ Smax, Smin ≤ Lmax, and Smin ≤ Lmin for the update rule
    let mut refs = Vec::new();
    let mut firsts = Vec::new();
    for it in insts {
        for (x, rx, ry) in [
            (it.buyer, it.lmin(), it.smax()),
            (it.seller, it.smin(), it.lmax()),
            (it.seller, it.smin(), it.lmin()),
        ] {
            let (r, f) = o.le(x, rx, ry);
            refs.push(r);
            firsts.push(f);
        }
    }
    log.tick();
    let bits = backend.pair_compare(a, b, &refs)?;
    let p = |k: usize, t: usize| pick(bits[3 * k + t], firsts[3 * k + t]);
    let active: Vec<usize> = (0..insts.len()).filter(|&k| p(k, 0) && p(k, 1)).collect();
    if active.is_empty() {
        return Ok(());
    }

    let m1 = open_each(backend, log, insts, &active, |it| (it.buyer, it.lmin()))?;
    let mut adj: BTreeMap<PartyId, Vec<AdjustItem>> = BTreeMap::new();
    for (&k, &m) in active.iter().zip(&m1) {
        let it = &insts[k];
        if m > 0 {
            records[k].push(record(k, m, PassTag::MinPass));
        }
        adj.entry(it.buyer).or_default().extend([sub(it.lmin(), m), sub(it.lmax(), m)]);
        let smin_op = if p(k, 2) {
            AdjustItem { target: it.smin(), op: AdjustOp::SetZero, amount: 0 }
        } else {
            sub(it.smin(), m)
        };
        adj.entry(it.seller).or_default().extend([sub(it.smax(), m), smin_op]);
    }
    apply(backend, log, adj)?;

    // step 2: the seller's residual minimum, if the buyer can still take it
    let mut refs = Vec::new();
    let mut firsts = Vec::new();
    for &k in &active {
        let it = &insts[k];
        let (r, f) = o.le(it.seller, it.smin(), it.lmax());
        refs.push(r);
        firsts.push(f);
    }
    log.tick();
    let bits = backend.pair_compare(a, b, &refs)?;
    let second: Vec<usize> = active.iter().zip(bits.iter().zip(&firsts)).filter(|(_, (b, f))| pick(**b, **f)).map(|(k, _)| *k).collect();
    if !second.is_empty() {
        let m2 = open_each(backend, log, insts, &second, |it| (it.seller, it.smin()))?;
        let mut adj: BTreeMap<PartyId, Vec<AdjustItem>> = BTreeMap::new();
        for (&k, &m) in second.iter().zip(&m2) {
            let it = &insts[k];
            if m > 0 {
                records[k].push(record(k, m, PassTag::MinPass));
            }
            adj.entry(it.seller).or_default().extend([sub(it.smin(), m), sub(it.smax(), m)]);
            adj.entry(it.buyer).or_default().push(sub(it.lmax(), m));
        }
        apply(backend, log, adj)?;
    }

    // step 3: committed minimum of the residual maxima
    let mut refs = Vec::new();
    for &k in &active {
        let it = &insts[k];
        let (r, _) = o.le(it.buyer, it.lmax(), it.smax());
        refs.push(r);
    }
    log.tick();
    let out = backend.pair_min(a, b, &refs)?;
    let mut adj: BTreeMap<PartyId, Vec<AdjustItem>> = BTreeMap::new();
    for (&k, m) in active.iter().zip(out) {
        let it = &insts[k];
        if m.min > 0 {
            records[k].push(record(k, m.min, PassTag::MaxPass));
            adj.entry(it.buyer).or_default().push(sub(it.lmax(), m.min));
            adj.entry(it.seller).or_default().push(sub(it.smax(), m.min));
        }
    }
    apply(backend, log, adj)
}

/// Opens one value per listed instance, one request per owning client.
fn open_each<B: SecureBackend>(
    backend: &mut B,
    log: &mut MatchLog,
    insts: &[RangeInst<'_>],
    which: &[usize],
    target: impl Fn(&RangeInst<'_>) -> (PartyId, ValueRef),
) -> Result<Vec<u64>, ProtocolError> {
    let mut by_client: BTreeMap<PartyId, Vec<(usize, ValueRef)>> = BTreeMap::new();
    for (pos, &k) in which.iter().enumerate() {
        let (c, r) = target(&insts[k]);
        by_client.entry(c).or_default().push((pos, r));
    }
    log.tick();
    let mut out = vec![0; which.len()];
    for (c, items) in by_client {
        let refs: Vec<ValueRef> = items.iter().map(|(_, r)| r.clone()).collect();
        let vals = backend.open(c, &refs)?;
        for ((pos, _), v) in items.iter().zip(vals) {
            out[*pos] = v;
        }
    }
    Ok(out)
}

fn apply<B: SecureBackend>(backend: &mut B, log: &mut MatchLog, adj: BTreeMap<PartyId, Vec<AdjustItem>>) -> Result<(), ProtocolError> {
    log.tick();
    for (c, items) in adj {
        if !items.is_empty() {
            backend.adjust(c, &items)?;
        }
    }
    Ok(())
}
