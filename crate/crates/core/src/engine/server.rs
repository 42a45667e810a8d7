//! The server: registration window, then the chosen functionality driven
//! over the relay. The server only ever holds commitments, comparison bits
//! and the values the functionality reveals.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::Identity;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::agent::{decode, send_msg};
use super::backend::{MinOutcome, SecureBackend};
use super::drivers::{run_auction, AuctionPlan};
use super::log::{LogEntry, MatchLog};
use super::order::{Book, Universe};
use super::pairing::auction_seed;
use super::{EngineError, Functionality};
use crate::algebra::{ElGamalKeypair, PedersenParams};
use crate::compare::SharedSeed;
use crate::mpc::b2c::BankB2c;
use crate::mpc::malicious::{verify_reveal, MalServer, MalVerdict, ServerTamper};
use crate::mpc::messages::{kind, AdjustItem, AdjustOp, InstanceSpec};
use crate::mpc::semi::{semi_decide, semi_min};
use crate::mpc::{Bound, InstanceCtx, Message, ProtocolError, SecurityMode, Side, ValueRef};
use crate::net::{Endpoint, NetError, PartyId, DEFAULT_MAX_FRAME, MSG_DISCONNECTED, MSG_ROUTE_ERROR, RELAY, SERVER};

#[derive(Clone, Debug)]
pub struct ServerSettings {
    pub auction: u64,
    pub n: u32,
    pub mode: SecurityMode,
    pub functionality: Functionality,
    pub universe: Universe,
    pub seed: u64,
    /// Close registration as soon as this many clients have registered.
    pub expected_clients: Option<usize>,
    pub register_window: Duration,
    /// The bank's own orders, for the bank-to-client functionalities.
    pub bank: Option<Book>,
    pub tamper: ServerTamper,
    /// Private RNG seed. Without one the server's randomness, including
    /// the bank key, follows from `seed`, which suits simulation only.
    pub rng_seed: Option<[u8; 32]>,
}

impl ServerSettings {
    pub fn new(functionality: Functionality, mode: SecurityMode, n: u32, universe: Universe, seed: u64) -> Self {
        ServerSettings {
            auction: 1,
            n,
            mode,
            functionality,
            universe,
            seed,
            expected_clients: None,
            register_window: Duration::from_secs(60),
            bank: None,
            tamper: ServerTamper::None,
            rng_seed: None,
        }
    }
}

type Registry = BTreeMap<ValueRef, Option<RistrettoPoint>>;

/// Owned inputs of an [`AuctionPlan`].
pub struct PlanParts {
    pub functionality: Functionality,
    pub universe: Universe,
    pub clients: Vec<PartyId>,
    pub bank: Option<Book>,
    pub seed: SharedSeed,
    pub queues: BTreeMap<String, (Vec<PartyId>, Vec<PartyId>)>,
}

impl PlanParts {
    pub fn plan(&self) -> AuctionPlan<'_> {
        AuctionPlan {
            functionality: self.functionality,
            universe: &self.universe,
            clients: self.clients.clone(),
            bank: self.bank.as_ref(),
            seed: self.seed,
            queues: self.queues.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SessionState {
    Live(u64),
    Dead,
}

pub struct AuctionServer {
    ep: Endpoint,
    settings: ServerSettings,
    params: PedersenParams,
    rng: ChaCha20Rng,
    bank_key: ElGamalKeypair,
    welcomed: BTreeSet<PartyId>,
    /// Registration order and each client's registered values.
    registered: Vec<PartyId>,
    registry: BTreeMap<PartyId, Registry>,
    gone: BTreeSet<PartyId>,
    pairs: BTreeMap<(PartyId, PartyId), SessionState>,
    next_session: u64,
    next_batch: u32,
}

/// Instances per batch, sized so the largest per-batch frame stays well
/// under the default frame cap. Per-instance traffic grows with n.
pub fn batch_limit(n: u32) -> usize {
    (DEFAULT_MAX_FRAME / 2 / (384 * (n as usize + 1))).max(1)
}

impl AuctionServer {
    pub fn new(ep: Endpoint, settings: ServerSettings) -> Self {
        let mut rng = match settings.rng_seed {
            Some(k) => ChaCha20Rng::from_seed(k),
            None => auction_seed(settings.seed).expand(b"server-rng").rng(),
        };
        let bank_key = ElGamalKeypair::generate(&mut rng);
        AuctionServer {
            ep,
            settings,
            params: PedersenParams::standard(),
            rng,
            bank_key,
            welcomed: BTreeSet::new(),
            registered: Vec::new(),
            registry: BTreeMap::new(),
            gone: BTreeSet::new(),
            pairs: BTreeMap::new(),
            next_session: 1,
            next_batch: 0,
        }
    }

    /// The server-held commitment to a client's registered value.
    pub fn commitment(&self, client: PartyId, r: &ValueRef) -> Option<RistrettoPoint> {
        self.registry.get(&client).and_then(|m| m.get(r)).copied().flatten()
    }

    pub fn traffic(&self) -> crate::net::TrafficCounters {
        self.ep.counters()
    }

    pub fn registered(&self) -> &[PartyId] {
        &self.registered
    }

    /// Registration window, matching, then results to every client.
    pub fn run(&mut self) -> Result<MatchLog, EngineError> {
        self.register_phase()?;
        let parts = self.plan_parts();
        let mut log = self.header();
        if !parts.clients.is_empty() {
            run_auction(&parts.plan(), self, &mut log)?;
        }
        self.finish(&mut log);
        Ok(log)
    }

    /// What the drivers need, as known after registration.
    pub fn plan_parts(&self) -> PlanParts {
        let mut clients = self.registered.clone();
        clients.sort_unstable();
        let mut queues: BTreeMap<String, (Vec<PartyId>, Vec<PartyId>)> = BTreeMap::new();
        if self.settings.functionality.sparse_registration() {
            for c in &clients {
                for r in self.registry[c].keys() {
                    let q = queues.entry(r.symbol.clone()).or_default();
                    match r.side {
                        Side::Buy => q.0.push(*c),
                        Side::Sell => q.1.push(*c),
                    }
                }
            }
        }
        PlanParts {
            functionality: self.settings.functionality,
            universe: self.settings.universe.clone(),
            clients,
            bank: self.settings.bank.clone(),
            seed: auction_seed(self.settings.seed),
            queues,
        }
    }

    /// A fresh log with this auction's header.
    pub fn header(&self) -> MatchLog {
        let mut clients = self.registered.clone();
        clients.sort_unstable();
        MatchLog::new(LogEntry::Header {
            auction: self.settings.auction,
            seed: self.settings.seed.to_string(),
            functionality: self.settings.functionality.to_string(),
            mode: self.settings.mode.to_string(),
            n: self.settings.n,
            symbols: self.settings.universe.len(),
            clients,
        })
    }

    /// Closes live pair sessions and sends each client its matches.
    pub fn finish(&mut self, log: &mut MatchLog) {
        let live: Vec<((PartyId, PartyId), u64)> = self
            .pairs
            .iter()
            .filter_map(|(k, s)| match s {
                SessionState::Live(id) if k.0 != SERVER => Some((*k, *id)),
                _ => None,
            })
            .collect();
        for ((a, b), s) in live {
            let _ = send_msg(&mut self.ep, s, a, &Message::PairEnd {});
            let _ = send_msg(&mut self.ep, s, b, &Message::PairEnd {});
        }
        let records = log.records();
        for &c in &self.registered {
            if self.gone.contains(&c) {
                continue;
            }
            let mine = records
                .iter()
                .filter(|r| r.involves(c))
                .map(|r| serde_json::to_string(r).expect("records serialize"))
                .collect();
            let _ = send_msg(&mut self.ep, 0, c, &Message::AuctionDone { records: mine });
        }
    }

    pub fn register_phase(&mut self) -> Result<(), EngineError> {
        let base = self.ep.timeout();
        let deadline = Instant::now() + self.settings.register_window;
        loop {
            if let Some(k) = self.settings.expected_clients {
                if self.registered.len() >= k {
                    break;
                }
            }
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                break;
            }
            self.ep.set_timeout(left.min(base));
            let r = match self.ep.recv_where(|r| r.env.session == 0, |_| false) {
                Ok(r) => r.unwrap_or_else(|r| r),
                Err(NetError::Timeout) | Err(NetError::Replay { .. }) => continue,
                Err(e) => {
                    self.ep.set_timeout(base);
                    return Err(ProtocolError::from(e).into());
                }
            };
            let from = r.env.sender;
            if from == RELAY {
                if r.msg_type == MSG_DISCONNECTED {
                    if let Ok(b) = <[u8; 4]>::try_from(r.env.body.as_slice()) {
                        let p = u32::from_le_bytes(b);
                        self.gone.insert(p);
                        self.registered.retain(|&c| c != p);
                        self.registry.remove(&p);
                    }
                }
                continue;
            }
            match decode(&r) {
                Ok(Message::Hello { party }) if party == from && !self.welcomed.contains(&from) => {
                    self.welcomed.insert(from);
                    let s = &self.settings;
                    let welcome = Message::Welcome {
                        auction: s.auction,
                        n: s.n,
                        mode: s.mode.code(),
                        functionality: s.functionality.code(),
                        symbols: s.universe.symbols().to_vec(),
                    };
                    let _ = send_msg(&mut self.ep, 0, from, &welcome);
                }
                Ok(Message::Register { entries }) => {
                    let reply = match self.check_registration(from, entries) {
                        Ok(reg) => {
                            let count = reg.len() as u32;
                            self.registry.insert(from, reg);
                            self.registered.push(from);
                            Message::Registered { count }
                        }
                        Err(reason) => Message::Abort { reason, blame: Some(from) },
                    };
                    let _ = send_msg(&mut self.ep, 0, from, &reply);
                }
                _ => {}
            }
        }
        self.ep.set_timeout(base);
        Ok(())
    }

    fn check_registration(&self, from: PartyId, entries: Vec<(ValueRef, Option<RistrettoPoint>)>) -> Result<Registry, String> {
        if !self.welcomed.contains(&from) {
            return Err("register before hello".into());
        }
        if self.registry.contains_key(&from) {
            return Err(format!("party {from} is already registered"));
        }
        let s = &self.settings;
        let mut reg = Registry::new();
        for (r, c) in entries {
            if !s.universe.contains(&r.symbol) {
                return Err(format!("unknown symbol {}", r.symbol));
            }
            if c.is_some() != (s.mode == SecurityMode::Malicious) {
                return Err(format!("commitment presence does not match {} mode", s.mode));
            }
            if s.functionality.sparse_registration() && r.bound != Bound::Max {
                return Err("queue registrations carry one amount per order".into());
            }
            let symbol = r.symbol.clone();
            if reg.insert(r, c).is_some() {
                return Err(format!("duplicate registration for {symbol}"));
            }
        }
        if s.functionality.sparse_registration() {
            let mut symbols = BTreeSet::new();
            if !reg.keys().all(|r| symbols.insert(r.symbol.clone())) {
                return Err("second order for a symbol".into());
            }
        } else if reg.len() != s.universe.len() * 4 {
            return Err(format!("expected {} registered values, got {}", s.universe.len() * 4, reg.len()));
        }
        Ok(reg)
    }

    /// Waits for one message of type `code` from each party in `session`.
    fn collect(&mut self, session: u64, parties: &[PartyId], code: u8) -> Result<Vec<Message>, ProtocolError> {
        let mut got: Vec<Option<Message>> = vec![None; parties.len()];
        while got.iter().any(Option::is_none) {
            if let Some(p) = parties.iter().find(|p| self.gone.contains(p)) {
                return Err(ProtocolError::PeerAborted { by: RELAY, reason: format!("party {p} disconnected"), blame: Some(*p) });
            }
            let res = self.ep.recv_where(
                |r| {
                    r.env.session == session
                        && r.msg_type == code
                        && parties.iter().position(|&p| p == r.env.sender).is_some_and(|i| got[i].is_none())
                },
                |r| {
                    (r.env.session == session && r.msg_type == kind::Abort && parties.contains(&r.env.sender))
                        || (r.env.sender == RELAY
                            && (r.msg_type == MSG_DISCONNECTED || (r.msg_type == MSG_ROUTE_ERROR && r.env.session == session)))
                },
            );
            match res {
                Ok(Ok(r)) => {
                    let i = parties.iter().position(|&p| p == r.env.sender).unwrap();
                    got[i] = Some(decode(&r)?);
                }
                Ok(Err(stop)) if stop.env.sender == RELAY => {
                    let p = <[u8; 4]>::try_from(stop.env.body.as_slice()).map(u32::from_le_bytes).unwrap_or(RELAY);
                    if stop.msg_type == MSG_DISCONNECTED {
                        self.gone.insert(p);
                        continue;
                    }
                    return Err(ProtocolError::PeerAborted { by: RELAY, reason: format!("party {p} unreachable"), blame: Some(p) });
                }
                Ok(Err(stop)) => {
                    let (reason, blame) = match decode(&stop)? {
                        Message::Abort { reason, blame } => (reason, blame),
                        m => (m.name().to_string(), None),
                    };
                    return Err(ProtocolError::PeerAborted { by: stop.env.sender, reason, blame });
                }
                Err(NetError::Replay { session: s, .. }) if s != session => continue,
                Err(e) => return Err(e.into()),
            }
        }
        Ok(got.into_iter().map(|m| m.expect("all collected")).collect())
    }

    fn abort_session(&mut self, key: (PartyId, PartyId), session: u64, e: &ProtocolError) {
        let msg = Message::Abort { reason: e.to_string(), blame: e.blamed() };
        for p in [key.0, key.1] {
            if p != SERVER {
                let _ = send_msg(&mut self.ep, session, p, &msg);
            }
        }
        self.pairs.insert(key, SessionState::Dead);
    }

    /// The live session of a client pair, set up on first use.
    fn pair_session(&mut self, lo: PartyId, hi: PartyId) -> Result<u64, ProtocolError> {
        match self.pairs.get(&(lo, hi)) {
            Some(SessionState::Live(s)) => return Ok(*s),
            Some(SessionState::Dead) => {
                return Err(ProtocolError::PeerAborted { by: SERVER, reason: "pair session closed by an earlier abort".into(), blame: None })
            }
            None => {}
        }
        let s = self.next_session;
        self.next_session += 1;
        self.pairs.insert((lo, hi), SessionState::Live(s));
        let res = (|| {
            send_msg(&mut self.ep, s, lo, &Message::PairStart { position: 0, peer: hi })?;
            send_msg(&mut self.ep, s, hi, &Message::PairStart { position: 1, peer: lo })?;
            self.collect(s, &[lo, hi], kind::PairReady).map(|_| ())
        })();
        match res {
            Ok(()) => Ok(s),
            Err(e) => {
                let e = e.attribute([lo, hi], None);
                self.abort_session((lo, hi), s, &e);
                Err(e)
            }
        }
    }

    fn bank_session(&mut self, client: PartyId) -> Result<u64, ProtocolError> {
        match self.pairs.get(&(SERVER, client)) {
            Some(SessionState::Live(s)) => Ok(*s),
            Some(SessionState::Dead) => {
                Err(ProtocolError::PeerAborted { by: SERVER, reason: "bank session closed by an earlier abort".into(), blame: None })
            }
            None => {
                let s = self.next_session;
                self.next_session += 1;
                self.pairs.insert((SERVER, client), SessionState::Live(s));
                Ok(s)
            }
        }
    }

    fn child_rngs(&mut self, k: usize) -> Vec<ChaCha20Rng> {
        (0..k).map(|_| ChaCha20Rng::from_seed(self.rng.gen())).collect()
    }

    fn registered_commitment(&self, client: PartyId, r: &ValueRef) -> Result<RistrettoPoint, ProtocolError> {
        self.commitment(client, r)
            .ok_or_else(|| ProtocolError::Input(format!("party {client} has no commitment for {} {}", r.symbol, r.side.as_str())))
    }

    /// One batch of comparisons between a and b, with the minimum revealed
    /// when `reveal` is set.
    fn pair_batch(
        &mut self,
        a: PartyId,
        b: PartyId,
        refs: &[(ValueRef, ValueRef)],
        reveal: bool,
    ) -> Result<Vec<MinOutcome>, ProtocolError> {
        if refs.is_empty() {
            return Ok(Vec::new());
        }
        if a == b {
            return Err(ProtocolError::Input(format!("party {a} paired with itself")));
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let s = self.pair_session(lo, hi)?;
        let oriented: Vec<(ValueRef, ValueRef)> =
            refs.iter().map(|(ra, rb)| if a == lo { (ra.clone(), rb.clone()) } else { (rb.clone(), ra.clone()) }).collect();
        let mut out = Vec::with_capacity(oriented.len());
        for chunk in oriented.chunks(batch_limit(self.settings.n)) {
            match self.pair_rounds(s, lo, hi, chunk, reveal) {
                Ok(part) => out.extend(part),
                Err(e) => {
                    let e = e.attribute([lo, hi], None);
                    self.abort_session((lo, hi), s, &e);
                    return Err(e);
                }
            }
        }
        Ok(out
            .into_iter()
            .map(|o| if a == lo { o } else { MinOutcome { bits: (o.bits.1, o.bits.0), min: o.min } })
            .collect())
    }

    fn pair_rounds(
        &mut self,
        s: u64,
        lo: PartyId,
        hi: PartyId,
        refs: &[(ValueRef, ValueRef)],
        reveal: bool,
    ) -> Result<Vec<MinOutcome>, ProtocolError> {
        let batch = self.next_batch;
        self.next_batch += 1;
        let (auction, n, mode) = (self.settings.auction, self.settings.n, self.settings.mode);
        let mut instances = Vec::with_capacity(refs.len());
        for (k, (r0, r1)) in refs.iter().enumerate() {
            let commitments = match mode {
                SecurityMode::Malicious => Some((self.registered_commitment(lo, r0)?, self.registered_commitment(hi, r1)?)),
                SecurityMode::SemiHonest => None,
            };
            instances.push(InstanceSpec { id: k as u64, refs: (r0.clone(), r1.clone()), commitments });
        }
        let start = Message::BatchStart { batch, mode: mode.code(), reveal, instances: instances.clone() };
        send_msg(&mut self.ep, s, lo, &start)?;
        send_msg(&mut self.ep, s, hi, &start)?;
        let ids = [lo, hi];
        let ctx = |k: usize| InstanceCtx::new(auction, s, batch, k as u64);

        match mode {
            SecurityMode::SemiHonest => {
                let reports = self.collect(s, &ids, kind::SemiReports)?;
                let [Message::SemiReports { items: r0, .. }, Message::SemiReports { items: r1, .. }] = &reports[..] else {
                    unreachable!("filtered by type")
                };
                for (p, r) in [r0, r1].iter().enumerate() {
                    if r.len() != refs.len() {
                        return Err(ProtocolError::Malformed { what: "report batch", party: p as u8, instance: 0 });
                    }
                }
                let bits: Vec<(bool, bool)> = (0..refs.len())
                    .into_par_iter()
                    .map(|k| semi_decide(n, k as u64, [&r0[k], &r1[k]]))
                    .collect::<Result<_, _>>()?;
                send_msg(&mut self.ep, s, lo, &Message::SemiVerdicts { batch, bits: bits.iter().map(|b| b.0).collect() })?;
                send_msg(&mut self.ep, s, hi, &Message::SemiVerdicts { batch, bits: bits.iter().map(|b| b.1).collect() })?;
                if !reveal {
                    return Ok(bits.into_iter().map(|bits| MinOutcome { bits, min: 0 }).collect());
                }
                let reveals = self.collect(s, &ids, kind::SemiReveals)?;
                let [Message::SemiReveals { values: v0, .. }, Message::SemiReveals { values: v1, .. }] = &reveals[..] else {
                    unreachable!("filtered by type")
                };
                for (p, v) in [v0, v1].iter().enumerate() {
                    if v.len() != refs.len() {
                        return Err(ProtocolError::Malformed { what: "reveal batch", party: p as u8, instance: 0 });
                    }
                }
                let mins: Vec<u64> =
                    (0..refs.len()).map(|k| semi_min(bits[k], [v0[k], v1[k]], k as u64)).collect::<Result<_, _>>()?;
                let done = Message::MinResults { batch, mins: mins.clone(), forwarded: vec![None; mins.len()] };
                send_msg(&mut self.ep, s, lo, &done)?;
                send_msg(&mut self.ep, s, hi, &done)?;
                Ok(bits.into_iter().zip(mins).map(|(bits, min)| MinOutcome { bits, min }).collect())
            }
            SecurityMode::Malicious => {
                let reports = self.collect(s, &ids, kind::MalReports)?;
                let [Message::MalReports { items: r0, .. }, Message::MalReports { items: r1, .. }] = &reports[..] else {
                    unreachable!("filtered by type")
                };
                for (p, r) in [r0, r1].iter().enumerate() {
                    if r.len() != refs.len() {
                        return Err(ProtocolError::Malformed { what: "report batch", party: p as u8, instance: 0 });
                    }
                }
                let servers: Vec<MalServer> = instances
                    .iter()
                    .enumerate()
                    .map(|(k, spec)| {
                        let (c0, c1) = spec.commitments.expect("malicious instances carry commitments");
                        MalServer::new(&self.params, n, ctx(k), [c0, c1])
                    })
                    .collect();
                let tamper = self.settings.tamper;
                let mut rngs = self.child_rngs(refs.len());
                let verdicts: Vec<MalVerdict> = servers
                    .par_iter()
                    .zip(rngs.par_iter_mut())
                    .enumerate()
                    .map(|(k, (srv, rng))| srv.decide_with([&r0[k], &r1[k]], tamper, rng))
                    .collect::<Result<_, _>>()?;
                for (p, &to) in ids.iter().enumerate() {
                    let proofs = verdicts.iter().map(|v| v.proofs[p].clone()).collect();
                    send_msg(&mut self.ep, s, to, &Message::MalVerdicts { batch, proofs })?;
                }
                if !reveal {
                    return Ok(verdicts.into_iter().map(|v| MinOutcome { bits: v.bits, min: 0 }).collect());
                }
                let reveals = self.collect(s, &ids, kind::MalReveals)?;
                let [Message::MalReveals { items: i0, .. }, Message::MalReveals { items: i1, .. }] = &reveals[..] else {
                    unreachable!("filtered by type")
                };
                let items = [i0, i1];
                for (p, it) in items.iter().enumerate() {
                    if it.len() != refs.len() {
                        return Err(ProtocolError::Malformed { what: "reveal batch", party: p as u8, instance: 0 });
                    }
                }
                let mins: Vec<u64> = (0..refs.len())
                    .into_par_iter()
                    .map(|k| {
                        let won = [verdicts[k].bits.0, verdicts[k].bits.1];
                        let mut min = None;
                        for p in 0..2 {
                            match (won[p], &items[p][k]) {
                                (true, Some(item)) => {
                                    let v = servers[k].check_reveal(p as u8, item)?;
                                    if min.is_some_and(|m| m != v) {
                                        return Err(ProtocolError::RevealRejected { party: p as u8, instance: k as u64 });
                                    }
                                    min = Some(v);
                                }
                                (false, None) => {}
                                _ => return Err(ProtocolError::RevealRejected { party: p as u8, instance: k as u64 }),
                            }
                        }
                        min.ok_or(ProtocolError::NoWinner { instance: k as u64 })
                    })
                    .collect::<Result<_, _>>()?;
                for (p, &to) in ids.iter().enumerate() {
                    // the loser of a strict comparison gets the winner's reveal
                    let forwarded = verdicts
                        .iter()
                        .enumerate()
                        .map(|(k, v)| {
                            let won = [v.bits.0, v.bits.1];
                            (!won[p] && won[1 - p]).then(|| items[1 - p][k].clone()).flatten()
                        })
                        .collect();
                    send_msg(&mut self.ep, s, to, &Message::MinResults { batch, mins: mins.clone(), forwarded })?;
                }
                Ok(verdicts.into_iter().zip(mins).map(|(v, min)| MinOutcome { bits: v.bits, min }).collect())
            }
        }
    }

    fn control<T>(&mut self, client: PartyId, f: impl FnOnce(&mut Self) -> Result<T, ProtocolError>) -> Result<T, ProtocolError> {
        if self.gone.contains(&client) {
            return Err(ProtocolError::PeerAborted { by: RELAY, reason: format!("party {client} disconnected"), blame: Some(client) });
        }
        f(self)
    }
}

impl SecureBackend for AuctionServer {
    fn pair_min(&mut self, a: PartyId, b: PartyId, refs: &[(ValueRef, ValueRef)]) -> Result<Vec<MinOutcome>, ProtocolError> {
        self.pair_batch(a, b, refs, true)
    }

    fn pair_compare(&mut self, a: PartyId, b: PartyId, refs: &[(ValueRef, ValueRef)]) -> Result<Vec<(bool, bool)>, ProtocolError> {
        Ok(self.pair_batch(a, b, refs, false)?.into_iter().map(|o| o.bits).collect())
    }

    fn open(&mut self, client: PartyId, refs: &[ValueRef]) -> Result<Vec<u64>, ProtocolError> {
        self.control(client, |srv| {
            let batch = srv.next_batch;
            srv.next_batch += 1;
            send_msg(&mut srv.ep, 0, client, &Message::OpenRequest { batch, refs: refs.to_vec() })?;
            let Message::Opened { values, proofs, .. } = srv.collect(0, &[client], kind::Opened)?.remove(0) else {
                unreachable!("filtered by type")
            };
            if values.len() != refs.len() || proofs.len() != refs.len() {
                return Err(ProtocolError::Malformed { what: "opening batch", party: 0, instance: 0 });
            }
            if srv.settings.mode == SecurityMode::Malicious {
                for (k, (r, item)) in refs.iter().zip(&proofs).enumerate() {
                    let item = item.as_ref().ok_or(ProtocolError::RevealRejected { party: 0, instance: k as u64 })?;
                    let ctx = InstanceCtx::new(srv.settings.auction, 0, batch, k as u64);
                    let v = verify_reveal(&srv.params, srv.settings.n, &ctx, 0, &srv.registered_commitment(client, r)?, item)?;
                    if v != values[k] {
                        return Err(ProtocolError::RevealRejected { party: 0, instance: k as u64 });
                    }
                }
            }
            Ok(values)
        })
    }

    fn adjust(&mut self, client: PartyId, items: &[AdjustItem]) -> Result<(), ProtocolError> {
        self.control(client, |srv| {
            send_msg(&mut srv.ep, 0, client, &Message::Adjust { items: items.to_vec() })?;
            let Message::Adjusted { commitments } = srv.collect(0, &[client], kind::Adjusted)?.remove(0) else {
                unreachable!("filtered by type")
            };
            if commitments.len() != items.len() {
                return Err(ProtocolError::Malformed { what: "adjustment batch", party: 0, instance: 0 });
            }
            let g = srv.params.g;
            let reg = srv.registry.get_mut(&client).ok_or_else(|| ProtocolError::Input(format!("party {client} is not registered")))?;
            for (k, (it, reported)) in items.iter().zip(commitments).enumerate() {
                let cur = reg
                    .get_mut(&it.target)
                    .ok_or_else(|| ProtocolError::Input(format!("party {client} has no value {}", it.target.symbol)))?;
                if let Some(c) = cur {
                    *c = match it.op {
                        AdjustOp::Subtract => *c - g * Scalar::from(it.amount),
                        AdjustOp::SetZero => RistrettoPoint::identity(),
                    };
                    if reported != Some(*c) {
                        return Err(ProtocolError::Malformed { what: "adjusted commitment", party: 0, instance: k as u64 });
                    }
                }
            }
            Ok(())
        })
    }

    fn bank_min(&mut self, client: PartyId, items: &[(u64, ValueRef)]) -> Result<Vec<u64>, ProtocolError> {
        if items.is_empty() {
            return Ok(Vec::new());
        }
        self.control(client, |srv| {
            let s = srv.bank_session(client)?;
            let mut out = Vec::with_capacity(items.len());
            for chunk in items.chunks(batch_limit(srv.settings.n)) {
                match srv.bank_rounds(s, client, chunk) {
                    Ok(part) => out.extend(part),
                    Err(e) => {
                        let e = e.attribute([SERVER, client], Some(client));
                        srv.abort_session((SERVER, client), s, &e);
                        return Err(e);
                    }
                }
            }
            Ok(out)
        })
    }
}

impl AuctionServer {
    fn bank_rounds(&mut self, s: u64, client: PartyId, items: &[(u64, ValueRef)]) -> Result<Vec<u64>, ProtocolError> {
        let batch = self.next_batch;
        self.next_batch += 1;
        let (auction, n) = (self.settings.auction, self.settings.n);
        let params = self.params;
        let key = self.bank_key.clone();
        let pk = key.pk;
        let mut rngs = self.child_rngs(items.len());
        let offered: Vec<_> = items
            .par_iter()
            .zip(rngs.par_iter_mut())
            .enumerate()
            .map(|(k, ((v, _), rng))| BankB2c::offer(&params, &key, n, InstanceCtx::new(auction, s, batch, k as u64), *v, rng))
            .collect::<Result<_, _>>()?;
        let (banks, offers): (Vec<BankB2c>, Vec<_>) = offered.into_iter().unzip();
        let refs = items.iter().map(|(_, r)| r.clone()).collect();
        send_msg(&mut self.ep, s, client, &Message::B2cOffer { batch, pk, refs, items: offers })?;
        let Message::B2cResponse { pk: their_pk, items: responses, .. } = self.collect(s, &[client], kind::B2cResponse)?.remove(0)
        else {
            unreachable!("filtered by type")
        };
        if their_pk != pk || responses.len() != items.len() {
            return Err(ProtocolError::Malformed { what: "bank-to-client response", party: 1, instance: 0 });
        }
        let mut rngs = self.child_rngs(items.len());
        let decided: Vec<_> = banks
            .par_iter()
            .zip(responses.par_iter())
            .zip(rngs.par_iter_mut())
            .map(|((bank, resp), rng)| bank.decide(resp, rng))
            .collect::<Result<_, _>>()?;
        let verdicts: Vec<_> = decided.iter().map(|(_, v)| v.clone()).collect();
        send_msg(&mut self.ep, s, client, &Message::B2cVerdicts { batch, pk, items: verdicts.clone() })?;
        let Message::B2cReveals { values, .. } = self.collect(s, &[client], kind::B2cReveals)?.remove(0) else {
            unreachable!("filtered by type")
        };
        if values.len() != items.len() {
            return Err(ProtocolError::Malformed { what: "bank-to-client reveals", party: 1, instance: 0 });
        }
        banks
            .iter()
            .zip(&verdicts)
            .zip(values)
            .enumerate()
            .map(|(k, ((bank, verdict), v1))| match (verdict.u, v1) {
                (1, Some(v1)) => bank.accept_reveal(v1),
                (0, None) => Ok(bank.value()),
                _ => Err(ProtocolError::RevealRejected { party: 1, instance: k as u64 }),
            })
            .collect()
    }
}
