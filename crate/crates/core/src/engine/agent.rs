//! A client's side of an auction: registers its book, then answers the
//! server's commands until the auction ends.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use curve25519_dalek::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::log::MatchRecord;
use super::order::{Book, Universe};
use super::{EngineError, Functionality};
use crate::algebra::PedersenParams;
use crate::compare::{derive_randomness, ComparisonRandomness, SharedSeed};
use crate::mpc::b2c::{B2cOfferItem, ClientB2c};
use crate::mpc::coin::{CoinInitiator, CoinResponder};
use crate::mpc::malicious::{reveal_item, ClientInput, ClientTamper, MalAwaitVerdict, MalClient};
use crate::mpc::messages::{kind, AdjustItem, AdjustOp, InstanceSpec};
use crate::mpc::semi::SemiClient;
use crate::mpc::{InstanceCtx, Message, ProtocolError, SecurityMode, ValueRef};
use crate::net::{Endpoint, Handshake, NetError, PartyId, Received, SecureChannel, RELAY, SERVER};

pub(crate) fn send_msg(ep: &mut Endpoint, session: u64, to: PartyId, msg: &Message) -> Result<(), NetError> {
    ep.send(session, to, msg.msg_type(), msg.encode_body())
}

pub(crate) fn decode(r: &Received) -> Result<Message, ProtocolError> {
    Ok(Message::decode_body(r.msg_type, &r.env.body)?)
}

/// The per-instance comparison randomness both clients derive from the
/// pair's coin toss.
pub fn instance_randomness(seed: &SharedSeed, ctx: &InstanceCtx, n: u32) -> ComparisonRandomness {
    derive_randomness(&seed.expand(&ctx.proof_ctx(b"randomness", 0)), n as usize)
}

/// A client's registered values with their commitment openings, shared so
/// tests can compare them with the server's commitments.
pub type Holdings = Arc<Mutex<BTreeMap<ValueRef, ClientInput>>>;

pub struct AgentConfig {
    pub id: PartyId,
    pub book: Book,
    pub psk: Option<[u8; 32]>,
    pub tamper: ClientTamper,
    pub rng_seed: [u8; 32],
    /// How long to wait for the server between commands.
    pub idle_timeout: Duration,
}

impl AgentConfig {
    pub fn new(id: PartyId, book: Book, rng_seed: [u8; 32]) -> Self {
        AgentConfig { id, book, psk: None, tamper: ClientTamper::None, rng_seed, idle_timeout: Duration::from_secs(600) }
    }
}

/// What the client saw of the auction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AgentReport {
    pub registered: usize,
    pub records: Vec<MatchRecord>,
    /// Every session that ended in an abort.
    pub aborts: Vec<SessionAbort>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionAbort {
    pub session: u64,
    pub reason: String,
    /// The party the failure was pinned on, when one could be named.
    pub blame: Option<PartyId>,
}

struct Auction {
    id: u64,
    n: u32,
    mode: SecurityMode,
}

struct Pair {
    peer: PartyId,
    position: u8,
    channel: SecureChannel,
    seed: SharedSeed,
}

pub struct Agent {
    ep: Endpoint,
    cfg: AgentConfig,
    params: PedersenParams,
    rng: ChaCha20Rng,
    holdings: Holdings,
    auction: Option<Auction>,
    pairs: HashMap<u64, Pair>,
    report: AgentReport,
}

impl Agent {
    pub fn new(ep: Endpoint, cfg: AgentConfig) -> Self {
        let rng = ChaCha20Rng::from_seed(cfg.rng_seed);
        Agent {
            ep,
            cfg,
            params: PedersenParams::standard(),
            rng,
            holdings: Arc::default(),
            auction: None,
            pairs: HashMap::new(),
            report: AgentReport::default(),
        }
    }

    pub fn holdings(&self) -> Holdings {
        Arc::clone(&self.holdings)
    }

    pub fn run(mut self) -> Result<AgentReport, EngineError> {
        let id = self.cfg.id;
        send_msg(&mut self.ep, 0, SERVER, &Message::Hello { party: id }).map_err(ProtocolError::from)?;
        let mut idle = Duration::ZERO;
        loop {
            let r = match self.ep.recv_where(|r| r.env.sender == SERVER || r.env.sender == RELAY, |_| false) {
                Ok(r) => r.unwrap_or_else(|r| r),
                Err(NetError::Timeout) => {
                    idle += self.ep.timeout();
                    if idle >= self.cfg.idle_timeout {
                        return Err(ProtocolError::Net(NetError::Timeout).into());
                    }
                    continue;
                }
                Err(NetError::Replay { session, sender, seq }) => {
                    self.abort_session(session, ProtocolError::Net(NetError::Replay { session, sender, seq }));
                    continue;
                }
                Err(e) => return Err(ProtocolError::from(e).into()),
            };
            idle = Duration::ZERO;
            if r.env.sender == RELAY {
                continue;
            }
            let s = r.env.session;
            match decode(&r)? {
                Message::Welcome { auction, n, mode, functionality, symbols } => {
                    self.register(auction, n, mode, functionality, symbols)?;
                }
                Message::Registered { count } => self.report.registered = count as usize,
                Message::PairStart { position, peer } => match self.pair_setup(s, position, peer) {
                    Ok(()) => send_msg(&mut self.ep, s, SERVER, &Message::PairReady {}).map_err(ProtocolError::from)?,
                    Err(e) => self.abort_session(s, e),
                },
                Message::BatchStart { batch, mode, reveal, instances } => {
                    if let Err(e) = self.batch(s, batch, mode, reveal, &instances) {
                        self.abort_session(s, e);
                    }
                }
                Message::OpenRequest { batch, refs } => {
                    let reply = self.open(batch, &refs).unwrap_or_else(|e| Message::Abort { reason: e.to_string(), blame: None });
                    send_msg(&mut self.ep, s, SERVER, &reply).map_err(ProtocolError::from)?;
                }
                Message::Adjust { items } => {
                    let reply = self.adjust(&items).unwrap_or_else(|e| Message::Abort { reason: e.to_string(), blame: None });
                    send_msg(&mut self.ep, s, SERVER, &reply).map_err(ProtocolError::from)?;
                }
                Message::B2cOffer { batch, pk, refs, items } => {
                    if let Err(e) = self.b2c(s, batch, pk, &refs, &items) {
                        self.abort_session(s, e);
                    }
                }
                Message::PairEnd {} => {
                    self.pairs.remove(&s);
                }
                Message::Abort { reason, blame } => {
                    self.pairs.remove(&s);
                    self.report.aborts.push(SessionAbort { session: s, reason, blame });
                }
                Message::AuctionDone { records } => {
                    for line in records {
                        let rec: MatchRecord = serde_json::from_str(&line)
                            .map_err(|e| EngineError::Io(format!("match record from server: {e}")))?;
                        self.report.records.push(rec);
                    }
                    return Ok(self.report);
                }
                _ => {}
            }
        }
    }

    fn auction(&self) -> Result<&Auction, ProtocolError> {
        self.auction.as_ref().ok_or(ProtocolError::Unexpected { expected: "Welcome", got: kind::BatchStart })
    }

    fn register(&mut self, auction: u64, n: u32, mode: u8, functionality: u8, symbols: Vec<String>) -> Result<(), EngineError> {
        let mode = SecurityMode::from_code(mode).ok_or_else(|| EngineError::Config(format!("unknown mode code {mode}")))?;
        let f = Functionality::from_code(functionality)
            .ok_or_else(|| EngineError::Config(format!("unknown functionality code {functionality}")))?;
        let universe = Universe::new(symbols)?;
        self.cfg.book.validate(&universe, n)?;
        self.ep.set_auction(auction);
        let refs: Vec<ValueRef> = if f.sparse_registration() {
            self.cfg.book.orders().map(|o| ValueRef::max(o.symbol.clone(), o.side)).collect()
        } else {
            universe.value_refs()
        };
        let mut entries = Vec::with_capacity(refs.len());
        let mut holdings = self.holdings.lock().unwrap();
        for r in refs {
            let value = self.cfg.book.value(&r);
            let input = match mode {
                SecurityMode::Malicious => ClientInput { value, randomness: Scalar::random(&mut self.rng) },
                SecurityMode::SemiHonest => ClientInput { value, randomness: Scalar::ZERO },
            };
            let c = (mode == SecurityMode::Malicious).then(|| input.commitment(&self.params));
            holdings.insert(r.clone(), input);
            entries.push((r, c));
        }
        drop(holdings);
        self.auction = Some(Auction { id: auction, n, mode });
        send_msg(&mut self.ep, 0, SERVER, &Message::Register { entries }).map_err(ProtocolError::from)?;
        Ok(())
    }

    fn abort_session(&mut self, session: u64, e: ProtocolError) {
        let me = self.cfg.id;
        // bank sessions have no pair entry; the server holds position 0 there
        let (positions, peer) = match self.pairs.get(&session) {
            Some(p) if p.position == 0 => ([me, p.peer], Some(p.peer)),
            Some(p) => ([p.peer, me], Some(p.peer)),
            None => ([SERVER, me], Some(SERVER)),
        };
        let e = e.attribute(positions, peer);
        let (reason, blame) = (e.to_string(), e.blamed());
        let _ = send_msg(&mut self.ep, session, SERVER, &Message::Abort { reason: reason.clone(), blame });
        self.pairs.remove(&session);
        self.report.aborts.push(SessionAbort { session, reason, blame });
    }

    /// Waits for a message of type `code` from `from` in `session`. An abort
    /// or pair end from the server, or a relay notice, ends the wait.
    fn await_msg(&mut self, session: u64, from: PartyId, code: u8) -> Result<Received, ProtocolError> {
        loop {
            let got = self.ep.recv_where(
                |r| r.env.session == session && r.env.sender == from && r.msg_type == code,
                |r| {
                    r.env.session == session
                        && ((r.env.sender == SERVER && (r.msg_type == kind::Abort || r.msg_type == kind::PairEnd))
                            || r.env.sender == RELAY)
                },
            );
            return match got {
                Ok(Ok(r)) => Ok(r),
                Ok(Err(stop)) => {
                    let (reason, blame) = match decode(&stop) {
                        Ok(Message::Abort { reason, blame }) => (reason, blame),
                        _ => (format!("{} on session {session}", Message::type_name(stop.msg_type).unwrap_or("relay notice")), None),
                    };
                    if stop.env.sender == SERVER {
                        // the server already knows; do not answer with an abort of our own
                        self.pairs.remove(&session);
                        self.report.aborts.push(SessionAbort { session, reason: reason.clone(), blame });
                    }
                    Err(ProtocolError::PeerAborted { by: stop.env.sender, reason, blame })
                }
                Err(NetError::Replay { session: other, sender, seq }) if other != session => {
                    self.abort_session(other, ProtocolError::Net(NetError::Replay { session: other, sender, seq }));
                    continue;
                }
                Err(e) => Err(e.into()),
            };
        }
    }

    fn await_server(&mut self, session: u64, code: u8) -> Result<Message, ProtocolError> {
        let r = self.await_msg(session, SERVER, code)?;
        decode(&r)
    }

    fn send_sealed(&mut self, session: u64, msg: &Message) -> Result<(), ProtocolError> {
        let pair = self.pairs.get_mut(&session).ok_or(ProtocolError::Unexpected { expected: "PairStart", got: msg.msg_type() })?;
        let pt = msg.to_sealed_plaintext();
        let channel = &mut pair.channel;
        self.ep.send_with(session, pair.peer, kind::Sealed, |hdr| {
            let ciphertext = channel.seal(hdr, &pt)?;
            Ok::<_, ProtocolError>(Message::Sealed { ciphertext }.encode_body())
        })
    }

    fn await_sealed(&mut self, session: u64, code: u8) -> Result<Message, ProtocolError> {
        let peer = self.pairs.get(&session).map(|p| p.peer).ok_or(ProtocolError::Unexpected { expected: "PairStart", got: code })?;
        let r = self.await_msg(session, peer, kind::Sealed)?;
        let Message::Sealed { ciphertext } = decode(&r)? else { unreachable!("filtered by type") };
        let pair = self.pairs.get_mut(&session).expect("checked above");
        let pt = pair.channel.open(&r.env.header_bytes(), &ciphertext)?;
        let msg = Message::from_sealed_plaintext(&pt)?;
        if msg.msg_type() != code {
            return Err(ProtocolError::Unexpected { expected: Message::type_name(code).unwrap_or("?"), got: msg.msg_type() });
        }
        Ok(msg)
    }

    /// Key agreement through the relay, confirmation, then the coin toss.
    fn pair_setup(&mut self, session: u64, position: u8, peer: PartyId) -> Result<(), ProtocolError> {
        let auction = self.auction()?.id;
        let hs = Handshake::new(position == 0, &mut self.rng);
        send_msg(&mut self.ep, session, peer, &Message::HandshakeShare { share: hs.public_share() })?;
        let Message::HandshakeShare { share } = decode(&self.await_msg(session, peer, kind::HandshakeShare)?)? else {
            unreachable!("filtered by type")
        };
        let channel = hs.complete(&share, auction, session, self.cfg.psk.as_ref())?;
        let th = channel.confirm_message();
        self.pairs.insert(session, Pair { peer, position, channel, seed: SharedSeed([0; 32]) });
        self.send_sealed(session, &Message::Confirm { th })?;
        let Message::Confirm { th } = self.await_sealed(session, kind::Confirm)? else { unreachable!() };
        self.pairs.get_mut(&session).unwrap().channel.check_confirm(&th)?;

        let seed = if position == 0 {
            let (init, hash) = CoinInitiator::start(session, &mut self.rng);
            self.send_sealed(session, &Message::CoinCommit { hash })?;
            let Message::CoinReply { s1 } = self.await_sealed(session, kind::CoinReply)? else { unreachable!() };
            let (seed, s0, nonce) = init.finish(&s1);
            self.send_sealed(session, &Message::CoinOpen { s0, nonce })?;
            seed
        } else {
            let Message::CoinCommit { hash } = self.await_sealed(session, kind::CoinCommit)? else { unreachable!() };
            let (resp, s1) = CoinResponder::respond(session, hash, &mut self.rng);
            self.send_sealed(session, &Message::CoinReply { s1 })?;
            let Message::CoinOpen { s0, nonce } = self.await_sealed(session, kind::CoinOpen)? else { unreachable!() };
            resp.finish(&s0, &nonce)?
        };
        self.pairs.get_mut(&session).unwrap().seed = seed;
        Ok(())
    }

    fn input(&self, r: &ValueRef) -> Result<ClientInput, ProtocolError> {
        self.holdings
            .lock()
            .unwrap()
            .get(r)
            .copied()
            .ok_or_else(|| ProtocolError::Input(format!("unregistered value {} {} {:?}", r.symbol, r.side.as_str(), r.bound)))
    }

    fn child_rngs(&mut self, k: usize) -> Vec<ChaCha20Rng> {
        (0..k).map(|_| ChaCha20Rng::from_seed(self.rng.gen())).collect()
    }

    fn batch(&mut self, session: u64, batch: u32, mode: u8, reveal: bool, instances: &[InstanceSpec]) -> Result<(), ProtocolError> {
        let a = self.auction()?;
        let (auction, n) = (a.id, a.n);
        let mode = SecurityMode::from_code(mode).ok_or(ProtocolError::Malformed { what: "batch mode", party: 2, instance: 0 })?;
        let (position, seed) = {
            let p = self.pairs.get(&session).ok_or(ProtocolError::Unexpected { expected: "PairStart", got: kind::BatchStart })?;
            (p.position, p.seed)
        };
        let ctxs: Vec<InstanceCtx> = instances.iter().map(|i| InstanceCtx::new(auction, session, batch, i.id)).collect();
        let inputs: Vec<ClientInput> = instances
            .iter()
            .map(|i| self.input(if position == 0 { &i.refs.0 } else { &i.refs.1 }))
            .collect::<Result<_, _>>()?;
        let rands: Vec<ComparisonRandomness> = ctxs.par_iter().map(|c| instance_randomness(&seed, c, n)).collect();
        match mode {
            SecurityMode::SemiHonest => self.semi_batch(session, batch, reveal, position, &ctxs, &inputs, &rands),
            SecurityMode::Malicious => self.mal_batch(session, batch, reveal, position, instances, &ctxs, &inputs, &rands),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn semi_batch(
        &mut self,
        session: u64,
        batch: u32,
        reveal: bool,
        position: u8,
        ctxs: &[InstanceCtx],
        inputs: &[ClientInput],
        rands: &[ComparisonRandomness],
    ) -> Result<(), ProtocolError> {
        let n = self.auction()?.n;
        let mut states = Vec::with_capacity(ctxs.len());
        let mut halves = Vec::with_capacity(ctxs.len());
        for (c, inp) in ctxs.iter().zip(inputs) {
            let (st, half) = SemiClient::start(n, position, c.instance, inp.value, &mut self.rng)?;
            states.push(st);
            halves.push(half);
        }
        self.send_sealed(session, &Message::SemiShares { batch, items: halves })?;
        let Message::SemiShares { batch: b, items: peer } = self.await_sealed(session, kind::SemiShares)? else { unreachable!() };
        if b != batch || peer.len() != states.len() {
            return Err(ProtocolError::Malformed { what: "share batch", party: 1 - position, instance: 0 });
        }
        let reports: Vec<(Vec<Scalar>, Vec<Scalar>)> = states
            .par_iter()
            .zip(peer.par_iter())
            .zip(rands.par_iter())
            .map(|((st, half), rand)| st.receive(half, rand))
            .collect::<Result<_, _>>()?;
        send_msg(&mut self.ep, session, SERVER, &Message::SemiReports { batch, items: reports })?;
        let Message::SemiVerdicts { bits, .. } = self.await_server(session, kind::SemiVerdicts)? else { unreachable!() };
        if bits.len() != states.len() {
            return Err(ProtocolError::Malformed { what: "verdicts", party: 2, instance: 0 });
        }
        if !reveal {
            return Ok(());
        }
        let values = bits.iter().zip(&states).map(|(&b, st)| b.then(|| st.value())).collect();
        send_msg(&mut self.ep, session, SERVER, &Message::SemiReveals { batch, values })?;
        let Message::MinResults { mins, .. } = self.await_server(session, kind::MinResults)? else { unreachable!() };
        for (k, ((&b, st), &m)) in bits.iter().zip(&states).zip(&mins).enumerate() {
            if (b && m != st.value()) || (!b && m > st.value()) {
                return Err(ProtocolError::RevealRejected { party: 2, instance: ctxs[k].instance });
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn mal_batch(
        &mut self,
        session: u64,
        batch: u32,
        reveal: bool,
        position: u8,
        instances: &[InstanceSpec],
        ctxs: &[InstanceCtx],
        inputs: &[ClientInput],
        rands: &[ComparisonRandomness],
    ) -> Result<(), ProtocolError> {
        let n = self.auction()?.n;
        let params = self.params;
        let tamper = self.cfg.tamper;
        let mut rngs = self.child_rngs(instances.len());
        let started: Vec<_> = instances
            .par_iter()
            .zip(ctxs.par_iter())
            .zip(inputs.par_iter())
            .zip(rngs.par_iter_mut())
            .map(|(((spec, ctx), inp), rng)| {
                let (v0, v1) = spec.commitments.ok_or(ProtocolError::Malformed {
                    what: "instance without commitments",
                    party: 2,
                    instance: ctx.instance,
                })?;
                MalClient::start(&params, n, position, *ctx, [v0, v1], *inp, tamper, rng)
            })
            .collect::<Result<_, _>>()?;
        let (clients, transfers): (Vec<MalClient>, Vec<_>) = started.into_iter().unzip();
        self.send_sealed(session, &Message::MalShares { batch, items: transfers })?;
        let Message::MalShares { batch: b, items: peer } = self.await_sealed(session, kind::MalShares)? else { unreachable!() };
        if b != batch || peer.len() != clients.len() {
            return Err(ProtocolError::Malformed { what: "share batch", party: 1 - position, instance: 0 });
        }
        let received: Vec<_> = clients
            .into_par_iter()
            .zip(peer.par_iter())
            .zip(rands.par_iter())
            .map(|((c, t), rand)| c.receive(t, rand))
            .collect::<Result<_, _>>()?;
        let (waiting, reports): (Vec<MalAwaitVerdict>, Vec<_>) = received.into_iter().unzip();
        send_msg(&mut self.ep, session, SERVER, &Message::MalReports { batch, items: reports })?;
        let Message::MalVerdicts { proofs, .. } = self.await_server(session, kind::MalVerdicts)? else { unreachable!() };
        if proofs.len() != waiting.len() {
            return Err(ProtocolError::Malformed { what: "verdicts", party: 2, instance: 0 });
        }
        let bits: Vec<bool> =
            waiting.par_iter().zip(proofs.par_iter()).map(|(w, p)| w.verdict(p.as_ref())).collect::<Result<_, _>>()?;
        if !reveal {
            return Ok(());
        }
        let mut rngs = self.child_rngs(waiting.len());
        let items = waiting
            .par_iter()
            .zip(bits.par_iter())
            .zip(rngs.par_iter_mut())
            .map(|((w, &b), rng)| b.then(|| w.reveal(rng)))
            .collect();
        send_msg(&mut self.ep, session, SERVER, &Message::MalReveals { batch, items })?;
        let Message::MinResults { mins, forwarded, .. } = self.await_server(session, kind::MinResults)? else { unreachable!() };
        if mins.len() != waiting.len() || forwarded.len() != waiting.len() {
            return Err(ProtocolError::Malformed { what: "minimum results", party: 2, instance: 0 });
        }
        for (k, w) in waiting.iter().enumerate() {
            let instance = ctxs[k].instance;
            let expected = match (bits[k], &forwarded[k]) {
                (true, None) => w.value(),
                (false, Some(item)) => w.accept_forward(item)?,
                _ => return Err(ProtocolError::Malformed { what: "forwarded reveal", party: 2, instance }),
            };
            if mins[k] != expected {
                return Err(ProtocolError::RevealRejected { party: 2, instance });
            }
        }
        Ok(())
    }

    fn open(&mut self, batch: u32, refs: &[ValueRef]) -> Result<Message, ProtocolError> {
        let a = self.auction()?;
        let (auction, mode) = (a.id, a.mode);
        let mut values = Vec::with_capacity(refs.len());
        let mut proofs = Vec::with_capacity(refs.len());
        for (k, r) in refs.iter().enumerate() {
            let input = self.input(r)?;
            values.push(input.value);
            proofs.push((mode == SecurityMode::Malicious).then(|| {
                let ctx = InstanceCtx::new(auction, 0, batch, k as u64);
                reveal_item(&self.params, &ctx, 0, &input, &mut self.rng)
            }));
        }
        Ok(Message::Opened { batch, values, proofs })
    }

    fn adjust(&mut self, items: &[AdjustItem]) -> Result<Message, ProtocolError> {
        let mode = self.auction()?.mode;
        let mut holdings = self.holdings.lock().unwrap();
        let mut updated: Vec<(ValueRef, ClientInput)> = Vec::with_capacity(items.len());
        for it in items {
            let cur = updated
                .iter()
                .rev()
                .find(|(r, _)| *r == it.target)
                .map(|(_, c)| *c)
                .or_else(|| holdings.get(&it.target).copied())
                .ok_or_else(|| ProtocolError::Input(format!("adjustment of unregistered value {}", it.target.symbol)))?;
            let next = match it.op {
                AdjustOp::Subtract => ClientInput {
                    value: cur.value.checked_sub(it.amount).ok_or_else(|| {
                        ProtocolError::Input(format!("adjustment of {} by {} goes below zero", it.target.symbol, it.amount))
                    })?,
                    randomness: cur.randomness,
                },
                AdjustOp::SetZero => ClientInput { value: 0, randomness: Scalar::ZERO },
            };
            updated.push((it.target.clone(), next));
        }
        let commitments =
            updated.iter().map(|(_, c)| (mode == SecurityMode::Malicious).then(|| c.commitment(&self.params))).collect();
        holdings.extend(updated);
        Ok(Message::Adjusted { commitments })
    }

    fn b2c(
        &mut self,
        session: u64,
        batch: u32,
        pk: crate::algebra::PublicKey,
        refs: &[ValueRef],
        offers: &[B2cOfferItem],
    ) -> Result<(), ProtocolError> {
        let a = self.auction()?;
        let (auction, n) = (a.id, a.n);
        if refs.len() != offers.len() {
            return Err(ProtocolError::Malformed { what: "bank offer", party: 0, instance: 0 });
        }
        let inputs: Vec<ClientInput> = refs.iter().map(|r| self.input(r)).collect::<Result<_, _>>()?;
        let params = self.params;
        let mut rngs = self.child_rngs(refs.len());
        let responded: Vec<_> = offers
            .par_iter()
            .zip(inputs.par_iter())
            .zip(rngs.par_iter_mut())
            .enumerate()
            .map(|(k, ((offer, inp), rng))| {
                let ctx = InstanceCtx::new(auction, session, batch, k as u64);
                ClientB2c::respond(&params, pk, n, ctx, inp.value, offer, rng)
            })
            .collect::<Result<_, _>>()?;
        let (states, items): (Vec<ClientB2c>, Vec<_>) = responded.into_iter().unzip();
        send_msg(&mut self.ep, session, SERVER, &Message::B2cResponse { batch, pk, items })?;
        let Message::B2cVerdicts { items: verdicts, .. } = self.await_server(session, kind::B2cVerdicts)? else { unreachable!() };
        if verdicts.len() != states.len() {
            return Err(ProtocolError::Malformed { what: "verdicts", party: 0, instance: 0 });
        }
        let outcomes: Vec<(u8, u64)> =
            states.par_iter().zip(verdicts.par_iter()).map(|(s, v)| s.finish(v)).collect::<Result<_, _>>()?;
        let values = outcomes.iter().zip(&inputs).map(|(&(u, _), inp)| (u == 1).then_some(inp.value)).collect();
        send_msg(&mut self.ep, session, SERVER, &Message::B2cReveals { batch, values })?;
        Ok(())
    }
}
