//! Every role in one process: the relay, the server and one thread per
//! client, wired through in-process links.

use std::collections::BTreeMap;
use std::thread;
use std::time::Duration;

use super::agent::{Agent, AgentConfig, AgentReport, Holdings};
use super::log::MatchLog;
use super::order::Book;
use super::pairing::auction_seed;
use super::server::{AuctionServer, ServerSettings};
use super::EngineError;
use crate::mpc::malicious::ClientTamper;
use crate::mpc::ProtocolError;
use crate::net::{Endpoint, PartyId, Relay, RelayTamper, TrafficCounters, TranscriptEntry, DEFAULT_MAX_FRAME, SERVER};

pub struct SimClient {
    pub id: PartyId,
    pub book: Book,
    pub tamper: ClientTamper,
    pub psk: Option<[u8; 32]>,
}

impl SimClient {
    pub fn new(id: PartyId, book: Book) -> Self {
        SimClient { id, book, tamper: ClientTamper::None, psk: None }
    }
}

pub struct SimConfig {
    pub settings: ServerSettings,
    pub clients: Vec<SimClient>,
    /// Per-message wait limit for every party.
    pub timeout: Duration,
    pub relay_tamper: Option<Box<dyn RelayTamper>>,
    pub record_transcript: bool,
}

impl SimConfig {
    pub fn new(settings: ServerSettings, clients: Vec<SimClient>) -> Self {
        SimConfig { settings, clients, timeout: Duration::from_secs(30), relay_tamper: None, record_transcript: false }
    }
}

pub struct SimOutcome {
    pub log: MatchLog,
    pub reports: BTreeMap<PartyId, Result<AgentReport, String>>,
    pub holdings: BTreeMap<PartyId, Holdings>,
    /// Everything the relay forwarded, when recording was on.
    pub transcript: Vec<TranscriptEntry>,
    pub server_traffic: TrafficCounters,
}

/// The RNG seed of one party, fixed by the auction seed.
pub fn party_seed(seed: u64, party: PartyId) -> [u8; 32] {
    let mut label = b"party-rng/".to_vec();
    label.extend_from_slice(&party.to_le_bytes());
    auction_seed(seed).expand(&label).0
}

pub fn run_localsim(cfg: SimConfig) -> Result<SimOutcome, EngineError> {
    run_localsim_with(cfg, |srv, _| srv.run())
}

/// Like [`run_localsim`], with the server's part supplied by the caller.
/// `drive` runs on the calling thread with the registered clients'
/// holdings at hand.
pub fn run_localsim_with<F>(mut cfg: SimConfig, drive: F) -> Result<SimOutcome, EngineError>
where
    F: FnOnce(&mut AuctionServer, &BTreeMap<PartyId, Holdings>) -> Result<MatchLog, EngineError>,
{
    let relay = Relay::new(DEFAULT_MAX_FRAME);
    relay.record_transcript(cfg.record_transcript);
    relay.set_tamper(cfg.relay_tamper.take());
    let auction = cfg.settings.auction;
    let seed = cfg.settings.seed;
    let link = relay.connect_local(SERVER).map_err(ProtocolError::from)?;
    let server_ep = Endpoint::new(Box::new(link), SERVER, auction, cfg.timeout, DEFAULT_MAX_FRAME);
    if cfg.settings.expected_clients.is_none() {
        cfg.settings.expected_clients = Some(cfg.clients.len());
    }

    let mut holdings = BTreeMap::new();
    let mut handles = Vec::new();
    for c in cfg.clients {
        let link = relay.connect_local(c.id).map_err(ProtocolError::from)?;
        let ep = Endpoint::new(Box::new(link), c.id, auction, cfg.timeout, DEFAULT_MAX_FRAME);
        let mut acfg = AgentConfig::new(c.id, c.book, party_seed(seed, c.id));
        acfg.tamper = c.tamper;
        acfg.psk = c.psk;
        acfg.idle_timeout = cfg.timeout * 20;
        let agent = Agent::new(ep, acfg);
        holdings.insert(c.id, agent.holdings());
        let id = c.id;
        handles.push((id, thread::spawn(move || agent.run().map_err(|e| e.to_string()))));
    }

    let mut server = AuctionServer::new(server_ep, cfg.settings);
    let result = drive(&mut server, &holdings);
    let server_traffic = server.traffic();
    drop(server);
    // Clients still waiting see their link close; queued messages are
    // delivered first.
    for (id, _) in &handles {
        relay.disconnect(*id);
    }
    let mut reports = BTreeMap::new();
    for (id, h) in handles {
        let r = h.join().unwrap_or_else(|_| Err("client thread panicked".into()));
        reports.insert(id, r);
    }
    let log = result?;
    let transcript = relay.take_transcript();
    Ok(SimOutcome { log, reports, holdings, transcript, server_traffic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::functionality::{b2c_match, c2c_match, mc_process, queue_auction, range_b2c, range_c2c_books};
    use crate::engine::order::{Order, Universe};
    use crate::engine::pairing::{client_order, pair_order};
    use crate::engine::{Functionality, MatchRecord};
    use crate::mpc::{SecurityMode, Side};

    fn settings(f: Functionality, mode: SecurityMode, u: &Universe, bank: Option<Book>) -> ServerSettings {
        let mut s = ServerSettings::new(f, mode, 7, u.clone(), 11);
        s.auction = 7;
        s.register_window = Duration::from_secs(10);
        s.bank = bank;
        s
    }

    fn books() -> Vec<(PartyId, Book)> {
        vec![
            (1, Book::from_orders([Order::new("X", Side::Buy, 100), Order::ranged("Y", Side::Sell, 5, 20)]).unwrap()),
            (2, Book::from_orders([Order::new("X", Side::Sell, 40), Order::ranged("Y", Side::Buy, 10, 12)]).unwrap()),
            (3, Book::from_orders([Order::new("X", Side::Sell, 70)]).unwrap()),
        ]
    }

    fn sim(f: Functionality, mode: SecurityMode, books: &[(PartyId, Book)], bank: Option<Book>) -> SimOutcome {
        let u = Universe::new(["X", "Y"]).unwrap();
        let clients = books.iter().map(|(id, b)| SimClient::new(*id, b.clone())).collect();
        let out = run_localsim(SimConfig::new(settings(f, mode, &u, bank), clients)).unwrap();
        assert!(out.log.aborts().is_empty(), "{:?}", out.log.aborts());
        for (id, r) in &out.reports {
            let r = r.as_ref().unwrap();
            assert!(r.aborts.is_empty(), "party {id}: {:?}", r.aborts);
            let mine: Vec<MatchRecord> = out.log.records().into_iter().filter(|m| m.involves(*id)).collect();
            assert_eq!(r.records, mine);
        }
        out
    }

    #[test]
    fn every_functionality_matches_its_oracle() {
        let u = Universe::new(["X", "Y"]).unwrap();
        let bs = books();
        let ids: Vec<PartyId> = bs.iter().map(|b| b.0).collect();
        let bank = Book::from_orders([Order::new("X", Side::Buy, 90), Order::new("Y", Side::Buy, 15)]).unwrap();
        let seed = auction_seed(11);
        for mode in [SecurityMode::SemiHonest, SecurityMode::Malicious] {
            let out = sim(Functionality::Mc, mode, &bs, None);
            assert_eq!(out.log.records(), mc_process(&u, &bs, &pair_order(&seed, &ids)).0);

            let out = sim(Functionality::B2c, mode, &bs, Some(bank.clone()));
            assert_eq!(out.log.records(), b2c_match(&u, &bank, &bs));

            let out = sim(Functionality::RangeB2c, mode, &bs, Some(bank.clone()));
            assert_eq!(out.log.records(), range_b2c(&u, &bank, &bs, &client_order(&seed, &ids)));

            let mut got = sim(Functionality::Queue, mode, &bs, None).log.records();
            let mut want = queue_auction(&u, &bs);
            got.sort_by_key(|r| (r.symbol.clone(), r.parties));
            want.sort_by_key(|r| (r.symbol.clone(), r.parties));
            assert_eq!(got, want);

            let out = sim(Functionality::C2c, mode, &bs[..2], None);
            assert_eq!(out.log.records(), c2c_match(&u, (1, &bs[0].1), (2, &bs[1].1)));

            let out = sim(Functionality::RangeC2c, mode, &bs[..2], None);
            assert_eq!(out.log.records(), range_c2c_books(&u, (1, &bs[0].1), (2, &bs[1].1)));
        }
    }

    #[test]
    fn deterministic_logs() {
        let a = sim(Functionality::Mc, SecurityMode::Malicious, &books(), None).log.to_json_lines();
        let b = sim(Functionality::Mc, SecurityMode::Malicious, &books(), None).log.to_json_lines();
        assert_eq!(a, b);
    }

    #[test]
    fn no_clients_gives_empty_log() {
        let u = Universe::new(["X"]).unwrap();
        let mut s = settings(Functionality::Mc, SecurityMode::Malicious, &u, None);
        s.register_window = Duration::from_millis(50);
        let out = run_localsim(SimConfig::new(s, vec![])).unwrap();
        assert_eq!(out.log.entries().len(), 1);
    }
}
