//! Desk-scale benchmark: K symbols through one functionality, all roles
//! in process, with the relay's view of the traffic split by phase.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::{Duration, Instant};

use rand::Rng;
use serde::Serialize;

use super::drivers::run_auction;
use super::localsim::{run_localsim_with, SimClient, SimConfig};
use super::order::{Book, Order, Universe};
use super::pairing::auction_seed;
use super::server::ServerSettings;
use super::{EngineError, Functionality};
use crate::mpc::messages::kind;
use crate::mpc::{SecurityMode, Side};
use crate::net::TranscriptEntry;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub functionality: Functionality,
    pub symbols: usize,
    pub n: u32,
    pub mode: SecurityMode,
    pub seed: u64,
    pub clients: usize,
    pub timeout: Duration,
}

impl BenchConfig {
    pub fn new(symbols: usize) -> Self {
        BenchConfig {
            functionality: Functionality::C2c,
            symbols,
            n: 31,
            mode: SecurityMode::Malicious,
            seed: 1,
            clients: 2,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PhaseTraffic {
    pub frames: u64,
    pub bytes: u64,
}

/// Published desk-scale figures, reported next to the measured ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceFigures {
    pub throughput_low: f64,
    pub throughput_high: f64,
    pub latency_100_symbols_s: f64,
}

pub const REFERENCE: ReferenceFigures =
    ReferenceFigures { throughput_low: 8.96, throughput_high: 10.09, latency_100_symbols_s: 9.903 };

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub functionality: String,
    pub mode: String,
    pub n: u32,
    pub symbols: usize,
    pub clients: usize,
    /// Registration through results, in seconds.
    pub total_s: f64,
    /// Matching only, in seconds.
    pub latency_s: f64,
    /// Symbols per second of matching.
    pub throughput: f64,
    pub matches: usize,
    pub aborts: usize,
    pub phases: BTreeMap<String, PhaseTraffic>,
    /// Bytes forwarded per symbol outside registration and control.
    pub bytes_per_symbol: f64,
    pub reference: ReferenceFigures,
}

pub const PHASES: [&str; 8] = ["register", "setup", "shares", "reports", "verdicts", "reveal", "b2c", "control"];

impl BenchReport {
    fn empty(cfg: &BenchConfig) -> Self {
        BenchReport {
            functionality: cfg.functionality.to_string(),
            mode: cfg.mode.to_string(),
            n: cfg.n,
            symbols: 0,
            clients: cfg.clients,
            total_s: 0.0,
            latency_s: 0.0,
            throughput: 0.0,
            matches: 0,
            aborts: 0,
            phases: PHASES.iter().map(|p| (p.to_string(), PhaseTraffic::default())).collect(),
            bytes_per_symbol: 0.0,
            reference: REFERENCE,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

/// Splits the relay transcript by protocol phase. Sealed client traffic
/// before a session's first batch is channel setup; after it, shares.
pub fn classify(transcript: &[TranscriptEntry]) -> BTreeMap<String, PhaseTraffic> {
    let mut phases: BTreeMap<String, PhaseTraffic> =
        PHASES.iter().map(|p| (p.to_string(), PhaseTraffic::default())).collect();
    let mut batched: HashSet<u64> = HashSet::new();
    for e in transcript {
        let phase = match e.msg_type {
            kind::Hello | kind::Welcome | kind::Register | kind::Registered => "register",
            kind::PairStart | kind::PairReady | kind::HandshakeShare => "setup",
            kind::BatchStart => {
                batched.insert(e.session);
                "shares"
            }
            kind::Sealed if batched.contains(&e.session) => "shares",
            kind::Sealed => "setup",
            kind::SemiReports | kind::MalReports => "reports",
            kind::SemiVerdicts | kind::MalVerdicts => "verdicts",
            kind::SemiReveals | kind::MalReveals | kind::MinResults => "reveal",
            kind::B2cOffer | kind::B2cResponse | kind::B2cVerdicts | kind::B2cReveals => "b2c",
            _ => "control",
        };
        let t = phases.get_mut(phase).expect("known phase");
        t.frames += 1;
        t.bytes += e.frame_len as u64;
    }
    phases
}

/// Seeded books: every client holds one order per symbol, sides
/// alternating by client so each pair has crossing interest.
pub fn bench_books(cfg: &BenchConfig, universe: &Universe) -> Result<(Vec<(u32, Book)>, Option<Book>), EngineError> {
    let mut rng = auction_seed(cfg.seed).expand(b"bench-books").rng();
    let top = (1u64 << cfg.n) - 1;
    let ranged = matches!(cfg.functionality, Functionality::RangeB2c | Functionality::RangeC2c);
    let order = |rng: &mut rand_chacha::ChaCha20Rng, symbol: &str, side: Side| {
        if ranged {
            let lo = rng.gen_range(1..=top);
            let hi = rng.gen_range(lo..=top);
            Order::ranged(symbol, side, lo, hi)
        } else {
            Order::new(symbol, side, rng.gen_range(1..=top))
        }
    };
    let mut books = Vec::new();
    for c in 0..cfg.clients {
        let side = if c % 2 == 0 { Side::Buy } else { Side::Sell };
        let orders: Vec<Order> = universe.symbols().iter().map(|s| order(&mut rng, s, side)).collect();
        books.push((c as u32 + 1, Book::from_orders(orders)?));
    }
    let bank = if cfg.functionality.has_bank() {
        let orders: Vec<Order> = universe.symbols().iter().map(|s| order(&mut rng, s, Side::Sell)).collect();
        Some(Book::from_orders(orders)?)
    } else {
        None
    };
    Ok((books, bank))
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, EngineError> {
    if cfg.symbols == 0 {
        return Ok(BenchReport::empty(cfg));
    }
    let universe = Universe::synthetic(cfg.symbols);
    let (books, bank) = bench_books(cfg, &universe)?;
    let mut settings = ServerSettings::new(cfg.functionality, cfg.mode, cfg.n, universe, cfg.seed);
    settings.auction = cfg.seed;
    settings.register_window = cfg.timeout;
    settings.bank = bank;
    let clients = books.into_iter().map(|(id, b)| SimClient::new(id, b)).collect();
    let mut sim = SimConfig::new(settings, clients);
    sim.timeout = cfg.timeout;
    sim.record_transcript = true;

    let started = Instant::now();
    let mut latency = Duration::ZERO;
    let outcome = run_localsim_with(sim, |srv, _| {
        srv.register_phase()?;
        let parts = srv.plan_parts();
        let mut log = srv.header();
        let t0 = Instant::now();
        if !parts.clients.is_empty() {
            run_auction(&parts.plan(), srv, &mut log)?;
        }
        latency = t0.elapsed();
        srv.finish(&mut log);
        Ok(log)
    })?;
    let total = started.elapsed();

    let phases = classify(&outcome.transcript);
    let matching: u64 =
        phases.iter().filter(|(k, _)| !matches!(k.as_str(), "register" | "control")).map(|(_, t)| t.bytes).sum();
    let latency_s = latency.as_secs_f64();
    Ok(BenchReport {
        functionality: cfg.functionality.to_string(),
        mode: cfg.mode.to_string(),
        n: cfg.n,
        symbols: cfg.symbols,
        clients: cfg.clients,
        total_s: total.as_secs_f64(),
        latency_s,
        throughput: if latency_s > 0.0 { cfg.symbols as f64 / latency_s } else { 0.0 },
        matches: outcome.log.records().len(),
        aborts: outcome.log.aborts().len(),
        phases,
        bytes_per_symbol: matching as f64 / cfg.symbols as f64,
        reference: REFERENCE,
    })
}

/// Least-squares slope, intercept and coefficient of determination.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Frames by message type, for inspecting a transcript.
pub fn frames_by_type(transcript: &[TranscriptEntry]) -> HashMap<u8, PhaseTraffic> {
    let mut out: HashMap<u8, PhaseTraffic> = HashMap::new();
    for e in transcript {
        let t = out.entry(e.msg_type).or_default();
        t.frames += 1;
        t.bytes += e.frame_len as u64;
    }
    out
}
