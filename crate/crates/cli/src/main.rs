//! `primematch`: server, client, in-process simulator and benchmark.
//!
//! Settings come from `--config FILE` (or `PRIMEMATCH_CONFIG`), then
//! `PRIMEMATCH_<FIELD>` environment variables, then flags. Results are
//! JSON lines on stdout; progress and errors are JSON lines on stderr.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use primematch_core::config::{Config, ConfigError};
use primematch_core::engine::agent::{Agent, AgentConfig};
use primematch_core::engine::bench::{run_bench, BenchConfig};
use primematch_core::engine::localsim::{party_seed, run_localsim, SimClient, SimConfig};
use primematch_core::engine::server::{AuctionServer, ServerSettings};
use primematch_core::engine::{load_orders, EngineError, MatchLog};
use primematch_core::mpc::malicious::{ClientTamper, ServerTamper};
use primematch_core::mpc::messages::kind;
use primematch_core::net::{
    connect, serve_metrics, CorruptFrame, Endpoint, PartyId, Relay, RelayTamper, ReplayFrame, TcpServer, SERVER,
};
use rand::Rng;
use serde_json::json;

#[derive(Parser)]
#[command(name = "primematch", version, about = "Private inventory matching with a server-aided comparison protocol")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "PRIMEMATCH_CONFIG")]
    config: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// semi-honest or malicious.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Auction seed; fixes pairing order and simulated randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Symbol universe: a comma-separated list or a file with one per line.
    #[arg(long, global = true)]
    symbols: Option<String>,
    /// Bit width of quantities (2^m - 1).
    #[arg(long, global = true)]
    n: Option<u32>,
    /// b2c, c2c, mc, queue, range-b2c or range-c2c.
    #[arg(long, global = true)]
    functionality: Option<String>,
    /// Per-message wait limit in milliseconds.
    #[arg(long, global = true)]
    timeout_ms: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the relay and the auction server.
    Server {
        /// The bank's own orders (bank-to-client functionalities).
        #[arg(long)]
        orders: Option<PathBuf>,
        #[arg(long)]
        listen: Option<String>,
        #[arg(long)]
        expected_clients: Option<usize>,
        #[arg(long)]
        register_window_ms: Option<u64>,
        /// Serve relay counters over HTTP at this address.
        #[arg(long)]
        metrics: Option<String>,
        /// Derive server randomness from the seed (testing only).
        #[arg(long)]
        deterministic: bool,
        /// Adversary: send losers one-out-of-many proofs for the wrong list.
        #[arg(long)]
        forge_one_many: bool,
    },
    /// Connect, register orders, take part and print own matches.
    Client {
        #[arg(long)]
        id: PartyId,
        /// CSV with columns symbol,side,min_qty,max_qty.
        #[arg(long)]
        orders: PathBuf,
        #[arg(long)]
        connect: Option<String>,
        /// Derive client randomness from the seed (testing only).
        #[arg(long)]
        deterministic: bool,
        /// Adversary: share-flip:I, randomness-flip:I, inconsistent:I,
        /// non-bit, comeq-mismatch or statement-swap.
        #[arg(long)]
        tamper: Option<String>,
    },
    /// Run every role in one process.
    Localsim {
        /// Client orders as PATH or ID=PATH; repeat per client. Ids
        /// default to 1, 2, ... in order.
        #[arg(long, required = true)]
        orders: Vec<String>,
        /// The bank's orders for bank-to-client functionalities.
        #[arg(long)]
        bank_orders: Option<PathBuf>,
        /// Adversary: ID=KIND with KIND as for `client --tamper`.
        #[arg(long)]
        client_tamper: Vec<String>,
        /// Adversary relay: replay-sealed, corrupt-sealed or
        /// corrupt-handshake.
        #[arg(long)]
        relay_tamper: Option<String>,
        #[arg(long)]
        forge_one_many: bool,
    },
    /// Time K generated symbols through the chosen functionality.
    Bench {
        /// Number of symbols K.
        #[arg(long, default_value_t = 100)]
        bench_count: usize,
        #[arg(long, default_value_t = 2)]
        clients: usize,
    },
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Run(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError::Run(e.to_string())
    }
}

fn emit(v: serde_json::Value) {
    println!("{v}");
}

fn status(v: serde_json::Value) {
    eprintln!("{v}");
}

fn load_config(cli: &Cli) -> Result<Config, ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.apply_env(std::env::vars())?;
    let c = &cli.common;
    if let Some(v) = &c.mode {
        cfg.set("mode", v)?;
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = &c.symbols {
        if Path::new(v).is_file() {
            cfg.set("symbols_file", v)?;
        } else {
            cfg.symbols_file = None;
            cfg.set("symbols", v)?;
        }
    }
    if let Some(v) = c.n {
        cfg.n = v;
    }
    if let Some(v) = &c.functionality {
        cfg.set("functionality", v)?;
    }
    if let Some(v) = c.timeout_ms {
        cfg.timeout_ms = v;
    }
    match &cli.command {
        Command::Server { orders, listen, expected_clients, register_window_ms, .. } => {
            if let Some(p) = orders {
                cfg.bank_orders = Some(p.clone());
            }
            if let Some(v) = listen {
                cfg.listen = v.clone();
            }
            if expected_clients.is_some() {
                cfg.expected_clients = *expected_clients;
            }
            if let Some(v) = register_window_ms {
                cfg.register_window_ms = *v;
            }
        }
        Command::Client { connect: Some(v), .. } => cfg.connect = v.clone(),
        Command::Localsim { bank_orders: Some(p), .. } => cfg.bank_orders = Some(p.clone()),
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_client_tamper(s: &str) -> Result<ClientTamper, String> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    let idx = || arg.parse::<usize>().map_err(|_| format!("tamper {kind} needs an index, as in {kind}:0"));
    Ok(match kind {
        "share-flip" => ClientTamper::ShareFlip(idx()?),
        "randomness-flip" => ClientTamper::RandomnessFlip(idx()?),
        "inconsistent" => ClientTamper::InconsistentCommitment(idx()?),
        "non-bit" => ClientTamper::NonBit,
        "comeq-mismatch" => ClientTamper::ComEqMismatch,
        "statement-swap" => ClientTamper::StatementSwap,
        other => return Err(format!("unknown client tamper {other:?}")),
    })
}

fn parse_relay_tamper(s: &str) -> Result<Box<dyn RelayTamper>, String> {
    Ok(match s {
        "replay-sealed" => Box::new(ReplayFrame::new(kind::Sealed, 3)),
        "corrupt-sealed" => Box::new(CorruptFrame::new(kind::Sealed, 3, 0)),
        "corrupt-handshake" => Box::new(CorruptFrame::new(kind::HandshakeShare, 1, 0)),
        other => return Err(format!("unknown relay tamper {other:?}")),
    })
}

fn settings(cfg: &Config, k: u32) -> Result<ServerSettings, CliError> {
    let universe = cfg.universe()?;
    let bank = cfg.bank_book(&universe)?;
    let mut s = ServerSettings::new(cfg.functionality()?, cfg.security_mode()?, cfg.n, universe, cfg.seed + k as u64);
    s.auction = cfg.auction + k as u64;
    s.expected_clients = cfg.expected_clients;
    s.register_window = cfg.register_window();
    s.bank = bank;
    Ok(s)
}

fn print_log(log: &MatchLog) {
    print!("{}", log.to_json_lines());
}

fn run_server(cfg: &Config, metrics: Option<&str>, deterministic: bool, forge: bool) -> Result<(), CliError> {
    let relay = Relay::new(cfg.max_frame);
    let tcp = TcpServer::bind(cfg.listen.as_str(), Arc::clone(&relay))
        .map_err(|e| CliError::Run(format!("cannot listen on {}: {e}", cfg.listen)))?;
    status(json!({"type": "listening", "addr": tcp.local_addr.to_string()}));
    if let Some(addr) = metrics {
        let addr = addr.parse().map_err(|_| CliError::Config(ConfigError::new("metrics", format!("{addr:?} is not an address"))))?;
        let (local, _) = serve_metrics(addr, Arc::clone(&relay)).map_err(|e| CliError::Run(format!("metrics: {e}")))?;
        status(json!({"type": "metrics", "addr": local.to_string()}));
    }
    for k in 0..cfg.auctions {
        let mut s = settings(cfg, k)?;
        if !deterministic {
            s.rng_seed = Some(rand::thread_rng().gen());
        }
        if forge {
            s.tamper = ServerTamper::ForgeOneMany;
        }
        let link = relay.connect_local(SERVER).map_err(|e| CliError::Run(e.to_string()))?;
        let ep = Endpoint::new(Box::new(link), SERVER, s.auction, cfg.timeout(), cfg.max_frame);
        let mut server = AuctionServer::new(ep, s);
        let log = server.run()?;
        let clients = server.registered().to_vec();
        drop(server);
        // Results are queued on the clients' connections; let them drain.
        let deadline = std::time::Instant::now() + cfg.timeout();
        while clients.iter().any(|c| relay.is_connected(*c)) && std::time::Instant::now() < deadline {
            std::thread::sleep(Duration::from_millis(10));
        }
        relay.disconnect(SERVER);
        print_log(&log);
        if k + 1 < cfg.auctions {
            std::thread::sleep(Duration::from_millis(cfg.interval_ms));
        }
    }
    Ok(())
}

fn run_client(cfg: &Config, id: PartyId, orders: &Path, deterministic: bool, tamper: ClientTamper) -> Result<(), CliError> {
    if id == SERVER {
        return Err(CliError::Config(ConfigError::new("id", "0 is reserved for the server")));
    }
    let universe = cfg.universe()?;
    let book = load_orders(orders, &universe, cfg.n)?;
    status(json!({"type": "orders", "count": book.len()}));
    for k in 0..cfg.auctions {
        let link = connect(cfg.connect.as_str(), cfg.max_frame).map_err(|e| CliError::Run(format!("cannot connect to {}: {e}", cfg.connect)))?;
        let ep = Endpoint::new(Box::new(link), id, cfg.auction + k as u64, cfg.timeout(), cfg.max_frame);
        let seed = if deterministic { party_seed(cfg.seed + k as u64, id) } else { rand::thread_rng().gen() };
        let mut acfg = AgentConfig::new(id, book.clone(), seed);
        acfg.psk = cfg.psk_bytes()?;
        acfg.tamper = tamper;
        acfg.idle_timeout = cfg.register_window() + cfg.timeout() * 20;
        let report = Agent::new(ep, acfg).run().map_err(|e| CliError::Run(e.to_string()))?;
        emit(json!({"type": "registered", "orders": book.len(), "values": report.registered}));
        for r in &report.records {
            let mut v = serde_json::to_value(r).expect("records serialize");
            v["type"] = json!("match");
            emit(v);
        }
        for a in &report.aborts {
            emit(json!({"type": "abort", "session": a.session, "reason": a.reason, "blame": a.blame}));
        }
    }
    Ok(())
}

fn run_local(cfg: &Config, orders: &[String], client_tamper: &[String], relay_tamper: Option<&str>, forge: bool) -> Result<(), CliError> {
    let universe = cfg.universe()?;
    let mut tampers: BTreeMap<PartyId, ClientTamper> = BTreeMap::new();
    for t in client_tamper {
        let (id, kind) = t.split_once('=').ok_or_else(|| CliError::Run(format!("client tamper {t:?} is not ID=KIND")))?;
        let id: PartyId = id.parse().map_err(|_| CliError::Run(format!("bad party id in {t:?}")))?;
        tampers.insert(id, parse_client_tamper(kind).map_err(CliError::Run)?);
    }
    let mut clients = Vec::new();
    for (k, spec) in orders.iter().enumerate() {
        let (id, path) = match spec.split_once('=') {
            Some((id, p)) => (id.parse().map_err(|_| CliError::Run(format!("bad party id in {spec:?}")))?, p),
            None => (k as PartyId + 1, spec.as_str()),
        };
        let mut c = SimClient::new(id, load_orders(Path::new(path), &universe, cfg.n)?);
        c.tamper = tampers.remove(&id).unwrap_or(ClientTamper::None);
        c.psk = cfg.psk_bytes()?;
        clients.push(c);
    }
    if let Some(id) = tampers.keys().next() {
        return Err(CliError::Run(format!("client tamper names party {id}, which has no orders")));
    }
    let mut s = settings(cfg, 0)?;
    if forge {
        s.tamper = ServerTamper::ForgeOneMany;
    }
    let mut sim = SimConfig::new(s, clients);
    sim.timeout = cfg.timeout();
    if let Some(t) = relay_tamper {
        sim.relay_tamper = Some(parse_relay_tamper(t).map_err(CliError::Run)?);
    }
    let out = run_localsim(sim)?;
    print_log(&out.log);
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Server { metrics, deterministic, forge_one_many, .. } => {
            run_server(&cfg, metrics.as_deref(), *deterministic, *forge_one_many)
        }
        Command::Client { id, orders, deterministic, tamper, .. } => {
            let tamper = tamper.as_deref().map(parse_client_tamper).transpose().map_err(CliError::Run)?;
            run_client(&cfg, *id, orders, *deterministic, tamper.unwrap_or(ClientTamper::None))
        }
        Command::Localsim { orders, client_tamper, relay_tamper, forge_one_many, .. } => {
            run_local(&cfg, orders, client_tamper, relay_tamper.as_deref(), *forge_one_many)
        }
        Command::Bench { bench_count, clients } => {
            let mut b = BenchConfig::new(*bench_count);
            b.functionality = cfg.functionality()?;
            b.mode = cfg.security_mode()?;
            b.n = cfg.n;
            b.seed = cfg.seed;
            b.clients = *clients;
            b.timeout = cfg.timeout();
            emit(serde_json::to_value(run_bench(&b)?).expect("reports serialize"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(e)) => {
            status(json!({"type": "error", "kind": "config", "field": e.field, "message": e.to_string()}));
            ExitCode::from(2)
        }
        Err(CliError::Run(e)) => {
            status(json!({"type": "error", "kind": "runtime", "message": e}));
            ExitCode::from(1)
        }
    }
}
