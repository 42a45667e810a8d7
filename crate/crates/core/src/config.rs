//! Operator configuration: a TOML file, then `PRIMEMATCH_*` environment
//! variables, then command-line flags, each layer overriding the last.
//! Every error names the field it concerns.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::check_bit_width;
use crate::engine::{load_orders, Book, Functionality, Universe};
use crate::mpc::SecurityMode;

/// Prefix of the environment overrides: `PRIMEMATCH_SEED=7` sets `seed`.
pub const ENV_PREFIX: &str = "PRIMEMATCH_";

/// The only supported group, a prime-order group of about 2^252 elements.
pub const GROUP: &str = "ristretto255";

#[derive(Debug, Error, PartialEq, Eq)]
#[error("config field `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: &str, reason: impl Into<String>) -> Self {
        ConfigError { field: field.to_string(), reason: reason.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub group: String,
    /// Bit width of quantities; must be 2^m − 1.
    pub n: u32,
    pub mode: String,
    pub functionality: String,
    pub listen: String,
    pub connect: String,
    /// One symbol per line; overrides `symbols` when both are set.
    pub symbols_file: Option<PathBuf>,
    pub symbols: Vec<String>,
    /// The server's own book for the bank variants.
    pub bank_orders: Option<PathBuf>,
    pub seed: u64,
    pub auction: u64,
    /// Per-message wait limit.
    pub timeout_ms: u64,
    pub register_window_ms: u64,
    /// Close registration early once this many clients have registered.
    pub expected_clients: Option<usize>,
    pub max_frame: usize,
    /// Hex pre-shared key mixed into client channel keys.
    pub psk: Option<String>,
    /// Number of consecutive auctions; 1 runs once.
    pub auctions: u32,
    pub interval_ms: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            group: GROUP.into(),
            n: 31,
            mode: "malicious".into(),
            functionality: "c2c".into(),
            listen: "127.0.0.1:7400".into(),
            connect: "127.0.0.1:7400".into(),
            symbols_file: None,
            symbols: Vec::new(),
            bank_orders: None,
            seed: 0,
            auction: 1,
            timeout_ms: 30_000,
            register_window_ms: 60_000,
            expected_clients: None,
            max_frame: crate::net::DEFAULT_MAX_FRAME,
            psk: None,
            auctions: 1,
            interval_ms: 0,
        }
    }
}

/// Field names accepted by [`Config::set`] and the environment.
pub const FIELDS: [&str; 19] = [
    "group",
    "n",
    "mode",
    "functionality",
    "listen",
    "connect",
    "symbols_file",
    "symbols",
    "bank_orders",
    "seed",
    "auction",
    "timeout_ms",
    "register_window_ms",
    "expected_clients",
    "max_frame",
    "psk",
    "auctions",
    "interval_ms",
    "config",
];

fn num<T: std::str::FromStr>(field: &str, v: &str) -> Result<T, ConfigError> {
    v.trim().parse().map_err(|_| ConfigError::new(field, format!("expected a non-negative integer, got {v:?}")))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            // The first backticked name in toml's message is the offending key.
            let quoted = msg.split('`').nth(1).filter(|_| msg.contains('`')).map(str::to_string);
            let field = quoted
                .or_else(|| e.span().and_then(|s| key_at(text, s.start)).map(str::to_string))
                .unwrap_or_else(|| "<file>".to_string());
            ConfigError::new(&field, msg)
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, field: &str, v: &str) -> Result<(), ConfigError> {
        match field {
            "group" => self.group = v.to_string(),
            "n" => self.n = num(field, v)?,
            "mode" => self.mode = v.to_string(),
            "functionality" => self.functionality = v.to_string(),
            "listen" => self.listen = v.to_string(),
            "connect" => self.connect = v.to_string(),
            "symbols_file" => self.symbols_file = Some(PathBuf::from(v)),
            "symbols" => self.symbols = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            "bank_orders" => self.bank_orders = Some(PathBuf::from(v)),
            "seed" => self.seed = num(field, v)?,
            "auction" => self.auction = num(field, v)?,
            "timeout_ms" => self.timeout_ms = num(field, v)?,
            "register_window_ms" => self.register_window_ms = num(field, v)?,
            "expected_clients" => self.expected_clients = Some(num(field, v)?),
            "max_frame" => self.max_frame = num(field, v)?,
            "psk" => self.psk = Some(v.to_string()),
            "auctions" => self.auctions = num(field, v)?,
            "interval_ms" => self.interval_ms = num(field, v)?,
            other => return Err(ConfigError::new(other, "unknown field")),
        }
        Ok(())
    }

    /// Applies `PRIMEMATCH_<FIELD>` variables from `vars`. Unrelated
    /// variables are ignored; `PRIMEMATCH_CONFIG` is left to the caller.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<(), ConfigError> {
        let mut vars: Vec<(String, String)> = vars.into_iter().collect();
        vars.sort();
        for (k, v) in vars {
            let Some(name) = k.strip_prefix(ENV_PREFIX) else { continue };
            let field = name.to_ascii_lowercase();
            if field == "config" {
                continue;
            }
            if !FIELDS.contains(&field.as_str()) {
                return Err(ConfigError::new(&field, format!("unknown field (from environment variable {k})")));
            }
            self.set(&field, &v)?;
        }
        Ok(())
    }

    /// Checks every field that can be checked without touching the
    /// filesystem or the network.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.group != GROUP {
            return Err(ConfigError::new("group", format!("unsupported group {:?} (only {GROUP})", self.group)));
        }
        if self.n == 0 || !(self.n + 1).is_power_of_two() {
            return Err(ConfigError::new("n", format!("{} is not of the form 2^m - 1", self.n)));
        }
        check_bit_width(self.n).map_err(|e| ConfigError::new("n", e.to_string()))?;
        self.security_mode()?;
        self.functionality()?;
        for (field, addr) in [("listen", &self.listen), ("connect", &self.connect)] {
            check_addr(field, addr)?;
        }
        for (field, v) in [("timeout_ms", self.timeout_ms), ("register_window_ms", self.register_window_ms)] {
            if v == 0 {
                return Err(ConfigError::new(field, "must be positive"));
            }
        }
        if self.max_frame < 1024 {
            return Err(ConfigError::new("max_frame", format!("{} is below the 1024-byte minimum", self.max_frame)));
        }
        if self.expected_clients == Some(0) {
            return Err(ConfigError::new("expected_clients", "must be positive when set"));
        }
        if self.auctions == 0 {
            return Err(ConfigError::new("auctions", "must be at least 1"));
        }
        self.psk_bytes()?;
        for s in &self.symbols {
            Universe::new([s.as_str()]).map_err(|e| ConfigError::new("symbols", e.to_string()))?;
        }
        Ok(())
    }

    pub fn security_mode(&self) -> Result<SecurityMode, ConfigError> {
        self.mode.parse().map_err(|e: String| ConfigError::new("mode", e))
    }

    pub fn functionality(&self) -> Result<Functionality, ConfigError> {
        self.functionality.parse().map_err(|e: crate::engine::EngineError| ConfigError::new("functionality", e.to_string()))
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    pub fn register_window(&self) -> Duration {
        Duration::from_millis(self.register_window_ms)
    }

    pub fn psk_bytes(&self) -> Result<Option<[u8; 32]>, ConfigError> {
        let Some(h) = &self.psk else { return Ok(None) };
        let bytes = hex::decode(h.trim()).map_err(|e| ConfigError::new("psk", format!("not hex: {e}")))?;
        let arr: [u8; 32] =
            bytes.try_into().map_err(|b: Vec<u8>| ConfigError::new("psk", format!("expected 32 bytes, got {}", b.len())))?;
        Ok(Some(arr))
    }

    /// The symbol universe from `symbols_file`, else `symbols`.
    pub fn universe(&self) -> Result<Universe, ConfigError> {
        if let Some(p) = &self.symbols_file {
            return Universe::load(p).map_err(|e| ConfigError::new("symbols_file", e.to_string()));
        }
        if self.symbols.is_empty() {
            return Err(ConfigError::new("symbols", "no symbol universe configured (set symbols or symbols_file)"));
        }
        Universe::new(self.symbols.iter().cloned()).map_err(|e| ConfigError::new("symbols", e.to_string()))
    }

    pub fn bank_book(&self, universe: &Universe) -> Result<Option<Book>, ConfigError> {
        let f = self.functionality()?;
        match (&self.bank_orders, f.has_bank()) {
            (Some(p), true) => load_orders(p, universe, self.n).map(Some).map_err(|e| ConfigError::new("bank_orders", e.to_string())),
            (None, true) => Err(ConfigError::new("bank_orders", format!("required by functionality {f}"))),
            (_, false) => Ok(None),
        }
    }
}

fn check_addr(field: &str, addr: &str) -> Result<(), ConfigError> {
    if addr.parse::<SocketAddr>().is_ok() {
        return Ok(());
    }
    match addr.rsplit_once(':') {
        Some((host, port)) if !host.is_empty() && port.parse::<u16>().is_ok() => Ok(()),
        _ => Err(ConfigError::new(field, format!("{addr:?} is not host:port"))),
    }
}

/// The key whose line contains byte offset `at`.
fn key_at(text: &str, at: usize) -> Option<&'static str> {
    let start = text[..at.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next()?;
    let key = line.split('=').next()?.trim();
    FIELDS.iter().find(|f| **f == key).copied()
}
