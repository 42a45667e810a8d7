use serde::{Deserialize, Serialize};

use crate::mpc::Side;
use crate::net::PartyId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PassTag {
    Plain,
    MinPass,
    MaxPass,
}

/// One execution. `parties[k]` traded on `sides[k]`; the bank is party 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatchRecord {
    pub symbol: String,
    pub parties: [PartyId; 2],
    pub sides: [Side; 2],
    pub quantity: u64,
    pub pass: PassTag,
}

impl MatchRecord {
    pub fn new(symbol: &str, a: PartyId, side_a: Side, b: PartyId, quantity: u64, pass: PassTag) -> Self {
        MatchRecord { symbol: symbol.to_string(), parties: [a, b], sides: [side_a, side_a.opposite()], quantity, pass }
    }

    pub fn involves(&self, p: PartyId) -> bool {
        self.parties.contains(&p)
    }

    /// Quantity `p` traded on `side` in this record.
    pub fn traded(&self, p: PartyId, symbol: &str, side: Side) -> u64 {
        if self.symbol != symbol {
            return 0;
        }
        (0..2).filter(|&k| self.parties[k] == p && self.sides[k] == side).map(|_| self.quantity).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum LogEntry {
    Header {
        auction: u64,
        seed: String,
        functionality: String,
        mode: String,
        n: u32,
        symbols: usize,
        clients: Vec<PartyId>,
    },
    Match {
        seq: u64,
        ts: u64,
        #[serde(flatten)]
        record: MatchRecord,
    },
    Abort {
        seq: u64,
        ts: u64,
        parties: [PartyId; 2],
        reason: String,
        /// The party the failure was pinned on, when one could be named.
        blame: Option<PartyId>,
    },
}

/// One aborted session as recorded in the log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbortRecord {
    pub parties: [PartyId; 2],
    pub reason: String,
    pub blame: Option<PartyId>,
}

/// The auction's output, one JSON object per line. Timestamps are logical:
/// `ts` counts protocol steps, so identical inputs give identical logs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchLog {
    entries: Vec<LogEntry>,
    seq: u64,
    clock: u64,
}

impl MatchLog {
    pub fn new(header: LogEntry) -> Self {
        MatchLog { entries: vec![header], seq: 0, clock: 0 }
    }

    pub fn tick(&mut self) {
        self.clock += 1;
    }

    pub fn push_match(&mut self, record: MatchRecord) {
        self.seq += 1;
        self.entries.push(LogEntry::Match { seq: self.seq, ts: self.clock, record });
    }

    pub fn push_abort(&mut self, parties: [PartyId; 2], reason: String, blame: Option<PartyId>) {
        self.seq += 1;
        self.entries.push(LogEntry::Abort { seq: self.seq, ts: self.clock, parties, reason, blame });
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn records(&self) -> Vec<MatchRecord> {
        self.entries
            .iter()
            .filter_map(|e| match e {
                LogEntry::Match { record, .. } => Some(record.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn aborts(&self) -> Vec<AbortRecord> {
        self.entries
            .iter()
            .filter_map(|e| match e {
                LogEntry::Abort { parties, reason, blame, .. } => {
                    Some(AbortRecord { parties: *parties, reason: reason.clone(), blame: *blame })
                }
                _ => None,
            })
            .collect()
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("log entries serialize"));
            out.push('\n');
        }
        out
    }

    pub fn parse_json_lines(text: &str) -> Result<Vec<LogEntry>, serde_json::Error> {
        text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
    }
}
