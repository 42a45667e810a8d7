use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::mpc::{Bound, Side, ValueRef};

/// The configured symbol list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    symbols: Vec<String>,
    index: HashSet<String>,
}

impl Universe {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self, EngineError> {
        let mut out = Universe { symbols: Vec::new(), index: HashSet::new() };
        for s in symbols {
            let s = s.into();
            if s.is_empty() || s.contains(',') || s.chars().any(char::is_whitespace) {
                return Err(EngineError::Universe(format!("invalid symbol {s:?}")));
            }
            if !out.index.insert(s.clone()) {
                return Err(EngineError::Universe(format!("duplicate symbol {s:?}")));
            }
            out.symbols.push(s);
        }
        Ok(out)
    }

    /// One symbol per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, EngineError> {
        Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')))
    }

    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path).map_err(|e| EngineError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Generated names SYM000, SYM001, ...
    pub fn synthetic(count: usize) -> Self {
        Self::new((0..count).map(|i| format!("SYM{i:03}"))).expect("generated names are valid")
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn contains(&self, s: &str) -> bool {
        self.index.contains(s)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Every value a client registers: symbol × side × bound.
    pub fn value_refs(&self) -> Vec<ValueRef> {
        let mut out = Vec::with_capacity(self.len() * 4);
        for s in &self.symbols {
            for side in [Side::Buy, Side::Sell] {
                for bound in [Bound::Min, Bound::Max] {
                    out.push(ValueRef::new(s.clone(), side, bound));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub symbol: String,
    pub side: Side,
    pub min_amount: u64,
    pub max_amount: u64,
}

impl Order {
    pub fn new(symbol: impl Into<String>, side: Side, amount: u64) -> Self {
        Order { symbol: symbol.into(), side, min_amount: amount, max_amount: amount }
    }

    pub fn ranged(symbol: impl Into<String>, side: Side, min_amount: u64, max_amount: u64) -> Self {
        Order { symbol: symbol.into(), side, min_amount, max_amount }
    }
}

/// A client's orders, at most one per symbol.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Book {
    orders: BTreeMap<String, Order>,
}

impl Book {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_orders(orders: impl IntoIterator<Item = Order>) -> Result<Self, EngineError> {
        let mut b = Book::new();
        for o in orders {
            b.insert(o)?;
        }
        Ok(b)
    }

    pub fn insert(&mut self, o: Order) -> Result<(), EngineError> {
        if o.min_amount > o.max_amount {
            return Err(EngineError::Order { row: None, reason: format!("min {} exceeds max {}", o.min_amount, o.max_amount) });
        }
        if self.orders.contains_key(&o.symbol) {
            return Err(EngineError::Order { row: None, reason: format!("second order for {}", o.symbol) });
        }
        self.orders.insert(o.symbol.clone(), o);
        Ok(())
    }

    pub fn get(&self, symbol: &str) -> Option<&Order> {
        self.orders.get(symbol)
    }

    pub fn orders(&self) -> impl Iterator<Item = &Order> {
        self.orders.values()
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// The registered value behind `r`; absent orders and the other side
    /// read as zero.
    pub fn value(&self, r: &ValueRef) -> u64 {
        match self.orders.get(&r.symbol) {
            Some(o) if o.side == r.side => match r.bound {
                Bound::Min => o.min_amount,
                Bound::Max => o.max_amount,
            },
            _ => 0,
        }
    }

    /// The amount on one side, the max bound for ranged orders.
    pub fn amount(&self, symbol: &str, side: Side) -> u64 {
        self.value(&ValueRef::max(symbol, side))
    }

    /// Checks symbols against the universe and amounts against the bit width.
    pub fn validate(&self, universe: &Universe, n: u32) -> Result<(), EngineError> {
        for o in self.orders.values() {
            if !universe.contains(&o.symbol) {
                return Err(EngineError::Order { row: None, reason: format!("unknown symbol {}", o.symbol) });
            }
            if o.max_amount >> n != 0 {
                return Err(EngineError::Order {
                    row: None,
                    reason: format!("{} amount {} needs more than {n} bits", o.symbol, o.max_amount),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    symbol: String,
    side: String,
    min_qty: u64,
    max_qty: u64,
}

/// Reads `symbol,side,min_qty,max_qty` rows (header required). Row numbers in
/// errors count the header as row 1.
pub fn parse_orders(text: &str, universe: &Universe, n: u32) -> Result<Book, EngineError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let mut book = Book::new();
    for (i, rec) in rdr.deserialize::<CsvRow>().enumerate() {
        let row = i + 2;
        let err = |reason: String| EngineError::Order { row: Some(row), reason };
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let side: Side = rec.side.parse().map_err(err)?;
        if !universe.contains(&rec.symbol) {
            return Err(err(format!("unknown symbol {}", rec.symbol)));
        }
        if rec.min_qty > rec.max_qty {
            return Err(err(format!("min_qty {} exceeds max_qty {}", rec.min_qty, rec.max_qty)));
        }
        if rec.max_qty >> n != 0 {
            return Err(err(format!("max_qty {} needs more than {n} bits", rec.max_qty)));
        }
        book.insert(Order::ranged(rec.symbol, side, rec.min_qty, rec.max_qty)).map_err(|e| match e {
            EngineError::Order { reason, .. } => err(reason),
            other => other,
        })?;
    }
    Ok(book)
}

pub fn load_orders(path: &Path, universe: &Universe, n: u32) -> Result<Book, EngineError> {
    let text = std::fs::read_to_string(path).map_err(|e| EngineError::Io(format!("{}: {e}", path.display())))?;
    parse_orders(&text, universe, n)
}
