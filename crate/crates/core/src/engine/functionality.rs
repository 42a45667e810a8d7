//! The matching functionalities evaluated in the clear.
//!
//! These are the reference semantics: the distributed drivers in
//! [`super::drivers`] must produce the same records from the same inputs
//! and ordering seed.
//!
//! Iteration order everywhere: trade direction outer (first party buying,
//! then first party selling), symbols in universe order inner.

use std::collections::{BTreeMap, VecDeque};

use super::log::{MatchRecord, PassTag};
use super::order::{Book, Universe};
use crate::mpc::{Bound, Side, ValueRef};
use crate::net::{PartyId, SERVER};

/// (side of the first party, side of the second party)
pub const DIRECTIONS: [(Side, Side); 2] = [(Side::Buy, Side::Sell), (Side::Sell, Side::Buy)];

/// Residual amounts keyed by (party, symbol, side).
pub type Residuals = BTreeMap<(PartyId, String, Side), u64>;

/// Bank against each client in turn; the bank's residual carries over
/// between clients, the clients' amounts do not change.
pub fn b2c_match(universe: &Universe, bank: &Book, clients: &[(PartyId, Book)]) -> Vec<MatchRecord> {
    let mut bank_res: BTreeMap<(String, Side), u64> = BTreeMap::new();
    let mut out = Vec::new();
    for (id, book) in clients {
        for (bank_side, client_side) in DIRECTIONS {
            for s in universe.symbols() {
                let res = bank_res.entry((s.clone(), bank_side)).or_insert_with(|| bank.amount(s, bank_side));
                let q = (*res).min(book.amount(s, client_side));
                if q > 0 {
                    *res -= q;
                    out.push(MatchRecord::new(s, SERVER, bank_side, *id, q, PassTag::Plain));
                }
            }
        }
    }
    out
}

/// Two clients, every opposite-side pair of orders.
pub fn c2c_match(universe: &Universe, a: (PartyId, &Book), b: (PartyId, &Book)) -> Vec<MatchRecord> {
    let mut out = Vec::new();
    for (sa, sb) in DIRECTIONS {
        for s in universe.symbols() {
            let q = a.1.amount(s, sa).min(b.1.amount(s, sb));
            if q > 0 {
                out.push(MatchRecord::new(s, a.0, sa, b.0, q, PassTag::Plain));
            }
        }
    }
    out
}

/// Multi-client matching over a given pair ordering, decrementing residuals.
pub fn mc_process(
    universe: &Universe,
    books: &[(PartyId, Book)],
    order: &[(PartyId, PartyId)],
) -> (Vec<MatchRecord>, Residuals) {
    let mut res = Residuals::new();
    for (id, book) in books {
        for s in universe.symbols() {
            for side in [Side::Buy, Side::Sell] {
                res.insert((*id, s.clone(), side), book.amount(s, side));
            }
        }
    }
    let mut out = Vec::new();
    for &(i, j) in order {
        for (si, sj) in DIRECTIONS {
            for s in universe.symbols() {
                let ki = (i, s.clone(), si);
                let kj = (j, s.clone(), sj);
                let q = res[&ki].min(res[&kj]);
                if q > 0 {
                    *res.get_mut(&ki).unwrap() -= q;
                    *res.get_mut(&kj).unwrap() -= q;
                    out.push(MatchRecord::new(s, i, si, j, q, PassTag::Plain));
                }
            }
        }
    }
    (out, res)
}

/// One executed step of queue processing: (long party, short party, quantity).
pub type QueueFill = (PartyId, PartyId, u64);

/// FIFO matching of the fronts until either queue empties. Entries whose
/// residual reaches zero leave their queue; zero-quantity fronts leave
/// without a fill.
pub fn queue_process(long: &[(PartyId, u64)], short: &[(PartyId, u64)]) -> (Vec<QueueFill>, Vec<(PartyId, u64)>, Vec<(PartyId, u64)>) {
    let mut l: VecDeque<(PartyId, u64)> = long.iter().copied().collect();
    let mut s: VecDeque<(PartyId, u64)> = short.iter().copied().collect();
    let mut fills = Vec::new();
    while let (Some(&(lp, lv)), Some(&(sp, sv))) = (l.front(), s.front()) {
        let q = lv.min(sv);
        if q > 0 {
            fills.push((lp, sp, q));
        }
        l.front_mut().unwrap().1 -= q;
        s.front_mut().unwrap().1 -= q;
        if lv == q {
            l.pop_front();
        }
        if sv == q {
            s.pop_front();
        }
    }
    (fills, l.into(), s.into())
}

/// Queue processing for every symbol; `clients` is in registration order.
pub fn queue_auction(universe: &Universe, clients: &[(PartyId, Book)]) -> Vec<MatchRecord> {
    let mut out = Vec::new();
    for s in universe.symbols() {
        let side_queue = |side: Side| -> Vec<(PartyId, u64)> {
            clients
                .iter()
                .filter_map(|(id, b)| b.get(s).filter(|o| o.side == side).map(|o| (*id, o.max_amount)))
                .collect()
        };
        let (fills, _, _) = queue_process(&side_queue(Side::Buy), &side_queue(Side::Sell));
        for (lp, sp, q) in fills {
            out.push(MatchRecord::new(s, lp, Side::Buy, sp, q, PassTag::Plain));
        }
    }
    out
}

/// Bank inventory against ranged client orders in two greedy passes over
/// one client ordering. Pass 1 fills up to each MinAmount; pass 2 fills up
/// to each client's remaining capacity MaxAmount - (already matched).
pub fn range_b2c(universe: &Universe, bank: &Book, clients: &[(PartyId, Book)], order: &[PartyId]) -> Vec<MatchRecord> {
    let books: BTreeMap<PartyId, &Book> = clients.iter().map(|(id, b)| (*id, b)).collect();
    let mut bank_res: BTreeMap<(String, Side), u64> = BTreeMap::new();
    let mut matched: BTreeMap<(PartyId, String, Side), u64> = BTreeMap::new();
    let mut out = Vec::new();
    for (pass, bound) in [(PassTag::MinPass, Bound::Min), (PassTag::MaxPass, Bound::Max)] {
        for id in order {
            let book = books[id];
            for (bank_side, client_side) in DIRECTIONS {
                for s in universe.symbols() {
                    let res = bank_res.entry((s.clone(), bank_side)).or_insert_with(|| bank.amount(s, bank_side));
                    let done = matched.entry((*id, s.clone(), client_side)).or_insert(0);
                    let want = book.value(&ValueRef::new(s.clone(), client_side, bound));
                    let cap = match bound {
                        Bound::Min => want,
                        Bound::Max => want - *done,
                    };
                    let q = (*res).min(cap);
                    if q > 0 {
                        *res -= q;
                        *done += q;
                        out.push(MatchRecord::new(s, SERVER, bank_side, *id, q, pass));
                    }
                }
            }
        }
    }
    out
}

/// Range matching of one buy range against one sell range; returns the
/// executed quantities in order, zeros omitted.
///
/// 1. If Lmin ≤ Smax and Smin ≤ Lmax, execute Lmin; otherwise nothing.
/// 2. With both ranges reduced by it, execute the residual Smin when
///    Smin' ≤ Lmax'.
/// 3. Execute the minimum of the residual maxima.
pub fn range_c2c(buy: (u64, u64), sell: (u64, u64)) -> Vec<(PassTag, u64)> {
    let (lmin, mut lmax) = buy;
    let (mut smin, mut smax) = sell;
    if !(lmin <= smax && smin <= lmax) {
        return Vec::new();
    }
    let mut steps = vec![(PassTag::MinPass, lmin)];
    lmax -= lmin;
    smax -= lmin;
    smin = smin.saturating_sub(lmin);
    if smin <= lmax {
        steps.push((PassTag::MinPass, smin));
        lmax -= smin;
        smax -= smin;
    }
    steps.push((PassTag::MaxPass, lmax.min(smax)));
    steps.retain(|s| s.1 > 0);
    steps
}

/// Range matching between two clients over every symbol and direction.
pub fn range_c2c_books(universe: &Universe, a: (PartyId, &Book), b: (PartyId, &Book)) -> Vec<MatchRecord> {
    let range = |book: &Book, s: &str, side: Side| {
        (book.value(&ValueRef::new(s, side, Bound::Min)), book.value(&ValueRef::new(s, side, Bound::Max)))
    };
    let mut out = Vec::new();
    for (sa, sb) in DIRECTIONS {
        for s in universe.symbols() {
            let (buy, sell) = if sa == Side::Buy {
                (range(a.1, s, sa), range(b.1, s, sb))
            } else {
                (range(b.1, s, sb), range(a.1, s, sa))
            };
            for (pass, q) in range_c2c(buy, sell) {
                out.push(MatchRecord::new(s, a.0, sa, b.0, q, pass));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::order::Order;
    use proptest::prelude::*;

    fn uni(n: usize) -> Universe {
        Universe::synthetic(n)
    }

    #[test]
    fn b2c_min_semantics() {
        let u = Universe::new(["X"]).unwrap();
        let bank = Book::from_orders([Order::new("X", Side::Sell, 100)]).unwrap();
        let client = Book::from_orders([Order::new("X", Side::Buy, 60)]).unwrap();
        let recs = b2c_match(&u, &bank, &[(5, client)]);
        assert_eq!(recs, vec![MatchRecord::new("X", SERVER, Side::Sell, 5, 60, PassTag::Plain)]);
        // same side or absent: no match either way
        let same = Book::from_orders([Order::new("X", Side::Sell, 60)]).unwrap();
        assert!(b2c_match(&u, &bank, &[(5, same)]).is_empty());
        assert!(b2c_match(&u, &bank, &[(5, Book::new())]).is_empty());
    }

    #[test]
    fn b2c_brute_force_small() {
        // three symbols, all side combinations, against a direct double loop
        let u = uni(3);
        let sides = [None, Some(Side::Buy), Some(Side::Sell)];
        for bs in 0..27 {
            for cs in 0..27 {
                let mk = |code: usize, base: u64| {
                    let mut orders = Vec::new();
                    for (k, s) in u.symbols().iter().enumerate() {
                        if let Some(side) = sides[(code / 3usize.pow(k as u32)) % 3] {
                            orders.push(Order::new(s.clone(), side, base + k as u64));
                        }
                    }
                    Book::from_orders(orders).unwrap()
                };
                let bank = mk(bs, 10);
                let client = mk(cs, 4);
                let got = b2c_match(&u, &bank, &[(1, client.clone())]);
                let mut want = Vec::new();
                for bo in bank.orders() {
                    for co in client.orders() {
                        if bo.symbol == co.symbol && bo.side != co.side {
                            want.push((bo.symbol.clone(), bo.max_amount.min(co.max_amount)));
                        }
                    }
                }
                let mut got: Vec<_> = got.iter().map(|r| (r.symbol.clone(), r.quantity)).collect();
                got.sort();
                want.sort();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn c2c_examples() {
        let u = Universe::new(["X"]).unwrap();
        let p1 = Book::from_orders([Order::new("X", Side::Buy, 100)]).unwrap();
        let p2 = Book::from_orders([Order::new("X", Side::Sell, 200)]).unwrap();
        assert_eq!(c2c_match(&u, (1, &p1), (2, &p2))[0].quantity, 100);
        let p3 = Book::from_orders([Order::new("X", Side::Buy, 50)]).unwrap();
        assert!(c2c_match(&u, (1, &p1), (3, &p3)).is_empty());
    }

    #[test]
    fn mc_total_independent_of_order() {
        let u = Universe::new(["X"]).unwrap();
        let books = vec![
            (1, Book::from_orders([Order::new("X", Side::Buy, 100)]).unwrap()),
            (2, Book::from_orders([Order::new("X", Side::Sell, 40)]).unwrap()),
            (3, Book::from_orders([Order::new("X", Side::Sell, 70)]).unwrap()),
        ];
        let pairs = [(1, 2), (1, 3), (2, 3)];
        // every ordering of the three pairs
        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let order: Vec<_> = perm.iter().map(|&k| pairs[k]).collect();
            let (recs, res) = mc_process(&u, &books, &order);
            let a_total: u64 = recs.iter().map(|r| r.traded(1, "X", Side::Buy)).sum();
            assert_eq!(a_total, 100);
            assert_eq!(res[&(1, "X".to_string(), Side::Buy)], 0);
            assert_eq!(res[&(2, "X".into(), Side::Sell)] + res[&(3, "X".into(), Side::Sell)], 10);
        }
        let (recs, _) = mc_process(&u, &books[..1], &[]);
        assert!(recs.is_empty());
    }

    #[test]
    fn queue_example() {
        let (fills, l, s) = queue_process(&[(1, 10), (2, 5)], &[(3, 7), (4, 7)]);
        assert_eq!(fills, vec![(1, 3, 7), (1, 4, 3), (2, 4, 4)]);
        assert_eq!(l, vec![(2, 1)]);
        assert!(s.is_empty());
        let (fills, l, _) = queue_process(&[(1, 10)], &[]);
        assert!(fills.is_empty());
        assert_eq!(l, vec![(1, 10)]);
    }

    #[test]
    fn range_b2c_example() {
        let u = Universe::new(["X"]).unwrap();
        let bank = Book::from_orders([Order::new("X", Side::Sell, 100)]).unwrap();
        let clients = vec![
            (1, Book::from_orders([Order::ranged("X", Side::Buy, 60, 90)]).unwrap()),
            (2, Book::from_orders([Order::ranged("X", Side::Buy, 50, 80)]).unwrap()),
        ];
        let recs = range_b2c(&u, &bank, &clients, &[1, 2]);
        let q: Vec<_> = recs.iter().map(|r| (r.parties[1], r.quantity, r.pass)).collect();
        assert_eq!(q, vec![(1, 60, PassTag::MinPass), (2, 40, PassTag::MinPass)]);
        let empty = Book::from_orders([Order::new("X", Side::Sell, 0)]).unwrap();
        assert!(range_b2c(&u, &empty, &clients, &[1, 2]).is_empty());
    }

    #[test]
    fn range_c2c_examples() {
        let steps = range_c2c((50, 100), (25, 75));
        assert_eq!(steps[0], (PassTag::MinPass, 50));
        assert_eq!(steps.iter().map(|s| s.1).sum::<u64>(), 75);
        assert!(range_c2c((80, 100), (10, 20)).is_empty());
        // seller minimum above buyer minimum: step 2 tops up to it
        assert_eq!(range_c2c((10, 100), (50, 75)), vec![(PassTag::MinPass, 10), (PassTag::MinPass, 40), (PassTag::MaxPass, 25)]);
    }

    proptest! {
        #[test]
        fn range_c2c_total_is_intersection_top(a in 0u64..200, b in 0u64..200, c in 0u64..200, d in 0u64..200) {
            let buy = (a.min(b), a.max(b));
            let sell = (c.min(d), c.max(d));
            let total: u64 = range_c2c(buy, sell).iter().map(|s| s.1).sum();
            let intersects = buy.0.max(sell.0) <= buy.1.min(sell.1);
            prop_assert_eq!(total, if intersects { buy.1.min(sell.1) } else { 0 });
        }

        #[test]
        fn range_b2c_respects_bounds(
            bank in 0u64..300,
            ranges in proptest::collection::vec((0u64..100, 0u64..100), 1..6),
        ) {
            let u = Universe::new(["X"]).unwrap();
            let bank_book = Book::from_orders([Order::new("X", Side::Sell, bank)]).unwrap();
            let clients: Vec<(PartyId, Book)> = ranges
                .iter()
                .enumerate()
                .map(|(k, &(x, y))| (k as PartyId + 1, Book::from_orders([Order::ranged("X", Side::Buy, x.min(y), x.max(y))]).unwrap()))
                .collect();
            let order: Vec<PartyId> = clients.iter().map(|c| c.0).collect();
            let recs = range_b2c(&u, &bank_book, &clients, &order);
            let total: u64 = recs.iter().map(|r| r.quantity).sum();
            prop_assert!(total <= bank);
            for (id, book) in &clients {
                let got: u64 = recs.iter().map(|r| r.traded(*id, "X", Side::Buy)).sum();
                let o = book.get("X").unwrap();
                prop_assert!(got <= o.max_amount);
                if got < o.min_amount {
                    prop_assert_eq!(total, bank);
                }
            }
        }

        #[test]
        fn mc_conserves(amounts in proptest::collection::vec((0u64..50, any::<bool>()), 2..6)) {
            let u = Universe::new(["X"]).unwrap();
            let books: Vec<(PartyId, Book)> = amounts
                .iter()
                .enumerate()
                .map(|(k, &(q, buy))| (k as PartyId + 1, Book::from_orders([Order::new("X", if buy { Side::Buy } else { Side::Sell }, q)]).unwrap()))
                .collect();
            let ids: Vec<PartyId> = books.iter().map(|b| b.0).collect();
            let mut order = Vec::new();
            for i in 0..ids.len() {
                for j in i + 1..ids.len() {
                    order.push((ids[i], ids[j]));
                }
            }
            let (recs, res) = mc_process(&u, &books, &order);
            for (id, book) in &books {
                for side in [Side::Buy, Side::Sell] {
                    let traded: u64 = recs.iter().map(|r| r.traded(*id, "X", side)).sum();
                    prop_assert_eq!(traded + res[&(*id, "X".to_string(), side)], book.amount("X", side));
                }
            }
        }
    }
}
