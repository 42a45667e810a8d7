//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines appear in order and
//! uncaptured; the process exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use primematch_core::algebra::{elgamal_encrypt, Ciphertext, Commitment, ElGamalKeypair, PedersenParams, PublicKey};
use primematch_core::compare::{compare_plain, derive_randomness, ComparisonRandomness, SharedSeed};
use primematch_core::engine::bench::{run_bench, BenchConfig, REFERENCE};
use primematch_core::engine::drivers::{run_auction, run_range_b2c};
use primematch_core::engine::functionality::{c2c_match, mc_process, range_b2c, range_c2c, range_c2c_books};
use primematch_core::engine::localsim::{run_localsim, run_localsim_with, SimClient, SimConfig, SimOutcome};
use primematch_core::engine::pairing::{auction_seed, client_order, pair_order};
use primematch_core::engine::server::{AuctionServer, ServerSettings};
use primematch_core::engine::agent::Holdings;
use primematch_core::engine::{
    Book, Functionality, LogEntry, MatchLog, MatchRecord, MinOutcome, Order, PassTag, PlainBackend, SecureBackend, Universe,
};
use primematch_core::mpc::b2c::{BankB2c, ClientB2c};
use primematch_core::mpc::malicious::{ClientInput, ClientTamper, MalClient, MalServer, ServerTamper, ShareReport};
use primematch_core::mpc::messages::{kind, AdjustItem};
use primematch_core::mpc::semi::{semi_decide, semi_min, SemiClient};
use primematch_core::mpc::{Bound, InstanceCtx, ProtocolError, SecurityMode, Side, ValueRef};
use primematch_core::net::{CorruptFrame, PartyId, RelayTamper, ReplayFrame, RELAY, SERVER};
use primematch_core::wire::{Decode, Encode, Reader};
use primematch_core::zkp::{
    bit_prove, bit_prove_unchecked, bit_verify, comeq_prove, comeq_prove_unchecked, comeq_verify, crosseq_prove,
    crosseq_verify, dleq_prove, dleq_verify, onemany_prove, onemany_prove_generic, onemany_verify, onemany_verify_generic,
    Transcript,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("comparison correctness", criterion_1),
        ("zero-index distribution", criterion_2),
        ("parallel-run coherence", criterion_3),
        ("malicious tamper suite", criterion_4),
        ("protocol/oracle equivalence", criterion_5),
        ("range client-to-client example", criterion_6),
        ("engine coherence", criterion_7),
        ("throughput and O(n) traffic", criterion_8),
        ("zero-knowledge suites", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}; {secs:.1}s)", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({detail}; {secs:.1}s)", k + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn fresh_randomness(rng: &mut ChaCha20Rng, n: u32) -> ComparisonRandomness {
    derive_randomness(&SharedSeed(rng.gen()), n as usize)
}

/// Both clients' d shares from the semi-honest share run.
fn semi_shares(v0: u64, v1: u64, n: u32, rand: &ComparisonRandomness, rng: &mut ChaCha20Rng) -> [(Vec<Scalar>, Vec<Scalar>); 2] {
    let (c0, h0) = SemiClient::start(n, 0, 0, v0, rng).unwrap();
    let (c1, h1) = SemiClient::start(n, 1, 0, v1, rng).unwrap();
    [c0.receive(&h1, rand).unwrap(), c1.receive(&h0, rand).unwrap()]
}

fn add(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn encodings(xs: &[Scalar]) -> Vec<[u8; 32]> {
    xs.iter().map(|x| x.to_bytes()).collect()
}

fn compressed(xs: &[RistrettoPoint]) -> Vec<[u8; 32]> {
    xs.iter().map(|p| p.compress().to_bytes()).collect()
}

// 1. Share pipeline exhaustive for n = 2..8, plus 200 randomness draws per
//    pair at n = 5, in under a minute.
fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let run = |n: u32, draws: usize| -> usize {
        (0..1u64 << n)
            .into_par_iter()
            .map(|v0| {
                let mut rng = ChaCha20Rng::seed_from_u64(((n as u64) << 32) ^ v0 ^ ((draws as u64) << 48));
                let mut bad = 0;
                for v1 in 0..1u64 << n {
                    for _ in 0..draws {
                        let rand = fresh_randomness(&mut rng, n);
                        let [r0, r1] = semi_shares(v0, v1, n, &rand, &mut rng);
                        if semi_decide(n, 0, [&r0, &r1]).ok() != Some((v0 <= v1, v1 <= v0)) {
                            bad += 1;
                        }
                    }
                }
                bad
            })
            .sum()
    };
    let mut runs = 0usize;
    let mut failures = 0usize;
    for n in 2..=8u32 {
        failures += run(n, 1);
        runs += 1 << (2 * n);
    }
    failures += run(5, 200);
    runs += 1024 * 200;
    let elapsed = t0.elapsed();
    ensure(failures == 0, || format!("{failures} of {runs} runs wrong"))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}, limit 60s"))?;
    Ok(format!("{runs} runs, 0 failures, {:.1}s", elapsed.as_secs_f64()))
}

// 2. Zero-index uniformity over {0..n}, exactly one zero, and no zero in
//    d0 when v0 > v1.
fn criterion_2() -> Outcome {
    const RUNS: usize = 5000;
    let n = 7u32;
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let mut counts = vec![0usize; n as usize + 1];
    for _ in 0..RUNS {
        let a = rng.gen_range(0..1u64 << n);
        let b = rng.gen_range(0..1u64 << n);
        let (v0, v1) = (a.min(b), a.max(b));
        let rand = fresh_randomness(&mut rng, n);
        let [r0, r1] = semi_shares(v0, v1, n, &rand, &mut rng);
        let d0 = add(&r0.0, &r1.0);
        let zeros: Vec<usize> = (0..d0.len()).filter(|&j| d0[j] == Scalar::ZERO).collect();
        ensure(zeros.len() == 1, || format!("v0={v0} v1={v1}: zeros at {zeros:?}"))?;
        counts[zeros[0]] += 1;
    }
    let expected = RUNS as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new(n as f64).unwrap().cdf(stat);
    ensure(p >= 0.001, || format!("chi-square {stat:.2} on {n} dof, p = {p:.5} < 0.001, counts {counts:?}"))?;
    for _ in 0..RUNS {
        let v1 = rng.gen_range(0..(1u64 << n) - 1);
        let v0 = rng.gen_range(v1 + 1..1u64 << n);
        let rand = fresh_randomness(&mut rng, n);
        let [r0, r1] = semi_shares(v0, v1, n, &rand, &mut rng);
        ensure(add(&r0.0, &r1.0).iter().all(|d| *d != Scalar::ZERO), || format!("v0={v0} > v1={v1} but d0 has a zero"))?;
    }
    Ok(format!("chi-square {stat:.2}, p = {p:.3}, counts {counts:?}; {RUNS} runs with v0 > v1 without a zero"))
}

struct MalPair {
    params: PedersenParams,
    ctx: InstanceCtx,
    inputs: [ClientInput; 2],
    coms: [RistrettoPoint; 2],
}

impl MalPair {
    fn new(v: [u64; 2], instance: u64, rng: &mut ChaCha20Rng) -> Self {
        let params = PedersenParams::standard();
        let inputs = [
            ClientInput { value: v[0], randomness: Scalar::random(rng) },
            ClientInput { value: v[1], randomness: Scalar::random(rng) },
        ];
        let coms = [inputs[0].commitment(&params), inputs[1].commitment(&params)];
        MalPair { params, ctx: InstanceCtx::new(1, 1, 0, instance), inputs, coms }
    }

    fn reports(
        &self,
        n: u32,
        rand: &ComparisonRandomness,
        rng: &mut ChaCha20Rng,
    ) -> Result<([primematch_core::mpc::malicious::MalAwaitVerdict; 2], [ShareReport; 2]), ProtocolError> {
        let (c0, t0) = MalClient::start(&self.params, n, 0, self.ctx, self.coms, self.inputs[0], ClientTamper::None, rng)?;
        let (c1, t1) = MalClient::start(&self.params, n, 1, self.ctx, self.coms, self.inputs[1], ClientTamper::None, rng)?;
        let (w0, r0) = c0.receive(&t1, rand)?;
        let (w1, r1) = c1.receive(&t0, rand)?;
        Ok(([w0, w1], [r0, r1]))
    }

    /// The full malicious flow; returns (bits, the minimum each client learns).
    fn run(&self, n: u32, rng: &mut ChaCha20Rng) -> Result<((bool, bool), [u64; 2]), ProtocolError> {
        let rand = fresh_randomness(rng, n);
        let ([w0, w1], [r0, r1]) = self.reports(n, &rand, rng)?;
        let server = MalServer::new(&self.params, n, self.ctx, self.coms);
        let verdict = server.decide([&r0, &r1], rng)?;
        let waits = [&w0, &w1];
        let won = [waits[0].verdict(verdict.proofs[0].as_ref())?, waits[1].verdict(verdict.proofs[1].as_ref())?];
        let mut reveals = [None, None];
        for p in 0..2 {
            if won[p] {
                let item = waits[p].reveal(rng);
                server.check_reveal(p as u8, &item)?;
                reveals[p] = Some(item);
            }
        }
        let mut mins = [0; 2];
        for p in 0..2 {
            mins[p] = match &reveals[1 - p] {
                _ if won[p] => waits[p].value(),
                Some(item) => waits[p].accept_forward(item)?,
                None => return Err(ProtocolError::NoWinner { instance: self.ctx.instance }),
            };
        }
        Ok(((won[0], won[1]), mins))
    }
}

// 3. Share-run reconstruction equals the plain run, and the commitment run
//    equals Com(d; s) from the share and randomness runs, byte for byte.
fn criterion_3() -> Outcome {
    let n = 31u32;
    let failures: Vec<String> = (0..500u64)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = ChaCha20Rng::seed_from_u64(3_000 + k);
            let v = [rng.gen_range(0..1u64 << n), rng.gen_range(0..1u64 << n)];
            let rand = fresh_randomness(&mut rng, n);
            let plain = compare_plain(v[0], v[1], n, &rand).unwrap();
            let [s0, s1] = semi_shares(v[0], v[1], n, &rand, &mut rng);
            if encodings(&add(&s0.0, &s1.0)) != encodings(&plain.d0) || encodings(&add(&s0.1, &s1.1)) != encodings(&plain.d1) {
                return Some(format!("pair {k}: semi-honest share run differs from the plain run"));
            }
            let pair = MalPair::new(v, k, &mut rng);
            let (_, [r0, r1]) = match pair.reports(n, &rand, &mut rng) {
                Ok(x) => x,
                Err(e) => return Some(format!("pair {k}: {e}")),
            };
            if encodings(&add(&r0.d0, &r1.d0)) != encodings(&plain.d0) || encodings(&add(&r0.d1, &r1.d1)) != encodings(&plain.d1) {
                return Some(format!("pair {k}: malicious share run differs from the plain run"));
            }
            let com = |d: &[Scalar], s: &[Scalar]| -> Vec<RistrettoPoint> {
                d.iter().zip(s).map(|(d, s)| pair.params.commit_point(d, s)).collect()
            };
            let reports = [&r0, &r1];
            for p in 0..2 {
                let (mine, other) = (reports[p], reports[1 - p]);
                if compressed(&com(&mine.d0, &mine.s0)) != compressed(&other.peer_d0)
                    || compressed(&com(&mine.d1, &mine.s1)) != compressed(&other.peer_d1)
                {
                    return Some(format!("pair {k}: commitment run of position {p}'s shares differs from Com(d; s)"));
                }
            }
            let total: Vec<RistrettoPoint> = r0.peer_d0.iter().zip(&r1.peer_d0).map(|(a, b)| a + b).collect();
            if compressed(&com(&plain.d0, &add(&r0.s0, &r1.s0))) != compressed(&total) {
                return Some(format!("pair {k}: summed commitment run differs from Com(d; s)"));
            }
            None
        })
        .collect();
    ensure(failures.is_empty(), || format!("{} failures, first: {}", failures.len(), failures[0]))?;
    Ok("500 pairs at n = 31, encodings identical".into())
}

fn c2c_books() -> (Universe, Vec<(PartyId, Book)>) {
    let u = Universe::new(["AAA", "BBB", "CCC"]).unwrap();
    let books = vec![
        (1, Book::from_orders([Order::new("AAA", Side::Buy, 10), Order::new("BBB", Side::Sell, 7), Order::new("CCC", Side::Buy, 3)]).unwrap()),
        (2, Book::from_orders([Order::new("AAA", Side::Sell, 4), Order::new("BBB", Side::Buy, 9), Order::new("CCC", Side::Sell, 2)]).unwrap()),
    ];
    (u, books)
}

fn sim(
    f: Functionality,
    mode: SecurityMode,
    n: u32,
    u: &Universe,
    books: &[(PartyId, Book)],
    seed: u64,
    tamper: impl FnOnce(&mut SimConfig),
) -> SimOutcome {
    let mut settings = ServerSettings::new(f, mode, n, u.clone(), seed);
    settings.register_window = Duration::from_secs(20);
    let clients = books.iter().map(|(id, b)| SimClient::new(*id, b.clone())).collect();
    let mut cfg = SimConfig::new(settings, clients);
    cfg.timeout = Duration::from_secs(20);
    tamper(&mut cfg);
    run_localsim(cfg).expect("localsim runs")
}

// 4. Deviation catalogue through the full stack: every deviation aborts the
//    pair with the deviating party named; honest runs all complete.
fn criterion_4() -> Outcome {
    let (u, books) = c2c_books();
    let oracle = c2c_match(&u, (1, &books[0].1), (2, &books[1].1));
    type Setup = Box<dyn Fn(&mut SimConfig)>;
    let client = |id: PartyId, t: ClientTamper| -> Setup {
        Box::new(move |cfg: &mut SimConfig| cfg.clients.iter_mut().filter(|c| c.id == id).for_each(|c| c.tamper = t))
    };
    let relay = |make: fn() -> Box<dyn RelayTamper>| -> Setup { Box::new(move |cfg: &mut SimConfig| cfg.relay_tamper = Some(make())) };
    let mut cases: Vec<(String, Setup, PartyId)> = Vec::new();
    for id in [1, 2] {
        cases.push((format!("share flip by {id}"), client(id, ClientTamper::ShareFlip(1)), id));
        cases.push((format!("non-bit by {id}"), client(id, ClientTamper::NonBit), id));
        cases.push((format!("ComEq mismatch by {id}"), client(id, ClientTamper::ComEqMismatch), id));
    }
    cases.push(("forged OneMany".into(), Box::new(|cfg: &mut SimConfig| cfg.settings.tamper = ServerTamper::ForgeOneMany), SERVER));
    cases.push(("replayed envelope".into(), relay(|| Box::new(ReplayFrame::new(kind::Sealed, 3))), RELAY));
    cases.push(("handshake tamper".into(), relay(|| Box::new(CorruptFrame::new(kind::HandshakeShare, 1, 0))), RELAY));

    let mut detected = 0;
    let mut total = 0;
    for (name, setup, culprit) in &cases {
        for seed in 1..=3 {
            total += 1;
            let out = sim(Functionality::C2c, SecurityMode::Malicious, 7, &u, &books, seed, |cfg| setup(cfg));
            let aborts = out.log.aborts();
            let first = aborts.first().ok_or_else(|| format!("{name} (seed {seed}): not detected"))?;
            ensure(first.blame == Some(*culprit), || {
                format!("{name} (seed {seed}): blamed {:?}, expected {culprit}: {}", first.blame, first.reason)
            })?;
            ensure(out.log.records().iter().all(|r| oracle.contains(r)), || format!("{name} (seed {seed}): wrong output released"))?;
            detected += 1;
        }
    }
    let honest = 10;
    for seed in 0..honest {
        let out = sim(Functionality::C2c, SecurityMode::Malicious, 7, &u, &books, 100 + seed, |_| {});
        ensure(out.log.aborts().is_empty(), || format!("honest seed {seed} aborted: {:?}", out.log.aborts()))?;
        ensure(out.log.records() == oracle, || format!("honest seed {seed} differs from the oracle"))?;
    }
    Ok(format!("{detected}/{total} deviations detected and attributed; {honest}/{honest} honest runs accepted"))
}

// 5. Semi-honest and malicious at n = 31 over 200 random pairs, B2C
//    exhaustive at n = 4, all against the plain min/comparison oracle.
fn criterion_5() -> Outcome {
    let n = 31u32;
    let pairs: Vec<[u64; 2]> = {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        (0..200)
            .map(|k| {
                let a = rng.gen_range(0..1u64 << n);
                // every tenth pair is a tie
                if k % 10 == 0 {
                    [a, a]
                } else {
                    [a, rng.gen_range(0..1u64 << n)]
                }
            })
            .collect()
    };
    let semi_bad: Vec<String> = pairs
        .par_iter()
        .enumerate()
        .filter_map(|(k, &[v0, v1])| {
            let mut rng = ChaCha20Rng::seed_from_u64(50_000 + k as u64);
            let rand = fresh_randomness(&mut rng, n);
            let [r0, r1] = semi_shares(v0, v1, n, &rand, &mut rng);
            let bits = semi_decide(n, 0, [&r0, &r1]).ok()?;
            let min = semi_min(bits, [bits.0.then_some(v0), bits.1.then_some(v1)], 0).ok();
            (bits != (v0 <= v1, v1 <= v0) || min != Some(v0.min(v1))).then(|| format!("semi-honest ({v0}, {v1})"))
        })
        .collect();
    ensure(semi_bad.is_empty(), || format!("{} wrong, first {}", semi_bad.len(), semi_bad[0]))?;
    let mal_bad: Vec<String> = pairs
        .par_iter()
        .enumerate()
        .filter_map(|(k, &v)| {
            let mut rng = ChaCha20Rng::seed_from_u64(60_000 + k as u64);
            let pair = MalPair::new(v, k as u64, &mut rng);
            match pair.run(n, &mut rng) {
                Ok((bits, mins)) if bits == (v[0] <= v[1], v[1] <= v[0]) && mins == [v[0].min(v[1]); 2] => None,
                Ok(got) => Some(format!("malicious {v:?}: got {got:?}")),
                Err(e) => Some(format!("malicious {v:?}: {e}")),
            }
        })
        .collect();
    ensure(mal_bad.is_empty(), || format!("{} wrong, first {}", mal_bad.len(), mal_bad[0]))?;

    let n = 4u32;
    let params = PedersenParams::standard();
    let b2c_bad: Vec<String> = (0..16u64)
        .into_par_iter()
        .flat_map_iter(|v0| (0..16u64).map(move |v1| (v0, v1)))
        .filter_map(|(v0, v1)| {
            let mut rng = ChaCha20Rng::seed_from_u64(v0 * 16 + v1);
            let kp = ElGamalKeypair::generate(&mut rng);
            let ctx = InstanceCtx::new(1, 1, 0, v0 * 16 + v1);
            let run = || -> Result<((bool, bool), u64, u64), ProtocolError> {
                let mut rng = rng.clone();
                let (bank, offer) = BankB2c::offer(&params, &kp, n, ctx, v0, &mut rng)?;
                let (client, resp) = ClientB2c::respond(&params, kp.pk, n, ctx, v1, &offer, &mut rng)?;
                let (bits, verdict) = bank.decide(&resp, &mut rng)?;
                let (u, client_min) = client.finish(&verdict)?;
                let bank_min = if u == 0 { bank.value() } else { bank.accept_reveal(client_min)? };
                Ok((bits, bank_min, client_min))
            };
            match run() {
                Ok((bits, bm, cm)) if bits == (v0 <= v1, v1 <= v0) && bm == v0.min(v1) && cm == v0.min(v1) => None,
                Ok(got) => Some(format!("b2c ({v0}, {v1}): got {got:?}")),
                Err(e) => Some(format!("b2c ({v0}, {v1}): {e}")),
            }
        })
        .collect();
    ensure(b2c_bad.is_empty(), || format!("{} wrong, first {}", b2c_bad.len(), b2c_bad[0]))?;
    Ok("semi-honest 200/200 and malicious 200/200 at n = 31; B2C 256/256 at n = 4".into())
}

// 6. Buy [50, 100] against sell [25, 75]: first execution 50, total 75,
//    through the functionality and through the full protocol stack.
fn criterion_6() -> Outcome {
    let steps = range_c2c((50, 100), (25, 75));
    ensure(steps.first() == Some(&(PassTag::MinPass, 50)), || format!("functionality steps {steps:?}"))?;
    ensure(steps.iter().map(|s| s.1).sum::<u64>() == 75, || format!("functionality steps {steps:?}"))?;
    let u = Universe::new(["X"]).unwrap();
    let books = vec![
        (1, Book::from_orders([Order::ranged("X", Side::Buy, 50, 100)]).unwrap()),
        (2, Book::from_orders([Order::ranged("X", Side::Sell, 25, 75)]).unwrap()),
    ];
    let oracle = range_c2c_books(&u, (1, &books[0].1), (2, &books[1].1));
    for mode in [SecurityMode::SemiHonest, SecurityMode::Malicious] {
        let out = sim(Functionality::RangeC2c, mode, 7, &u, &books, 6, |_| {});
        let recs = out.log.records();
        ensure(out.log.aborts().is_empty(), || format!("{mode}: aborted {:?}", out.log.aborts()))?;
        ensure(recs == oracle, || format!("{mode}: {recs:?} differs from {oracle:?}"))?;
        ensure(recs.first().map(|r| r.quantity) == Some(50), || format!("{mode}: first execution {:?}", recs.first()))?;
        let total: u64 = recs.iter().map(|r| r.quantity).sum();
        ensure(total == 75, || format!("{mode}: total {total}"))?;
    }
    Ok(format!("steps {:?}, total 75 in semi-honest and malicious runs", steps.iter().map(|s| s.1).collect::<Vec<_>>()))
}

/// Forwards to the server and mirrors every step on plain values; before
/// each pair and at the end, every server-held commitment must open to the
/// mirrored residual under the client's own randomness.
struct Coherence<'a> {
    srv: &'a mut AuctionServer,
    mirror: PlainBackend,
    holdings: &'a BTreeMap<PartyId, Holdings>,
    refs: Vec<ValueRef>,
    params: PedersenParams,
    checks: usize,
    problems: Vec<String>,
}

impl Coherence<'_> {
    fn check_all(&mut self) {
        for (&c, h) in self.holdings {
            let held = h.lock().unwrap();
            for r in &self.refs {
                let residual = self.mirror.value(c, r);
                let opened = held.get(r).map(|i| self.params.commit_point(&Scalar::from(residual), &i.randomness));
                if opened.is_none() || opened != self.srv.commitment(c, r) {
                    self.problems.push(format!("party {c} {} {}: commitment does not open to {residual}", r.symbol, r.side.as_str()));
                }
                self.checks += 1;
            }
        }
    }
}

impl SecureBackend for Coherence<'_> {
    fn pair_min(&mut self, a: PartyId, b: PartyId, refs: &[(ValueRef, ValueRef)]) -> Result<Vec<MinOutcome>, ProtocolError> {
        self.check_all();
        let got = self.srv.pair_min(a, b, refs)?;
        let want = self.mirror.pair_min(a, b, refs)?;
        if got != want {
            self.problems.push(format!("pair ({a}, {b}): outcomes differ from plain values"));
        }
        Ok(got)
    }
    fn pair_compare(&mut self, a: PartyId, b: PartyId, refs: &[(ValueRef, ValueRef)]) -> Result<Vec<(bool, bool)>, ProtocolError> {
        self.srv.pair_compare(a, b, refs)
    }
    fn open(&mut self, client: PartyId, refs: &[ValueRef]) -> Result<Vec<u64>, ProtocolError> {
        self.srv.open(client, refs)
    }
    fn adjust(&mut self, client: PartyId, items: &[AdjustItem]) -> Result<(), ProtocolError> {
        self.srv.adjust(client, items)?;
        self.mirror.adjust(client, items)
    }
    fn bank_min(&mut self, client: PartyId, items: &[(u64, ValueRef)]) -> Result<Vec<u64>, ProtocolError> {
        self.srv.bank_min(client, items)
    }
}

fn random_books(rng: &mut ChaCha20Rng, u: &Universe, clients: usize, max: u64, density: f64) -> Vec<(PartyId, Book)> {
    (1..=clients as PartyId)
        .map(|id| {
            let mut orders = Vec::new();
            for s in u.symbols() {
                if rng.gen_bool(density) {
                    let side = if rng.gen() { Side::Buy } else { Side::Sell };
                    orders.push(Order::new(s.clone(), side, rng.gen_range(0..=max)));
                }
            }
            (id, Book::from_orders(orders).unwrap())
        })
        .collect()
}

/// Queue fills from cumulative positions: the long order covering units
/// [a, b) and the short order covering [c, d) trade their overlap.
fn fifo_by_intervals(long: &[(PartyId, u64)], short: &[(PartyId, u64)]) -> Vec<(PartyId, PartyId, u64)> {
    let spans = |q: &[(PartyId, u64)]| -> Vec<(PartyId, u64, u64)> {
        let mut at = 0;
        q.iter()
            .map(|&(p, v)| {
                at += v;
                (p, at - v, at)
            })
            .collect()
    };
    let mut fills = Vec::new();
    for &(lp, a, b) in &spans(long) {
        for &(sp, c, d) in &spans(short) {
            let (lo, hi) = (a.max(c), b.min(d));
            if hi > lo {
                fills.push((lo, lp, sp, hi - lo));
            }
        }
    }
    fills.sort();
    fills.into_iter().map(|(_, l, s, q)| (l, s, q)).collect()
}

fn queue_oracle(u: &Universe, books: &[(PartyId, Book)]) -> BTreeMap<String, Vec<(PartyId, PartyId, u64)>> {
    u.symbols()
        .iter()
        .map(|s| {
            let side = |side: Side| -> Vec<(PartyId, u64)> {
                books.iter().filter_map(|(id, b)| b.get(s).filter(|o| o.side == side).map(|o| (*id, o.max_amount))).collect()
            };
            (s.clone(), fifo_by_intervals(&side(Side::Buy), &side(Side::Sell)))
        })
        .collect()
}

fn queue_fills(u: &Universe, recs: &[MatchRecord]) -> BTreeMap<String, Vec<(PartyId, PartyId, u64)>> {
    u.symbols()
        .iter()
        .map(|s| {
            let fills = recs.iter().filter(|r| &r.symbol == s).map(|r| (r.parties[0], r.parties[1], r.quantity)).collect();
            (s.clone(), fills)
        })
        .collect()
}

fn register_plain(backend: &mut PlainBackend, u: &Universe, books: &[(PartyId, Book)]) {
    for (id, b) in books {
        backend.register(*id, u.value_refs().into_iter().map(|r| (r.clone(), b.value(&r))));
    }
}

// 7. Multi-client commitments track residuals after every pair; queue processing
//    equals an interval-overlap FIFO oracle; range B2C respects the
//    MinAmount/MaxAmount invariants.
fn criterion_7() -> Outcome {
    // (a) 10 clients, 20 symbols, malicious
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let u = Universe::synthetic(20);
    let books = random_books(&mut rng, &u, 10, 127, 0.6);
    let mut settings = ServerSettings::new(Functionality::Mc, SecurityMode::Malicious, 7, u.clone(), 77);
    settings.register_window = Duration::from_secs(30);
    let clients = books.iter().map(|(id, b)| SimClient::new(*id, b.clone())).collect();
    let mut cfg = SimConfig::new(settings, clients);
    cfg.timeout = Duration::from_secs(30);
    let mut summary = (0usize, Vec::new());
    let out = run_localsim_with(cfg, |srv, holdings| {
        srv.register_phase()?;
        let parts = srv.plan_parts();
        let mut log = srv.header();
        let mut mirror = PlainBackend::new();
        register_plain(&mut mirror, &u, &books);
        let mut chk = Coherence {
            srv,
            mirror,
            holdings,
            refs: u.value_refs(),
            params: PedersenParams::standard(),
            checks: 0,
            problems: Vec::new(),
        };
        run_auction(&parts.plan(), &mut chk, &mut log)?;
        chk.check_all();
        summary = (chk.checks, chk.problems);
        chk.srv.finish(&mut log);
        Ok(log)
    })
    .map_err(|e| e.to_string())?;
    let (checks, problems) = summary;
    ensure(problems.is_empty(), || format!("{} incoherent commitments, first: {}", problems.len(), problems[0]))?;
    ensure(out.log.aborts().is_empty(), || format!("aborts: {:?}", out.log.aborts()))?;
    let ids: Vec<PartyId> = books.iter().map(|b| b.0).collect();
    let pairs = pair_order(&auction_seed(77), &ids);
    let (oracle, _) = mc_process(&u, &books, &pairs);
    ensure(out.log.records() == oracle, || "multi-client records differ from the functionality".into())?;

    // (b) queue: the protocol stack on one instance, plain values on many
    let mut rng = ChaCha20Rng::seed_from_u64(70);
    let qu = Universe::synthetic(5);
    let qbooks = random_books(&mut rng, &qu, 6, 60, 0.7);
    let out = sim(Functionality::Queue, SecurityMode::SemiHonest, 7, &qu, &qbooks, 71, |_| {});
    ensure(out.log.aborts().is_empty(), || format!("queue aborts: {:?}", out.log.aborts()))?;
    ensure(queue_fills(&qu, &out.log.records()) == queue_oracle(&qu, &qbooks), || "queue run differs from the FIFO oracle".into())?;
    let plain_runs = 300;
    for k in 0..plain_runs {
        let u = Universe::synthetic(rng.gen_range(1..5));
        let clients = rng.gen_range(1..7);
        let books = random_books(&mut rng, &u, clients, if k % 3 == 0 { 5 } else { 100 }, 0.8);
        let mut settings = ServerSettings::new(Functionality::Queue, SecurityMode::SemiHonest, 7, u.clone(), k);
        settings.expected_clients = Some(books.len());
        let mut queues: BTreeMap<String, (Vec<PartyId>, Vec<PartyId>)> = BTreeMap::new();
        for (id, b) in &books {
            for o in b.orders() {
                let q = queues.entry(o.symbol.clone()).or_default();
                match o.side {
                    Side::Buy => q.0.push(*id),
                    Side::Sell => q.1.push(*id),
                }
            }
        }
        let mut backend = PlainBackend::new();
        for (id, b) in &books {
            backend.register(*id, b.orders().map(|o| (ValueRef::max(o.symbol.clone(), o.side), o.max_amount)));
        }
        let mut log = MatchLog::new(LogEntry::Header {
            auction: 0,
            seed: k.to_string(),
            functionality: "queue".into(),
            mode: "semi-honest".into(),
            n: 7,
            symbols: u.len(),
            clients: books.iter().map(|b| b.0).collect(),
        });
        primematch_core::engine::drivers::run_queue(&queues, &mut backend, &mut log);
        ensure(queue_fills(&u, &log.records()) == queue_oracle(&u, &books), || format!("queue instance {k} differs from the FIFO oracle"))?;
    }

    // (c) range B2C invariants over 1000 random instances
    let instances = 1000;
    for k in 0..instances {
        let u = Universe::synthetic(rng.gen_range(1..4));
        let mut bank_orders = Vec::new();
        for s in u.symbols() {
            if rng.gen_bool(0.8) {
                let side = if rng.gen() { Side::Buy } else { Side::Sell };
                bank_orders.push(Order::new(s.clone(), side, rng.gen_range(0..200)));
            }
        }
        let bank = Book::from_orders(bank_orders).unwrap();
        let mut books = Vec::new();
        for id in 1..=rng.gen_range(1..6) {
            let mut orders = Vec::new();
            for s in u.symbols() {
                if rng.gen_bool(0.8) {
                    let side = if rng.gen() { Side::Buy } else { Side::Sell };
                    let lo = rng.gen_range(0..100);
                    orders.push(Order::ranged(s.clone(), side, lo, lo + rng.gen_range(0..100)));
                }
            }
            books.push((id, Book::from_orders(orders).unwrap()));
        }
        let ids: Vec<PartyId> = books.iter().map(|b| b.0).collect();
        let order = client_order(&auction_seed(k), &ids);
        let mut backend = PlainBackend::new();
        register_plain(&mut backend, &u, &books);
        let mut log = MatchLog::default();
        run_range_b2c(&u, &bank, &order, &mut backend, &mut log);
        let recs = log.records();
        range_b2c_invariants(&u, &bank, &books, &recs).map_err(|e| format!("range instance {k}: {e}"))?;
        ensure(recs == range_b2c(&u, &bank, &books, &order), || format!("range instance {k}: driver differs from the functionality"))?;
    }
    Ok(format!(
        "{checks} commitment openings checked across {} pairs; queue 1 full-stack + {plain_runs} plain instances; {instances} range instances",
        pairs.len()
    ))
}

fn range_b2c_invariants(u: &Universe, bank: &Book, books: &[(PartyId, Book)], recs: &[MatchRecord]) -> Result<(), String> {
    for r in recs {
        ensure(r.quantity > 0 && r.parties[0] == SERVER, || format!("bad record {r:?}"))?;
    }
    for s in u.symbols() {
        for bank_side in [Side::Buy, Side::Sell] {
            let sold: u64 = recs.iter().map(|r| r.traded(SERVER, s, bank_side)).sum();
            let stock = bank.amount(s, bank_side);
            ensure(sold <= stock, || format!("bank traded {sold} of {stock} {s}"))?;
            let side = bank_side.opposite();
            for (id, b) in books {
                let of = |pass: PassTag| -> u64 { recs.iter().filter(|r| r.pass == pass).map(|r| r.traded(*id, s, side)).sum() };
                let (p1, p2) = (of(PassTag::MinPass), of(PassTag::MaxPass));
                let (min, max) = (b.value(&ValueRef::new(s, side, Bound::Min)), b.value(&ValueRef::new(s, side, Bound::Max)));
                ensure(p1 <= min, || format!("party {id} {s}: pass 1 gave {p1} above MinAmount {min}"))?;
                ensure(p1 + p2 <= max, || format!("party {id} {s}: total {} above MaxAmount {max}", p1 + p2))?;
                ensure(p1 + p2 >= min || sold == stock, || {
                    format!("party {id} {s}: total {} below MinAmount {min} with bank inventory left", p1 + p2)
                })?;
            }
        }
    }
    Ok(())
}

// 8. 100 symbols of malicious client-to-client at n = 31 at no less than one
//    symbol per second, and traffic per symbol linear in n.
fn criterion_8() -> Outcome {
    let mut points = Vec::new();
    let mut lines = Vec::new();
    for n in [7u32, 15, 31] {
        let mut cfg = BenchConfig::new(100);
        cfg.n = n;
        let r = run_bench(&cfg).map_err(|e| format!("n = {n}: {e}"))?;
        ensure(r.aborts == 0 && r.matches > 0, || format!("n = {n}: {} aborts, {} matches", r.aborts, r.matches))?;
        if n == 31 {
            ensure(r.throughput >= 1.0, || format!("{:.2} symbols/s at n = 31", r.throughput))?;
        }
        lines.push(format!("n={n}: {:.2} sym/s, {:.2}s, {:.0} B/sym", r.throughput, r.latency_s, r.bytes_per_symbol));
        points.push((n as f64, r.bytes_per_symbol));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    ensure(slope > 0.0 && r2 >= 0.99, || format!("bytes per symbol not linear in n: slope {slope:.1}, r2 {r2:.4}"))?;
    Ok(format!(
        "{}; slope {:.0} B per bit = {:.1} group elements, r2 {r2:.5}; reference {}-{} sym/s, {}s at 100 symbols",
        lines.join("; "),
        slope,
        slope / 32.0,
        REFERENCE.throughput_low,
        REFERENCE.throughput_high,
        REFERENCE.latency_100_symbols_s
    ))
}

/// Flips one random bit of the encoding; `None` when the result no longer
/// decodes, which counts as a rejection.
fn mutate<T: Encode + Decode>(proof: &T, key: Option<PublicKey>, rng: &mut ChaCha20Rng) -> Option<T> {
    let mut bytes = proof.to_bytes();
    let i = rng.gen_range(0..bytes.len());
    bytes[i] ^= 1 << rng.gen_range(0..8);
    let mut r = Reader::new(&bytes);
    if let Some(pk) = key {
        r.set_key(pk);
    }
    let out = T::decode(&mut r).ok()?;
    r.finish().ok()?;
    Some(out)
}

struct Tally {
    name: &'static str,
    honest: usize,
    honest_ok: usize,
    forged: usize,
    forged_ok: usize,
    swapped: usize,
    swapped_ok: usize,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, honest: 0, honest_ok: 0, forged: 0, forged_ok: 0, swapped: 0, swapped_ok: 0 }
    }
    fn honest(&mut self, ok: bool) {
        self.honest += 1;
        self.honest_ok += ok as usize;
    }
    fn forged(&mut self, ok: bool) {
        self.forged += 1;
        self.forged_ok += ok as usize;
    }
    fn swapped(&mut self, ok: bool) {
        self.swapped += 1;
        self.swapped_ok += ok as usize;
    }
}

const HONEST: usize = 200;
const FORGERIES: usize = 1000;
const SWAPS: usize = 200;

fn ctx_of(k: usize) -> Vec<u8> {
    InstanceCtx::new(9, 1, 0, k as u64).proof_ctx(b"acceptance", 0)
}

fn zk_comeq(rng: &mut ChaCha20Rng) -> Tally {
    let p = PedersenParams::standard();
    let mut t = Tally::new("ComEq");
    for k in 0..HONEST {
        let m = Scalar::random(rng);
        let (a, b) = (p.commit(&m, &Scalar::random(rng)), p.commit(&m, &Scalar::random(rng)));
        let proof = comeq_prove(&p, &a, &b, &ctx_of(k), rng).unwrap();
        t.honest(comeq_verify(&p, &proof, &a.point, &b.point, &ctx_of(k)));
        if k < SWAPS {
            t.swapped(comeq_verify(&p, &proof, &a.point, &b.point, &ctx_of(k + 1)));
            let c = p.commit(&m, &Scalar::random(rng));
            t.swapped(comeq_verify(&p, &proof, &a.point, &c.point, &ctx_of(k)));
        }
    }
    for k in 0..FORGERIES {
        let m = Scalar::random(rng);
        let delta = Scalar::from(rng.gen_range(1..1000u64));
        let (a, b) = (p.commit(&m, &Scalar::random(rng)), p.commit(&(m + delta), &Scalar::random(rng)));
        let proof = comeq_prove_unchecked(&p, &a, &b, &ctx_of(k), rng);
        t.forged(comeq_verify(&p, &proof, &a.point, &b.point, &ctx_of(k)));
        let honest_b = p.commit(&m, &Scalar::random(rng));
        let good = comeq_prove(&p, &a, &honest_b, &ctx_of(k), rng).unwrap();
        let mutated = mutate(&good, None, rng);
        t.forged(mutated.is_some_and(|pr| comeq_verify(&p, &pr, &a.point, &b.point, &ctx_of(k))));
    }
    t
}

fn zk_bits(rng: &mut ChaCha20Rng) -> [Tally; 2] {
    let p = PedersenParams::standard();
    let kp = ElGamalKeypair::generate(rng);
    let pk = kp.pk;
    let mut tp = Tally::new("Bit/Pedersen");
    let mut te = Tally::new("Bit/ElGamal");
    for k in 0..HONEST {
        let m = Scalar::from((k % 2) as u64);
        let r = Scalar::random(rng);
        let c = p.commit_point(&m, &r);
        let proof = bit_prove(&p, &c, &m, &r, &ctx_of(k), rng).unwrap();
        tp.honest(bit_verify(&p, &proof, &c, &ctx_of(k)));
        tp.swapped(bit_verify(&p, &proof, &c, &ctx_of(k + 1)));
        tp.swapped(bit_verify(&p, &proof, &p.commit_point(&m, &Scalar::random(rng)), &ctx_of(k)));
        let e = elgamal_encrypt(&pk, &m, &r);
        let proof = bit_prove(&pk, &e, &m, &r, &ctx_of(k), rng).unwrap();
        te.honest(bit_verify(&pk, &proof, &e, &ctx_of(k)));
        te.swapped(bit_verify(&pk, &proof, &e, &ctx_of(k + 1)));
        te.swapped(bit_verify(&pk, &proof, &elgamal_encrypt(&pk, &m, &Scalar::random(rng)), &ctx_of(k)));
    }
    for k in 0..FORGERIES {
        let m = if k % 2 == 0 { Scalar::from(2u64 + rng.gen_range(0..10u64)) } else { Scalar::random(rng) };
        let r = Scalar::random(rng);
        let c = p.commit_point(&m, &r);
        let proof = bit_prove_unchecked(&p, &c, &m, &r, &ctx_of(k), rng);
        tp.forged(bit_verify(&p, &proof, &c, &ctx_of(k)));
        let good = bit_prove(&p, &p.commit_point(&Scalar::ONE, &r), &Scalar::ONE, &r, &ctx_of(k), rng).unwrap();
        tp.forged(mutate(&good, None, rng).is_some_and(|pr| bit_verify(&p, &pr, &c, &ctx_of(k))));
        let e = elgamal_encrypt(&pk, &m, &r);
        let proof = bit_prove_unchecked(&pk, &e, &m, &r, &ctx_of(k), rng);
        te.forged(bit_verify(&pk, &proof, &e, &ctx_of(k)));
        let good = bit_prove(&pk, &elgamal_encrypt(&pk, &Scalar::ONE, &r), &Scalar::ONE, &r, &ctx_of(k), rng).unwrap();
        te.forged(mutate(&good, Some(pk), rng).is_some_and(|pr| bit_verify(&pk, &pr, &e, &ctx_of(k))));
    }
    [tp, te]
}

fn zk_crosseq(rng: &mut ChaCha20Rng) -> Tally {
    let p = PedersenParams::standard();
    let kp = ElGamalKeypair::generate(rng);
    let pk = kp.pk;
    let mut t = Tally::new("CrossEq");
    for k in 0..HONEST {
        let (m, r0, r1) = (Scalar::random(rng), Scalar::random(rng), Scalar::random(rng));
        let (v, w) = (p.commit_point(&m, &r0), elgamal_encrypt(&pk, &m, &r1));
        let proof = crosseq_prove(&p, &pk, &v, &w, &m, &r0, &r1, &ctx_of(k), rng);
        t.honest(crosseq_verify(&p, &pk, &proof, &v, &w, &ctx_of(k)));
        t.swapped(crosseq_verify(&p, &pk, &proof, &v, &w, &ctx_of(k + 1)));
        t.swapped(crosseq_verify(&p, &pk, &proof, &v, &elgamal_encrypt(&pk, &m, &Scalar::random(rng)), &ctx_of(k)));
    }
    for k in 0..FORGERIES {
        let (m, r0, r1) = (Scalar::random(rng), Scalar::random(rng), Scalar::random(rng));
        let other = m + Scalar::from(rng.gen_range(1..1000u64));
        let (v, w) = (p.commit_point(&m, &r0), elgamal_encrypt(&pk, &other, &r1));
        let proof = crosseq_prove(&p, &pk, &v, &w, &m, &r0, &r1, &ctx_of(k), rng);
        t.forged(crosseq_verify(&p, &pk, &proof, &v, &w, &ctx_of(k)));
        let honest_w = elgamal_encrypt(&pk, &m, &r1);
        let good = crosseq_prove(&p, &pk, &v, &honest_w, &m, &r0, &r1, &ctx_of(k), rng);
        t.forged(mutate(&good, Some(pk), rng).is_some_and(|pr| crosseq_verify(&p, &pk, &pr, &v, &w, &ctx_of(k))));
    }
    t
}

fn zk_dleq(rng: &mut ChaCha20Rng) -> Tally {
    let mut t = Tally::new("DLEQ");
    let label = |k: usize| {
        let mut tr = Transcript::new(b"acceptance-dleq");
        tr.absorb(b"k", &(k as u64).to_le_bytes());
        tr
    };
    for k in 0..HONEST {
        let (g1, g2, w) = (RistrettoPoint::random(rng), RistrettoPoint::random(rng), Scalar::random(rng));
        let (h1, h2) = (g1 * w, g2 * w);
        let proof = dleq_prove(&mut label(k), &g1, &h1, &g2, &h2, &w, rng);
        t.honest(dleq_verify(&mut label(k), &g1, &h1, &g2, &h2, &proof));
        t.swapped(dleq_verify(&mut label(k + 1), &g1, &h1, &g2, &h2, &proof));
        t.swapped(dleq_verify(&mut label(k), &g2, &h2, &g1, &h1, &proof));
    }
    for k in 0..FORGERIES {
        let (g1, g2, w) = (RistrettoPoint::random(rng), RistrettoPoint::random(rng), Scalar::random(rng));
        let (h1, h2) = (g1 * w, g2 * (w + Scalar::ONE));
        let proof = dleq_prove(&mut label(k), &g1, &h1, &g2, &h2, &w, rng);
        t.forged(dleq_verify(&mut label(k), &g1, &h1, &g2, &h2, &proof));
        let good = dleq_prove(&mut label(k), &g1, &h1, &g2, &(g2 * w), &w, rng);
        t.forged(mutate(&good, None, rng).is_some_and(|pr| dleq_verify(&mut label(k), &g1, &h1, &g2, &h2, &pr)));
    }
    t
}

fn zk_onemany(rng: &mut ChaCha20Rng) -> [Tally; 2] {
    let p = PedersenParams::standard();
    let kp = ElGamalKeypair::generate(rng);
    let pk = kp.pk;
    const LEN: usize = 8;
    let mut tp = Tally::new("OneMany/Pedersen");
    let mut te = Tally::new("OneMany/ElGamal");
    let nonzero = |rng: &mut ChaCha20Rng| Scalar::from(rng.gen_range(1..1u64 << 40));
    for k in 0..HONEST {
        let l = rng.gen_range(0..LEN);
        let list: Vec<Commitment> =
            (0..LEN).map(|i| p.commit(&if i == l { Scalar::ZERO } else { nonzero(rng) }, &Scalar::random(rng))).collect();
        let points: Vec<RistrettoPoint> = list.iter().map(|c| c.point).collect();
        let proof = onemany_prove(&p, &list, l, &ctx_of(k), rng).unwrap();
        tp.honest(onemany_verify(&p, &proof, &points, &ctx_of(k)));
        tp.swapped(onemany_verify(&p, &proof, &points, &ctx_of(k + 1)));
        let mut moved = points.clone();
        moved.rotate_left(1);
        tp.swapped(onemany_verify(&p, &proof, &moved, &ctx_of(k)));

        let cts: Vec<Ciphertext> =
            (0..LEN).map(|i| elgamal_encrypt(&pk, &if i == l { Scalar::ZERO } else { nonzero(rng) }, &Scalar::random(rng))).collect();
        let proof = onemany_prove_generic(&p, &pk, &cts, l, &kp.sk, &ctx_of(k), rng).unwrap();
        te.honest(onemany_verify_generic(&p, &pk, &proof, &cts, &ctx_of(k)));
        te.swapped(onemany_verify_generic(&p, &pk, &proof, &cts, &ctx_of(k + 1)));
        let mut moved = cts.clone();
        moved.rotate_left(1);
        te.swapped(onemany_verify_generic(&p, &pk, &proof, &moved, &ctx_of(k)));
    }
    // The provers refuse a list without a zero, so forgeries start from a
    // valid proof: reused on a zero-free list of the same shape, or mutated.
    for k in 0..FORGERIES / 2 {
        let l = rng.gen_range(0..LEN);
        let mut list: Vec<Commitment> =
            (0..LEN).map(|i| p.commit(&if i == l { Scalar::ZERO } else { nonzero(rng) }, &Scalar::random(rng))).collect();
        let proof = onemany_prove(&p, &list, l, &ctx_of(k), rng).unwrap();
        list[l] = p.commit(&nonzero(rng), &list[l].opening.unwrap().randomness);
        let points: Vec<RistrettoPoint> = list.iter().map(|c| c.point).collect();
        tp.forged(onemany_verify(&p, &proof, &points, &ctx_of(k)));
        tp.forged(mutate(&proof, None, rng).is_some_and(|pr| onemany_verify(&p, &pr, &points, &ctx_of(k))));

        let mut cts: Vec<Ciphertext> =
            (0..LEN).map(|i| elgamal_encrypt(&pk, &if i == l { Scalar::ZERO } else { nonzero(rng) }, &Scalar::random(rng))).collect();
        let proof = onemany_prove_generic(&p, &pk, &cts, l, &kp.sk, &ctx_of(k), rng).unwrap();
        cts[l] = elgamal_encrypt(&pk, &nonzero(rng), &Scalar::random(rng));
        te.forged(onemany_verify_generic(&p, &pk, &proof, &cts, &ctx_of(k)));
        te.forged(mutate(&proof, Some(pk), rng).is_some_and(|pr| onemany_verify_generic(&p, &pk, &pr, &cts, &ctx_of(k))));
    }
    [tp, te]
}

// 9. Completeness, soundness under forgery and statement swap.
fn criterion_9() -> Outcome {
    type Suite = fn(&mut ChaCha20Rng) -> Vec<Tally>;
    let suites: [Suite; 5] = [
        |r| vec![zk_comeq(r)],
        |r| zk_bits(r).into(),
        |r| vec![zk_crosseq(r)],
        |r| vec![zk_dleq(r)],
        |r| zk_onemany(r).into(),
    ];
    let tallies: Vec<Tally> =
        suites.par_iter().enumerate().flat_map_iter(|(k, s)| s(&mut ChaCha20Rng::seed_from_u64(900 + k as u64))).collect();
    let mut parts = Vec::new();
    for t in &tallies {
        ensure(t.honest_ok == t.honest, || format!("{}: {}/{} honest proofs verified", t.name, t.honest_ok, t.honest))?;
        ensure(t.forged >= FORGERIES && t.forged_ok == 0, || format!("{}: {} of {} forgeries accepted", t.name, t.forged_ok, t.forged))?;
        ensure(t.swapped_ok == 0, || format!("{}: {} of {} swapped statements accepted", t.name, t.swapped_ok, t.swapped))?;
        parts.push(format!("{} {}/{} honest, 0/{} forged, 0/{} swapped", t.name, t.honest, t.honest, t.forged, t.swapped));
    }
    Ok(parts.join("; "))
}
