//! Committed-minimum comparison with security against a malicious client.
//!
//! Client P_i, holding an opening (v_i, r_i) of the server's commitment V_i:
//!
//! 1. Splits every bit v_{i,j} into shares ⟨v_{i,j}⟩_0 + ⟨v_{i,j}⟩_1 and
//!    commits to each, V_{i,j,k} = Com(⟨v_{i,j}⟩_k; r_{i,j,k}). It keeps
//!    share i and sends the peer the opening of share 1-i, all 2n share
//!    commitments, a ComEq proof that V_i and
//!    Π_j (V_{i,j,0}·V_{i,j,1})^{2^{n-1-j}} commit to the same value, and a
//!    bit proof for every V_{i,j,0}·V_{i,j,1}.
//! 2. After checking the peer's message, runs the comparison three times
//!    with the shared randomness: on its shares of both inputs (d shares),
//!    on the commitment randomness of those shares (s shares), and on the
//!    peer's share commitments (D_{·,·,1-i}). All three go to the server.
//! 3. The server checks Com(⟨d⟩_p; s_p) against the commitments computed by
//!    P_{1-p}, reconstructs d and s, and sends each winning party a
//!    one-out-of-many proof that some D_{b,j} = Com(d_{b,j}; s_{b,j}) is a
//!    commitment to zero. A winner rebuilds
//!    D_{i,j} = Com(⟨d_{i,j}⟩_i; s_{i,j,i})·D_{i,j,1-i} itself before verifying.
//! 4. Every winner reveals its value to the server with a fresh commitment
//!    V', a ComEq proof against V_i, and the opening of V'. The server
//!    forwards the reveal to the loser only when exactly one party won.

use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use rand::{CryptoRng, RngCore};

use super::{padded_len, InstanceCtx, ProtocolError};
use crate::algebra::{bit_decompose, check_bit_width, recompose_scalars, Commitment, PedersenParams};
use crate::compare::{comparison_final, comparison_initial, CommitmentConstants, ComparisonRandomness, ShareRole};
use crate::wire::{Decode, Encode, Reader, WireError, Writer};
use crate::zkp::{
    bit_prove_unchecked, bit_verify, comeq_prove, comeq_prove_unchecked, comeq_verify, onemany_prove, onemany_verify,
    ComEqProof, PedersenBitProof, PedersenOneMany,
};

/// The opening of a client's registered commitment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClientInput {
    pub value: u64,
    pub randomness: Scalar,
}

impl ClientInput {
    pub fn commitment(&self, params: &PedersenParams) -> RistrettoPoint {
        params.commit_point(&Scalar::from(self.value), &self.randomness)
    }

    fn opened(&self, params: &PedersenParams) -> Commitment {
        params.commit(&Scalar::from(self.value), &self.randomness)
    }
}

/// Deliberate client deviations, for the detection suite and the
/// simulator's adversary flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClientTamper {
    None,
    /// Adds one to the d share at this index before reporting it.
    ShareFlip(usize),
    /// Adds one to the s share at this index before reporting it.
    RandomnessFlip(usize),
    /// Sends the peer an opening that does not match the share commitment.
    InconsistentCommitment(usize),
    /// Shares digits that recombine to the input but are not all bits.
    NonBit,
    /// Shares the bits of a different value and proves ComEq anyway.
    ComEqMismatch,
    /// Attaches a ComEq proof made for a different instance.
    StatementSwap,
}

/// Client-to-client message of step 1 (sent sealed).
#[derive(Clone, Debug, PartialEq)]
pub struct ShareTransfer {
    /// (⟨v_{i,j}⟩_{1-i}, r_{i,j,1-i}) for each bit j.
    pub openings: Vec<(Scalar, Scalar)>,
    /// (V_{i,j,0}, V_{i,j,1}) for each bit j.
    pub commitments: Vec<(RistrettoPoint, RistrettoPoint)>,
    pub comeq: ComEqProof,
    pub bit_proofs: Vec<PedersenBitProof>,
}

/// Client-to-server message of step 2. Vectors have length n + 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ShareReport {
    pub d0: Vec<Scalar>,
    pub d1: Vec<Scalar>,
    pub s0: Vec<Scalar>,
    pub s1: Vec<Scalar>,
    /// Outputs of the run on the peer's share commitments.
    pub peer_d0: Vec<RistrettoPoint>,
    pub peer_d1: Vec<RistrettoPoint>,
}

/// A revealed value: fresh commitment, equality proof against the
/// registered commitment, and the opening of the fresh one.
#[derive(Clone, Debug, PartialEq)]
pub struct RevealItem {
    pub fresh: RistrettoPoint,
    pub proof: ComEqProof,
    pub value: u64,
    pub randomness: Scalar,
}

impl Encode for ShareTransfer {
    fn encode(&self, w: &mut Writer) {
        w.put(&self.openings).put(&self.commitments).put(&self.comeq).put(&self.bit_proofs);
    }
}

impl Decode for ShareTransfer {
    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(ShareTransfer { openings: r.get()?, commitments: r.get()?, comeq: r.get()?, bit_proofs: r.get()? })
    }
}

impl Encode for ShareReport {
    fn encode(&self, w: &mut Writer) {
        w.put(&self.d0).put(&self.d1).put(&self.s0).put(&self.s1).put(&self.peer_d0).put(&self.peer_d1);
    }
}

impl Decode for ShareReport {
    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(ShareReport {
            d0: r.get()?,
            d1: r.get()?,
            s0: r.get()?,
            s1: r.get()?,
            peer_d0: r.get()?,
            peer_d1: r.get()?,
        })
    }
}

impl Encode for RevealItem {
    fn encode(&self, w: &mut Writer) {
        w.point(&self.fresh).put(&self.proof).u64(self.value).scalar(&self.randomness);
    }
}

impl Decode for RevealItem {
    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(RevealItem { fresh: r.point()?, proof: r.get()?, value: r.u64()?, randomness: r.scalar()? })
    }
}

/// Checks a reveal of position `party`'s value against its commitment `v`.
pub fn verify_reveal(
    params: &PedersenParams,
    n: u32,
    ctx: &InstanceCtx,
    party: u8,
    v: &RistrettoPoint,
    item: &RevealItem,
) -> Result<u64, ProtocolError> {
    let ok = item.value >> n == 0
        && params.commit_point(&Scalar::from(item.value), &item.randomness) == item.fresh
        && comeq_verify(params, &item.proof, v, &item.fresh, &ctx.proof_ctx(b"reveal", party));
    if ok {
        Ok(item.value)
    } else {
        Err(ProtocolError::RevealRejected { party, instance: ctx.instance })
    }
}

/// Σ_j 2^{n-1-j} (a_j + b_j) over commitment points.
fn recombine(pairs: &[(RistrettoPoint, RistrettoPoint)]) -> RistrettoPoint {
    let mut acc = RistrettoPoint::default();
    for (a, b) in pairs {
        acc = acc + acc + a + b;
    }
    acc
}

fn onemany_list(params: &PedersenParams, d: impl Iterator<Item = RistrettoPoint>, n: usize) -> Vec<RistrettoPoint> {
    let mut list: Vec<RistrettoPoint> = d.collect();
    list.resize(padded_len(n), params.g);
    list
}

/// Client state after step 1.
pub struct MalClient {
    params: PedersenParams,
    n: u32,
    position: u8,
    ctx: InstanceCtx,
    commitments: [RistrettoPoint; 2],
    input: ClientInput,
    /// (⟨v_{i,j}⟩_i, r_{i,j,i})
    kept: Vec<(Scalar, Scalar)>,
    own_commitments: Vec<(RistrettoPoint, RistrettoPoint)>,
    tamper: ClientTamper,
}

/// Client state after step 2, waiting for the server's verdict.
pub struct MalAwaitVerdict {
    base: MalClient,
    own_d: Vec<Scalar>,
    own_s: Vec<Scalar>,
    peer_d: Vec<RistrettoPoint>,
}

impl MalClient {
    #[allow(clippy::too_many_arguments)]
    pub fn start<R: RngCore + CryptoRng>(
        params: &PedersenParams,
        n: u32,
        position: u8,
        ctx: InstanceCtx,
        commitments: [RistrettoPoint; 2],
        input: ClientInput,
        tamper: ClientTamper,
        rng: &mut R,
    ) -> Result<(MalClient, ShareTransfer), ProtocolError> {
        check_bit_width(n)?;
        if position > 1 {
            return Err(ProtocolError::Input(format!("position {position}")));
        }
        let i = position as usize;
        if input.commitment(params) != commitments[i] {
            return Err(ProtocolError::Input("input does not open the registered commitment".into()));
        }
        let bits = bit_decompose(input.value, n)?;
        let nn = n as usize;
        let mut digits: Vec<Scalar> = bits.iter().map(|&b| Scalar::from(b as u64)).collect();
        match tamper {
            ClientTamper::NonBit if nn >= 2 => {
                // one unit moved from digit n-2 to two units in digit n-1
                digits[nn - 2] -= Scalar::ONE;
                digits[nn - 1] += Scalar::from(2u64);
            }
            ClientTamper::ComEqMismatch => {
                let other = bit_decompose(input.value ^ 1, n)?;
                digits = other.iter().map(|&b| Scalar::from(b as u64)).collect();
            }
            _ => {}
        }

        let mut kept = Vec::with_capacity(nn);
        let mut openings = Vec::with_capacity(nn);
        let mut own_commitments = Vec::with_capacity(nn);
        let mut bit_proofs = Vec::with_capacity(nn);
        let mut r_total = Scalar::ZERO;
        for (j, digit) in digits.iter().enumerate() {
            let sh_other = Scalar::random(rng);
            let sh_mine = digit - sh_other;
            let (r_mine, r_other) = (Scalar::random(rng), Scalar::random(rng));
            let c_mine = params.commit_point(&sh_mine, &r_mine);
            let c_other = params.commit_point(&sh_other, &r_other);
            let pair = if i == 0 { (c_mine, c_other) } else { (c_other, c_mine) };
            let r_bit = r_mine + r_other;
            r_total = r_total + r_total + r_bit;
            bit_proofs.push(bit_prove_unchecked(params, &(pair.0 + pair.1), digit, &r_bit, &ctx.bit_ctx(position, j), rng));
            kept.push((sh_mine, r_mine));
            let mut opening = (sh_other, r_other);
            if tamper == ClientTamper::InconsistentCommitment(j) {
                opening.0 += Scalar::ONE;
            }
            openings.push(opening);
            own_commitments.push(pair);
        }

        let combined = Commitment {
            point: recombine(&own_commitments),
            opening: Some(crate::algebra::Opening { message: recompose_scalars(&digits), randomness: r_total }),
        };
        let own = input.opened(params);
        let comeq_ctx = if tamper == ClientTamper::StatementSwap {
            InstanceCtx { instance: ctx.instance.wrapping_add(1), ..ctx }.proof_ctx(b"comeq", position)
        } else {
            ctx.proof_ctx(b"comeq", position)
        };
        let comeq = comeq_prove_unchecked(params, &own, &combined, &comeq_ctx, rng);

        let transfer = ShareTransfer { openings, commitments: own_commitments.clone(), comeq, bit_proofs };
        let client = MalClient { params: *params, n, position, ctx, commitments, input, kept, own_commitments, tamper };
        Ok((client, transfer))
    }

    pub fn position(&self) -> u8 {
        self.position
    }

    /// Checks the peer's transfer, then runs the three comparisons.
    pub fn receive(
        self,
        peer: &ShareTransfer,
        rand: &ComparisonRandomness,
    ) -> Result<(MalAwaitVerdict, ShareReport), ProtocolError> {
        let params = &self.params;
        let nn = self.n as usize;
        let i = self.position as usize;
        let p = 1 - self.position;
        let instance = self.ctx.instance;
        if peer.openings.len() != nn || peer.commitments.len() != nn || peer.bit_proofs.len() != nn {
            return Err(ProtocolError::Malformed { what: "share transfer", party: p, instance });
        }
        if rand.n() != nn {
            return Err(ProtocolError::Input("comparison randomness has the wrong width".into()));
        }
        for (j, ((sh, r), pair)) in peer.openings.iter().zip(&peer.commitments).enumerate() {
            let expected = if i == 0 { pair.0 } else { pair.1 };
            if params.commit_point(sh, r) != expected {
                return Err(ProtocolError::ShareOpeningRejected { party: p, instance, bit: j });
            }
        }
        let w = recombine(&peer.commitments);
        if !comeq_verify(params, &peer.comeq, &self.commitments[p as usize], &w, &self.ctx.proof_ctx(b"comeq", p)) {
            return Err(ProtocolError::ComEqRejected { party: p, instance });
        }
        for (j, (proof, pair)) in peer.bit_proofs.iter().zip(&peer.commitments).enumerate() {
            if !bit_verify(params, proof, &(pair.0 + pair.1), &self.ctx.bit_ctx(p, j)) {
                return Err(ProtocolError::BitProofRejected { party: p, instance, bit: j });
            }
        }

        // My shares (index i) of both inputs, ordered by input owner.
        let mine_sh: Vec<Scalar> = self.kept.iter().map(|k| k.0).collect();
        let mine_r: Vec<Scalar> = self.kept.iter().map(|k| k.1).collect();
        let peer_sh: Vec<Scalar> = peer.openings.iter().map(|o| o.0).collect();
        let peer_r: Vec<Scalar> = peer.openings.iter().map(|o| o.1).collect();
        // Commitments to the peer's shares (index 1-i) of both inputs.
        let other_idx = |pair: &(RistrettoPoint, RistrettoPoint)| if i == 0 { pair.1 } else { pair.0 };
        let own_side: Vec<Commitment> = self.own_commitments.iter().map(|c| Commitment::public(other_idx(c))).collect();
        let peer_side: Vec<Commitment> = peer.commitments.iter().map(|c| Commitment::public(other_idx(c))).collect();
        let ((x0, x1), (r0, r1), (y0, y1)) = if i == 0 {
            ((&mine_sh, &peer_sh), (&mine_r, &peer_r), (&own_side, &peer_side))
        } else {
            ((&peer_sh, &mine_sh), (&peer_r, &mine_r), (&peer_side, &own_side))
        };

        let d = comparison_initial(x0, x1, rand, &ShareRole::for_position(self.position))?;
        let s = comparison_initial(r0, r1, rand, &ShareRole::Silent)?;
        let consts = CommitmentConstants { params: *params, role: ShareRole::for_position(p) };
        let dd = comparison_initial(y0, y1, rand, &consts)?;

        let mut report = ShareReport {
            d0: d.d0,
            d1: d.d1,
            s0: s.d0,
            s1: s.d1,
            peer_d0: dd.d0.iter().map(|c| c.point).collect(),
            peer_d1: dd.d1.iter().map(|c| c.point).collect(),
        };
        let (own_d, own_s, peer_d) = if i == 0 {
            (report.d0.clone(), report.s0.clone(), report.peer_d0.clone())
        } else {
            (report.d1.clone(), report.s1.clone(), report.peer_d1.clone())
        };
        match self.tamper {
            ClientTamper::ShareFlip(j) if j <= nn => report.d0[j] += Scalar::ONE,
            ClientTamper::RandomnessFlip(j) if j <= nn => report.s0[j] += Scalar::ONE,
            _ => {}
        }
        Ok((MalAwaitVerdict { base: self, own_d, own_s, peer_d }, report))
    }
}

impl MalAwaitVerdict {
    pub fn position(&self) -> u8 {
        self.base.position
    }

    pub fn value(&self) -> u64 {
        self.base.input.value
    }

    /// A proof means the server claims this party's bit is true.
    pub fn verdict(&self, proof: Option<&PedersenOneMany>) -> Result<bool, ProtocolError> {
        let Some(proof) = proof else { return Ok(false) };
        let b = &self.base;
        let list = onemany_list(
            &b.params,
            self.own_d
                .iter()
                .zip(&self.own_s)
                .zip(&self.peer_d)
                .map(|((d, s), peer)| b.params.commit_point(d, s) + peer),
            b.n as usize,
        );
        if onemany_verify(&b.params, proof, &list, &b.ctx.proof_ctx(b"onemany", b.position)) {
            Ok(true)
        } else {
            Err(ProtocolError::OneManyRejected { instance: b.ctx.instance })
        }
    }

    pub fn reveal<R: RngCore + CryptoRng>(&self, rng: &mut R) -> RevealItem {
        let b = &self.base;
        reveal_item(&b.params, &b.ctx, b.position, &b.input, rng)
    }

    /// Accepts the peer's reveal forwarded by the server.
    pub fn accept_forward(&self, item: &RevealItem) -> Result<u64, ProtocolError> {
        let b = &self.base;
        let p = 1 - b.position;
        verify_reveal(&b.params, b.n, &b.ctx, p, &b.commitments[p as usize], item)
    }
}

/// Fresh commitment to the input, ComEq against the registered one, and the
/// fresh opening.
pub fn reveal_item<R: RngCore + CryptoRng>(
    params: &PedersenParams,
    ctx: &InstanceCtx,
    position: u8,
    input: &ClientInput,
    rng: &mut R,
) -> RevealItem {
    let m = Scalar::from(input.value);
    let r = Scalar::random(rng);
    let fresh = params.commit(&m, &r);
    let proof = comeq_prove(params, &input.opened(params), &fresh, &ctx.proof_ctx(b"reveal", position), rng)
        .expect("both commitments open to the input");
    RevealItem { fresh: fresh.point, proof, value: input.value, randomness: r }
}

/// Deliberate server deviations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ServerTamper {
    None,
    /// Sends each losing party a proof computed for the winner's list.
    ForgeOneMany,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MalVerdict {
    pub bits: (bool, bool),
    pub proofs: [Option<PedersenOneMany>; 2],
}

pub struct MalServer {
    params: PedersenParams,
    n: u32,
    ctx: InstanceCtx,
    commitments: [RistrettoPoint; 2],
}

impl MalServer {
    pub fn new(params: &PedersenParams, n: u32, ctx: InstanceCtx, commitments: [RistrettoPoint; 2]) -> Self {
        MalServer { params: *params, n, ctx, commitments }
    }

    pub fn decide<R: RngCore + CryptoRng>(
        &self,
        reports: [&ShareReport; 2],
        rng: &mut R,
    ) -> Result<MalVerdict, ProtocolError> {
        self.decide_with(reports, ServerTamper::None, rng)
    }

    pub fn decide_with<R: RngCore + CryptoRng>(
        &self,
        reports: [&ShareReport; 2],
        tamper: ServerTamper,
        rng: &mut R,
    ) -> Result<MalVerdict, ProtocolError> {
        let len = self.n as usize + 1;
        let instance = self.ctx.instance;
        for (p, rep) in reports.iter().enumerate() {
            let lens = [rep.d0.len(), rep.d1.len(), rep.s0.len(), rep.s1.len(), rep.peer_d0.len(), rep.peer_d1.len()];
            if lens.iter().any(|&l| l != len) {
                return Err(ProtocolError::Malformed { what: "share report", party: p as u8, instance });
            }
        }
        // Com(⟨d⟩_p; s_p) must equal what P_{1-p} computed from p's share commitments.
        for p in 0..2 {
            let (mine, other) = (reports[p], reports[1 - p]);
            let sides = [(&mine.d0, &mine.s0, &other.peer_d0), (&mine.d1, &mine.s1, &other.peer_d1)];
            for (d, s, dd) in sides {
                if d.iter().zip(s.iter()).zip(dd.iter()).any(|((d, s), dd)| self.params.commit_point(d, s) != *dd) {
                    return Err(ProtocolError::ReconstructionMismatch { party: p as u8, instance });
                }
            }
        }
        let add = |a: &[Scalar], b: &[Scalar]| -> Vec<Scalar> { a.iter().zip(b).map(|(x, y)| x + y).collect() };
        let d = [add(&reports[0].d0, &reports[1].d0), add(&reports[0].d1, &reports[1].d1)];
        let s = [add(&reports[0].s0, &reports[1].s0), add(&reports[0].s1, &reports[1].s1)];
        let bits = comparison_final(&d[0], &d[1]);
        if !bits.0 && !bits.1 {
            return Err(ProtocolError::NoWinner { instance });
        }
        let won = [bits.0, bits.1];
        let lists: Vec<Vec<Commitment>> = (0..2)
            .map(|b| {
                let mut list: Vec<Commitment> =
                    d[b].iter().zip(&s[b]).map(|(d, s)| self.params.commit(d, s)).collect();
                list.resize(padded_len(self.n as usize), self.params.constant(&Scalar::ONE));
                list
            })
            .collect();
        let mut proofs: [Option<PedersenOneMany>; 2] = [None, None];
        for b in 0..2 {
            let target = if won[b] {
                b
            } else if tamper == ServerTamper::ForgeOneMany {
                1 - b
            } else {
                continue;
            };
            let l = d[target].iter().position(|x| *x == Scalar::ZERO).expect("winner has a zero slot");
            let ctx = self.ctx.proof_ctx(b"onemany", b as u8);
            proofs[b] = Some(
                onemany_prove(&self.params, &lists[target], l, &ctx, rng)
                    .map_err(|e| ProtocolError::Input(e.to_string()))?,
            );
        }
        Ok(MalVerdict { bits, proofs })
    }

    pub fn check_reveal(&self, party: u8, item: &RevealItem) -> Result<u64, ProtocolError> {
        verify_reveal(&self.params, self.n, &self.ctx, party, &self.commitments[party as usize], item)
    }
}
