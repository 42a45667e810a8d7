//! Two-party minimum between the bank (position 0) and one client
//! (position 1), with no third party.
//!
//! The bank commits V_0 = Com(v_0; r_0), encrypts each bit under its own
//! ElGamal key, A_j = Enc(v_{0,j}; ρ_j), and proves that
//! Σ_j 2^{n-1-j} A_j encrypts the value committed in V_0 and that every A_j
//! encrypts a bit. The client runs the comparison homomorphically on the
//! A_j and trivial encryptions of its own bits, with randomness of its own
//! choosing, rerandomizes the outputs and returns them. The bank
//! zero-tests every slot, picks u (0 on a tie), and proves with a
//! one-out-of-many proof that the list D_u holds an encryption of zero. If
//! u = 0 it also opens V_0; otherwise the client reveals v_1.

use curve25519_dalek::scalar::Scalar;
use rand::{CryptoRng, RngCore};

use super::{padded_len, InstanceCtx, ProtocolError};
use crate::algebra::{
    bit_decompose, check_bit_width, ct_scale_add, elgamal_encrypt, elgamal_is_zero, Ciphertext, ElGamalKeypair,
    PedersenParams, PublicKey,
};
use crate::compare::{comparison_initial, derive_randomness, CiphertextConstants, SharedSeed};
use crate::wire::{Decode, Encode, Reader, WireError, Writer};
use crate::zkp::{
    bit_prove, bit_verify, crosseq_prove, crosseq_verify, onemany_prove_generic, onemany_verify_generic, BitProof,
    CrossEqProof, ElGamalOneMany,
};
use curve25519_dalek::ristretto::RistrettoPoint;

#[derive(Clone, Debug, PartialEq)]
pub struct B2cOfferItem {
    pub v0: RistrettoPoint,
    pub bits: Vec<Ciphertext>,
    pub crosseq: CrossEqProof<Ciphertext>,
    pub bit_proofs: Vec<BitProof<Ciphertext>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct B2cResponseItem {
    pub d0: Vec<Ciphertext>,
    pub d1: Vec<Ciphertext>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct B2cVerdictItem {
    pub u: u8,
    pub proof: ElGamalOneMany,
    /// Opening (v_0, r_0) of V_0, present iff u = 0.
    pub opening: Option<(u64, Scalar)>,
}

impl Encode for B2cOfferItem {
    fn encode(&self, w: &mut Writer) {
        w.point(&self.v0).put(&self.bits).put(&self.crosseq).put(&self.bit_proofs);
    }
}

impl Decode for B2cOfferItem {
    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(B2cOfferItem { v0: r.point()?, bits: r.get()?, crosseq: r.get()?, bit_proofs: r.get()? })
    }
}

impl Encode for B2cResponseItem {
    fn encode(&self, w: &mut Writer) {
        w.put(&self.d0).put(&self.d1);
    }
}

impl Decode for B2cResponseItem {
    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(B2cResponseItem { d0: r.get()?, d1: r.get()? })
    }
}

impl Encode for B2cVerdictItem {
    fn encode(&self, w: &mut Writer) {
        w.u8(self.u).put(&self.proof).put(&self.opening);
    }
}

impl Decode for B2cVerdictItem {
    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(B2cVerdictItem { u: r.u8()?, proof: r.get()?, opening: r.get()? })
    }
}

/// Σ_j 2^{n-1-j} A_j
fn recombine(pk: &PublicKey, bits: &[Ciphertext]) -> Result<Ciphertext, ProtocolError> {
    let mut weight = Scalar::ONE;
    let mut weights = vec![Scalar::ZERO; bits.len()];
    for w in weights.iter_mut().rev() {
        *w = weight;
        weight += weight;
    }
    Ok(ct_scale_add(pk, bits, &weights, &Scalar::ZERO, &Scalar::ZERO)?)
}

fn padded(pk: &PublicKey, list: &[Ciphertext], n: usize) -> Vec<Ciphertext> {
    let mut out = list.to_vec();
    out.resize(padded_len(n), Ciphertext::trivial(*pk, &Scalar::ONE));
    out
}

pub struct BankB2c {
    params: PedersenParams,
    keypair: ElGamalKeypair,
    n: u32,
    ctx: InstanceCtx,
    value: u64,
    r0: Scalar,
}

impl BankB2c {
    pub fn offer<R: RngCore + CryptoRng>(
        params: &PedersenParams,
        keypair: &ElGamalKeypair,
        n: u32,
        ctx: InstanceCtx,
        value: u64,
        rng: &mut R,
    ) -> Result<(BankB2c, B2cOfferItem), ProtocolError> {
        check_bit_width(n)?;
        let pk = keypair.pk;
        let bits = bit_decompose(value, n)?;
        let r0 = Scalar::random(rng);
        let v0 = params.commit_point(&Scalar::from(value), &r0);
        let mut cts = Vec::with_capacity(bits.len());
        let mut bit_proofs = Vec::with_capacity(bits.len());
        let mut rho_total = Scalar::ZERO;
        for (j, b) in bits.iter().enumerate() {
            let m = Scalar::from(*b as u64);
            let rho = Scalar::random(rng);
            let a = elgamal_encrypt(&pk, &m, &rho);
            bit_proofs.push(bit_prove(&pk, &a, &m, &rho, &ctx.bit_ctx(0, j), rng).expect("bits are bits"));
            rho_total = rho_total + rho_total + rho;
            cts.push(a);
        }
        let w = recombine(&pk, &cts)?;
        let crosseq = crosseq_prove(
            params,
            &pk,
            &v0,
            &w,
            &Scalar::from(value),
            &r0,
            &rho_total,
            &ctx.proof_ctx(b"crosseq", 0),
            rng,
        );
        let bank = BankB2c { params: *params, keypair: keypair.clone(), n, ctx, value, r0 };
        Ok((bank, B2cOfferItem { v0, bits: cts, crosseq, bit_proofs }))
    }

    /// Returns the bank's view (b_0, b_1) and the verdict to send.
    pub fn decide<R: RngCore + CryptoRng>(
        &self,
        resp: &B2cResponseItem,
        rng: &mut R,
    ) -> Result<((bool, bool), B2cVerdictItem), ProtocolError> {
        let instance = self.ctx.instance;
        let pk = self.keypair.pk;
        let len = self.n as usize + 1;
        let well_formed = resp.d0.len() == len
            && resp.d1.len() == len
            && resp.d0.iter().chain(&resp.d1).all(|c| c.pk == pk);
        if !well_formed {
            return Err(ProtocolError::Malformed { what: "comparison ciphertexts", party: 1, instance });
        }
        let sk = &self.keypair.sk;
        let z0 = resp.d0.iter().position(|c| elgamal_is_zero(sk, c));
        let z1 = resp.d1.iter().position(|c| elgamal_is_zero(sk, c));
        let (u, l, list) = match (z0, z1) {
            (Some(l), _) => (0u8, l, &resp.d0),
            (None, Some(l)) => (1u8, l, &resp.d1),
            (None, None) => return Err(ProtocolError::NoWinner { instance }),
        };
        let list = padded(&pk, list, self.n as usize);
        let proof = onemany_prove_generic(&self.params, &pk, &list, l, sk, &self.ctx.proof_ctx(b"onemany", u), rng)
            .map_err(|e| ProtocolError::Input(e.to_string()))?;
        let opening = (u == 0).then_some((self.value, self.r0));
        Ok(((z0.is_some(), z1.is_some()), B2cVerdictItem { u, proof, opening }))
    }

    /// The client's revealed value after u = 1; it must not exceed v_0.
    pub fn accept_reveal(&self, v1: u64) -> Result<u64, ProtocolError> {
        if v1 >> self.n != 0 || v1 > self.value {
            return Err(ProtocolError::RevealRejected { party: 1, instance: self.ctx.instance });
        }
        Ok(v1)
    }

    pub fn value(&self) -> u64 {
        self.value
    }
}

pub struct ClientB2c {
    params: PedersenParams,
    pk: PublicKey,
    n: u32,
    ctx: InstanceCtx,
    value: u64,
    v0: RistrettoPoint,
    sent: B2cResponseItem,
}

impl ClientB2c {
    pub fn respond<R: RngCore + CryptoRng>(
        params: &PedersenParams,
        pk: PublicKey,
        n: u32,
        ctx: InstanceCtx,
        value: u64,
        offer: &B2cOfferItem,
        rng: &mut R,
    ) -> Result<(ClientB2c, B2cResponseItem), ProtocolError> {
        check_bit_width(n)?;
        let instance = ctx.instance;
        let nn = n as usize;
        if offer.bits.len() != nn || offer.bit_proofs.len() != nn || offer.bits.iter().any(|c| c.pk != pk) {
            return Err(ProtocolError::Malformed { what: "bank offer", party: 0, instance });
        }
        let w = recombine(&pk, &offer.bits)?;
        if !crosseq_verify(params, &pk, &offer.crosseq, &offer.v0, &w, &ctx.proof_ctx(b"crosseq", 0)) {
            return Err(ProtocolError::CrossEqRejected { instance });
        }
        for (j, (a, proof)) in offer.bits.iter().zip(&offer.bit_proofs).enumerate() {
            if !bit_verify(&pk, proof, a, &ctx.bit_ctx(0, j)) {
                return Err(ProtocolError::BitProofRejected { party: 0, instance, bit: j });
            }
        }
        let mine: Vec<Ciphertext> =
            bit_decompose(value, n)?.iter().map(|&b| Ciphertext::trivial(pk, &Scalar::from(b as u64))).collect();
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        let rand = derive_randomness(&SharedSeed(seed), nn);
        let out = comparison_initial(&offer.bits, &mine, &rand, &CiphertextConstants(pk))?;
        let mut refresh = |cts: Vec<Ciphertext>| -> Result<Vec<Ciphertext>, ProtocolError> {
            cts.into_iter()
                .map(|c| Ok(ct_scale_add(&pk, &[c], &[Scalar::ONE], &Scalar::ZERO, &Scalar::random(rng))?))
                .collect()
        };
        let sent = B2cResponseItem { d0: refresh(out.d0)?, d1: refresh(out.d1)? };
        let client = ClientB2c { params: *params, pk, n, ctx, value, v0: offer.v0, sent: sent.clone() };
        Ok((client, sent))
    }

    /// Checks the verdict; returns u and the minimum.
    pub fn finish(&self, verdict: &B2cVerdictItem) -> Result<(u8, u64), ProtocolError> {
        let instance = self.ctx.instance;
        let list = match verdict.u {
            0 => &self.sent.d0,
            1 => &self.sent.d1,
            _ => return Err(ProtocolError::Malformed { what: "verdict", party: 0, instance }),
        };
        let list = padded(&self.pk, list, self.n as usize);
        let ctx = self.ctx.proof_ctx(b"onemany", verdict.u);
        if !onemany_verify_generic(&self.params, &self.pk, &verdict.proof, &list, &ctx) {
            return Err(ProtocolError::OneManyRejected { instance });
        }
        match (verdict.u, verdict.opening) {
            (0, Some((v, r))) => {
                if v >> self.n != 0 || self.params.commit_point(&Scalar::from(v), &r) != self.v0 || v > self.value {
                    return Err(ProtocolError::RevealRejected { party: 0, instance });
                }
                Ok((0, v))
            }
            (1, None) => Ok((1, self.value)),
            _ => Err(ProtocolError::Malformed { what: "verdict", party: 0, instance }),
        }
    }
}
