use std::fmt::Debug;

use curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT;
use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use rand::{CryptoRng, RngCore};

use super::dleq::{dleq_prove, dleq_verify, DleqProof};
use super::scheme::HomomorphicScheme;
use super::transcript::Transcript;
use super::ZkpError;
use crate::algebra::{PedersenParams, PublicKey};
use crate::wire::{Decode, Encode, Reader, WireError, Writer};

pub const MAX_INDEX_BITS: usize = 32;

/// Schemes for which the last step of a one-out-of-many proof can show that
/// the folded value Y is a commitment to zero.
pub trait ZeroLanguage: HomomorphicScheme {
    type Response: Clone + Debug + PartialEq + Send + Sync + Encode + Decode;

    /// Whether `w` witnesses that `v` commits to zero.
    fn is_zero_witness(&self, v: &Self::Value, w: &Scalar) -> bool;

    #[allow(clippy::too_many_arguments)]
    fn zero_respond<R: RngCore + CryptoRng>(
        &self,
        t: &mut Transcript,
        y: &Self::Value,
        w: &Scalar,
        rhos: &[Scalar],
        x: &Scalar,
        rng: &mut R,
    ) -> Self::Response;

    fn zero_check(&self, t: &mut Transcript, y: &Self::Value, resp: &Self::Response) -> bool;
}

/// Pedersen: the witness is r with V_l = h^r, and the response is
/// z_d = r·x^m - Σ_k ρ_k·x^k, checked as Y = h^{z_d}.
impl ZeroLanguage for PedersenParams {
    type Response = Scalar;

    fn is_zero_witness(&self, v: &RistrettoPoint, w: &Scalar) -> bool {
        self.h * w == *v
    }

    fn zero_respond<R: RngCore + CryptoRng>(
        &self,
        _t: &mut Transcript,
        _y: &RistrettoPoint,
        w: &Scalar,
        rhos: &[Scalar],
        x: &Scalar,
        _rng: &mut R,
    ) -> Scalar {
        let mut xk = Scalar::ONE;
        let mut masked = Scalar::ZERO;
        for rho in rhos {
            masked += rho * xk;
            xk *= x;
        }
        w * xk - masked
    }

    fn zero_check(&self, _t: &mut Transcript, y: &RistrettoPoint, z: &Scalar) -> bool {
        self.h * z == *y
    }
}

/// ElGamal: the prover holds the secret key but not the encryption
/// randomness, so it shows that Y = (Y1, Y2) satisfies log_g pk = log_{Y1} Y2,
/// i.e. that Y encrypts zero.
impl ZeroLanguage for PublicKey {
    type Response = DleqProof;

    fn is_zero_witness(&self, v: &crate::algebra::Ciphertext, sk: &Scalar) -> bool {
        RISTRETTO_BASEPOINT_POINT * sk == self.0 && v.c1 * sk == v.c2
    }

    fn zero_respond<R: RngCore + CryptoRng>(
        &self,
        t: &mut Transcript,
        y: &crate::algebra::Ciphertext,
        sk: &Scalar,
        _rhos: &[Scalar],
        _x: &Scalar,
        rng: &mut R,
    ) -> DleqProof {
        dleq_prove(t, &RISTRETTO_BASEPOINT_POINT, &self.0, &y.c1, &y.c2, sk, rng)
    }

    fn zero_check(&self, t: &mut Transcript, y: &crate::algebra::Ciphertext, resp: &DleqProof) -> bool {
        dleq_verify(t, &RISTRETTO_BASEPOINT_POINT, &self.0, &y.c1, &y.c2, resp)
    }
}

/// Groth–Kohlweiss one-out-of-many proof over a list of N = 2^m values.
///
/// Index bits l_j (little-endian, j = 0..m) are committed with Pedersen:
/// c_l = Com(l_j; r_j), c_a = Com(a_j; s_j), c_b = Com(l_j·a_j; t_j). With
/// F_{j,1}(X) = l_j·X + a_j and F_{j,0}(X) = X - F_{j,1}(X), each list
/// position i gets p_i(X) = Π_j F_{j,i_j}(X), which has degree m exactly when
/// i = l. The masking values are G_k = Π_i V_i^{p_{i,k}}·Com(0; ρ_k) for
/// k < m. After the challenge x the prover sends f_j = F_{j,1}(x),
/// z_a = r_j·x + s_j, z_b = r_j·(x - f_j) + t_j and a scheme-specific proof
/// that Y = Π_i V_i^{p_i(x)}·Π_k G_k^{-x^k} commits to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct OneManyProof<V, R> {
    pub cl: Vec<RistrettoPoint>,
    pub ca: Vec<RistrettoPoint>,
    pub cb: Vec<RistrettoPoint>,
    pub g: Vec<V>,
    pub f: Vec<Scalar>,
    pub za: Vec<Scalar>,
    pub zb: Vec<Scalar>,
    pub response: R,
}

pub type PedersenOneMany = OneManyProof<RistrettoPoint, Scalar>;
pub type ElGamalOneMany = OneManyProof<crate::algebra::Ciphertext, DleqProof>;

fn index_bits(len: usize) -> Result<usize, ZkpError> {
    if len == 0 || !len.is_power_of_two() || len.trailing_zeros() as usize > MAX_INDEX_BITS {
        return Err(ZkpError::ListLength(len));
    }
    Ok(len.trailing_zeros() as usize)
}

fn transcript<S: HomomorphicScheme>(
    params: &PedersenParams,
    scheme: &S,
    ctx: &[u8],
    list: &[S::Value],
    cl: &[RistrettoPoint],
    ca: &[RistrettoPoint],
    cb: &[RistrettoPoint],
    g: &[S::Value],
) -> Transcript {
    let mut t = Transcript::new(b"primematch/onemany/v1");
    params.absorb_params(&mut t);
    scheme.absorb_params(&mut t);
    t.absorb(b"ctx", ctx);
    t.absorb_u64(b"N", list.len() as u64);
    for v in list {
        scheme.absorb_value(&mut t, b"V", v);
    }
    for j in 0..cl.len() {
        t.absorb_point(b"cl", &cl[j]);
        t.absorb_point(b"ca", &ca[j]);
        t.absorb_point(b"cb", &cb[j]);
    }
    for gk in g {
        scheme.absorb_value(&mut t, b"G", gk);
    }
    t
}

/// Multiplies a polynomial (coefficients, lowest degree first) by c0 + c1·X.
fn mul_linear(poly: &[Scalar], c0: Scalar, c1: Scalar) -> Vec<Scalar> {
    let mut out = vec![Scalar::ZERO; poly.len() + 1];
    for (k, p) in poly.iter().enumerate() {
        out[k] += p * c0;
        out[k + 1] += p * c1;
    }
    out
}

pub fn onemany_prove_generic<S: ZeroLanguage, R: RngCore + CryptoRng>(
    params: &PedersenParams,
    scheme: &S,
    list: &[S::Value],
    l: usize,
    witness: &Scalar,
    ctx: &[u8],
    rng: &mut R,
) -> Result<OneManyProof<S::Value, S::Response>, ZkpError> {
    let m = index_bits(list.len())?;
    if l >= list.len() || !scheme.is_zero_witness(&list[l], witness) {
        return Err(ZkpError::NoZeroWitness);
    }
    let lbits: Vec<Scalar> = (0..m).map(|j| Scalar::from(((l >> j) & 1) as u64)).collect();
    let mut rnd = || Scalar::random(&mut *rng);
    let r: Vec<Scalar> = (0..m).map(|_| rnd()).collect();
    let a: Vec<Scalar> = (0..m).map(|_| rnd()).collect();
    let s: Vec<Scalar> = (0..m).map(|_| rnd()).collect();
    let tt: Vec<Scalar> = (0..m).map(|_| rnd()).collect();
    let rho: Vec<Scalar> = (0..m).map(|_| rnd()).collect();

    let cl: Vec<_> = (0..m).map(|j| params.commit_point(&lbits[j], &r[j])).collect();
    let ca: Vec<_> = (0..m).map(|j| params.commit_point(&a[j], &s[j])).collect();
    let cb: Vec<_> = (0..m).map(|j| params.commit_point(&(lbits[j] * a[j]), &tt[j])).collect();

    // p_{i,k}: coefficient of X^k in p_i(X)
    let coeffs: Vec<Vec<Scalar>> = (0..list.len())
        .map(|i| {
            (0..m).fold(vec![Scalar::ONE], |poly, j| {
                if (i >> j) & 1 == 1 {
                    mul_linear(&poly, a[j], lbits[j])
                } else {
                    mul_linear(&poly, -a[j], Scalar::ONE - lbits[j])
                }
            })
        })
        .collect();
    let g: Vec<S::Value> = (0..m)
        .map(|k| {
            let pk: Vec<Scalar> = coeffs.iter().map(|c| c[k]).collect();
            scheme.msm(&pk, list) + scheme.commit(&Scalar::ZERO, &rho[k])
        })
        .collect();

    let mut t = transcript(params, scheme, ctx, list, &cl, &ca, &cb, &g);
    let x = t.challenge(b"x");

    let f: Vec<Scalar> = (0..m).map(|j| lbits[j] * x + a[j]).collect();
    let za: Vec<Scalar> = (0..m).map(|j| r[j] * x + s[j]).collect();
    let zb: Vec<Scalar> = (0..m).map(|j| r[j] * (x - f[j]) + tt[j]).collect();

    // Y = V_l^{x^m} · Π_k Com(0; ρ_k)^{-x^k}
    let mut xpow = Vec::with_capacity(m + 1);
    let mut acc = Scalar::ONE;
    for _ in 0..=m {
        xpow.push(acc);
        acc *= x;
    }
    let masks: Vec<S::Value> = rho.iter().map(|rk| scheme.commit(&Scalar::ZERO, rk)).collect();
    let y = list[l] * xpow[m] - scheme.msm(&xpow[..m], &masks);
    let response = scheme.zero_respond(&mut t, &y, witness, &rho, &x, rng);

    Ok(OneManyProof { cl, ca, cb, g, f, za, zb, response })
}

pub fn onemany_verify_generic<S: ZeroLanguage>(
    params: &PedersenParams,
    scheme: &S,
    proof: &OneManyProof<S::Value, S::Response>,
    list: &[S::Value],
    ctx: &[u8],
) -> bool {
    let Ok(m) = index_bits(list.len()) else { return false };
    if [proof.cl.len(), proof.ca.len(), proof.cb.len(), proof.g.len(), proof.f.len(), proof.za.len(), proof.zb.len()]
        .iter()
        .any(|&len| len != m)
    {
        return false;
    }
    if !list.iter().chain(proof.g.iter()).all(|v| scheme.accepts(v)) {
        return false;
    }
    let mut t = transcript(params, scheme, ctx, list, &proof.cl, &proof.ca, &proof.cb, &proof.g);
    let x = t.challenge(b"x");

    for j in 0..m {
        if proof.cl[j] * x + proof.ca[j] != params.commit_point(&proof.f[j], &proof.za[j]) {
            return false;
        }
        if proof.cl[j] * (x - proof.f[j]) + proof.cb[j] != params.commit_point(&Scalar::ZERO, &proof.zb[j]) {
            return false;
        }
    }

    let exps: Vec<Scalar> = (0..list.len())
        .map(|i| {
            (0..m).fold(Scalar::ONE, |acc, j| {
                if (i >> j) & 1 == 1 {
                    acc * proof.f[j]
                } else {
                    acc * (x - proof.f[j])
                }
            })
        })
        .collect();
    let mut neg_xpow = Vec::with_capacity(m);
    let mut acc = Scalar::ONE;
    for _ in 0..m {
        neg_xpow.push(-acc);
        acc *= x;
    }
    let y = scheme.msm(&exps, list) + scheme.msm(&neg_xpow, &proof.g);
    scheme.zero_check(&mut t, &y, &proof.response)
}

impl<V: Encode, R: Encode> Encode for OneManyProof<V, R> {
    fn encode(&self, w: &mut Writer) {
        w.u8(self.cl.len() as u8);
        for j in 0..self.cl.len() {
            w.point(&self.cl[j]).point(&self.ca[j]).point(&self.cb[j]);
        }
        for gk in &self.g {
            w.put(gk);
        }
        for j in 0..self.f.len() {
            w.scalar(&self.f[j]).scalar(&self.za[j]).scalar(&self.zb[j]);
        }
        w.put(&self.response);
    }
}

impl<V: Decode, R: Decode> Decode for OneManyProof<V, R> {
    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        let m = r.u8()? as usize;
        if m > MAX_INDEX_BITS {
            return Err(WireError::Invalid("one-out-of-many index width"));
        }
        let (mut cl, mut ca, mut cb) = (Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m));
        for _ in 0..m {
            cl.push(r.point()?);
            ca.push(r.point()?);
            cb.push(r.point()?);
        }
        let g = (0..m).map(|_| r.get()).collect::<Result<Vec<V>, _>>()?;
        let (mut f, mut za, mut zb) = (Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m));
        for _ in 0..m {
            f.push(r.scalar()?);
            za.push(r.scalar()?);
            zb.push(r.scalar()?);
        }
        Ok(OneManyProof { cl, ca, cb, g, f, za, zb, response: r.get()? })
    }
}
