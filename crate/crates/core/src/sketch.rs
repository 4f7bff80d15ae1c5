//! The k-mismatch sketch: power-sum fingerprints that decode to the full
//! mismatch information between two equal-length strings at distance at most k.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decode_algebra::{find_distinct_roots, key_equation_with_len, vand_mul_unchecked, vand_solve};
use crate::error::{usage, Error, Result};
use crate::fp::{poly_inv_series, poly_mul_trunc, FieldParams, Poly};

/// Session-wide sketch configuration; sketches built under different params
/// are not comparable.
#[derive(Clone, Debug)]
pub struct SketchParams {
    pub k: usize,
    /// Karp-Rabin evaluation point, nonzero.
    pub r: u64,
    pub field: FieldParams,
    split_key: u64,
    fact: Arc<[u64]>,
    inv_fact: Arc<[u64]>,
}

impl PartialEq for SketchParams {
    fn eq(&self, o: &Self) -> bool {
        self.k == o.k && self.r == o.r && self.field == o.field && self.split_key == o.split_key
    }
}

impl SketchParams {
    /// Draws `r` and the root-finding key from `rng`.
    pub fn new<R: Rng + ?Sized>(k: usize, field: FieldParams, rng: &mut R) -> Self {
        let r = rng.gen_range(1..field.modulus());
        let key = rng.gen();
        Self::with_r(k, field, r, key)
    }

    pub fn with_r(k: usize, field: FieldParams, r: u64, split_key: u64) -> Self {
        assert!(r % field.modulus() != 0, "evaluation point must be nonzero");
        let t = 2 * k + 1;
        let mut fact = vec![1u64; t + 1];
        for i in 1..=t {
            fact[i] = field.mul(fact[i - 1], i as u64);
        }
        let mut inv_fact = field.batch_inv(&fact).expect("factorials below p are nonzero");
        inv_fact.truncate(t + 1);
        SketchParams {
            k,
            r: r % field.modulus(),
            field,
            split_key,
            fact: fact.into(),
            inv_fact: inv_fact.into(),
        }
    }

    /// Same session randomness with a different threshold.
    pub fn with_k(&self, k: usize) -> Self {
        Self::with_r(k, self.field, self.r, self.split_key)
    }

    fn rng_for(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.split_key ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    fn check_len(&self, len: u64) -> Result<()> {
        if len > self.field.max_n() {
            return Err(Error::Size(format!("length {len} exceeds max {}", self.field.max_n())));
        }
        Ok(())
    }
}

/// One mismatching position: `a` on the first string, `b` on the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mismatch {
    pub index: u64,
    pub a: u64,
    pub b: u64,
}

/// Mismatch information: entries sorted by index, unique, with `a != b`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MismatchInfo {
    entries: Vec<Mismatch>,
}

impl MismatchInfo {
    pub fn new(mut entries: Vec<Mismatch>) -> Result<Self> {
        entries.sort_unstable();
        for w in entries.windows(2) {
            if w[0].index == w[1].index {
                return usage(format!("duplicate mismatch index {}", w[0].index));
            }
        }
        if let Some(m) = entries.iter().find(|m| m.a == m.b) {
            return usage(format!("mismatch at {} has equal symbols", m.index));
        }
        Ok(MismatchInfo { entries })
    }

    /// Caller guarantees sorted, unique, `a != b`.
    pub(crate) fn from_sorted(entries: Vec<Mismatch>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].index < w[1].index));
        debug_assert!(entries.iter().all(|m| m.a != m.b));
        MismatchInfo { entries }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Appends an entry past every existing index.
    pub(crate) fn push(&mut self, m: Mismatch) {
        debug_assert!(self.entries.last().map_or(true, |l| l.index < m.index) && m.a != m.b);
        self.entries.push(m);
    }

    /// MI of two equal-length strings by direct comparison.
    pub fn between(x: &[u64], y: &[u64]) -> Self {
        assert_eq!(x.len(), y.len());
        let entries = x
            .iter()
            .zip(y)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, (&a, &b))| Mismatch { index: i as u64, a, b })
            .collect();
        MismatchInfo { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Mismatch] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &Mismatch> + '_ {
        self.entries.iter()
    }

    pub fn get(&self, index: u64) -> Option<&Mismatch> {
        self.entries.binary_search_by_key(&index, |m| m.index).ok().map(|i| &self.entries[i])
    }

    /// Swaps the roles of the two strings.
    pub fn swapped(&self) -> Self {
        MismatchInfo {
            entries: self.entries.iter().map(|m| Mismatch { index: m.index, a: m.b, b: m.a }).collect(),
        }
    }

    /// Entries with index in `[lo, hi)`, re-based so `lo` becomes 0.
    pub fn window(&self, lo: u64, hi: u64) -> Self {
        MismatchInfo {
            entries: self
                .entries
                .iter()
                .filter(|m| m.index >= lo && m.index < hi)
                .map(|m| Mismatch { index: m.index - lo, ..*m })
                .collect(),
        }
    }

    /// Adds `offset` to every index.
    pub fn shifted(&self, offset: u64) -> Self {
        MismatchInfo {
            entries: self.entries.iter().map(|m| Mismatch { index: m.index + offset, ..*m }).collect(),
        }
    }
}

/// `sk_k(S)`: `phi_0..phi_2k`, `phi2_0..phi2_k`, `psi` and the length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchK {
    pub k: usize,
    pub phi: Vec<u64>,
    pub phi2: Vec<u64>,
    pub psi: u64,
    pub len: u64,
}

/// Result of comparing two sketches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decoded {
    Within(MismatchInfo),
    TooMany,
}

impl Decoded {
    pub fn into_option(self) -> Option<MismatchInfo> {
        match self {
            Decoded::Within(mi) => Some(mi),
            Decoded::TooMany => None,
        }
    }
}

impl SketchK {
    pub fn empty(k: usize) -> Self {
        SketchK { k, phi: vec![0; 2 * k + 1], phi2: vec![0; k + 1], psi: 0, len: 0 }
    }

    /// Serialized size in bytes.
    pub fn byte_len(k: usize) -> usize {
        8 * (2 + 3 * k + 3)
    }

    /// Little-endian words: k, len, phi, phi2, psi.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::byte_len(self.k));
        out.extend_from_slice(&(self.k as u64).to_le_bytes());
        out.extend_from_slice(&self.len.to_le_bytes());
        for w in self.phi.iter().chain(&self.phi2).chain(std::iter::once(&self.psi)) {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let word = |i: usize| -> Result<u64> {
            bytes
                .get(8 * i..8 * i + 8)
                .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
                .ok_or_else(|| Error::Decode("truncated sketch".into()))
        };
        let k = usize::try_from(word(0)?).map_err(|_| Error::Decode("sketch k overflow".into()))?;
        if k > (1 << 24) || bytes.len() != Self::byte_len(k) {
            return Err(Error::Decode(format!("sketch of {} bytes does not match k={k}", bytes.len())));
        }
        let len = word(1)?;
        let phi = (0..2 * k + 1).map(|j| word(2 + j)).collect::<Result<_>>()?;
        let phi2 = (0..k + 1).map(|j| word(3 + 2 * k + j)).collect::<Result<_>>()?;
        let psi = word(4 + 3 * k)?;
        Ok(SketchK { k, phi, phi2, psi, len })
    }

    /// Adds the contribution of substituting `old -> new` at `index`.
    fn add_substitution(&mut self, f: &FieldParams, index: u64, d1: u64, d2: u64, r_pow: u64) {
        let x = index % f.modulus();
        let mut t1 = d1;
        let mut t2 = d2;
        for j in 0..self.phi.len() {
            self.phi[j] = f.add(self.phi[j], t1);
            if j < self.phi2.len() {
                self.phi2[j] = f.add(self.phi2[j], t2);
                t2 = f.mul(t2, x);
            }
            t1 = f.mul(t1, x);
        }
        self.psi = f.add(self.psi, f.mul(d1, r_pow));
    }
}

fn check_k(params: &SketchParams, sk: &SketchK) -> Result<()> {
    if sk.k != params.k {
        return usage(format!("sketch built for k={} used with k={}", sk.k, params.k));
    }
    Ok(())
}

/// Evaluates the defining sums.
pub fn sketch_build(s: &[u64], params: &SketchParams) -> Result<SketchK> {
    params.check_len(s.len() as u64)?;
    let f = &params.field;
    let mut sk = SketchK::empty(params.k);
    sk.len = s.len() as u64;
    let mut r_pow = 1u64;
    for (i, &c) in s.iter().enumerate() {
        let c = f.from_u64(c);
        if c != 0 {
            sk.add_substitution(f, i as u64, c, f.mul(c, c), r_pow);
        }
        r_pow = f.mul(r_pow, params.r);
    }
    Ok(sk)
}

/// Recovers `MI(S, T)` from `sk(S)` and `sk(T)` when `HD(S, T) <= k`.
pub fn sketch_decode(sk_s: &SketchK, sk_t: &SketchK, params: &SketchParams) -> Result<Decoded> {
    check_k(params, sk_s)?;
    check_k(params, sk_t)?;
    if sk_s.len != sk_t.len {
        return usage(format!("decoding sketches of lengths {} and {}", sk_s.len, sk_t.len));
    }
    let f = &params.field;
    let k = params.k;
    let n = sk_s.len;
    let s: Vec<u64> = sk_s.phi.iter().zip(&sk_t.phi).map(|(&a, &b)| f.sub(a, b)).collect();
    let s2: Vec<u64> = sk_s.phi2.iter().zip(&sk_t.phi2).map(|(&a, &b)| f.sub(a, b)).collect();
    let dpsi = f.sub(sk_s.psi, sk_t.psi);

    // Position 0 is invisible to every syndrome but s_0, so locate the
    // nonzero positions from s_1.. and recover position 0 afterwards.
    let (lambda, l) = key_equation_with_len(f, &s[1..]);
    if l > k || lambda.degree() != Some(l) {
        return Ok(Decoded::TooMany);
    }
    let rev = Poly::new(lambda.coeffs.iter().rev().copied().collect());
    let mut rng = params.rng_for(rev.coeffs.first().copied().unwrap_or(0) ^ (l as u64) << 56);
    let Some(xs) = find_distinct_roots(f, &rev, &mut rng) else {
        return Ok(Decoded::TooMany);
    };
    if xs.len() != l || xs.iter().any(|&x| x == 0 || x >= n) {
        return Ok(Decoded::TooMany);
    }
    let alphas = vand_solve(f, &s[1..=l], &xs)?;
    let mut betas = Vec::with_capacity(l + 1);
    let mut rs = Vec::with_capacity(l + 1);
    let mut r0 = s[0];
    for (&x, &a) in xs.iter().zip(&alphas) {
        let r = f.mul(a, f.inv(x)?);
        if r == 0 {
            return Ok(Decoded::TooMany);
        }
        r0 = f.sub(r0, r);
        betas.push(x);
        rs.push(r);
    }
    if r0 != 0 {
        if n == 0 || betas.len() == k {
            return Ok(Decoded::TooMany);
        }
        betas.insert(0, 0);
        rs.insert(0, r0);
    }
    let m = betas.len();
    if vand_mul_unchecked(f, &rs, &betas, s.len()) != s {
        return Ok(Decoded::TooMany);
    }
    let r2 = vand_solve(f, &s2[..m], &betas)?;
    if vand_mul_unchecked(f, &r2, &betas, s2.len()) != s2 {
        return Ok(Decoded::TooMany);
    }
    let mut fp_sum = 0u64;
    let mut entries = Vec::with_capacity(m);
    for i in 0..m {
        let r = rs[i];
        let rr = f.mul(r, r);
        let den = f.inv(f.mul(2, r))?;
        let a = f.mul(f.add(r2[i], rr), den);
        let b = f.mul(f.sub(r2[i], rr), den);
        fp_sum = f.add(fp_sum, f.mul(r, f.pow(params.r, betas[i])));
        entries.push(Mismatch { index: betas[i], a, b });
    }
    if fp_sum != dpsi {
        return Ok(Decoded::TooMany);
    }
    Ok(Decoded::Within(MismatchInfo::from_sorted(entries)))
}

/// Largest MI accepted by [`sketch_apply_mi`].
pub fn apply_mi_limit(k: usize) -> usize {
    4 * k + 2
}

/// `sk(T)` from `sk(S)` where `T` is `S` with every `(i, a, b)` of `mi` applied.
pub fn sketch_apply_mi(sk: &SketchK, mi: &MismatchInfo, params: &SketchParams) -> Result<SketchK> {
    check_k(params, sk)?;
    if mi.len() > apply_mi_limit(params.k) {
        return usage(format!("{} substitutions exceed the limit {}", mi.len(), apply_mi_limit(params.k)));
    }
    if let Some(m) = mi.entries.last() {
        if m.index >= sk.len {
            return usage(format!("substitution index {} beyond length {}", m.index, sk.len));
        }
    }
    Ok(apply_unchecked(sk, mi.entries(), params))
}

pub(crate) fn apply_unchecked(sk: &SketchK, subs: &[Mismatch], params: &SketchParams) -> SketchK {
    let f = &params.field;
    let mut out = sk.clone();
    let mut betas = Vec::with_capacity(subs.len());
    let mut d1 = Vec::with_capacity(subs.len());
    let mut d2 = Vec::with_capacity(subs.len());
    for m in subs {
        let (a, b) = (f.from_u64(m.a), f.from_u64(m.b));
        let delta = f.sub(b, a);
        betas.push(f.from_u64(m.index));
        d1.push(delta);
        d2.push(f.sub(f.mul(b, b), f.mul(a, a)));
        out.psi = f.add(out.psi, f.mul(delta, f.pow(params.r, m.index)));
    }
    let v1 = vand_mul_unchecked(f, &d1, &betas, out.phi.len());
    let v2 = vand_mul_unchecked(f, &d2, &betas, out.phi2.len());
    for (x, v) in out.phi.iter_mut().zip(v1) {
        *x = f.add(*x, v);
    }
    for (x, v) in out.phi2.iter_mut().zip(v2) {
        *x = f.add(*x, v);
    }
    out
}

// Exponential generating function of a power-sum vector: c_j = phi_j / j!.
fn to_egf(params: &SketchParams, v: &[u64]) -> Vec<u64> {
    v.iter().enumerate().map(|(j, &x)| params.field.mul(x, params.inv_fact[j])).collect()
}

fn from_egf(params: &SketchParams, v: &[u64]) -> Vec<u64> {
    v.iter().enumerate().map(|(j, &x)| params.field.mul(x, params.fact[j])).collect()
}

/// `e^{cX}` truncated to `t` terms.
fn exp_series(params: &SketchParams, c: u64, t: usize) -> Vec<u64> {
    let f = &params.field;
    let mut out = Vec::with_capacity(t);
    let mut pw = 1u64;
    for j in 0..t {
        out.push(f.mul(pw, params.inv_fact[j]));
        pw = f.mul(pw, c);
    }
    out
}

/// Multiplies a power-sum vector's EGF by `g` (truncated to the same length).
fn egf_mul(params: &SketchParams, v: &[u64], g: &[u64]) -> Vec<u64> {
    let t = v.len();
    let prod = poly_mul_trunc(&params.field, &to_egf(params, v), g, t).expect("sketch-sized product");
    from_egf(params, &prod)
}

fn zip_add(f: &FieldParams, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect()
}

fn zip_sub(f: &FieldParams, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
}

/// Shifts every position of the string by `u` (i.e. prepends `u` zeros).
fn shift_positions(sk: &SketchK, u: u64, params: &SketchParams, negate: bool) -> (Vec<u64>, Vec<u64>) {
    let f = &params.field;
    let c = if negate { f.neg(f.from_u64(u)) } else { f.from_u64(u) };
    let e = exp_series(params, c, sk.phi.len());
    (egf_mul(params, &sk.phi, &e), egf_mul(params, &sk.phi2, &e[..sk.phi2.len()]))
}

/// `sk(UV)` from `sk(U)` and `sk(V)`.
pub fn sketch_concat(sk_u: &SketchK, sk_v: &SketchK, params: &SketchParams) -> Result<SketchK> {
    check_k(params, sk_u)?;
    check_k(params, sk_v)?;
    let len = sk_u.len.checked_add(sk_v.len).ok_or_else(|| Error::Size("length overflow".into()))?;
    params.check_len(len)?;
    if sk_v.len == 0 {
        return Ok(sk_u.clone());
    }
    let f = &params.field;
    let (pv, pv2) = shift_positions(sk_v, sk_u.len, params, false);
    Ok(SketchK {
        k: params.k,
        phi: zip_add(f, &sk_u.phi, &pv),
        phi2: zip_add(f, &sk_u.phi2, &pv2),
        psi: f.add(sk_u.psi, f.mul(f.pow(params.r, sk_u.len), sk_v.psi)),
        len,
    })
}

/// `sk(U)` from `sk(UV)` and `sk(V)`.
pub fn sketch_split_left(sk_uv: &SketchK, sk_v: &SketchK, params: &SketchParams) -> Result<SketchK> {
    check_k(params, sk_uv)?;
    check_k(params, sk_v)?;
    let Some(u_len) = sk_uv.len.checked_sub(sk_v.len) else {
        return usage(format!("suffix length {} exceeds whole length {}", sk_v.len, sk_uv.len));
    };
    let f = &params.field;
    let (pv, pv2) = shift_positions(sk_v, u_len, params, false);
    Ok(SketchK {
        k: params.k,
        phi: zip_sub(f, &sk_uv.phi, &pv),
        phi2: zip_sub(f, &sk_uv.phi2, &pv2),
        psi: f.sub(sk_uv.psi, f.mul(f.pow(params.r, u_len), sk_v.psi)),
        len: u_len,
    })
}

/// `sk(V)` from `sk(UV)` and `sk(U)`.
pub fn sketch_split_right(sk_uv: &SketchK, sk_u: &SketchK, params: &SketchParams) -> Result<SketchK> {
    check_k(params, sk_uv)?;
    check_k(params, sk_u)?;
    let Some(v_len) = sk_uv.len.checked_sub(sk_u.len) else {
        return usage(format!("prefix length {} exceeds whole length {}", sk_u.len, sk_uv.len));
    };
    let f = &params.field;
    let diff = SketchK {
        k: params.k,
        phi: zip_sub(f, &sk_uv.phi, &sk_u.phi),
        phi2: zip_sub(f, &sk_uv.phi2, &sk_u.phi2),
        psi: f.sub(sk_uv.psi, sk_u.psi),
        len: v_len,
    };
    let (phi, phi2) = shift_positions(&diff, sk_u.len, params, true);
    let r_inv = f.inv(f.pow(params.r, sk_u.len))?;
    Ok(SketchK { k: params.k, phi, phi2, psi: f.mul(diff.psi, r_inv), len: v_len })
}

/// `(e^{cX} - 1) / X` truncated to `t` terms.
fn exp_minus_one_over_x(params: &SketchParams, c: u64, t: usize) -> Vec<u64> {
    let f = &params.field;
    let mut out = Vec::with_capacity(t);
    let mut pw = c;
    for j in 0..t {
        out.push(f.mul(pw, params.inv_fact[j + 1]));
        pw = f.mul(pw, c);
    }
    out
}

/// `sum_{i<m} e^{i l X}` truncated to `t` terms; `l > 0`.
fn power_series_factor(params: &SketchParams, l: u64, m: u64, t: usize) -> Vec<u64> {
    let f = &params.field;
    let num = exp_minus_one_over_x(params, f.mul(f.from_u64(m), f.from_u64(l)), t);
    let den = exp_minus_one_over_x(params, f.from_u64(l), t);
    let den_inv = poly_inv_series(f, &Poly::new(den), t).expect("constant term is l != 0");
    poly_mul_trunc(f, &num, &den_inv.coeffs, t).expect("sketch-sized product")
}

/// `sum_{i<m} r^{i l}`.
fn geometric(params: &SketchParams, l: u64, m: u64) -> u64 {
    let f = &params.field;
    let q = f.pow(params.r, l);
    if q == 1 {
        return f.from_u64(m);
    }
    let num = f.sub(f.pow(q, m), 1);
    f.mul(num, f.inv(f.sub(q, 1)).expect("q != 1"))
}

/// `sk(U^m)` from `sk(U)`.
pub fn sketch_power(sk_u: &SketchK, m: u64, params: &SketchParams) -> Result<SketchK> {
    check_k(params, sk_u)?;
    let len = sk_u.len.checked_mul(m).ok_or_else(|| Error::Size("length overflow".into()))?;
    params.check_len(len)?;
    if m == 0 || sk_u.len == 0 {
        return Ok(SketchK::empty(params.k));
    }
    let f = &params.field;
    let g = power_series_factor(params, sk_u.len, m, sk_u.phi.len());
    Ok(SketchK {
        k: params.k,
        phi: egf_mul(params, &sk_u.phi, &g),
        phi2: egf_mul(params, &sk_u.phi2, &g[..sk_u.phi2.len()]),
        psi: f.mul(sk_u.psi, geometric(params, sk_u.len, m)),
        len,
    })
}

/// `sk(U)` from `sk(U^m)`.
pub fn sketch_root(sk_um: &SketchK, m: u64, params: &SketchParams) -> Result<SketchK> {
    check_k(params, sk_um)?;
    if m == 0 || sk_um.len % m != 0 {
        return usage(format!("length {} is not a multiple of {m}", sk_um.len));
    }
    let l = sk_um.len / m;
    if l == 0 {
        return Ok(SketchK::empty(params.k));
    }
    let f = &params.field;
    let t = sk_um.phi.len();
    let g = power_series_factor(params, l, m, t);
    let g_inv = poly_inv_series(f, &Poly::new(g), t)?.coeffs;
    let mut g_inv = g_inv;
    g_inv.resize(t, 0);
    let geo = geometric(params, l, m);
    let geo_inv = f.inv(geo).map_err(|_| Error::Domain("geometric factor vanishes"))?;
    Ok(SketchK {
        k: params.k,
        phi: egf_mul(params, &sk_um.phi, &g_inv),
        phi2: egf_mul(params, &sk_um.phi2, &g_inv[..sk_um.phi2.len()]),
        psi: f.mul(sk_um.psi, geo_inv),
        len: l,
    })
}

#[derive(Clone, Copy, Debug)]
struct Delta {
    index: u64,
    d1: u64,
    d2: u64,
}

/// Maintains `sk(X)` of an evolving string under appends and substitutions.
///
/// Updates are buffered (at most `k` pending); a full buffer is handed to a
/// background flush that folds one entry into the base sketch per update, so
/// each update costs `O(k)` field operations.
#[derive(Clone, Debug)]
pub struct RollingSketcher {
    params: SketchParams,
    base: SketchK,
    flushing: Vec<Delta>,
    flush_pos: usize,
    pending: Vec<Delta>,
    eager: bool,
    len: u64,
}

impl RollingSketcher {
    pub fn new(params: &SketchParams) -> Self {
        Self::from_sketch(params, SketchK::empty(params.k))
    }

    /// Continues from an existing sketch.
    pub fn from_sketch(params: &SketchParams, sk: SketchK) -> Self {
        let len = sk.len;
        RollingSketcher {
            params: params.clone(),
            base: sk,
            flushing: Vec::new(),
            flush_pos: 0,
            pending: Vec::with_capacity(params.k.max(1)),
            eager: false,
            len,
        }
    }

    /// Flush the buffer in one go when it fills instead of in the background.
    pub fn set_eager(&mut self, eager: bool) {
        self.eager = eager;
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    pub fn params(&self) -> &SketchParams {
        &self.params
    }

    fn fold(&mut self, d: Delta) {
        let f = self.params.field;
        let r_pow = f.pow(self.params.r, d.index);
        self.base.add_substitution(&f, d.index, d.d1, d.d2, r_pow);
    }

    fn step(&mut self) {
        if self.flush_pos < self.flushing.len() {
            let d = self.flushing[self.flush_pos];
            self.flush_pos += 1;
            self.fold(d);
        }
    }

    fn finish_flush(&mut self) {
        while self.flush_pos < self.flushing.len() {
            self.step();
        }
        self.flushing.clear();
        self.flush_pos = 0;
    }

    fn push(&mut self, d: Delta) {
        self.pending.push(d);
        if self.eager {
            if self.pending.len() >= self.params.k.max(1) {
                for d in std::mem::take(&mut self.pending) {
                    self.fold(d);
                }
            }
            return;
        }
        self.step();
        if self.pending.len() >= self.params.k.max(1) {
            self.finish_flush();
            std::mem::swap(&mut self.flushing, &mut self.pending);
        }
        debug_assert!(self.pending.len() <= self.params.k.max(1));
    }

    /// Appends symbol `a`.
    pub fn append(&mut self, a: u64) -> Result<()> {
        self.params.check_len(self.len + 1)?;
        self.len += 1;
        self.base.len = self.len;
        let f = &self.params.field;
        let a = f.from_u64(a);
        if a != 0 {
            self.push(Delta { index: self.len - 1, d1: a, d2: f.mul(a, a) });
        }
        Ok(())
    }

    /// Replaces `old` by `new` at position `i`; `old` must be the current symbol.
    pub fn substitute(&mut self, i: u64, old: u64, new: u64) -> Result<()> {
        if i >= self.len {
            return usage(format!("substitution at {i} beyond length {}", self.len));
        }
        let f = &self.params.field;
        let (old, new) = (f.from_u64(old), f.from_u64(new));
        if old != new {
            let d2 = f.sub(f.mul(new, new), f.mul(old, old));
            self.push(Delta { index: i, d1: f.sub(new, old), d2 });
        }
        Ok(())
    }

    /// Exact sketch of the current string; folds every buffered update.
    pub fn snapshot(&mut self) -> SketchK {
        self.finish_flush();
        for d in std::mem::take(&mut self.pending) {
            self.fold(d);
        }
        self.base.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::GOLDILOCKS;

    fn params(k: usize, seed: u64) -> SketchParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SketchParams::new(k, FieldParams::goldilocks(), &mut rng)
    }

    // Independent evaluation of the defining sums with u128 arithmetic.
    fn oracle(s: &[u64], k: usize, r: u64) -> SketchK {
        let p = GOLDILOCKS as u128;
        let powm = |b: u128, e: u64| {
            let mut acc = 1u128;
            for _ in 0..e {
                acc = acc * b % p;
            }
            acc
        };
        let mut phi = vec![0u128; 2 * k + 1];
        let mut phi2 = vec![0u128; k + 1];
        let mut psi = 0u128;
        for (i, &c) in s.iter().enumerate() {
            let c = c as u128 % p;
            for (j, x) in phi.iter_mut().enumerate() {
                *x = (*x + c * powm(i as u128, j as u64)) % p;
            }
            for (j, x) in phi2.iter_mut().enumerate() {
                *x = (*x + c * c % p * powm(i as u128, j as u64)) % p;
            }
            psi = (psi + c * powm(r as u128, i as u64)) % p;
        }
        SketchK {
            k,
            phi: phi.into_iter().map(|x| x as u64).collect(),
            phi2: phi2.into_iter().map(|x| x as u64).collect(),
            psi: psi as u64,
            len: s.len() as u64,
        }
    }

    fn random_string(rng: &mut ChaCha8Rng, n: usize, sigma: u64) -> Vec<u64> {
        (0..n).map(|_| rng.gen_range(0..sigma)).collect()
    }

    #[test]
    fn build_examples() {
        let p = params(3, 1);
        assert_eq!(sketch_build(&[], &p).unwrap(), SketchK::empty(3));
        let sk = sketch_build(&[5], &p).unwrap();
        assert_eq!(sk.phi, vec![5, 0, 0, 0, 0, 0, 0]);
        assert_eq!(sk.phi2, vec![25, 0, 0, 0]);
        assert_eq!(sk.psi, 5);
        let p8 = params(8, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_string(&mut rng, 100, 1000);
        assert_eq!(sketch_build(&s, &p8).unwrap(), oracle(&s, 8, p8.r));
    }

    #[test]
    fn build_rejects_overlong() {
        let field = FieldParams::new(GOLDILOCKS, 4).unwrap();
        let p = SketchParams::with_r(1, field, 3, 0);
        assert!(matches!(sketch_build(&[1; 5], &p), Err(Error::Size(_))));
    }

    #[test]
    fn decode_examples() {
        let p = params(4, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_string(&mut rng, 50, 20);
        let sk = sketch_build(&s, &p).unwrap();
        assert_eq!(sketch_decode(&sk, &sk, &p).unwrap(), Decoded::Within(MismatchInfo::empty()));
        let mut t = s.clone();
        t[7] = 9;
        let mut s2 = s.clone();
        s2[7] = 3;
        let d = sketch_decode(&sketch_build(&s2, &p).unwrap(), &sketch_build(&t, &p).unwrap(), &p).unwrap();
        assert_eq!(d, Decoded::Within(MismatchInfo::new(vec![Mismatch { index: 7, a: 3, b: 9 }]).unwrap()));
        let short = sketch_build(&s[..10], &p).unwrap();
        assert!(matches!(sketch_decode(&sk, &short, &p), Err(Error::Usage(_))));
    }

    #[test]
    fn decode_position_zero_and_extremes() {
        let p = params(3, 6);
        let s = vec![1, 2, 3, 4, 5, 6, 7, 8];
        let mut t = s.clone();
        t[0] = 100;
        t[7] = 0;
        let d = sketch_decode(&sketch_build(&s, &p).unwrap(), &sketch_build(&t, &p).unwrap(), &p).unwrap();
        assert_eq!(d, Decoded::Within(MismatchInfo::between(&s, &t)));
        let mut t3 = t.clone();
        t3[3] = 0;
        let d = sketch_decode(&sketch_build(&s, &p).unwrap(), &sketch_build(&t3, &p).unwrap(), &p).unwrap();
        assert_eq!(d, Decoded::Within(MismatchInfo::between(&s, &t3)));
        t3[4] = 0;
        let d = sketch_decode(&sketch_build(&s, &p).unwrap(), &sketch_build(&t3, &p).unwrap(), &p).unwrap();
        assert_eq!(d, Decoded::TooMany);
    }

    #[test]
    fn decode_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in [0usize, 1, 2, 5, 16] {
            let p = params(k, 8 + k as u64);
            for _ in 0..100 {
                let n = rng.gen_range(1..200usize);
                let s = random_string(&mut rng, n, 4);
                let mut t = s.clone();
                let hd = rng.gen_range(0..=(k + 1).min(n));
                let mut idx: Vec<usize> = (0..n).collect();
                for i in 0..hd {
                    let j = rng.gen_range(i..n);
                    idx.swap(i, j);
                    t[idx[i]] = s[idx[i]] + 1 + rng.gen_range(0..3);
                }
                let d = sketch_decode(&sketch_build(&s, &p).unwrap(), &sketch_build(&t, &p).unwrap(), &p).unwrap();
                if hd <= k {
                    assert_eq!(d, Decoded::Within(MismatchInfo::between(&s, &t)));
                } else {
                    assert_eq!(d, Decoded::TooMany);
                }
            }
        }
    }

    #[test]
    fn apply_mi_matches_rebuild() {
        let p = params(5, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let s = random_string(&mut rng, 60, 50);
        let sk = sketch_build(&s, &p).unwrap();
        assert_eq!(sketch_apply_mi(&sk, &MismatchInfo::empty(), &p).unwrap(), sk);
        for count in [1usize, 10, 22] {
            let mut t = s.clone();
            for _ in 0..count {
                let i = rng.gen_range(0..60);
                t[i] = rng.gen_range(0..50);
            }
            let mi = MismatchInfo::between(&s, &t);
            assert_eq!(sketch_apply_mi(&sk, &mi, &p).unwrap(), sketch_build(&t, &p).unwrap());
        }
        let bad = MismatchInfo::new(vec![Mismatch { index: 60, a: 1, b: 2 }]).unwrap();
        assert!(matches!(sketch_apply_mi(&sk, &bad, &p), Err(Error::Usage(_))));
    }

    #[test]
    fn concat_split_power_root() {
        let p = params(6, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let (lu, lv) = (rng.gen_range(0..40), rng.gen_range(0..40));
            let u = random_string(&mut rng, lu, 30);
            let v = random_string(&mut rng, lv, 30);
            let uv: Vec<u64> = u.iter().chain(&v).copied().collect();
            let (su, sv, suv) =
                (sketch_build(&u, &p).unwrap(), sketch_build(&v, &p).unwrap(), sketch_build(&uv, &p).unwrap());
            assert_eq!(sketch_concat(&su, &sv, &p).unwrap(), suv);
            assert_eq!(sketch_split_right(&suv, &su, &p).unwrap(), sv);
            assert_eq!(sketch_split_left(&suv, &sv, &p).unwrap(), su);
            let m = rng.gen_range(0..6u64);
            let um: Vec<u64> = (0..m).flat_map(|_| u.iter().copied()).collect();
            let sum = sketch_power(&su, m, &p).unwrap();
            assert_eq!(sum, sketch_build(&um, &p).unwrap());
            if m > 0 {
                assert_eq!(sketch_root(&sum, m, &p).unwrap(), su);
            }
        }
        let ab = sketch_build(&[1, 2], &p).unwrap();
        assert_eq!(sketch_power(&ab, 3, &p).unwrap(), sketch_build(&[1, 2, 1, 2, 1, 2], &p).unwrap());
        assert_eq!(sketch_power(&ab, 1, &p).unwrap(), ab);
        assert_eq!(sketch_concat(&ab, &SketchK::empty(6), &p).unwrap(), ab);
    }

    #[test]
    fn rolling_matches_shadow() {
        for eager in [false, true] {
            let p = params(3, 13);
            let mut rng = ChaCha8Rng::seed_from_u64(14);
            let mut rs = RollingSketcher::new(&p);
            rs.set_eager(eager);
            let mut shadow: Vec<u64> = Vec::new();
            for step in 0..500 {
                if shadow.is_empty() || rng.gen_bool(0.6) {
                    let a = rng.gen_range(0..10);
                    rs.append(a).unwrap();
                    shadow.push(a);
                } else {
                    let i = rng.gen_range(0..shadow.len());
                    let b = rng.gen_range(0..10);
                    rs.substitute(i as u64, shadow[i], b).unwrap();
                    shadow[i] = b;
                }
                assert!(rs.pending() <= 3);
                if step % 37 == 0 {
                    assert_eq!(rs.snapshot(), sketch_build(&shadow, &p).unwrap());
                }
            }
            assert_eq!(rs.snapshot(), sketch_build(&shadow, &p).unwrap());
            let before = rs.snapshot();
            rs.substitute(4, shadow[4], shadow[4]).unwrap();
            assert_eq!(rs.snapshot(), before);
        }
    }

    #[test]
    fn serialization_round_trip() {
        let p = params(4, 15);
        let sk = sketch_build(&[3, 1, 4, 1, 5, 9, 2, 6], &p).unwrap();
        let bytes = sk.to_bytes();
        assert_eq!(bytes.len(), 16 + 8 * (3 * 4 + 3));
        assert_eq!(SketchK::from_bytes(&bytes).unwrap(), sk);
        assert!(SketchK::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
