//! One-way encoding of all k-mismatch occurrences of a pattern in a text of
//! length at most `5n/4`, and the matching decoder.

use std::borrow::Cow;
use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{usage, Error, Result};
use crate::fp::FieldParams;
use crate::occ_index::{period_from_overlap, width_for, BitSink, BitSource, PeriodStructure};
use crate::readonly::{readonly_kmismatch, RandomAccessString};
use crate::sketch::{Mismatch, MismatchInfo, SketchK, SketchParams};

pub const MAGIC: &[u8; 4] = b"HMK1";
const FLAG_FULL: u8 = 1;
const FLAG_SKETCHES: u8 = 2;

/// Symbols at or above this value are rejected by the codec.
pub const SYMBOL_LIMIT: u64 = 1 << 62;

/// Seed used by [`decode`] for its internal matcher.
pub const DECODE_SEED: u64 = 0x484d_4b31;

/// Occurrence data sent when at least one occurrence exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccBody {
    pub left: u64,
    pub right: u64,
    pub mi_left: MismatchInfo,
    pub mi_right: MismatchInfo,
    /// gcd of the occurrence gaps, 0 for a single occurrence.
    pub d: u64,
    pub ps: PeriodStructure,
    /// `sk(T[0..left))` and `sk(T[0..right))`.
    pub sketches: Option<(SketchK, SketchK)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccMessage {
    pub n: u64,
    pub k: u64,
    /// Symbols lie in `[0, sigma)`.
    pub sigma: u64,
    pub body: Option<OccBody>,
}

fn write_mi(w: &mut BitSink, mi: &MismatchInfo, sw: u32) {
    w.gamma(mi.len() as u64);
    let mut prev: Option<u64> = None;
    for m in mi.iter() {
        w.gamma(prev.map_or(m.index, |p| m.index - p - 1));
        prev = Some(m.index);
        w.fixed(sw, m.a);
        w.fixed(sw, m.b);
    }
}

fn read_mi(r: &mut BitSource, k: u64, n: u64, sigma: u64, sw: u32) -> Result<MismatchInfo> {
    let bad = |m: &str| Error::Decode(format!("mismatch list: {m}"));
    let len = r.gamma_max(k, "mismatch count")?;
    let mut out = Vec::with_capacity(len as usize);
    let mut prev: Option<u64> = None;
    for _ in 0..len {
        let g = r.gamma_max(n, "mismatch gap")?;
        let index = prev.map_or(g, |p| p + g + 1);
        if index >= n {
            return Err(bad("index outside the pattern"));
        }
        prev = Some(index);
        let (a, b) = (r.fixed(sw)?, r.fixed(sw)?);
        if a >= sigma || b >= sigma || a == b {
            return Err(bad("symbol pair"));
        }
        out.push(Mismatch { index, a, b });
    }
    MismatchInfo::new(out).map_err(|e| bad(&e.to_string()))
}

fn read_sketch(r: &mut BitSource, k: u64) -> Result<SketchK> {
    let sk = SketchK::from_bytes(&r.bytes(SketchK::byte_len(k as usize))?)?;
    if sk.k as u64 != k {
        return Err(Error::Decode("sketch threshold differs from header".into()));
    }
    Ok(sk)
}

impl OccMessage {
    pub fn empty(n: u64, k: u64, sigma: u64) -> Self {
        OccMessage { n, k, sigma, body: None }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut flags = 0;
        if let Some(b) = &self.body {
            flags |= FLAG_FULL;
            if b.sketches.is_some() {
                flags |= FLAG_SKETCHES;
            }
        }
        let mut w = BitSink::new();
        w.bytes(MAGIC);
        w.fixed(8, flags as u64);
        w.gamma(self.n);
        w.gamma(self.k);
        w.gamma(self.sigma);
        if let Some(b) = &self.body {
            let sw = width_for(self.sigma);
            w.gamma(b.left);
            w.gamma(b.right - b.left);
            w.gamma(b.d);
            write_mi(&mut w, &b.mi_left, sw);
            write_mi(&mut w, &b.mi_right, sw);
            b.ps.write(&mut w, self.sigma);
            if let Some((s1, s2)) = &b.sketches {
                w.bytes(&s1.to_bytes());
                w.bytes(&s2.to_bytes());
            }
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Decode(format!("message: {m}"));
        let mut r = BitSource::new(bytes);
        if r.bytes(4)? != MAGIC {
            return Err(bad("bad magic"));
        }
        let flags = r.fixed(8)? as u8;
        if flags & !(FLAG_FULL | FLAG_SKETCHES) != 0 || flags == FLAG_SKETCHES {
            return Err(bad("unknown flags"));
        }
        let n = r.gamma_max(1 << 48, "n")?;
        let k = r.gamma_max(n, "k")?;
        let sigma = r.gamma_max(SYMBOL_LIMIT, "alphabet size")?;
        if n == 0 || sigma == 0 {
            return Err(bad("empty pattern or alphabet"));
        }
        if flags & FLAG_FULL == 0 {
            return Ok(OccMessage::empty(n, k, sigma));
        }
        let sw = width_for(sigma);
        let left = r.gamma()?;
        let right = left.checked_add(r.gamma_max(n / 4, "occurrence span")?).ok_or_else(|| bad("span"))?;
        let d = r.gamma_max(n, "gcd")?;
        let mi_left = read_mi(&mut r, k, n, sigma, sw)?;
        let mi_right = read_mi(&mut r, k, n, sigma, sw)?;
        let ps = PeriodStructure::read(&mut r, sigma)?;
        if ps.n() != n || ps.gcd() != d || (d == 0) != (left == right) || (d != 0 && (right - left) % d != 0) {
            return Err(bad("period structure disagrees with the header"));
        }
        let sketches = if flags & FLAG_SKETCHES != 0 { Some((read_sketch(&mut r, k)?, read_sketch(&mut r, k)?)) } else { None };
        Ok(OccMessage { n, k, sigma, body: Some(OccBody { left, right, mi_left, mi_right, d, ps, sketches }) })
    }
}

impl From<OccBody> for Cow<'_, OccBody> {
    fn from(b: OccBody) -> Self {
        Cow::Owned(b)
    }
}

impl<'a> From<&'a OccBody> for Cow<'a, OccBody> {
    fn from(b: &'a OccBody) -> Self {
        Cow::Borrowed(b)
    }
}

/// Accumulates occurrences in increasing order of start.
#[derive(Clone, Debug)]
pub struct OccBuilder {
    n: u64,
    k: u64,
    ps: PeriodStructure,
    first: Option<(u64, MismatchInfo, Option<SketchK>)>,
    last: Option<(u64, MismatchInfo, Option<SketchK>)>,
    count: u64,
}

impl OccBuilder {
    pub fn new(n: u64, k: u64) -> Result<Self> {
        Ok(OccBuilder { n, k, ps: PeriodStructure::new(n, 2 * k)?, first: None, last: None, count: 0 })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn last_start(&self) -> Option<u64> {
        self.last.as_ref().map(|l| l.0)
    }

    pub fn structure(&self) -> &PeriodStructure {
        &self.ps
    }

    /// Adds an occurrence past every earlier one, at most `n/4` after the
    /// previous.
    pub fn push(&mut self, start: u64, mi: MismatchInfo, sketch: Option<SketchK>) -> Result<()> {
        if mi.len() as u64 > self.k || mi.entries().last().is_some_and(|m| m.index >= self.n) {
            return usage(format!("occurrence at {start} is not a {}-mismatch occurrence", self.k));
        }
        if let Some((ls, lmi, _)) = &self.last {
            if start <= *ls {
                return usage(format!("occurrence at {start} not after {ls}"));
            }
            let (p, pmi) = period_from_overlap(*ls, lmi, start, &mi, self.n)?;
            self.ps.add_period(p, &pmi)?;
        }
        let entry = (start, mi, sketch);
        if self.first.is_none() {
            self.first = Some(entry.clone());
        }
        self.last = Some(entry);
        self.count += 1;
        Ok(())
    }

    pub fn finish(self, sigma: u64) -> OccMessage {
        let body = match (self.first, self.last) {
            (Some((left, mi_left, s1)), Some((right, mi_right, s2))) => Some(OccBody {
                left,
                right,
                mi_left,
                mi_right,
                d: self.ps.gcd(),
                ps: self.ps,
                sketches: s1.zip(s2),
            }),
            _ => None,
        };
        OccMessage { n: self.n, k: self.k, sigma, body }
    }
}

/// Random access to the proxy pattern and proxy text of a message body.
#[derive(Clone, Debug)]
pub struct ProxyAccessor<'a> {
    body: Cow<'a, OccBody>,
    n: u64,
    sentinel_base: u64,
    // pattern symbol by i mod d (by i when d = 0)
    by_class: BTreeMap<u64, u64>,
}

impl<'a> ProxyAccessor<'a> {
    /// Sentinels are `sentinel_base + (i mod d)`; the base must exceed every
    /// real symbol.
    pub fn new(body: impl Into<Cow<'a, OccBody>>, n: u64, sentinel_base: u64) -> Self {
        let body = body.into();
        let mut by_class = BTreeMap::new();
        for m in body.mi_left.iter().chain(body.mi_right.iter()) {
            let key = if body.d == 0 { m.index } else { m.index % body.d };
            by_class.insert(key, m.a);
        }
        ProxyAccessor { body, n, sentinel_base, by_class }
    }

    pub fn body(&self) -> &OccBody {
        &self.body
    }

    fn key(&self, i: u64) -> u64 {
        if self.body.d == 0 {
            i
        } else {
            i % self.body.d
        }
    }

    pub fn sentinel_base(&self) -> u64 {
        self.sentinel_base
    }

    pub fn is_sentinel(&self, a: u64) -> bool {
        a >= self.sentinel_base
    }

    /// Length of the trimmed text `T'`.
    pub fn text_len(&self) -> u64 {
        self.body.right - self.body.left + self.n
    }

    /// `P#[i]`.
    pub fn pattern(&self, i: u64) -> u64 {
        debug_assert!(i < self.n);
        if !self.body.ps.is_uniform(i) {
            return self.body.ps.query(i).expect("in range").expect("non-uniform class");
        }
        let key = self.key(i);
        self.by_class.get(&key).copied().unwrap_or(self.sentinel_base + key)
    }

    /// `T'#[j]`.
    pub fn text(&self, j: u64) -> u64 {
        debug_assert!(j < self.text_len());
        let (mi, i) = if j < self.n { (&self.body.mi_left, j) } else { (&self.body.mi_right, j - (self.body.right - self.body.left)) };
        mi.get(i).map_or_else(|| self.pattern(i), |m| m.b)
    }

    pub fn pattern_view(&self) -> ProxyPattern<'_, 'a> {
        ProxyPattern(self)
    }

    pub fn text_view(&self) -> ProxyText<'_, 'a> {
        ProxyText(self)
    }
}

pub struct ProxyPattern<'b, 'a>(&'b ProxyAccessor<'a>);
pub struct ProxyText<'b, 'a>(&'b ProxyAccessor<'a>);

impl RandomAccessString for ProxyPattern<'_, '_> {
    fn len(&self) -> u64 {
        self.0.n
    }

    fn get(&self, i: u64) -> u64 {
        self.0.pattern(i)
    }
}

impl RandomAccessString for ProxyText<'_, '_> {
    fn len(&self) -> u64 {
        self.0.text_len()
    }

    fn get(&self, j: u64) -> u64 {
        self.0.text(j)
    }
}

fn check_symbols(s: &[u64]) -> Result<u64> {
    match s.iter().max() {
        Some(&m) if m >= SYMBOL_LIMIT => usage(format!("symbol {m} exceeds the codec limit")),
        m => Ok(m.map_or(1, |&m| m + 1)),
    }
}

/// How [`encode_with`] finds the occurrences it encodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OccurrenceSource {
    /// Direct comparison at every alignment.
    #[default]
    Naive,
    /// The read-only streaming matcher with the given seed.
    ReadOnly { seed: u64 },
}

/// All k-mismatch occurrences of `p` in `t` with their mismatch information.
pub fn occurrences(p: &[u64], t: &[u64], k: usize, source: OccurrenceSource) -> Result<Vec<(u64, MismatchInfo)>> {
    if p.is_empty() || p.len() > t.len() {
        return Ok(Vec::new());
    }
    match source {
        OccurrenceSource::Naive => Ok(crate::periodic::hamming_all_naive(p, t)
            .into_iter()
            .enumerate()
            .filter(|&(_, h)| h <= k)
            .map(|(s, _)| (s as u64, MismatchInfo::between(p, &t[s..s + p.len()])))
            .collect()),
        OccurrenceSource::ReadOnly { seed } => {
            let params = decode_params(k, seed);
            Ok(readonly_kmismatch(p, t, k, &params)?
                .into_iter()
                .map(|r| (r.start, r.mi.expect("requested")))
                .collect())
        }
    }
}

fn decode_params(k: usize, seed: u64) -> SketchParams {
    SketchParams::new(k, FieldParams::goldilocks(), &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Message for pattern `p` and text `t` with `4|t| <= 5|p|`.
pub fn encode(p: &[u64], t: &[u64], k: usize) -> Result<Vec<u8>> {
    encode_with(p, t, k, OccurrenceSource::Naive)
}

pub fn encode_with(p: &[u64], t: &[u64], k: usize, source: OccurrenceSource) -> Result<Vec<u8>> {
    Ok(encode_message(p, t, k, source)?.to_bytes())
}

pub fn encode_message(p: &[u64], t: &[u64], k: usize, source: OccurrenceSource) -> Result<OccMessage> {
    let n = p.len() as u64;
    if n == 0 {
        return usage("pattern must be nonempty");
    }
    if 4 * t.len() as u64 > 5 * n {
        return usage(format!("text of length {} exceeds 5/4 of the pattern length {n}", t.len()));
    }
    let sigma = check_symbols(p)?.max(check_symbols(t)?);
    let mut b = OccBuilder::new(n, k as u64)?;
    for (s, mi) in occurrences(p, t, k, source)? {
        b.push(s, mi, None)?;
    }
    Ok(b.finish(sigma))
}

/// Every k-mismatch occurrence encoded in `msg`, shifted to text positions.
pub fn decode(msg: &[u8]) -> Result<Vec<(u64, MismatchInfo)>> {
    decode_message(&OccMessage::from_bytes(msg)?, DECODE_SEED)
}

pub fn decode_message(msg: &OccMessage, seed: u64) -> Result<Vec<(u64, MismatchInfo)>> {
    let Some(body) = &msg.body else { return Ok(Vec::new()) };
    let acc = ProxyAccessor::new(body, msg.n, msg.sigma + 1);
    let params = decode_params(msg.k as usize, seed);
    let found = readonly_kmismatch(&acc.pattern_view(), &acc.text_view(), msg.k as usize, &params)?;
    Ok(found.into_iter().map(|r| (body.left + r.start, r.mi.expect("requested"))).collect())
}

/// Occurrences in a text of any length, by encoding and decoding chunks of
/// length `5n/4` that overlap by `n - 1`.
pub fn chunk_driver(p: &[u64], t: &[u64], k: usize) -> Result<Vec<(u64, MismatchInfo)>> {
    let n = p.len();
    if n == 0 {
        return usage("pattern must be nonempty");
    }
    let chunk = 5 * n / 4;
    let step = chunk - n + 1;
    let mut out = Vec::new();
    let mut off = 0;
    while off + n <= t.len() {
        let end = (off + chunk).min(t.len());
        for (s, mi) in decode(&encode(p, &t[off..end], k)?)? {
            out.push((off as u64 + s, mi));
        }
        off += step;
    }
    Ok(out)
}
