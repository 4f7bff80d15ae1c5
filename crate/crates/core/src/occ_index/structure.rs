use std::collections::BTreeMap;

use super::bits::{width_for, BitSink, BitSource};
use super::membership::MembershipSet;
use super::rle::RleString;
use crate::error::{usage, Error, Result};
use crate::sketch::MismatchInfo;

/// Filler of unused positions in the majority super-string.
pub const BLANK: u64 = u64::MAX;
/// Majority slot of a class without a strict majority.
pub const NO_MAJORITY: u64 = u64::MAX - 1;
/// Largest admissible input symbol.
pub const MAX_SYMBOL: u64 = u64::MAX - 2;

/// Symbol multiplicities of one class.
pub type Multiset = BTreeMap<u64, u64>;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn mod_inv(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "{a} not invertible mod {m}");
    t0.rem_euclid(m as i128) as u64
}

/// `sum_{i<n} floor((a*i + b) / m)`.
fn floor_sum(n: u128, m: u128, mut a: u128, mut b: u128) -> u128 {
    let mut n = n;
    let mut m = m;
    let mut ans = 0u128;
    loop {
        if a >= m {
            ans += n * (n.saturating_sub(1)) / 2 * (a / m);
            a %= m;
        }
        if b >= m {
            ans += n * (b / m);
            b %= m;
        }
        let y_max = a * n + b;
        if y_max < m {
            break;
        }
        n = y_max / m;
        b = y_max % m;
        std::mem::swap(&mut m, &mut a);
    }
    ans
}

fn majority(ms: &Multiset) -> u64 {
    let total: u64 = ms.values().sum();
    ms.iter().find(|&(_, &c)| 2 * c > total).map_or(NO_MAJORITY, |(&s, _)| s)
}

/// Merges equal neighbours and drops empty runs.
fn push_run(runs: &mut Vec<(u64, u64)>, len: u64, sym: u64) {
    if len == 0 {
        return;
    }
    match runs.last_mut() {
        Some(last) if last.1 == sym => last.0 += len,
        _ => runs.push((len, sym)),
    }
}

/// Runs of a linear string of length `len` from sparse known entries, each
/// unknown stretch copying its left neighbour (the first stretch copies the
/// right one).
fn linear_fill(known: &BTreeMap<u64, u64>, len: u64) -> Vec<(u64, u64)> {
    let mut runs = Vec::new();
    let mut it = known.iter();
    let Some((&j0, &s0)) = it.next() else { return runs };
    push_run(&mut runs, j0 + 1, s0);
    let (mut pj, mut ps) = (j0, s0);
    for (&j, &s) in it {
        push_run(&mut runs, j - pj - 1, ps);
        push_run(&mut runs, 1, s);
        (pj, ps) = (j, s);
    }
    push_run(&mut runs, len - 1 - pj, ps);
    runs
}

/// As [`linear_fill`] on a cyclic string: the stretch before the first
/// known entry copies the last one.
fn cyclic_fill(known: &BTreeMap<u64, u64>, len: u64) -> Vec<(u64, u64)> {
    let mut runs = Vec::new();
    let (Some((&j0, _)), Some((&jl, &sl))) = (known.iter().next(), known.iter().next_back()) else {
        return runs;
    };
    push_run(&mut runs, j0, sl);
    let mut prev: Option<(u64, u64)> = None;
    for (&j, &s) in known {
        if let Some((pj, ps)) = prev {
            push_run(&mut runs, j - pj - 1, ps);
        }
        push_run(&mut runs, 1, s);
        prev = Some((j, s));
    }
    push_run(&mut runs, len - 1 - jl, sl);
    runs
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Segment {
    level: usize,
    runs: Vec<(u64, u64)>,
}

impl Segment {
    /// Adjacent unequal symbols, counting the wrap-around for cyclic levels.
    fn adjacent_mismatches(&self) -> usize {
        let r = self.runs.len();
        if self.level == 1 || r <= 1 {
            return r.saturating_sub(1);
        }
        if self.runs[0].1 == self.runs[r - 1].1 {
            r - 1
        } else {
            r
        }
    }
}

/// Succinct record of a string's symbols in non-uniform classes modulo the
/// gcd of a set of its approximate periods.
#[derive(Clone, Debug)]
pub struct PeriodStructure {
    n: u64,
    k: u64,
    /// `d_1..d_s`.
    d: Vec<u64>,
    /// `r[l-2]` serves level `l >= 2`: `(p_l/d_l)^-1 mod d_{l-1}/d_l`.
    r: Vec<u64>,
    m: RleString,
    starts: MembershipSet,
    classes: BTreeMap<u64, Multiset>,
    segments: BTreeMap<u64, Segment>,
}

impl PartialEq for PeriodStructure {
    fn eq(&self, o: &Self) -> bool {
        self.n == o.n
            && self.k == o.k
            && self.d == o.d
            && self.r == o.r
            && self.m == o.m
            && self.starts == o.starts
            && self.classes == o.classes
    }
}

impl Eq for PeriodStructure {}

impl PeriodStructure {
    /// Empty structure for a string of length `n` whose periods carry at
    /// most `k` mismatches each.
    pub fn new(n: u64, k: u64) -> Result<Self> {
        if n == 0 {
            return usage("string length must be positive");
        }
        Ok(PeriodStructure {
            n,
            k,
            d: Vec::new(),
            r: Vec::new(),
            m: RleString::from_runs([(2 * n, BLANK)]),
            starts: MembershipSet::new(2 * n, Vec::new()),
            classes: BTreeMap::new(),
            segments: BTreeMap::new(),
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `gcd` of the added periods, 0 when none.
    pub fn gcd(&self) -> u64 {
        self.d.last().copied().unwrap_or(0)
    }

    /// The chain `d_1, ..., d_s`.
    pub fn chain(&self) -> &[u64] {
        &self.d
    }

    /// Non-uniform classes modulo the gcd with their multisets.
    pub fn classes(&self) -> &BTreeMap<u64, Multiset> {
        &self.classes
    }

    /// Whether the class of `i` modulo the gcd holds a single symbol.
    pub fn is_uniform(&self, i: u64) -> bool {
        let d = self.gcd();
        d == 0 || !self.classes.contains_key(&(i % d))
    }

    /// Adjacent mismatches over all stored majority strings.
    pub fn adjacent_mismatches(&self) -> usize {
        self.segments.values().map(Segment::adjacent_mismatches).sum()
    }

    /// Sum of distinct-symbol counts over non-uniform classes.
    pub fn class_diversity(&self) -> usize {
        self.classes.values().map(|c| c.len()).sum()
    }

    /// Runs in the majority super-string.
    pub fn rle_runs(&self) -> usize {
        self.m.runs()
    }

    /// Approximate heap footprint in 64-bit words.
    pub fn retained_words(&self) -> usize {
        let seg: usize = self.segments.values().map(|s| 2 + 2 * s.runs.len()).sum();
        let cls: usize = self.classes.values().map(|c| 2 + 2 * c.len()).sum();
        self.d.len() + self.r.len() + 2 * self.m.runs() + self.starts.len() + seg + cls + 8
    }

    fn start_of(&self, level: usize, c: u64) -> u64 {
        let dl = self.d[level - 1];
        if level == 1 {
            2 * dl + c * self.n.div_ceil(dl)
        } else {
            2 * dl + c * (self.d[level - 2] / dl)
        }
    }

    /// Adds a period `p <= n/4` given the mismatches between the string and
    /// its shift by `p`. Returns whether the gcd changed.
    pub fn add_period(&mut self, p: u64, mi: &MismatchInfo) -> Result<bool> {
        let n = self.n;
        if p == 0 || 4 * p > n {
            return usage(format!("period {p} outside [1, n/4] for n = {n}"));
        }
        for e in mi.iter() {
            if e.index + p >= n || e.a == e.b || e.a > MAX_SYMBOL || e.b > MAX_SYMBOL {
                return usage(format!("invalid self-mismatch {e:?} for period {p}"));
            }
        }
        let ds = self.gcd();
        if ds != 0 && p % ds == 0 {
            return Ok(false);
        }
        let dn = gcd(ds, p);
        let level = self.d.len() + 1;
        let mut classes = BTreeMap::new();
        let mut segs = Vec::new();
        let mut rinv = None;
        if ds == 0 {
            let mut known: BTreeMap<u64, BTreeMap<u64, u64>> = BTreeMap::new();
            for e in mi.iter() {
                for (x, s) in [(e.index, e.a), (e.index + p, e.b)] {
                    known.entry(x % p).or_default().insert(x / p, s);
                }
            }
            for (c, entries) in known {
                let runs = linear_fill(&entries, (n - c).div_ceil(p));
                let mut ms = Multiset::new();
                for &(l, s) in &runs {
                    *ms.entry(s).or_default() += l;
                }
                if ms.len() >= 2 {
                    classes.insert(c, ms);
                }
                if runs.len() >= 2 {
                    segs.push((c, runs));
                }
            }
        } else {
            let rho = ds / dn;
            let pi = p / dn;
            let ri = mod_inv(pi % rho, rho);
            rinv = Some(ri);
            let jq = |q: u64| ((ri as u128 * (q / dn) as u128) % rho as u128) as u64;
            let mut known: BTreeMap<u64, BTreeMap<u64, u64>> = BTreeMap::new();
            for (&q, ms) in &self.classes {
                known.entry(q % dn).or_default().insert(jq(q), majority(ms));
            }
            for e in mi.iter() {
                for (x, s) in [(e.index, e.a), (e.index + p, e.b)] {
                    let q = x % ds;
                    if !self.classes.contains_key(&q) {
                        known.entry(q % dn).or_default().insert(jq(q), s);
                    }
                }
            }
            let (base, rem) = (n / ds, n % ds);
            for (c, entries) in known {
                let runs = cyclic_fill(&entries, rho);
                let t = if rem > c { (rem - c).div_ceil(dn) } else { 0 };
                let size_sum = |ja: u64, len: u64| -> u64 {
                    let (l, a, b) = (len as u128, pi as u128, ja as u128 * pi as u128);
                    let hi = floor_sum(l, rho as u128, a, b);
                    let lo = floor_sum(l, rho as u128, a, b + (rho - t) as u128);
                    (l * base as u128 + hi + l - lo) as u64
                };
                let mut ms = Multiset::new();
                let mut ja = 0;
                for &(l, s) in &runs {
                    if s != NO_MAJORITY {
                        *ms.entry(s).or_default() += size_sum(ja, l);
                    }
                    ja += l;
                }
                for (&q, sub) in self.classes.range(..).filter(|(&q, _)| q % dn == c) {
                    let maj = majority(sub);
                    if maj != NO_MAJORITY {
                        let size = base + (q < rem) as u64;
                        let e = ms.get_mut(&maj).expect("majority run counted");
                        *e -= size;
                    }
                    for (&s, &cnt) in sub {
                        *ms.entry(s).or_default() += cnt;
                    }
                }
                ms.retain(|_, c| *c > 0);
                if ms.len() >= 2 {
                    classes.insert(c, ms);
                }
                if runs.len() >= 2 {
                    segs.push((c, runs));
                }
            }
        }
        self.d.push(dn);
        if let Some(ri) = rinv {
            self.r.push(ri);
        }
        debug_assert!(dn <= n >> (level + 1), "d_{level} = {dn} too large for n = {n}");
        for (c, runs) in segs {
            let start = self.start_of(level, c);
            self.segments.insert(start, Segment { level, runs });
        }
        self.classes = classes;
        self.rebuild();
        Ok(true)
    }

    /// Rebuilds the super-string and membership index from segments and
    /// the class majorities.
    fn rebuild(&mut self) {
        let mut runs = Vec::new();
        let mut pos = 0;
        for (&c, ms) in &self.classes {
            push_run(&mut runs, c - pos, BLANK);
            push_run(&mut runs, 1, majority(ms));
            pos = c + 1;
        }
        for (&start, seg) in &self.segments {
            debug_assert!(start >= pos);
            push_run(&mut runs, start - pos, BLANK);
            for &(l, s) in &seg.runs {
                push_run(&mut runs, l, s);
            }
            pos = start + seg.runs.iter().map(|r| r.0).sum::<u64>();
        }
        push_run(&mut runs, 2 * self.n - pos, BLANK);
        self.m = RleString::from_runs(runs);
        self.starts = MembershipSet::new(2 * self.n, self.segments.keys().copied().collect());
    }

    /// `X[i]` if its class modulo the gcd is non-uniform, `None` otherwise.
    pub fn query(&self, i: u64) -> Result<Option<u64>> {
        if i >= self.n {
            return usage(format!("position {i} outside [0, {})", self.n));
        }
        if self.d.is_empty() {
            return Ok(None);
        }
        for level in 1..=self.d.len() {
            let dl = self.d[level - 1];
            let c = i % dl;
            let start = self.start_of(level, c);
            if self.starts.contains(start) {
                let j = if level == 1 {
                    i / dl
                } else {
                    let rho = self.d[level - 2] / dl;
                    ((self.r[level - 2] as u128 * (i / dl) as u128) % rho as u128) as u64
                };
                let v = self.m.get(start + j);
                debug_assert!(v <= MAX_SYMBOL, "walk hit a filler at level {level}");
                return Ok(Some(v));
            }
        }
        let v = self.m.get(i % self.gcd());
        Ok((v <= MAX_SYMBOL).then_some(v))
    }

    /// Level and class of a stored majority string starting at `start`.
    fn locate(&self, start: u64) -> Option<(usize, u64, u64)> {
        for level in 1..=self.d.len() {
            let dl = self.d[level - 1];
            let (stride, count) = if level == 1 { (self.n.div_ceil(dl), dl) } else { (self.d[level - 2] / dl, dl) };
            if start >= 2 * dl && (start - 2 * dl) % stride == 0 && (start - 2 * dl) / stride < count {
                let c = (start - 2 * dl) / stride;
                let len = if level == 1 { (self.n - c).div_ceil(dl) } else { stride };
                return Some((level, c, len));
            }
        }
        None
    }

    /// Serialization shared with the occurrence codec; symbols are written
    /// in fixed width for an alphabet of size `sigma`.
    pub fn write(&self, w: &mut BitSink, sigma: u64) {
        w.gamma(self.n);
        w.gamma(self.d.len() as u64);
        w.gamma(self.k);
        if let Some(&d1) = self.d.first() {
            w.gamma(d1);
        }
        for l in 1..self.d.len() {
            w.gamma(self.d[l - 1] / self.d[l] - 2);
            w.gamma(self.r[l - 1]);
        }
        let width = width_for(sigma + 2);
        self.m.write(w, |a| match a {
            BLANK => 0,
            NO_MAJORITY => 1,
            s => s + 2,
        }, width);
        self.starts.write(w);
        let sw = width_for(sigma);
        w.gamma(self.classes.len() as u64);
        let mut prev = None;
        for (&c, ms) in &self.classes {
            w.gamma(prev.map_or(c, |p: u64| c - p - 1));
            prev = Some(c);
            w.gamma(ms.len() as u64 - 2);
            for (&s, &cnt) in ms {
                w.fixed(sw, s);
                w.gamma(cnt - 1);
            }
        }
    }

    pub fn read(r: &mut BitSource, sigma: u64) -> Result<Self> {
        let bad = |m: &str| Error::Decode(format!("period structure: {m}"));
        let n = r.gamma_max(1 << 48, "n")?;
        if n == 0 {
            return Err(bad("zero length"));
        }
        let s = r.gamma_max(64, "levels")? as usize;
        let k = r.gamma()?;
        let mut d = Vec::with_capacity(s);
        let mut rr = Vec::new();
        if s > 0 {
            let d1 = r.gamma()?;
            if d1 == 0 || 4 * d1 > n {
                return Err(bad("first period out of range"));
            }
            d.push(d1);
        }
        for _ in 1..s {
            let ratio = r.gamma()?.checked_add(2).ok_or_else(|| bad("ratio"))?;
            let prev = *d.last().expect("nonempty");
            if prev % ratio != 0 {
                return Err(bad("ratio does not divide"));
            }
            let ri = r.gamma()?;
            if ri >= ratio || gcd(ri, ratio) != 1 {
                return Err(bad("inverse out of range"));
            }
            d.push(prev / ratio);
            rr.push(ri);
        }
        let width = width_for(sigma + 2);
        let m = RleString::read(
            r,
            |c| match c {
                0 => Ok(BLANK),
                1 => Ok(NO_MAJORITY),
                c if c - 2 < sigma => Ok(c - 2),
                _ => Err(bad("symbol outside alphabet")),
            },
            width,
            2 * n,
        )?;
        if m.len() != 2 * n {
            return Err(bad("super-string length"));
        }
        let starts = MembershipSet::read(r, 2 * n)?;
        let sw = width_for(sigma);
        let nc = r.gamma_max(n, "class count")?;
        let mut classes = BTreeMap::new();
        let mut prev: Option<u64> = None;
        let dmax = d.last().copied().unwrap_or(0);
        for _ in 0..nc {
            let g = r.gamma()?;
            let c = prev.map_or(Some(g), |p| p.checked_add(g + 1)).filter(|&c| c < dmax).ok_or_else(|| bad("class index"))?;
            prev = Some(c);
            let cnt = r.gamma_max(n, "class size")? + 2;
            let mut ms = Multiset::new();
            for _ in 0..cnt {
                let sym = r.fixed(sw)?;
                let mult = r.gamma_max(n, "multiplicity")? + 1;
                if sym >= sigma || ms.insert(sym, mult).is_some() {
                    return Err(bad("class symbol"));
                }
            }
            classes.insert(c, ms);
        }
        let mut ps = PeriodStructure { n, k, d, r: rr, m, starts, classes, segments: BTreeMap::new() };
        for &start in ps.starts.items() {
            let (level, _, len) = ps.locate(start).ok_or_else(|| bad("majority string start"))?;
            if start + len > 2 * n {
                return Err(bad("majority string overflows"));
            }
            let mut runs = Vec::new();
            for x in start..start + len {
                push_run(&mut runs, 1, ps.m.get(x));
            }
            ps.segments.insert(start, Segment { level, runs });
        }
        Ok(ps)
    }
}
