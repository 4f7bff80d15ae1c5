//! Re-emits a stream of occurrence records exactly `delta` ticks later while
//! storing each block of records in compressed form.

use std::collections::VecDeque;

use crate::codec::{OccBuilder, ProxyAccessor, SYMBOL_LIMIT};
use crate::error::{usage, Error, Result};
use crate::occurrence::OccurrenceRecord;
use crate::readonly::{PatternScanner, ReadOnlyMatcher};
use crate::sketch::{
    sketch_concat, sketch_power, sketch_root, sketch_split_left, sketch_split_right, RollingSketcher, SketchK,
    SketchParams,
};

/// Sentinel symbols of the buffer's proxy strings start here.
const SENTINEL_BASE: u64 = SYMBOL_LIMIT;

struct Reorg {
    acc: ProxyAccessor<'static>,
    scanner: Option<PatternScanner>,
    matcher: Option<ReadOnlyMatcher>,
    // sketch of T'[0..L) being turned into the sketch of W[0..L)
    w: RollingSketcher,
    root: Option<SketchK>,
    // progress: pattern symbols, then W positions, then the root, then text symbols
    step: u64,
    total: u64,
}

struct Decomp {
    acc: ProxyAccessor<'static>,
    matcher: ReadOnlyMatcher,
    // sk(T'[0..switched) W[switched..L))
    mixed: RollingSketcher,
    switched: u64,
    root: Option<SketchK>,
    next_text: u64,
}

enum Phase {
    Compressing(OccBuilder),
    Reorganising(Box<Reorg>),
    Decompressing(Box<Decomp>),
    Done,
}

struct Component {
    block: u64,
    phase: Phase,
    /// Tick at which `T'#[n-1]` is consumed and the leftmost record is due.
    first_out: u64,
}

/// Fixed-delay buffer for k-mismatch occurrence records of one pattern.
///
/// Records must arrive in increasing order of start, each fed at tick
/// `start + c` for a constant `c`, and carry their mismatch information and
/// prefix sketch.
pub struct DelayBuffer {
    n: u64,
    k: usize,
    delta: u64,
    b: u64,
    params: SketchParams,
    clock: u64,
    offset: Option<u64>,
    last_start: Option<u64>,
    components: VecDeque<Component>,
    peak_components: usize,
}

impl DelayBuffer {
    pub fn new(sk_p: &SketchK, delta: u64, params: &SketchParams) -> Result<Self> {
        let n = sk_p.len;
        if sk_p.k != params.k {
            return usage(format!("pattern sketch threshold {} differs from {}", sk_p.k, params.k));
        }
        if n == 0 || 4 * delta < n || delta > 4 * n {
            return usage(format!("delay {delta} outside [n/4, 4n] for n = {n}"));
        }
        Ok(DelayBuffer {
            n,
            k: params.k,
            delta,
            b: (delta.min(n) / 4).max(1),
            params: params.clone(),
            clock: 0,
            offset: None,
            last_start: None,
            components: VecDeque::new(),
            peak_components: 0,
        })
    }

    pub fn delay(&self) -> u64 {
        self.delta
    }

    pub fn block_len(&self) -> u64 {
        self.b
    }

    /// Ticks elapsed.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn live_components(&self) -> usize {
        self.components.len()
    }

    pub fn peak_components(&self) -> usize {
        self.peak_components
    }

    /// Feeds at most one record and returns the record due now, if any.
    pub fn tick(&mut self, incoming: Option<OccurrenceRecord>) -> Result<Option<OccurrenceRecord>> {
        let t = self.clock;
        if let Some(rec) = incoming {
            self.feed(t, rec)?;
        }
        let mut out = None;
        for c in self.components.iter_mut() {
            if let Some(r) = c.step(t, self.n, self.b, self.offset.expect("set with the first record"), &self.params)? {
                debug_assert!(out.is_none(), "two records due at tick {t}");
                out = Some(r);
            }
        }
        while self.components.front().is_some_and(|c| matches!(c.phase, Phase::Done)) {
            self.components.pop_front();
        }
        self.clock += 1;
        Ok(out)
    }

    fn feed(&mut self, t: u64, rec: OccurrenceRecord) -> Result<()> {
        if self.last_start.is_some_and(|s| rec.start <= s) {
            return usage(format!("record at {} fed after {}", rec.start, self.last_start.unwrap_or(0)));
        }
        if rec.start > t {
            return usage(format!("record at {} fed before its tick {t}", rec.start));
        }
        match self.offset {
            None => self.offset = Some(t - rec.start),
            Some(o) if o != t - rec.start => {
                return usage(format!("record at {} fed at tick {t}, expected {}", rec.start, rec.start + o));
            }
            _ => {}
        }
        let (Some(mi), Some(sk)) = (rec.mi, rec.prefix_sketch) else {
            return usage("records need mismatch information and a prefix sketch");
        };
        if mi.len() != rec.hd || mi.iter().any(|m| m.a >= SYMBOL_LIMIT || m.b >= SYMBOL_LIMIT) {
            return usage(format!("record at {} has inconsistent mismatches", rec.start));
        }
        if sk.len != rec.start || sk.k != self.k {
            return usage(format!("prefix sketch of record at {} has the wrong shape", rec.start));
        }
        self.last_start = Some(rec.start);
        let block = rec.start / self.b;
        let off = self.offset.expect("just set");
        if self.components.back().map_or(true, |c| c.block != block) {
            self.components.push_back(Component {
                block,
                phase: Phase::Compressing(OccBuilder::new(self.n, self.k as u64)?),
                first_out: rec.start + off + self.delta,
            });
            self.peak_components = self.peak_components.max(self.components.len());
        }
        match &mut self.components.back_mut().expect("exists").phase {
            Phase::Compressing(b) => b.push(rec.start, mi, Some(sk)),
            _ => unreachable!("the newest component still compresses"),
        }
    }
}

impl Component {
    fn step(&mut self, t: u64, n: u64, b: u64, off: u64, params: &SketchParams) -> Result<Option<OccurrenceRecord>> {
        if let Phase::Compressing(_) = self.phase {
            if t < (self.block + 1) * b + off {
                return Ok(None);
            }
            let Phase::Compressing(builder) = std::mem::replace(&mut self.phase, Phase::Done) else { unreachable!() };
            self.phase = Phase::Reorganising(Box::new(Reorg::new(builder, n, params)?));
        }
        if let Phase::Reorganising(r) = &mut self.phase {
            let ticks_left = self.first_out.saturating_sub(t).max(1);
            let budget = (r.total - r.step).div_ceil(ticks_left);
            for _ in 0..budget {
                r.advance(n, params)?;
            }
            if r.step < r.total {
                return Ok(None);
            }
            let Phase::Reorganising(r) = std::mem::replace(&mut self.phase, Phase::Done) else { unreachable!() };
            self.phase = Phase::Decompressing(Box::new(r.into_decomp(n)?));
        }
        let Phase::Decompressing(dc) = &mut self.phase else { return Ok(None) };
        if t < self.first_out {
            return Ok(None);
        }
        debug_assert_eq!(dc.next_text, t - self.first_out + n - 1);
        let out = dc.advance(n, params)?;
        if dc.next_text == dc.acc.text_len() {
            self.phase = Phase::Done;
        }
        Ok(out)
    }
}

impl Reorg {
    fn new(builder: OccBuilder, n: u64, params: &SketchParams) -> Result<Self> {
        let msg = builder.finish(SENTINEL_BASE);
        let body = msg.body.expect("components start with a record");
        let (s1, s2) = body.sketches.clone().expect("records carry sketches");
        let l = body.right - body.left;
        let t_prime = sketch_split_right(&s2, &s1, params)?;
        let acc = ProxyAccessor::new(body, n, SENTINEL_BASE);
        let mut w = RollingSketcher::from_sketch(params, t_prime);
        w.set_eager(true);
        Ok(Reorg {
            acc,
            scanner: Some(PatternScanner::new(n as usize, params.k, params)?),
            matcher: None,
            w,
            root: None,
            step: 0,
            total: n + l + 1 + (n - 1),
        })
    }

    fn advance(&mut self, n: u64, params: &SketchParams) -> Result<()> {
        let l = self.acc.text_len() - n;
        let s = self.step;
        if s < n {
            self.scanner.as_mut().expect("scanning").push(self.acc.pattern(s))?;
        } else if s < n + l {
            let j = s - n;
            let a = self.acc.text(j);
            if !self.acc.is_sentinel(a) {
                self.w.substitute(j, a, 0)?;
            }
        } else if s == n + l {
            let idx = self.scanner.take().expect("scanned").finish()?;
            self.matcher = Some(ReadOnlyMatcher::new(&idx, true)?);
            let d = self.acc.body().d;
            if d > 0 {
                self.root = Some(sketch_root(&self.w.snapshot(), l / d, params)?);
            }
        } else {
            let j = s - (n + l + 1);
            let hit = self.matcher.as_mut().expect("built").push(self.acc.text(j))?;
            debug_assert!(hit.is_none(), "occurrence before n symbols");
        }
        self.step += 1;
        Ok(())
    }

    fn into_decomp(self, n: u64) -> Result<Decomp> {
        Ok(Decomp {
            acc: self.acc,
            matcher: self.matcher.expect("built"),
            mixed: self.w,
            switched: 0,
            root: self.root,
            next_text: n - 1,
        })
    }
}

impl Decomp {
    fn advance(&mut self, n: u64, params: &SketchParams) -> Result<Option<OccurrenceRecord>> {
        let l = self.acc.text_len() - n;
        // positions before the current candidate start go back to T'
        let i = self.next_text + 1 - n;
        while self.switched < i.min(l) {
            let j = self.switched;
            let a = self.acc.text(j);
            if !self.acc.is_sentinel(a) {
                self.mixed.substitute(j, 0, a)?;
            }
            self.switched += 1;
        }
        let hit = self.matcher.push(self.acc.text(self.next_text))?;
        self.next_text += 1;
        let Some(rec) = hit else { return Ok(None) };
        debug_assert_eq!(rec.start, i);
        let body = self.acc.body();
        let (s1, _) = body.sketches.as_ref().expect("records carry sketches");
        let prefix = match &self.root {
            None => {
                debug_assert_eq!(i, 0);
                s1.clone()
            }
            Some(root) => {
                let d = body.d;
                if i % d != 0 {
                    return Err(Error::Domain("occurrence offset not a multiple of the gcd"));
                }
                let w_suffix = sketch_power(root, (l - i) / d, params)?;
                let t_head = sketch_split_left(&self.mixed.snapshot(), &w_suffix, params)?;
                sketch_concat(s1, &t_head, params)?
            }
        };
        Ok(Some(OccurrenceRecord { start: body.left + i, hd: rec.hd, mi: rec.mi, prefix_sketch: Some(prefix) }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::FieldParams;
    use crate::sketch::{sketch_build, MismatchInfo};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(k: usize, seed: u64) -> SketchParams {
        SketchParams::new(k, FieldParams::goldilocks(), &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Runs a full session: records of all k-mismatch occurrences of `p` in
    /// `t`, fed at `start + n - 1`; checks exact delay and content.
    fn session(p: &[u64], t: &[u64], k: usize, delta: u64, seed: u64) -> usize {
        let pr = params(k, seed);
        let n = p.len();
        let skp = sketch_build(p, &pr).unwrap();
        let mut buf = DelayBuffer::new(&skp, delta, &pr).unwrap();
        let mut fed: VecDeque<(u64, OccurrenceRecord)> = VecDeque::new();
        let mut out_count = 0;
        let total = t.len() as u64 + delta + 1;
        for tick in 0..total {
            let incoming = (tick as usize + 1 >= n && (tick as usize) < t.len()).then(|| {
                let s = tick as usize + 1 - n;
                let mi = MismatchInfo::between(p, &t[s..s + n]);
                (mi.len() <= k).then(|| OccurrenceRecord {
                    start: s as u64,
                    hd: mi.len(),
                    mi: Some(mi),
                    prefix_sketch: Some(sketch_build(&t[..s], &pr).unwrap()),
                })
            });
            let incoming = incoming.flatten();
            if let Some(r) = &incoming {
                fed.push_back((tick, r.clone()));
            }
            let got = buf.tick(incoming).unwrap();
            let due = fed.front().is_some_and(|(ft, _)| ft + delta == tick);
            if due {
                let (_, want) = fed.pop_front().unwrap();
                assert_eq!(got.as_ref(), Some(&want), "tick {tick}");
                out_count += 1;
            } else {
                assert!(got.is_none(), "unexpected output at tick {tick}: {got:?}");
            }
            if delta <= n as u64 {
                assert!(buf.live_components() <= 6);
            }
        }
        assert!(fed.is_empty());
        out_count
    }

    #[test]
    fn rejects_bad_delays() {
        let pr = params(1, 1);
        let skp = sketch_build(&[1; 16], &pr).unwrap();
        assert!(DelayBuffer::new(&skp, 3, &pr).is_err());
        assert!(DelayBuffer::new(&skp, 65, &pr).is_err());
        assert!(DelayBuffer::new(&skp, 4, &pr).is_ok());
    }

    #[test]
    fn idle_buffer_stays_silent() {
        let pr = params(2, 2);
        let skp = sketch_build(&[1; 16], &pr).unwrap();
        let mut buf = DelayBuffer::new(&skp, 16, &pr).unwrap();
        for _ in 0..40 {
            assert!(buf.tick(None).unwrap().is_none());
        }
    }

    #[test]
    fn rejects_disorder() {
        let pr = params(1, 3);
        let p = [1u64; 8];
        let skp = sketch_build(&p, &pr).unwrap();
        let mut buf = DelayBuffer::new(&skp, 8, &pr).unwrap();
        let rec = |s: u64| OccurrenceRecord {
            start: s,
            hd: 0,
            mi: Some(MismatchInfo::empty()),
            prefix_sketch: Some(sketch_build(&vec![1; s as usize], &pr).unwrap()),
        };
        for _ in 0..9 {
            buf.tick(None).unwrap();
        }
        buf.tick(Some(rec(2))).unwrap();
        assert!(buf.tick(Some(rec(2))).is_err());
        assert!(buf.tick(Some(rec(9))).is_err());
    }

    #[test]
    fn periodic_text() {
        let p: Vec<u64> = (0..32).map(|i| i % 3).collect();
        let mut t: Vec<u64> = (0..200).map(|i| i % 3).collect();
        t[50] = 7;
        t[51] = 7;
        assert!(session(&p, &t, 2, 32, 4) > 20);
        assert!(session(&p, &t, 2, 8, 5) > 20);
        assert!(session(&p, &t, 2, 128, 6) > 20);
    }

    #[test]
    fn random_sessions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for round in 0..60 {
            let n = rng.gen_range(4..60usize);
            let k = rng.gen_range(0..4);
            let sigma = rng.gen_range(2..4u64);
            let per = rng.gen_range(1..=n / 2);
            let head: Vec<u64> = (0..per).map(|_| rng.gen_range(0..sigma)).collect();
            let noise = [0.0, 0.02, 0.1][round % 3];
            let mut gen = |len: usize| -> Vec<u64> {
                (0..len).map(|i| if rng.gen_bool(noise) { rng.gen_range(0..sigma) } else { head[i % per] }).collect()
            };
            let p = gen(n);
            let t = gen(4 * n + 10);
            let lo = (n as u64).div_ceil(4);
            let delta = rng.gen_range(lo..=4 * n as u64);
            session(&p, &t, k, delta, round as u64);
        }
    }
}
