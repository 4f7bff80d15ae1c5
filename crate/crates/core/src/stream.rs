//! The streaming k-mismatch matcher: one pass over the pattern into a
//! prefix-family index, then one pass over the text through a pipeline of
//! levels, reporting each occurrence as its last symbol arrives.

use std::collections::VecDeque;

use crate::delay::DelayBuffer;
use crate::error::{usage, Result};
use crate::occurrence::OccurrenceRecord;
use crate::periodic::{PeriodicPrefixFinder, PeriodicRepresentation, SmallPeriodMatcher, SmallPeriodOptions};
use crate::sketch::{
    sketch_decode, sketch_split_right, Mismatch, MismatchInfo, RollingSketcher, SketchK, SketchParams,
};

#[derive(Clone, Debug)]
enum Shape {
    Small(PeriodicRepresentation),
    General {
        p0: PeriodicRepresentation,
        /// `|P_1|, ..., |P_{L-1}|`.
        lens: Vec<usize>,
        /// `sk(P_1), ..., sk(P_{L-1})`.
        sketches: Vec<SketchK>,
        tail: Vec<u64>,
    },
}

/// Everything kept about the pattern once it has been read.
#[derive(Clone, Debug)]
pub struct StreamPattern {
    n: usize,
    k: usize,
    params: SketchParams,
    shape: Shape,
}

impl StreamPattern {
    pub fn pattern_len(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_small_period(&self) -> bool {
        matches!(self.shape, Shape::Small(_))
    }

    /// `|P_0|, ..., |P_L|` in general mode; `[n]` in small-period mode.
    pub fn prefix_lengths(&self) -> Vec<usize> {
        match &self.shape {
            Shape::Small(_) => vec![self.n],
            Shape::General { p0, lens, .. } => {
                let mut v = vec![p0.len()];
                v.extend(lens);
                v.push(self.n);
                v
            }
        }
    }

    /// Period of the stored periodic representation.
    pub fn period(&self) -> usize {
        match &self.shape {
            Shape::Small(r) => r.period(),
            Shape::General { p0, .. } => p0.period(),
        }
    }

    /// `sk(P_l)` for `1 <= l < L`.
    pub fn level_sketches(&self) -> &[SketchK] {
        match &self.shape {
            Shape::Small(_) => &[],
            Shape::General { sketches, .. } => sketches,
        }
    }
}

/// One-pass pattern reader.
#[derive(Clone, Debug)]
pub struct PatternReader {
    k: usize,
    params: SketchParams,
    finder: PeriodicPrefixFinder,
    recent: VecDeque<u64>,
    // sketch of the pattern minus its last 2k symbols
    lagged: RollingSketcher,
    snapshots: Vec<SketchK>,
    pos: usize,
}

impl PatternReader {
    pub fn new(k: usize, params: &SketchParams) -> Result<Self> {
        if params.k != k {
            return usage(format!("sketch threshold {} differs from k = {k}", params.k));
        }
        Ok(PatternReader {
            k,
            params: params.clone(),
            finder: PeriodicPrefixFinder::new(k.max(1), 2 * k + 1)?,
            recent: VecDeque::with_capacity(2 * k + 1),
            lagged: RollingSketcher::new(params),
            snapshots: Vec::new(),
            pos: 0,
        })
    }

    pub fn push(&mut self, a: u64) -> Result<()> {
        if !self.finder.is_done() {
            self.finder.push(a);
        }
        self.recent.push_back(a);
        if self.recent.len() > 2 * self.k {
            let x = self.recent.pop_front().expect("nonempty");
            self.lagged.append(x)?;
            let len = self.lagged.len();
            if len.is_power_of_two() && len > 3 * self.k as u64 {
                self.snapshots.push(self.lagged.snapshot());
            }
        }
        self.pos += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<StreamPattern> {
        let n = self.pos;
        let k = self.k;
        if n == 0 || n < k {
            return usage(format!("pattern length {n} must be positive and at least k = {k}"));
        }
        let (qlen, _, mut rep) = self.finder.finish();
        if qlen + 2 * k > n {
            let base = n - self.recent.len();
            for i in qlen..n {
                rep.push(self.recent[i - base]);
            }
            return Ok(StreamPattern { n, k, params: self.params, shape: Shape::Small(rep) });
        }
        let top = n - 2 * k;
        let mut lens = Vec::new();
        let mut sketches = Vec::new();
        for sk in self.snapshots {
            let len = sk.len as usize;
            if len > qlen && 2 * len < top {
                lens.push(len);
                sketches.push(sk);
            }
        }
        lens.push(top);
        sketches.push(self.lagged.snapshot());
        Ok(StreamPattern {
            n,
            k,
            params: self.params,
            shape: Shape::General { p0: rep, lens, sketches, tail: self.recent.into_iter().collect() },
        })
    }
}

/// Reads the whole pattern in one pass.
pub fn process_pattern<I: IntoIterator<Item = u64>>(pattern: I, k: usize, params: &SketchParams) -> Result<StreamPattern> {
    let mut r = PatternReader::new(k, params)?;
    for a in pattern {
        r.push(a)?;
    }
    r.finish()
}

struct Level {
    len: usize,
    sk: SketchK,
    buffer: Option<DelayBuffer>,
    last_start: Option<u64>,
}

struct Pending {
    start: u64,
    mi: Vec<Mismatch>,
    next: usize,
}

struct Levels {
    level0: SmallPeriodMatcher,
    text: RollingSketcher,
    levels: Vec<Level>,
    head_len: usize,
    tail: Vec<u64>,
    pending: VecDeque<Pending>,
}

enum Mode {
    Small(SmallPeriodMatcher),
    General(Box<Levels>),
}

/// Text-side state of a matching session.
pub struct StreamMatcher {
    k: usize,
    params: SketchParams,
    mode: Mode,
    text_len: u64,
}

impl StreamMatcher {
    pub fn new(pat: &StreamPattern) -> Result<Self> {
        let k = pat.k;
        let mode = match &pat.shape {
            Shape::Small(rep) => Mode::Small(SmallPeriodMatcher::new(
                rep,
                k,
                SmallPeriodOptions { delay: 0, with_mi: true, sketch: None },
            )?),
            Shape::General { p0, lens, sketches, tail } => {
                let level0 = SmallPeriodMatcher::new(
                    p0,
                    k,
                    SmallPeriodOptions { delay: lens[0] - p0.len(), with_mi: false, sketch: Some(pat.params.clone()) },
                )?;
                let last = lens.len() - 1;
                let mut levels = Vec::with_capacity(lens.len());
                for (l, (&len, sk)) in lens.iter().zip(sketches).enumerate() {
                    let buffer = if l < last {
                        Some(DelayBuffer::new(sk, (lens[l + 1] - len) as u64, &pat.params)?)
                    } else {
                        None
                    };
                    levels.push(Level { len, sk: sk.clone(), buffer, last_start: None });
                }
                Mode::General(Box::new(Levels {
                    level0,
                    text: RollingSketcher::new(&pat.params),
                    levels,
                    head_len: lens[last],
                    tail: tail.clone(),
                    pending: VecDeque::new(),
                }))
            }
        };
        Ok(StreamMatcher { k, params: pat.params.clone(), mode, text_len: 0 })
    }

    pub fn text_len(&self) -> u64 {
        self.text_len
    }

    /// Delay buffers currently holding data, summed over levels.
    pub fn live_buffer_components(&self) -> usize {
        match &self.mode {
            Mode::Small(_) => 0,
            Mode::General(lv) => lv.levels.iter().filter_map(|l| l.buffer.as_ref()).map(|b| b.live_components()).sum(),
        }
    }

    /// Consumes one text symbol; returns the occurrence ending here, if any.
    pub fn push(&mut self, a: u64) -> Result<Option<OccurrenceRecord>> {
        self.text_len += 1;
        let k = self.k;
        let lv = match &mut self.mode {
            Mode::Small(m) => return m.push(a),
            Mode::General(lv) => lv,
        };
        lv.text.append(a)?;
        let mut out = None;
        for pd in lv.pending.iter_mut() {
            let exp = lv.tail[pd.next];
            if exp != a {
                pd.mi.push(Mismatch { index: (lv.head_len + pd.next) as u64, a: exp, b: a });
            }
            pd.next += 1;
        }
        lv.pending.retain(|pd| pd.mi.len() <= k);
        if lv.pending.front().is_some_and(|pd| pd.next == lv.tail.len()) {
            let pd = lv.pending.pop_front().expect("front exists");
            out = Some(finish_record(pd));
        }

        let mut cur = lv.level0.push(a)?;
        let mut now: Option<SketchK> = None;
        for level in lv.levels.iter_mut() {
            let verified = match cur.take() {
                None => None,
                Some(rec) => {
                    if let Some(prev) = level.last_start {
                        debug_assert!(rec.start > prev + k as u64 || k == 0, "candidates {prev} and {} too close", rec.start);
                    }
                    level.last_start = Some(rec.start);
                    let prefix = rec.prefix_sketch.expect("levels carry prefix sketches");
                    let whole = now.get_or_insert_with(|| lv.text.snapshot());
                    let window = sketch_split_right(whole, &prefix, &self.params)?;
                    debug_assert_eq!(window.len as usize, level.len);
                    sketch_decode(&level.sk, &window, &self.params)?.into_option().map(|mi| OccurrenceRecord {
                        start: rec.start,
                        hd: mi.len(),
                        mi: Some(mi),
                        prefix_sketch: Some(prefix),
                    })
                }
            };
            cur = match &mut level.buffer {
                Some(buf) => buf.tick(verified)?,
                None => verified,
            };
        }
        if let Some(rec) = cur {
            let pd = Pending { start: rec.start, mi: rec.mi.expect("verified").entries().to_vec(), next: 0 };
            if lv.tail.is_empty() {
                debug_assert!(out.is_none());
                out = Some(finish_record(pd));
            } else {
                lv.pending.push_back(pd);
            }
        }
        debug_assert!(lv.pending.len() <= 2);
        Ok(out)
    }
}

fn finish_record(pd: Pending) -> OccurrenceRecord {
    OccurrenceRecord { start: pd.start, hd: pd.mi.len(), mi: Some(MismatchInfo::from_sorted(pd.mi)), prefix_sketch: None }
}

/// All k-mismatch occurrences of `pattern` in `text`, each with its
/// mismatch information.
pub fn stream_match<P, T>(pattern: P, text: T, k: usize, params: &SketchParams) -> Result<Vec<OccurrenceRecord>>
where
    P: IntoIterator<Item = u64>,
    T: IntoIterator<Item = u64>,
{
    let pat = process_pattern(pattern, k, params)?;
    let mut m = StreamMatcher::new(&pat)?;
    let mut out = Vec::new();
    for a in text {
        out.extend(m.push(a)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::FieldParams;
    use crate::sketch::sketch_build;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(k: usize, seed: u64) -> SketchParams {
        SketchParams::new(k, FieldParams::goldilocks(), &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn oracle(p: &[u64], t: &[u64], k: usize) -> Vec<(u64, MismatchInfo)> {
        if p.len() > t.len() {
            return Vec::new();
        }
        (0..=t.len() - p.len())
            .map(|s| (s as u64, MismatchInfo::between(p, &t[s..s + p.len()])))
            .filter(|(_, mi)| mi.len() <= k)
            .collect()
    }

    fn check(p: &[u64], t: &[u64], k: usize, seed: u64) -> StreamPattern {
        let pr = params(k, seed);
        let pat = process_pattern(p.iter().copied(), k, &pr).unwrap();
        let mut m = StreamMatcher::new(&pat).unwrap();
        let want = oracle(p, t, k);
        let mut wi = want.iter().peekable();
        for (c, &a) in t.iter().enumerate() {
            let got = m.push(a).unwrap();
            // zero delay: the occurrence ending at c comes out at c
            let due = wi.next_if(|(s, _)| *s as usize + p.len() - 1 == c);
            assert_eq!(got.map(|r| (r.start, r.mi.unwrap())), due.cloned(), "tick {c} p={p:?} k={k}");
        }
        pat
    }

    #[test]
    fn pattern_equals_text() {
        let p: Vec<u64> = (0..100u64).map(|i| i * i % 13).collect();
        check(&p, &p, 2, 1);
    }

    #[test]
    fn constant_pattern_is_small_period() {
        let pat = check(&[4; 30], &[4; 80], 1, 2);
        assert!(pat.is_small_period());
        assert_eq!(pat.period(), 1);
    }

    #[test]
    fn rejects_short_pattern() {
        assert!(process_pattern([1, 2], 3, &params(3, 3)).is_err());
        assert!(process_pattern([], 0, &params(0, 3)).is_err());
    }

    #[test]
    fn prefix_family_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let k = rng.gen_range(1..6);
            let n = rng.gen_range(40..2000);
            let p: Vec<u64> = (0..n).map(|_| rng.gen_range(0..50)).collect();
            let pr = params(k, 5);
            let pat = process_pattern(p.iter().copied(), k, &pr).unwrap();
            assert!(!pat.is_small_period());
            let lens = pat.prefix_lengths();
            let l = lens.len() - 1;
            assert_eq!(lens[l], n);
            assert_eq!(lens[l - 1], n - 2 * k);
            assert!(lens[0] >= 3 * k);
            for w in lens[1..l - 1].windows(2) {
                assert_eq!(w[1], 2 * w[0]);
            }
            for &x in &lens[1..l - 1] {
                assert!(x.is_power_of_two() && x > lens[0] && 2 * x < lens[l - 1]);
            }
            if l >= 3 {
                assert!(lens[1] <= 2 * lens[0]);
                assert!(4 * lens[l - 2] >= lens[l - 1]);
            }
            for (&len, sk) in lens[1..l].iter().zip(pat.level_sketches()) {
                assert_eq!(sk, &sketch_build(&p[..len], &pr).unwrap());
            }
            // P_0 is the longest prefix with a (2k+1)-period at most k
            let has = |len: usize| (1..=k).any(|q| q >= len || (0..len - q).filter(|&i| p[i] != p[i + q]).count() <= 2 * k + 1);
            assert!(has(lens[0]));
            assert!(!has(lens[0] + 1));
        }
    }

    #[test]
    fn exact_matching_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for round in 0..60 {
            let p: Vec<u64> = (0..rng.gen_range(1..40)).map(|_| rng.gen_range(0..3)).collect();
            let mut t = Vec::new();
            while t.len() < 300 {
                if rng.gen_bool(0.3) {
                    t.extend(&p);
                } else {
                    t.push(rng.gen_range(0..3));
                }
            }
            check(&p, &t, 0, round);
        }
    }

    #[test]
    fn random_against_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for round in 0..120 {
            let k = rng.gen_range(1..8);
            let n = rng.gen_range(k.max(1)..400);
            let sigma = [2u64, 4, 256][round % 3];
            let p: Vec<u64> = if round % 4 == 0 {
                let per = rng.gen_range(1..=k);
                let head: Vec<u64> = (0..per).map(|_| rng.gen_range(0..sigma)).collect();
                (0..n).map(|i| if rng.gen_bool(0.02) { rng.gen_range(0..sigma) } else { head[i % per] }).collect()
            } else {
                (0..n).map(|_| rng.gen_range(0..sigma)).collect()
            };
            let mut t = Vec::new();
            while t.len() < 3 * n {
                if rng.gen_bool(0.5) {
                    let noise = rng.gen_range(0.0..0.06);
                    t.extend(p.iter().map(|&a| if rng.gen_bool(noise) { rng.gen_range(0..sigma) } else { a }));
                } else {
                    t.extend((0..rng.gen_range(0..n / 2 + 2)).map(|_| rng.gen_range(0..sigma)));
                }
            }
            check(&p, &t, k, 1000 + round as u64);
        }
    }
}
