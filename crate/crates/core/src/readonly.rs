//! k-mismatch matching with random access to the pattern and a single pass
//! over the text.

use std::collections::VecDeque;

use crate::error::{usage, Result};
use crate::occurrence::OccurrenceRecord;
use crate::periodic::{PeriodicPrefixFinder, PeriodicRepresentation, SmallPeriodMatcher, SmallPeriodOptions};
use crate::sketch::{
    sketch_decode, sketch_split_right, Mismatch, MismatchInfo, RollingSketcher, SketchK, SketchParams,
};

/// A string with `O(log n)` access to any position.
pub trait RandomAccessString {
    fn len(&self) -> u64;
    fn get(&self, i: u64) -> u64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl RandomAccessString for [u64] {
    fn len(&self) -> u64 {
        <[u64]>::len(self) as u64
    }

    fn get(&self, i: u64) -> u64 {
        self[i as usize]
    }
}

impl RandomAccessString for Vec<u64> {
    fn len(&self) -> u64 {
        self.as_slice().len() as u64
    }

    fn get(&self, i: u64) -> u64 {
        self[i as usize]
    }
}

impl<T: RandomAccessString + ?Sized> RandomAccessString for &T {
    fn len(&self) -> u64 {
        (**self).len()
    }

    fn get(&self, i: u64) -> u64 {
        (**self).get(i)
    }
}

/// Pattern preprocessing state, fed one pattern symbol at a time.
#[derive(Clone, Debug)]
pub struct PatternScanner {
    n: usize,
    k: usize,
    params: SketchParams,
    finder: PeriodicPrefixFinder,
    head: RollingSketcher,
    recent: VecDeque<u64>,
    pos: usize,
}

impl PatternScanner {
    /// Scanner for a pattern of known length `n >= 1`.
    pub fn new(n: usize, k: usize, params: &SketchParams) -> Result<Self> {
        if n == 0 {
            return usage("pattern must be nonempty");
        }
        if params.k != k {
            return usage(format!("sketch threshold {} differs from k = {k}", params.k));
        }
        Ok(PatternScanner {
            n,
            k,
            params: params.clone(),
            finder: PeriodicPrefixFinder::new(k.max(1), 2 * k + 1)?,
            head: RollingSketcher::new(params),
            recent: VecDeque::with_capacity(2 * k + 1),
            pos: 0,
        })
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }

    pub fn push(&mut self, a: u64) -> Result<()> {
        if self.pos >= self.n {
            return usage("pattern longer than announced");
        }
        if !self.finder.is_done() {
            self.finder.push(a);
        }
        if self.pos + 2 * self.k < self.n {
            self.head.append(a)?;
        }
        self.recent.push_back(a);
        if self.recent.len() > 2 * self.k {
            self.recent.pop_front();
        }
        self.pos += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PatternIndex> {
        if self.pos != self.n {
            return usage(format!("pattern ended after {} of {} symbols", self.pos, self.n));
        }
        let (qlen, _, mut rep) = self.finder.finish();
        let n = self.n;
        if qlen + 2 * self.k > n {
            let base = n - self.recent.len();
            for i in qlen..n {
                rep.push(self.recent[i - base]);
            }
            return Ok(PatternIndex { n, k: self.k, params: self.params, shape: Shape::Small(rep) });
        }
        Ok(PatternIndex {
            n,
            k: self.k,
            params: self.params,
            shape: Shape::General {
                q: rep,
                head_len: n - 2 * self.k,
                sk_head: self.head.snapshot(),
                tail: self.recent.into_iter().collect(),
            },
        })
    }
}

#[derive(Clone, Debug)]
enum Shape {
    /// The whole pattern in a representation with a period `<= max(k, 1)`.
    Small(PeriodicRepresentation),
    General { q: PeriodicRepresentation, head_len: usize, sk_head: SketchK, tail: Vec<u64> },
}

/// Preprocessed pattern: `O(k)` words plus a short periodic representation.
#[derive(Clone, Debug)]
pub struct PatternIndex {
    n: usize,
    k: usize,
    params: SketchParams,
    shape: Shape,
}

impl PatternIndex {
    pub fn from_access<P: RandomAccessString + ?Sized>(p: &P, k: usize, params: &SketchParams) -> Result<Self> {
        let mut sc = PatternScanner::new(p.len() as usize, k, params)?;
        for i in 0..p.len() {
            sc.push(p.get(i))?;
        }
        sc.finish()
    }

    pub fn pattern_len(&self) -> usize {
        self.n
    }

    /// Whether the pattern is handled by the small-period matcher alone.
    pub fn is_small_period(&self) -> bool {
        matches!(self.shape, Shape::Small(_))
    }

    /// Length of the filtering prefix, or of the pattern in small-period mode.
    pub fn filter_len(&self) -> usize {
        match &self.shape {
            Shape::Small(rep) => rep.len(),
            Shape::General { q, .. } => q.len(),
        }
    }

    pub fn period(&self) -> usize {
        match &self.shape {
            Shape::Small(rep) => rep.period(),
            Shape::General { q, .. } => q.period(),
        }
    }
}

struct Pending {
    start: u64,
    prefix: SketchK,
    mi: Vec<Mismatch>,
    next: usize,
}

enum Mode {
    Small(SmallPeriodMatcher),
    General {
        filter: SmallPeriodMatcher,
        text: RollingSketcher,
        sk_head: SketchK,
        head_len: usize,
        tail: Vec<u64>,
        pending: VecDeque<Pending>,
    },
}

/// Text-side matcher; reports each occurrence when its last symbol arrives.
pub struct ReadOnlyMatcher {
    k: usize,
    params: SketchParams,
    with_mi: bool,
    mode: Mode,
    text_len: u64,
    peak_inflight: usize,
}

impl ReadOnlyMatcher {
    pub fn new(idx: &PatternIndex, with_mi: bool) -> Result<Self> {
        let k = idx.k;
        let mode = match &idx.shape {
            Shape::Small(rep) => Mode::Small(SmallPeriodMatcher::new(
                rep,
                k,
                SmallPeriodOptions { delay: 0, with_mi, sketch: Some(idx.params.clone()) },
            )?),
            Shape::General { q, head_len, sk_head, tail } => Mode::General {
                filter: SmallPeriodMatcher::new(
                    q,
                    k,
                    SmallPeriodOptions { delay: head_len - q.len(), with_mi: false, sketch: Some(idx.params.clone()) },
                )?,
                text: RollingSketcher::new(&idx.params),
                sk_head: sk_head.clone(),
                head_len: *head_len,
                tail: tail.clone(),
                pending: VecDeque::new(),
            },
        };
        Ok(ReadOnlyMatcher { k, params: idx.params.clone(), with_mi, mode, text_len: 0, peak_inflight: 0 })
    }

    pub fn text_len(&self) -> u64 {
        self.text_len
    }

    /// Most tail verifications that were running at once.
    pub fn peak_inflight(&self) -> usize {
        self.peak_inflight
    }

    /// Consumes one text symbol.
    pub fn push(&mut self, a: u64) -> Result<Option<OccurrenceRecord>> {
        self.text_len += 1;
        let k = self.k;
        match &mut self.mode {
            Mode::Small(m) => m.push(a),
            Mode::General { filter, text, sk_head, head_len, tail, pending } => {
                text.append(a)?;
                let mut out = None;
                for pd in pending.iter_mut() {
                    let exp = tail[pd.next];
                    if exp != a {
                        pd.mi.push(Mismatch { index: (*head_len + pd.next) as u64, a: exp, b: a });
                    }
                    pd.next += 1;
                }
                pending.retain(|pd| pd.mi.len() <= k);
                if pending.front().is_some_and(|pd| pd.next == tail.len()) {
                    let pd = pending.pop_front().expect("front exists");
                    out = Some(record(pd, self.with_mi));
                }
                if let Some(cand) = filter.push(a)? {
                    let prefix = cand.prefix_sketch.expect("filter attaches sketches");
                    let window = sketch_split_right(&text.snapshot(), &prefix, &self.params)?;
                    if let Some(mi) = sketch_decode(sk_head, &window, &self.params)?.into_option() {
                        let pd = Pending { start: cand.start, prefix, mi: mi.entries().to_vec(), next: 0 };
                        if tail.is_empty() {
                            debug_assert!(out.is_none());
                            out = Some(record(pd, self.with_mi));
                        } else {
                            pending.push_back(pd);
                        }
                    }
                }
                self.peak_inflight = self.peak_inflight.max(pending.len());
                debug_assert!(pending.len() <= 2, "{} tail verifications in flight", pending.len());
                Ok(out)
            }
        }
    }
}

fn record(pd: Pending, with_mi: bool) -> OccurrenceRecord {
    OccurrenceRecord {
        start: pd.start,
        hd: pd.mi.len(),
        mi: with_mi.then(|| MismatchInfo::from_sorted(pd.mi)),
        prefix_sketch: Some(pd.prefix),
    }
}

/// Every k-mismatch occurrence of `p` in `t`, in increasing order of start.
pub fn readonly_kmismatch<P, T>(p: &P, t: &T, k: usize, params: &SketchParams) -> Result<Vec<OccurrenceRecord>>
where
    P: RandomAccessString + ?Sized,
    T: RandomAccessString + ?Sized,
{
    let idx = PatternIndex::from_access(p, k, params)?;
    let mut m = ReadOnlyMatcher::new(&idx, true)?;
    let mut out = Vec::new();
    for i in 0..t.len() {
        out.extend(m.push(t.get(i))?);
    }
    Ok(out)
}
