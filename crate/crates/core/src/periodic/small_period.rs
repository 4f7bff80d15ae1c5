use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::sync::Arc;

use super::rep::PeriodicRepresentation;
use super::simpler::{PatternTables, PeriodicHammingStream};
use crate::error::{usage, Result};
use crate::occurrence::OccurrenceRecord;
use crate::sketch::{Mismatch, MismatchInfo, RollingSketcher, SketchK, SketchParams};

/// Output options for [`SmallPeriodMatcher`].
#[derive(Clone, Debug, Default)]
pub struct SmallPeriodOptions {
    /// Each occurrence is reported this many ticks after its last symbol.
    pub delay: usize,
    pub with_mi: bool,
    /// Attach `sk_k(T[0..start))` to every occurrence.
    pub sketch: Option<SketchParams>,
}

#[derive(Clone, Debug)]
struct Block {
    start: usize,
    /// Exclusive end, once the block stops growing.
    end: Option<usize>,
    /// First position at which this block is the longer active block.
    promoted_at: Option<usize>,
    rep: PeriodicRepresentation,
    stream: Option<PeriodicHammingStream>,
    sk_before: Option<SketchK>,
    lag: Option<RollingSketcher>,
    // undelayed scan while the block grows; a finished block with no
    // alignment within k is dropped
    probe: Option<PeriodicHammingStream>,
    hit: bool,
}

impl Block {
    fn covers(&self, t: usize) -> bool {
        self.start <= t && t < self.end.unwrap_or(self.start + self.rep.len())
    }
}

/// Streaming k-mismatch matcher for a pattern with a small approximate period.
///
/// The text is cut into overlapping blocks on which the pattern's period has
/// few breaks; each block is replayed through a [`PeriodicHammingStream`]
/// after the configured delay.
#[derive(Clone, Debug)]
pub struct SmallPeriodMatcher {
    tables: Arc<PatternTables>,
    k: usize,
    threshold: usize,
    opts: SmallPeriodOptions,
    sketcher: Option<RollingSketcher>,
    text_len: usize,
    clock: usize,
    // ordered by start; the last one or two are still growing
    blocks: VecDeque<Block>,
    #[cfg(test)]
    splits: Vec<usize>,
}

impl SmallPeriodMatcher {
    pub fn new(prep: &PeriodicRepresentation, k: usize, opts: SmallPeriodOptions) -> Result<Self> {
        let p = prep.period();
        let d = prep.mismatches();
        if p > k + 1 {
            return usage(format!("period {p} exceeds k + 1 = {}", k + 1));
        }
        if d > 8 * k + 8 {
            return usage(format!("pattern has {d} period breaks, more than 8k+8"));
        }
        if let Some(sp) = &opts.sketch {
            if sp.k != k {
                return usage(format!("sketch threshold {} differs from k = {k}", sp.k));
            }
        }
        let tables = Arc::new(PatternTables::new(prep)?);
        let sketcher = opts.sketch.as_ref().map(RollingSketcher::new);
        Ok(SmallPeriodMatcher {
            tables,
            k,
            threshold: d + 2 * k,
            opts,
            sketcher,
            text_len: 0,
            clock: 0,
            blocks: VecDeque::new(),
            #[cfg(test)]
            splits: Vec::new(),
        })
    }

    pub fn pattern_len(&self) -> usize {
        self.tables.pattern_len()
    }

    /// Blocks currently stored.
    pub fn live_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Text symbols consumed.
    pub fn text_len(&self) -> usize {
        self.text_len
    }

    /// Consumes one text symbol and advances the clock.
    pub fn push(&mut self, a: u64) -> Result<Option<OccurrenceRecord>> {
        self.extend_blocks(a)?;
        self.text_len += 1;
        self.tick()
    }

    /// Advances the clock without new input, releasing delayed output.
    pub fn idle(&mut self) -> Result<Option<OccurrenceRecord>> {
        self.tick()
    }

    /// Idles until every pending occurrence is released.
    pub fn finish(mut self) -> Result<Vec<OccurrenceRecord>> {
        let mut out = Vec::new();
        while self.clock < self.text_len + self.opts.delay {
            out.extend(self.idle()?);
        }
        Ok(out)
    }

    fn extend_blocks(&mut self, a: u64) -> Result<()> {
        let i = self.text_len;
        let p = self.tables.period();
        let split = self.blocks.back().is_some_and(|bp| {
            let rel = i - bp.start;
            bp.rep.mismatches() >= self.threshold && rel >= p && bp.rep.symbol_at(rel - p) != a
        });
        let born = split || self.blocks.is_empty();
        let mut sk_before = None;
        if let Some(s) = &mut self.sketcher {
            if born {
                sk_before = Some(s.snapshot());
            }
            s.append(a)?;
        }
        let probe = (self.opts.delay > 0).then(|| PeriodicHammingStream::with_tables(Arc::clone(&self.tables)));
        let mut fresh = Block {
            start: i,
            end: None,
            promoted_at: None,
            rep: PeriodicRepresentation::empty(p),
            stream: None,
            sk_before,
            lag: None,
            probe,
            hit: false,
        };
        self.grow(&mut fresh, a);
        if self.blocks.is_empty() {
            self.blocks.push_back(Block { promoted_at: Some(0), ..fresh });
            return Ok(());
        }
        let n = self.blocks.len();
        // the longer block is the second to last once a split has happened
        let has_b = n >= 2 && self.blocks[n - 2].end.is_none();
        if split {
            #[cfg(test)]
            self.splits.push(i);
            if has_b {
                let b = &mut self.blocks[n - 2];
                b.end = Some(i);
                b.probe = None;
                if b.rep.len() < self.tables.pattern_len() || (self.opts.delay > 0 && !b.hit) {
                    self.blocks.remove(n - 2);
                }
            }
            let mut last = self.blocks.pop_back().expect("nonempty");
            self.grow(&mut last, a);
            last.promoted_at.get_or_insert(i);
            self.blocks.push_back(last);
            self.blocks.push_back(fresh);
        } else {
            let k = self.k;
            let from = if has_b { n - 2 } else { n - 1 };
            for blk in self.blocks.range_mut(from..) {
                Self::grow_with(k, blk, a);
            }
        }
        self.check_invariants();
        Ok(())
    }

    fn grow(&self, blk: &mut Block, a: u64) {
        Self::grow_with(self.k, blk, a);
    }

    fn grow_with(k: usize, blk: &mut Block, a: u64) {
        blk.rep.push(a);
        if let Some(pr) = &mut blk.probe {
            if pr.push(a).is_some_and(|h| h <= k) {
                blk.hit = true;
            }
        }
    }

    fn check_invariants(&self) {
        if cfg!(debug_assertions) {
            let n = self.blocks.len();
            let bp = &self.blocks[n - 1];
            let mp = bp.rep.mismatches();
            debug_assert!(mp <= self.threshold);
            if n >= 2 && self.blocks[n - 2].end.is_none() {
                let m = self.blocks[n - 2].rep.mismatches();
                debug_assert!(m <= mp + bp.rep.len().min(self.tables.period()) + self.threshold);
            }
        }
    }

    fn tick(&mut self) -> Result<Option<OccurrenceRecord>> {
        let c = self.clock;
        self.clock += 1;
        let Some(t) = c.checked_sub(self.opts.delay) else {
            return Ok(None);
        };
        if t >= self.text_len {
            return Ok(None);
        }
        let m = self.tables.pattern_len();
        let mut out = None;
        for blk in self.blocks.iter_mut() {
            if !blk.covers(t) {
                continue;
            }
            let stream = blk.stream.get_or_insert_with(|| PeriodicHammingStream::with_tables(Arc::clone(&self.tables)));
            debug_assert_eq!(stream.len(), t - blk.start);
            let ham = stream.push(blk.rep.symbol_at(t - blk.start));
            let is_b = blk.promoted_at.is_some_and(|pa| pa <= t);
            let Some(hd) = ham.filter(|&h| is_b && h <= self.k) else {
                continue;
            };
            debug_assert!(out.is_none(), "two blocks claim position {t}");
            let j = t + 1 - m;
            let mut rec = OccurrenceRecord::new(j as u64, hd);
            if self.opts.with_mi {
                let mi = mismatches_at(self.tables.rep(), &blk.rep, j - blk.start);
                debug_assert_eq!(mi.len(), hd);
                rec.mi = Some(mi);
            }
            if let Some(sp) = &self.opts.sketch {
                let before = blk.sk_before.clone().expect("sketch taken at block birth");
                let lag = blk.lag.get_or_insert_with(|| RollingSketcher::from_sketch(sp, before));
                while (lag.len() as usize) < j {
                    let x = lag.len() as usize;
                    lag.append(blk.rep.symbol_at(x - blk.start))?;
                }
                rec.prefix_sketch = Some(lag.snapshot());
            }
            out = Some(rec);
        }
        self.blocks.retain(|b| b.end.map_or(true, |e| t + 1 < e));
        Ok(out)
    }
}

/// Mismatches between `P` and `X[o..o+|P|)` from the two periodic
/// representations, visiting only positions that can differ.
pub fn mismatches_at(prep: &PeriodicRepresentation, xrep: &PeriodicRepresentation, o: usize) -> MismatchInfo {
    let m = prep.len();
    assert!(prep.period() == xrep.period() && o + m <= xrep.len());
    let p = prep.period();
    let mut heap: BinaryHeap<Reverse<usize>> = (0..p.min(m)).map(Reverse).collect();
    for e in prep.selfmi().entries() {
        heap.push(Reverse(e.index as usize + p));
    }
    for e in xrep.selfmi().entries() {
        let x = e.index as usize + p;
        if x >= o + p && x < o + m {
            heap.push(Reverse(x - o));
        }
    }
    let mut out = Vec::new();
    let mut last = None;
    while let Some(Reverse(x)) = heap.pop() {
        if last == Some(x) {
            continue;
        }
        last = Some(x);
        let (a, b) = (prep.symbol_at(x), xrep.symbol_at(o + x));
        if a != b {
            out.push(Mismatch { index: x as u64, a, b });
            if x + p < m {
                heap.push(Reverse(x + p));
            }
        }
    }
    MismatchInfo::from_sorted(out)
}

/// All k-mismatch occurrences of the pattern in `t`, in order.
pub fn small_period_match<I: IntoIterator<Item = u64>>(
    prep: &PeriodicRepresentation,
    k: usize,
    opts: SmallPeriodOptions,
    t: I,
) -> Result<Vec<OccurrenceRecord>> {
    let mut sm = SmallPeriodMatcher::new(prep, k, opts)?;
    let mut out = Vec::new();
    for a in t {
        out.extend(sm.push(a)?);
    }
    out.extend(sm.finish()?);
    Ok(out)
}
