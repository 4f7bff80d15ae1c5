use std::collections::{BTreeMap, VecDeque};

use super::rep::PeriodicRepresentation;
use super::sparse::convolve_i64;
use crate::error::{usage, Result};

/// Streaming search for the longest prefix with a `d`-period at most `p`.
///
/// Symbols are buffered into blocks of `p`; a block that breaks every
/// candidate period is bisected to locate the exact end of the prefix.
#[derive(Clone, Debug)]
pub struct PeriodicPrefixFinder {
    p: usize,
    d: usize,
    rep: PeriodicRepresentation,
    // counts[q-1] = HD(Y[..|Y|-q], Y[q..]) for q in 1..=p
    counts: Vec<usize>,
    tail: VecDeque<u64>,
    block: Vec<u64>,
    done: bool,
}

impl PeriodicPrefixFinder {
    pub fn new(p: usize, d: usize) -> Result<Self> {
        if p == 0 {
            return usage("period bound must be positive");
        }
        if d > 8 * p {
            return usage(format!("mismatch bound {d} exceeds 8 * period bound {p}"));
        }
        Ok(PeriodicPrefixFinder {
            p,
            d,
            rep: PeriodicRepresentation::empty(1),
            counts: vec![0; p],
            tail: VecDeque::with_capacity(p),
            block: Vec::with_capacity(p),
            done: false,
        })
    }

    /// Whether the prefix is already known to have ended.
    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Feeds one symbol. Returns `false` once further input is ignored.
    pub fn push(&mut self, a: u64) -> bool {
        if self.done {
            return false;
        }
        self.block.push(a);
        if self.block.len() == self.p {
            let b = std::mem::take(&mut self.block);
            self.append_block(&b);
        }
        !self.done
    }

    /// Length of the prefix certified so far, ignoring buffered symbols.
    pub fn certified_len(&self) -> usize {
        self.rep.len()
    }

    /// Returns `(|Y|, p', representation of Y with respect to p')` with `p'`
    /// the smallest admissible period.
    pub fn finish(mut self) -> (usize, usize, PeriodicRepresentation) {
        if !self.done && !self.block.is_empty() {
            let b = std::mem::take(&mut self.block);
            self.append_block(&b);
        }
        let q = (1..=self.p).find(|&q| self.counts[q - 1] <= self.d).unwrap_or(1);
        let rep = self.rep.with_period(q);
        (rep.len(), q, rep)
    }

    fn append_block(&mut self, b: &[u64]) {
        if b.is_empty() || self.done {
            return;
        }
        let add = self.block_mismatches(b);
        let cur = self.rep.period();
        let ok = |q: usize| self.counts[q - 1] + add[q - 1] <= self.d;
        let choice = if cur <= self.p && ok(cur) { Some(cur) } else { (1..=self.p).find(|&q| ok(q)) };
        match choice {
            Some(q) => {
                if q != cur {
                    self.rep = self.rep.with_period(q);
                }
                for (c, a) in self.counts.iter_mut().zip(&add) {
                    *c += a;
                }
                for &s in b {
                    self.rep.push(s);
                    if self.tail.len() == self.p {
                        self.tail.pop_front();
                    }
                    self.tail.push_back(s);
                }
            }
            None if b.len() == 1 => self.done = true,
            None => {
                let (l, r) = b.split_at(b.len().div_ceil(2));
                self.append_block(l);
                self.append_block(r);
            }
        }
    }

    /// For each `q` in `1..=p`, mismatches between `b` and the symbols `q`
    /// positions earlier in `Y b`.
    fn block_mismatches(&self, b: &[u64]) -> Vec<usize> {
        let y = self.rep.len();
        let w: Vec<u64> = self.tail.iter().copied().chain(b.iter().copied()).collect();
        let w0 = y - self.tail.len();
        let mut by_symbol: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (j, &s) in b.iter().enumerate() {
            by_symbol.entry(s).or_default().push(j);
        }
        // matches[q] via correlation of w_a with reversed b_a
        let mut matches = vec![0i64; self.p + 1];
        for (a, pos) in &by_symbol {
            let wa: Vec<i64> = w.iter().map(|&s| (s == *a) as i64).collect();
            let mut br = vec![0i64; b.len()];
            for &j in pos {
                br[b.len() - 1 - j] = 1;
            }
            let c = convolve_i64(&wa, &br);
            // b[j] at global y+j against w at global y+j-q, i.e. w index y+j-q-w0;
            // sum over j lands at c[(y-q-w0) + b.len()-1]
            for (q, m) in matches.iter_mut().enumerate().skip(1) {
                let t = (y + b.len() - 1) as i64 - (q + w0) as i64;
                if t >= 0 && (t as usize) < c.len() {
                    *m += c[t as usize];
                }
            }
        }
        (1..=self.p)
            .map(|q| {
                let valid = (y + b.len()).saturating_sub(q.max(y)).min(b.len());
                valid - matches[q] as usize
            })
            .collect()
    }
}

/// Runs [`PeriodicPrefixFinder`] over `x`, pulling symbols only while the
/// prefix may still grow.
pub fn longest_periodic_prefix<I: IntoIterator<Item = u64>>(
    x: I,
    p: usize,
    d: usize,
) -> Result<(usize, usize, PeriodicRepresentation)> {
    let mut f = PeriodicPrefixFinder::new(p, d)?;
    for a in x {
        if !f.push(a) {
            break;
        }
    }
    Ok(f.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hd_shift(x: &[u64], q: usize) -> usize {
        if q >= x.len() {
            return 0;
        }
        x[..x.len() - q].iter().zip(&x[q..]).filter(|(a, b)| a != b).count()
    }

    fn brute(x: &[u64], p: usize, d: usize) -> (usize, usize) {
        for len in (0..=x.len()).rev() {
            if let Some(q) = (1..=p).find(|&q| hd_shift(&x[..len], q) <= d) {
                return (len, q);
            }
        }
        unreachable!()
    }

    #[test]
    fn constant_string() {
        let (len, q, rep) = longest_periodic_prefix(std::iter::repeat(5).take(40), 4, 0).unwrap();
        assert_eq!((len, q), (40, 1));
        assert!(rep.selfmi().is_empty());
    }

    #[test]
    fn alternating_then_constant() {
        let x: Vec<u64> = b"ababababcccccccc".iter().map(|&c| c as u64).collect();
        let (len, q, rep) = longest_periodic_prefix(x.iter().copied(), 2, 0).unwrap();
        assert_eq!((len, q), (8, 2));
        assert_eq!(rep.reconstruct(), x[..8].to_vec());
    }

    #[test]
    fn stops_pulling_after_failure() {
        let mut pulled = 0;
        let x = (0..1000u64).map(|i| {
            pulled += 1;
            if i < 20 { i % 2 } else { 7 + i }
        });
        let (len, _, _) = longest_periodic_prefix(x, 2, 1).unwrap();
        assert_eq!(len, 21);
        assert!(pulled <= 21 + 2 + 2);
    }

    #[test]
    fn rejects_large_d() {
        assert!(PeriodicPrefixFinder::new(2, 17).is_err());
        assert!(PeriodicPrefixFinder::new(0, 0).is_err());
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for it in 0..600 {
            let p = rng.gen_range(1..10);
            let d = rng.gen_range(0..=(3.min(8 * p)));
            let per = rng.gen_range(1..=p + 2);
            let head: Vec<u64> = (0..per).map(|_| rng.gen_range(0..3)).collect();
            let n = rng.gen_range(0..80);
            let noise = if it % 3 == 0 { 0.02 } else { 0.1 };
            let x: Vec<u64> =
                (0..n).map(|i| if rng.gen_bool(noise) { rng.gen_range(0..3) } else { head[i % per] }).collect();
            let (len, q, rep) = longest_periodic_prefix(x.iter().copied(), p, d).unwrap();
            assert_eq!((len, q), brute(&x, p, d), "x={x:?} p={p} d={d}");
            assert_eq!(rep.period(), q);
            assert_eq!(rep.reconstruct(), x[..len].to_vec());
            assert!(rep.mismatches() <= d);
        }
    }
}
