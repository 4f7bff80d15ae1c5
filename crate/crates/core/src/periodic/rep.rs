use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::error::{usage, Result};
use crate::sketch::{Mismatch, MismatchInfo};

/// A string stored as its first `p` symbols plus the mismatches between the
/// string and its own shift by `p`.
#[derive(Clone, Debug)]
pub struct PeriodicRepresentation {
    period: usize,
    head: Vec<u64>,
    /// Entry `(j, X[j], X[j+p])` for every `j` with `X[j] != X[j+p]`.
    selfmi: MismatchInfo,
    n: usize,
    // (x mod p, x) -> X[x] for every x = j + p with j in selfmi
    index: BTreeMap<(usize, usize), u64>,
}

impl PartialEq for PeriodicRepresentation {
    fn eq(&self, o: &Self) -> bool {
        self.period == o.period && self.head == o.head && self.selfmi == o.selfmi && self.n == o.n
    }
}

impl Eq for PeriodicRepresentation {}

impl PeriodicRepresentation {
    /// Empty string with period `p >= 1`.
    pub fn empty(p: usize) -> Self {
        assert!(p >= 1, "period must be positive");
        PeriodicRepresentation {
            period: p,
            head: Vec::new(),
            selfmi: MismatchInfo::empty(),
            n: 0,
            index: BTreeMap::new(),
        }
    }

    pub fn from_string(x: &[u64], p: usize) -> Self {
        let mut rep = Self::empty(p);
        for &a in x {
            rep.push(a);
        }
        rep
    }

    /// Validates and assembles a representation from its parts.
    pub fn new(period: usize, head: Vec<u64>, selfmi: MismatchInfo, n: usize) -> Result<Self> {
        if period == 0 {
            return usage("period must be positive");
        }
        if head.len() != period.min(n) {
            return usage(format!("head of length {} for period {period} and length {n}", head.len()));
        }
        if let Some(m) = selfmi.entries().last() {
            if m.index as usize + period >= n {
                return usage(format!("self-mismatch {} outside the overlap", m.index));
            }
        }
        let mut rep = PeriodicRepresentation { period, head, selfmi: MismatchInfo::empty(), n, index: BTreeMap::new() };
        for m in selfmi.entries() {
            let x = m.index as usize + period;
            if rep.symbol_at(m.index as usize) != m.a {
                return usage(format!("self-mismatch at {} disagrees with earlier symbols", m.index));
            }
            rep.index.insert((x % period, x), m.b);
        }
        rep.selfmi = selfmi;
        Ok(rep)
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn head(&self) -> &[u64] {
        &self.head
    }

    pub fn selfmi(&self) -> &MismatchInfo {
        &self.selfmi
    }

    /// Number of self-mismatches, i.e. the smallest `d` certified.
    pub fn mismatches(&self) -> usize {
        self.selfmi.len()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `X[i]` in `O(log d)`.
    pub fn symbol_at(&self, i: usize) -> u64 {
        debug_assert!(i < self.n);
        let p = self.period;
        if i < p {
            return self.head[i];
        }
        let r = i % p;
        match self.index.range((r, 0)..=(r, i)).next_back() {
            Some((_, &s)) => s,
            None => self.head[r],
        }
    }

    pub fn reconstruct(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.n);
        let mut mi = self.selfmi.entries().iter().peekable();
        for i in 0..self.n {
            if i < self.period {
                out.push(self.head[i]);
                continue;
            }
            let j = (i - self.period) as u64;
            match mi.peek() {
                Some(m) if m.index == j => {
                    out.push(m.b);
                    mi.next();
                }
                _ => out.push(out[i - self.period]),
            }
        }
        out
    }

    /// Appends one symbol.
    pub fn push(&mut self, a: u64) {
        let p = self.period;
        if self.n < p {
            self.head.push(a);
        } else {
            let prev = self.symbol_at(self.n - p);
            if prev != a {
                self.selfmi.push(Mismatch { index: (self.n - p) as u64, a: prev, b: a });
                self.index.insert((self.n % p, self.n), a);
            }
        }
        self.n += 1;
    }

    /// Representation of the prefix of length `len`.
    pub fn prefix(&self, len: usize) -> Self {
        assert!(len <= self.n);
        let p = self.period;
        let mut rep = Self::empty(p);
        rep.head = self.head[..p.min(len)].to_vec();
        rep.n = len;
        for m in self.selfmi.entries() {
            if m.index as usize + p >= len {
                break;
            }
            rep.selfmi.push(*m);
            let x = m.index as usize + p;
            rep.index.insert((x % p, x), m.b);
        }
        rep
    }

    /// The same string represented with respect to period `q`.
    ///
    /// Runs in time proportional to `p + q` plus the sizes of both mismatch
    /// sets; `q` should be a good period of the string.
    pub fn with_period(&self, q: usize) -> Self {
        assert!(q >= 1, "period must be positive");
        if q == self.period {
            return self.clone();
        }
        let p = self.period;
        let n = self.n;
        let mut rep = Self::empty(q);
        rep.n = n;
        rep.head = (0..q.min(n)).map(|i| self.symbol_at(i)).collect();
        if q >= n {
            return rep;
        }
        // A q-mismatch at x needs x < p+q, a p-mismatch at x or x-q, or a
        // q-mismatch at x-p.
        let mut heap = BinaryHeap::new();
        for x in q..(p + q).min(n) {
            heap.push(Reverse(x));
        }
        for m in self.selfmi.entries() {
            let x = m.index as usize + p;
            if x >= q {
                heap.push(Reverse(x));
            }
            if x + q < n {
                heap.push(Reverse(x + q));
            }
        }
        let mut last = None;
        while let Some(Reverse(x)) = heap.pop() {
            if last == Some(x) {
                continue;
            }
            last = Some(x);
            let (a, b) = (self.symbol_at(x - q), self.symbol_at(x));
            if a != b {
                rep.selfmi.push(Mismatch { index: (x - q) as u64, a, b });
                rep.index.insert((x % q, x), b);
                if x + p < n {
                    heap.push(Reverse(x + p));
                }
            }
        }
        rep
    }
}
