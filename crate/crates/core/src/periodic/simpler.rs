use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use super::crosscorr::{delta_functions, reflect};
use super::rep::PeriodicRepresentation;
use super::sparse::{sparse_conv_window, SparseVec};
use crate::error::{usage, Result};

/// Pattern-side data shared by every stream over the same pattern.
#[derive(Clone, Debug)]
pub struct PatternTables {
    rep: PeriodicRepresentation,
    p: usize,
    m: usize,
    /// Length of the head; the tail is `P[m_h..]`.
    m_h: usize,
    delta: usize,
    tail: Vec<u64>,
    head_deltas: BTreeMap<u64, SparseVec>,
}

impl PatternTables {
    pub fn new(prep: &PeriodicRepresentation) -> Result<Self> {
        if prep.is_empty() {
            return usage("empty pattern");
        }
        let p = prep.period();
        let m = prep.len();
        let delta = prep.mismatches() + p;
        let m_h = m.saturating_sub(2 * delta);
        let tail = (m_h..m).map(|i| prep.symbol_at(i)).collect();
        let head_deltas = if m_h == 0 {
            BTreeMap::new()
        } else {
            let head = prep.prefix(m_h);
            delta_functions(&head).into_iter().map(|(a, f)| (a, reflect(&f, m_h, p))).collect()
        };
        Ok(PatternTables { rep: prep.clone(), p, m, m_h, delta, tail, head_deltas })
    }

    pub fn rep(&self) -> &PeriodicRepresentation {
        &self.rep
    }

    pub fn pattern_len(&self) -> usize {
        self.m
    }

    pub fn period(&self) -> usize {
        self.p
    }
}

/// Symbols at positions `[base, base + buf.len())`.
#[derive(Clone, Debug, Default)]
struct Window {
    base: usize,
    buf: VecDeque<u64>,
}

impl Window {
    fn get(&self, x: usize) -> u64 {
        self.buf[x - self.base]
    }

    fn push(&mut self, a: u64, keep: usize) {
        self.buf.push_back(a);
        while self.buf.len() > keep {
            self.buf.pop_front();
            self.base += 1;
        }
    }
}

/// Online Hamming distances between a fixed pattern and every window of a
/// text sharing the pattern's approximate period.
///
/// Results are exact for any text; the cost per symbol grows with the number
/// of period breaks in the text.
#[derive(Clone, Debug)]
pub struct PeriodicHammingStream {
    tables: Arc<PatternTables>,
    len: usize,
    text: Window,
    // positions x >= p with T[x] != T[x-p], oldest first
    breaks: VecDeque<usize>,
    // HamT(j) for the last p alignments of the tail
    tail_ham: VecDeque<usize>,
    // (x, a, v): Delta_p[T_a](x) = v, sorted by x
    text_deltas: VecDeque<(i64, u64, i64)>,
    // h(j) = (T (x) P_H)(j) for j in [h_base, h_base + h.len())
    h_base: i64,
    h: VecDeque<i64>,
}

impl PeriodicHammingStream {
    pub fn new(prep: &PeriodicRepresentation) -> Result<Self> {
        Ok(Self::with_tables(Arc::new(PatternTables::new(prep)?)))
    }

    pub fn with_tables(tables: Arc<PatternTables>) -> Self {
        PeriodicHammingStream {
            tables,
            len: 0,
            text: Window::default(),
            breaks: VecDeque::new(),
            tail_ham: VecDeque::new(),
            text_deltas: VecDeque::new(),
            h_base: 0,
            h: VecDeque::new(),
        }
    }

    pub fn tables(&self) -> &Arc<PatternTables> {
        &self.tables
    }

    /// Symbols consumed so far.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Consumes `T[len]` and returns `Ham_{P,T}[len]` once a full window exists.
    pub fn push(&mut self, a: u64) -> Option<usize> {
        let t = Arc::clone(&self.tables);
        let p = t.p;
        let x = self.len;
        let tau = t.m - t.m_h;
        self.text.push(a, tau + p);
        self.len += 1;
        if x >= p {
            let prev = self.text.get(x - p);
            if prev != a {
                self.breaks.push_back(x);
            }
        }
        while self.breaks.front().is_some_and(|&b| b + tau <= x) {
            self.breaks.pop_front();
        }

        let tail = self.tail_ham(x, tau);
        if t.m_h > 0 {
            self.record_delta(x, a);
            if self.len % t.delta == 0 {
                self.process_block();
            }
        }
        self.trim_h(x);
        if x + 1 < t.m {
            return None;
        }
        let head = if t.m_h == 0 {
            0
        } else {
            let j = (x - tau) as i64;
            let h = self.h[(j - self.h_base) as usize];
            (t.m_h as i64 - h) as usize
        };
        Some(tail + head)
    }

    fn tail_ham(&mut self, j: usize, tau: usize) -> usize {
        let t = &self.tables;
        let p = t.p;
        if j + 1 < tau {
            return 0;
        }
        let start = j + 1 - tau;
        let v = if j + 1 >= tau + p {
            let mut v = self.tail_ham[self.tail_ham.len() - p] as i64;
            for &x in self.breaks.iter().filter(|&&x| x >= start) {
                let s = t.tail[x - start];
                v += (s != self.text.get(x)) as i64 - (s != self.text.get(x - p)) as i64;
            }
            v as usize
        } else {
            (0..tau).filter(|&s| t.tail[s] != self.text.get(start + s)).count()
        };
        self.tail_ham.push_back(v);
        if self.tail_ham.len() > p {
            self.tail_ham.pop_front();
        }
        v
    }

    fn record_delta(&mut self, x: usize, a: u64) {
        let p = self.tables.p;
        let at = x as i64 - p as i64;
        if x < p {
            self.text_deltas.push_back((at, a, 1));
        } else {
            let prev = self.text.get(x - p);
            if prev != a {
                self.text_deltas.push_back((at, prev, -1));
                self.text_deltas.push_back((at, a, 1));
            }
        }
    }

    /// With `len = i + delta`, fills `h` on `[i, i + delta)`.
    fn process_block(&mut self) {
        let t = Arc::clone(&self.tables);
        let (p, delta) = (t.p as i64, t.delta);
        let i = (self.len - delta) as i64;
        let lo = i - 2 * p;
        // entries that can reach this or any later window
        let floor = lo - t.m_h as i64;
        while self.text_deltas.front().is_some_and(|e| e.0 <= floor) {
            self.text_deltas.pop_front();
        }
        let mut by_symbol: BTreeMap<u64, Vec<(i64, i64)>> = BTreeMap::new();
        for &(x, a, v) in &self.text_deltas {
            if t.head_deltas.contains_key(&a) {
                by_symbol.entry(a).or_default().push((x, v));
            }
        }
        let mut d2 = vec![0i64; delta];
        for (a, e) in by_symbol {
            let f = SparseVec::new(e);
            for (o, v) in d2.iter_mut().zip(sparse_conv_window(&f, &t.head_deltas[&a], lo, delta)) {
                *o += v;
            }
        }
        if self.h.is_empty() {
            self.h_base = i;
        }
        for (k, dv) in d2.into_iter().enumerate() {
            let j = lo + k as i64;
            let v = dv + 2 * self.h_at(j + p) - self.h_at(j);
            self.h.push_back(v);
        }
    }

    fn h_at(&self, j: i64) -> i64 {
        if j < self.h_base {
            debug_assert!(j < 0, "h({j}) discarded");
            return 0;
        }
        self.h[(j - self.h_base) as usize]
    }

    /// Drops `h` values needed neither for output nor for the recurrence.
    fn trim_h(&mut self, x: usize) {
        let t = &self.tables;
        let tau = (t.m - t.m_h) as i64;
        let next_i = (self.len / t.delta * t.delta) as i64;
        let keep = (x as i64 - tau).min(next_i - 2 * t.p as i64);
        while self.h_base < keep && !self.h.is_empty() {
            self.h.pop_front();
            self.h_base += 1;
        }
    }
}

/// Hamming distances for every full alignment of `P` in `t`.
pub fn periodic_hamming_stream<I: IntoIterator<Item = u64>>(
    prep: &PeriodicRepresentation,
    t: I,
) -> Result<Vec<usize>> {
    let mut s = PeriodicHammingStream::new(prep)?;
    Ok(t.into_iter().filter_map(|a| s.push(a)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::naive::hamming_all_naive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noisy(rng: &mut ChaCha8Rng, head: &[u64], n: usize, rate: f64, sigma: u64) -> Vec<u64> {
        (0..n).map(|i| if rng.gen_bool(rate) { rng.gen_range(0..sigma) } else { head[i % head.len()] }).collect()
    }

    #[test]
    fn constant_strings() {
        let rep = PeriodicRepresentation::from_string(&[0; 4], 1);
        assert_eq!(periodic_hamming_stream(&rep, vec![0; 8]).unwrap(), vec![0; 5]);
    }

    #[test]
    fn one_corruption_shifts_affected_windows() {
        let pat: Vec<u64> = (0..40).map(|i| i % 3).collect();
        let mut text: Vec<u64> = (0..120).map(|i| i % 3).collect();
        let rep = PeriodicRepresentation::from_string(&pat, 3);
        let clean = periodic_hamming_stream(&rep, text.clone()).unwrap();
        text[60] = 9;
        let dirty = periodic_hamming_stream(&rep, text.clone()).unwrap();
        for (s, (c, d)) in clean.iter().zip(&dirty).enumerate() {
            let covers = s % 3 == 0 && s <= 60 && 60 < s + 40;
            assert_eq!(*d, c + covers as usize);
        }
        assert_eq!(dirty, hamming_all_naive(&pat, &text));
    }

    #[test]
    fn empty_pattern_rejected() {
        assert!(PeriodicHammingStream::new(&PeriodicRepresentation::empty(2)).is_err());
    }

    #[test]
    fn random_against_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for it in 0..400 {
            let per = rng.gen_range(1..7);
            let sigma = rng.gen_range(2..5);
            let head: Vec<u64> = (0..per).map(|_| rng.gen_range(0..sigma)).collect();
            let m = rng.gen_range(1..120);
            let n = rng.gen_range(m..400);
            let pat = noisy(&mut rng, &head, m, 0.03, sigma);
            let rate = if it % 4 == 0 { 0.5 } else { 0.05 };
            let text = noisy(&mut rng, &head, n, rate, sigma);
            let rep = PeriodicRepresentation::from_string(&pat, per);
            assert_eq!(
                periodic_hamming_stream(&rep, text.iter().copied()).unwrap(),
                hamming_all_naive(&pat, &text),
                "per={per} pat={pat:?}"
            );
        }
    }

    #[test]
    fn state_stays_bounded() {
        let head = [1u64, 2, 3];
        let pat: Vec<u64> = (0..300).map(|i| head[i % 3]).collect();
        let rep = PeriodicRepresentation::from_string(&pat, 3);
        let mut s = PeriodicHammingStream::new(&rep).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for i in 0..20_000 {
            let a = if rng.gen_bool(0.01) { 7 } else { head[i % 3] };
            s.push(a);
            assert!(s.h.len() <= 4 * (rep.mismatches() + 3) + 2, "{} {}", s.h.len(), rep.mismatches());
            assert!(s.text.buf.len() <= 2 * (rep.mismatches() + 3) + 3);
        }
    }
}
