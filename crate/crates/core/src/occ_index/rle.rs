use super::bits::{BitSink, BitSource};
use crate::error::{Error, Result};

/// Run-length encoded string with `O(log r)` access.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RleString {
    len: u64,
    starts: Vec<u64>,
    symbols: Vec<u64>,
}

impl RleString {
    /// From `(run length, symbol)` pairs; adjacent equal runs are merged and
    /// empty runs dropped.
    pub fn from_runs<I: IntoIterator<Item = (u64, u64)>>(runs: I) -> Self {
        let mut out = RleString::default();
        for (l, s) in runs {
            if l == 0 {
                continue;
            }
            if out.symbols.last() != Some(&s) {
                out.starts.push(out.len);
                out.symbols.push(s);
            }
            out.len += l;
        }
        out
    }

    pub fn from_symbols(s: &[u64]) -> Self {
        Self::from_runs(s.iter().map(|&a| (1, a)))
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn runs(&self) -> usize {
        self.starts.len()
    }

    pub fn get(&self, i: u64) -> u64 {
        assert!(i < self.len, "index {i} out of range {}", self.len);
        let r = self.starts.partition_point(|&s| s <= i) - 1;
        self.symbols[r]
    }

    /// `(start, length, symbol)` of every run.
    pub fn iter_runs(&self) -> impl Iterator<Item = (u64, u64, u64)> + '_ {
        (0..self.runs()).map(move |r| {
            let end = self.starts.get(r + 1).copied().unwrap_or(self.len);
            (self.starts[r], end - self.starts[r], self.symbols[r])
        })
    }

    pub fn to_vec(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.len as usize);
        for (_, l, s) in self.iter_runs() {
            out.extend(std::iter::repeat(s).take(l as usize));
        }
        out
    }

    /// Runs as gap-coded starts and fixed-width symbol codes.
    pub fn write(&self, w: &mut BitSink, code: impl Fn(u64) -> u64, width: u32) {
        w.gamma(self.len);
        w.gamma(self.runs() as u64);
        let mut prev = 0;
        for (i, (&s, &a)) in self.starts.iter().zip(&self.symbols).enumerate() {
            if i > 0 {
                w.gamma(s - prev - 1);
            }
            prev = s;
            w.fixed(width, code(a));
        }
    }

    pub fn read(r: &mut BitSource, decode: impl Fn(u64) -> Result<u64>, width: u32, max_len: u64) -> Result<Self> {
        let len = r.gamma_max(max_len, "run-length string length")?;
        let runs = r.gamma_max(len, "run count")?;
        if len > 0 && runs == 0 {
            return Err(Error::Decode("non-empty run-length string without runs".into()));
        }
        let mut out = RleString { len, starts: Vec::with_capacity(runs as usize), symbols: Vec::new() };
        let mut prev = 0u64;
        for i in 0..runs {
            let s = if i == 0 { 0 } else { prev.checked_add(r.gamma()? + 1).filter(|&s| s < len).ok_or_else(|| Error::Decode("run start out of range".into()))? };
            let a = decode(r.fixed(width)?)?;
            if out.symbols.last() == Some(&a) {
                return Err(Error::Decode("adjacent runs share a symbol".into()));
            }
            out.starts.push(s);
            out.symbols.push(a);
            prev = s;
        }
        Ok(out)
    }
}
