use crate::fp::{poly_mul, FieldParams, Poly};

/// Finitely supported integer function stored as sorted `(index, value)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseVec {
    entries: Vec<(i64, i64)>,
}

impl SparseVec {
    /// Sorts, merges equal indices and drops zeros.
    pub fn new(mut entries: Vec<(i64, i64)>) -> Self {
        entries.sort_unstable_by_key(|e| e.0);
        let mut out: Vec<(i64, i64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => out.push((i, v)),
            }
        }
        out.retain(|e| e.1 != 0);
        SparseVec { entries: out }
    }

    pub fn entries(&self) -> &[(i64, i64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: i64) -> i64 {
        self.entries.binary_search_by_key(&i, |e| e.0).map(|k| self.entries[k].1).unwrap_or(0)
    }

    /// Entries with index in `[lo, hi]`.
    fn range(&self, lo: i64, hi: i64) -> &[(i64, i64)] {
        let a = self.entries.partition_point(|e| e.0 < lo);
        let b = self.entries.partition_point(|e| e.0 <= hi);
        &self.entries[a..b.max(a)]
    }
}

fn to_field(f: &FieldParams, v: i64) -> u64 {
    f.from_i64(v)
}

fn from_field(f: &FieldParams, v: u64) -> i64 {
    let p = f.modulus();
    if v > p / 2 {
        -((p - v) as i64)
    } else {
        v as i64
    }
}

/// Exact integer convolution of dense vectors whose results fit well inside
/// `(-p/2, p/2)` for the default prime.
pub(crate) fn convolve_i64(a: &[i64], b: &[i64]) -> Vec<i64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len().min(b.len()) <= 32 {
        let mut c = vec![0i64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x != 0 {
                for (j, &y) in b.iter().enumerate() {
                    c[i + j] += x * y;
                }
            }
        }
        return c;
    }
    let f = FieldParams::goldilocks();
    let pa = Poly::new(a.iter().map(|&v| to_field(&f, v)).collect());
    let pb = Poly::new(b.iter().map(|&v| to_field(&f, v)).collect());
    let mut c: Vec<i64> =
        poly_mul(&f, &pa, &pb).expect("within transform capacity").coeffs.iter().map(|&v| from_field(&f, v)).collect();
    c.resize(a.len() + b.len() - 1, 0);
    c
}

/// Heavy-block threshold `ceil(sqrt(delta * max(1, floor(log2 delta))))`.
pub fn heavy_threshold(delta: usize) -> usize {
    let lg = (usize::BITS - 1 - delta.max(1).leading_zeros()).max(1) as usize;
    let v = delta.max(1) * lg;
    let mut t = (v as f64).sqrt() as usize;
    while t * t > v {
        t -= 1;
    }
    while t * t < v {
        t += 1;
    }
    t
}

/// `(f*g)(i), ..., (f*g)(i+delta-1)` by direct double loop.
pub fn naive_conv_window(f: &SparseVec, g: &SparseVec, i: i64, delta: usize) -> Vec<i64> {
    let mut out = vec![0i64; delta];
    for &(x, fv) in &f.entries {
        for &(y, gv) in &g.entries {
            let j = x + y - i;
            if j >= 0 && (j as usize) < delta {
                out[j as usize] += fv * gv;
            }
        }
    }
    out
}

/// `(f*g)(i), ..., (f*g)(i+delta-1)` with blocks of `f` split into heavy
/// (dense transform) and light (pairwise) parts.
pub fn sparse_conv_window(f: &SparseVec, g: &SparseVec, i: i64, delta: usize) -> Vec<i64> {
    let mut out = vec![0i64; delta];
    if delta == 0 || f.is_empty() || g.is_empty() {
        return out;
    }
    let d = delta as i64;
    let threshold = heavy_threshold(delta);
    let fe = &f.entries;
    let mut start = 0;
    while start < fe.len() {
        let k = fe[start].0.div_euclid(d);
        let mut end = start;
        while end < fe.len() && fe[end].0.div_euclid(d) == k {
            end += 1;
        }
        let block = &fe[start..end];
        // g restricted to (i-(k+1)delta, i-(k-1)delta]
        let g_lo = i - (k + 1) * d + 1;
        let g_hi = i - (k - 1) * d;
        let gpart = g.range(g_lo, g_hi);
        if !gpart.is_empty() {
            if block.len() >= threshold {
                let mut fa = vec![0i64; delta];
                for &(x, v) in block {
                    fa[(x - k * d) as usize] = v;
                }
                let mut ga = vec![0i64; 2 * delta];
                for &(y, v) in gpart {
                    ga[(y - g_lo) as usize] = v;
                }
                let c = convolve_i64(&fa, &ga);
                // c[t] corresponds to index k*d + g_lo + t
                let base = k * d + g_lo;
                for (j, o) in out.iter_mut().enumerate() {
                    let t = i + j as i64 - base;
                    if t >= 0 && (t as usize) < c.len() {
                        *o += c[t as usize];
                    }
                }
            } else {
                for &(x, fv) in block {
                    for &(y, gv) in gpart {
                        let j = x + y - i;
                        if j >= 0 && j < d {
                            out[j as usize] += fv * gv;
                        }
                    }
                }
            }
        }
        start = end;
    }
    out
}
