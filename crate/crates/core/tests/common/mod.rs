#![allow(dead_code)]

use hamstream_core::fp::FieldParams;
use hamstream_core::sketch::{MismatchInfo, SketchParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn params(k: usize, seed: u64) -> SketchParams {
    SketchParams::new(k, FieldParams::goldilocks(), &mut rng(seed))
}

pub fn oracle(p: &[u64], t: &[u64], k: usize) -> Vec<(u64, MismatchInfo)> {
    if p.is_empty() || p.len() > t.len() {
        return Vec::new();
    }
    (0..=t.len() - p.len())
        .filter(|&s| p.iter().zip(&t[s..]).filter(|(a, b)| a != b).count() <= k)
        .map(|s| (s as u64, MismatchInfo::between(p, &t[s..s + p.len()])))
        .collect()
}

/// A pattern that is random, approximately periodic, or built from a few
/// repeated blocks, depending on `kind`.
pub fn pattern(r: &mut ChaCha8Rng, n: usize, k: usize, sigma: u64, kind: usize) -> Vec<u64> {
    match kind % 3 {
        0 => (0..n).map(|_| r.gen_range(0..sigma)).collect(),
        1 => {
            let per = r.gen_range(1..=k.max(1));
            let head: Vec<u64> = (0..per).map(|_| r.gen_range(0..sigma)).collect();
            (0..n).map(|i| if r.gen_bool(0.01) { r.gen_range(0..sigma) } else { head[i % per] }).collect()
        }
        _ => {
            let per = r.gen_range(1..=(n / 3).max(1));
            let head: Vec<u64> = (0..per).map(|_| r.gen_range(0..sigma)).collect();
            (0..n).map(|i| if r.gen_bool(0.005) { r.gen_range(0..sigma) } else { head[i % per] }).collect()
        }
    }
}

/// A text of at least `len` symbols mixing noisy copies of `p` with random
/// filler.
pub fn text(r: &mut ChaCha8Rng, p: &[u64], len: usize, k: usize, sigma: u64) -> Vec<u64> {
    let n = p.len();
    let mut t = Vec::with_capacity(len + n);
    while t.len() < len {
        if r.gen_bool(0.5) {
            let errs = r.gen_range(0..=k + 1);
            let start = t.len();
            t.extend_from_slice(p);
            for _ in 0..errs {
                let i = start + r.gen_range(0..n);
                t[i] = r.gen_range(0..sigma);
            }
        } else {
            let gap = r.gen_range(0..n / 2 + 2);
            t.extend((0..gap).map(|_| r.gen_range(0..sigma)));
        }
    }
    t
}
