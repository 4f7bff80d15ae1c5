//! Timing and memory runs of the streaming matcher on planted instances.

use std::time::Instant;

use hamstream_core::stream::{process_pattern, StreamMatcher};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{alloc, CliResult, RunConfig};

/// Random text with noisy copies of a pattern planted in it, generated on
/// the fly without allocating.
pub struct PlantedText<'a, R> {
    p: &'a [u64],
    rng: R,
    sigma: u64,
    left: usize,
    rate: f64,
    noise: f64,
    copy: Option<usize>,
}

impl<'a, R: Rng> PlantedText<'a, R> {
    /// `len` symbols over `[0, sigma)`. A copy of `p` starts at each free
    /// position with probability `rate`; copied symbols are replaced with
    /// probability `noise`.
    pub fn new(p: &'a [u64], len: usize, sigma: u64, rate: f64, noise: f64, rng: R) -> Self {
        PlantedText { p, rng, sigma, left: len, rate, noise, copy: None }
    }
}

impl<R: Rng> Iterator for PlantedText<'_, R> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        if self.copy.is_none() && !self.p.is_empty() && self.rng.gen_bool(self.rate) {
            self.copy = Some(0);
        }
        match self.copy {
            Some(j) => {
                self.copy = (j + 1 < self.p.len()).then_some(j + 1);
                if self.rng.gen_bool(self.noise) {
                    Some(self.rng.gen_range(0..self.sigma))
                } else {
                    Some(self.p[j])
                }
            }
            None => Some(self.rng.gen_range(0..self.sigma)),
        }
    }
}

/// One measured session.
#[derive(Clone, Debug)]
pub struct BenchRun {
    pub n: usize,
    pub k: usize,
    pub sigma: u64,
    pub text_len: usize,
    pub levels: usize,
    pub small_period: bool,
    pub occurrences: u64,
    /// Sorted per-symbol times in nanoseconds.
    pub ns: Vec<u32>,
    /// Peak heap bytes held by the index and matcher above the starting level.
    pub peak_bytes: usize,
    pub peak_components: usize,
}

impl BenchRun {
    pub fn quantile(&self, q: f64) -> u32 {
        if self.ns.is_empty() {
            return 0;
        }
        self.ns[((self.ns.len() - 1) as f64 * q).round() as usize]
    }

    pub fn peak_words(&self) -> usize {
        self.peak_bytes.div_ceil(8)
    }

    pub fn to_json(&self) -> Value {
        let mean = self.ns.iter().map(|&x| x as f64).sum::<f64>() / self.ns.len().max(1) as f64;
        json!({
            "n": self.n,
            "k": self.k,
            "sigma": self.sigma,
            "text_len": self.text_len,
            "levels": self.levels,
            "small_period": self.small_period,
            "occurrences": self.occurrences,
            "ns_per_symbol": {
                "mean": mean,
                "median": self.quantile(0.5),
                "p90": self.quantile(0.9),
                "p99": self.quantile(0.99),
                "max": self.quantile(1.0),
            },
            "peak_bytes": self.peak_bytes,
            "peak_words": self.peak_words(),
            "peak_buffer_components": self.peak_components,
        })
    }
}

/// Streams a planted text of length `text_factor * n` through a fresh
/// matcher. Heap use is measured only when [`alloc::CountingAlloc`] is the
/// global allocator.
pub fn bench_run(n: usize, k: usize, sigma: u64, text_factor: usize, seed: u64, timed: bool) -> CliResult<BenchRun> {
    let mut cfg = RunConfig::new(k, seed);
    cfg.alphabet = crate::Alphabet::Tokens;
    let params = cfg.sketch_params()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let p: Vec<u64> = (0..n).map(|_| rng.gen_range(0..sigma)).collect();
    let text_len = text_factor * n;
    let mut ns = Vec::with_capacity(if timed { text_len } else { 0 });
    let text = PlantedText::new(&p, text_len, sigma, 2.0 / n as f64, k as f64 / (2 * n) as f64, rng);

    let base = alloc::reset_peak();
    let idx = process_pattern(p.iter().copied(), k, &params)?;
    let mut m = StreamMatcher::new(&idx)?;
    let mut occurrences = 0;
    let mut peak_components = 0;
    for a in text {
        let hit = if timed {
            let t0 = Instant::now();
            let h = m.push(a)?;
            ns.push(t0.elapsed().as_nanos().min(u32::MAX as u128) as u32);
            h
        } else {
            m.push(a)?
        };
        occurrences += hit.is_some() as u64;
        peak_components = peak_components.max(m.live_buffer_components());
    }
    let peak_bytes = alloc::peak_bytes().saturating_sub(base);
    ns.sort_unstable();
    Ok(BenchRun {
        n,
        k,
        sigma,
        text_len,
        levels: idx.prefix_lengths().len(),
        small_period: idx.is_small_period(),
        occurrences,
        ns,
        peak_bytes,
        peak_components,
    })
}

pub const GRID_N: [usize; 3] = [1 << 10, 1 << 12, 1 << 14];
pub const GRID_K: [usize; 4] = [1, 4, 16, 64];

/// JSON report over `cases`.
pub fn report(cases: &[(usize, usize)], sigma: u64, seed: u64) -> CliResult<Value> {
    let mut runs = Vec::new();
    for &(n, k) in cases {
        runs.push(bench_run(n, k, sigma, 4, seed, true)?.to_json());
    }
    Ok(json!({
        "seed": seed,
        "memory_tracked": alloc::live_bytes() > 0,
        "runs": runs,
    }))
}

pub fn grid() -> Vec<(usize, usize)> {
    GRID_N.iter().flat_map(|&n| GRID_K.iter().map(move |&k| (n, k))).collect()
}
