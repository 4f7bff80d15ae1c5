use std::collections::BTreeMap;

use super::rep::PeriodicRepresentation;
use super::sparse::{sparse_conv_window, SparseVec};
use crate::error::{usage, Result};

/// `Delta_p[X_a]` for every symbol `a` of `X`, with `p` the representation's period.
pub fn delta_functions(rep: &PeriodicRepresentation) -> BTreeMap<u64, SparseVec> {
    let p = rep.period() as i64;
    let n = rep.len() as i64;
    let mut acc: BTreeMap<u64, Vec<(i64, i64)>> = BTreeMap::new();
    for (x, &a) in rep.head().iter().enumerate() {
        acc.entry(a).or_default().push((x as i64 - p, 1));
    }
    for m in rep.selfmi().entries() {
        acc.entry(m.a).or_default().push((m.index as i64, -1));
        acc.entry(m.b).or_default().push((m.index as i64, 1));
    }
    for y in (n - p).max(0)..n {
        acc.entry(rep.symbol_at(y as usize)).or_default().push((y, -1));
    }
    acc.into_iter().map(|(a, v)| (a, SparseVec::new(v))).filter(|(_, v)| !v.is_empty()).collect()
}

/// `Delta_p[X^R_a]` from `Delta_p[X_a]` for a string of length `m`.
pub fn reflect(f: &SparseVec, m: usize, p: usize) -> SparseVec {
    let c = m as i64 - 1 - p as i64;
    SparseVec::new(f.entries().iter().map(|&(y, v)| (c - y, -v)).collect())
}

/// `Delta_p^2[T (x) P](i..i+delta)` computed as `sum_a Delta_p[T_a] * Delta_p[P^R_a]`.
pub fn second_diff_crosscorr(
    prep: &PeriodicRepresentation,
    trep: &PeriodicRepresentation,
    i: i64,
    delta: usize,
) -> Result<Vec<i64>> {
    if prep.period() != trep.period() {
        return usage(format!("pattern period {} differs from text period {}", prep.period(), trep.period()));
    }
    let p = prep.period();
    let dp = delta_functions(prep);
    let dt = delta_functions(trep);
    let mut out = vec![0i64; delta];
    for (a, ft) in &dt {
        if let Some(fp) = dp.get(a) {
            let g = reflect(fp, prep.len(), p);
            for (o, v) in out.iter_mut().zip(sparse_conv_window(ft, &g, i, delta)) {
                *o += v;
            }
        }
    }
    Ok(out)
}
