use std::collections::BTreeSet;

use crate::error::{usage, Result};
use crate::sketch::{Mismatch, MismatchInfo};

/// Self-mismatches of `P` for period `p = l2 - l1`, given two overlapping
/// occurrences of `P` (length `n`) at `l1 < l2` and their mismatch
/// informations against the text.
pub fn period_from_overlap(
    l1: u64,
    mi1: &MismatchInfo,
    l2: u64,
    mi2: &MismatchInfo,
    n: u64,
) -> Result<(u64, MismatchInfo)> {
    if l2 <= l1 || l2 - l1 >= n {
        return usage(format!("occurrences at {l1} and {l2} do not overlap for length {n}"));
    }
    let p = l2 - l1;
    let mut xs = BTreeSet::new();
    xs.extend(mi2.iter().map(|m| m.index).filter(|&x| x + p < n));
    xs.extend(mi1.iter().map(|m| m.index).filter(|&x| x >= p).map(|x| x - p));
    let mut out = Vec::new();
    for x in xs {
        let (e1, e2) = (mi1.get(x + p), mi2.get(x));
        // T[l1 + x + p] == T[l2 + x]
        let t = e1.or(e2).map(|m| m.b).expect("candidate has an entry");
        if let (Some(a), Some(b)) = (e1, e2) {
            if a.b != b.b {
                return usage(format!("inconsistent text symbol at offset {x}"));
            }
        }
        let a = e2.map_or(t, |m| m.a);
        let b = e1.map_or(t, |m| m.a);
        if a != b {
            out.push(Mismatch { index: x, a, b });
        }
    }
    Ok((p, MismatchInfo::new(out)?))
}
