use crate::sketch::{MismatchInfo, SketchK};

/// One reported k-mismatch occurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccurrenceRecord {
    /// Text position of the first aligned symbol.
    pub start: u64,
    /// Hamming distance of the alignment.
    pub hd: usize,
    /// Mismatches as `(offset in P, pattern symbol, text symbol)`, when requested.
    pub mi: Option<MismatchInfo>,
    /// `sk_k(T[0..start))`, when requested.
    pub prefix_sketch: Option<SketchK>,
}

impl OccurrenceRecord {
    pub fn new(start: u64, hd: usize) -> Self {
        OccurrenceRecord { start, hd, mi: None, prefix_sketch: None }
    }
}
