use super::bits::{BitSink, BitSource};
use crate::error::{Error, Result};

/// Subset of `[0, universe)` stored as a sorted array.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MembershipSet {
    universe: u64,
    items: Vec<u64>,
}

impl MembershipSet {
    pub fn new(universe: u64, mut items: Vec<u64>) -> Self {
        items.sort_unstable();
        items.dedup();
        assert!(items.last().map_or(true, |&x| x < universe), "element outside universe");
        MembershipSet { universe, items }
    }

    pub fn contains(&self, x: u64) -> bool {
        self.items.binary_search(&x).is_ok()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[u64] {
        &self.items
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    /// Gap-coded elements; the universe is implied by the caller.
    pub fn write(&self, w: &mut BitSink) {
        w.gamma(self.items.len() as u64);
        let mut prev = None;
        for &x in &self.items {
            w.gamma(match prev {
                None => x,
                Some(p) => x - p - 1,
            });
            prev = Some(x);
        }
    }

    pub fn read(r: &mut BitSource, universe: u64) -> Result<Self> {
        let m = r.gamma_max(universe, "membership count")?;
        let mut items = Vec::with_capacity(m as usize);
        let mut prev: Option<u64> = None;
        for _ in 0..m {
            let g = r.gamma()?;
            let x = match prev {
                None => Some(g),
                Some(p) => p.checked_add(g).and_then(|v| v.checked_add(1)),
            }
            .filter(|&x| x < universe)
            .ok_or_else(|| Error::Decode("membership element out of range".into()))?;
            items.push(x);
            prev = Some(x);
        }
        Ok(MembershipSet { universe, items })
    }
}
