//! Compact index of a string's symbols in non-uniform classes modulo the
//! gcd of a set of approximate periods.

mod bits;
mod membership;
mod overlap;
mod rle;
mod structure;

pub use bits::{width_for, BitSink, BitSource};
pub use membership::MembershipSet;
pub use overlap::period_from_overlap;
pub use rle::RleString;
pub use structure::{Multiset, PeriodStructure, BLANK, MAX_SYMBOL, NO_MAJORITY};
