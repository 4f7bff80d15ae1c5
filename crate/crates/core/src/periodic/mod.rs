//! Hamming distances against strings with a small approximate period.

mod crosscorr;
mod naive;
mod perpref;
mod rep;
mod simpler;
mod small_period;
mod sparse;

pub use crosscorr::{delta_functions, reflect, second_diff_crosscorr};
pub use naive::{cross_correlation_naive, hamming_all_naive};
pub use perpref::{longest_periodic_prefix, PeriodicPrefixFinder};
pub use rep::PeriodicRepresentation;
pub use simpler::{periodic_hamming_stream, PatternTables, PeriodicHammingStream};
pub use small_period::{mismatches_at, small_period_match, SmallPeriodMatcher, SmallPeriodOptions};
pub use sparse::{heavy_threshold, naive_conv_window, sparse_conv_window, SparseVec};
