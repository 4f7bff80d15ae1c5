//! Streaming k-mismatch pattern matching over prime-field sketches.

pub mod error;
pub mod codec;
pub mod decode_algebra;
pub mod delay;
pub mod fp;
pub mod occ_index;
pub mod occurrence;
pub mod periodic;
pub mod readonly;
pub mod sketch;
pub mod stream;

pub use error::{Error, Result};
pub use occurrence::OccurrenceRecord;
