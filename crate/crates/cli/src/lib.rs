//! Command implementations behind the `hamstream` binary.
//!
//! Every command takes its inputs as readers and writes to a writer so the
//! same code runs from the binary and from tests.

pub mod alloc;
pub mod bench;
pub mod format;
pub mod hard;

use std::io::{self, Read, Write};

use hamstream_core::codec;
use hamstream_core::fp::{FieldParams, DEFAULT_MAX_N};
use hamstream_core::sketch::{MismatchInfo, SketchParams};
use hamstream_core::stream::{PatternReader, StreamMatcher};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use format::{format_line, parse_line, Alphabet, ParsedLine};

/// Text chunk size used for all symbol input.
pub const READ_CHUNK: usize = 64 * 1024;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Corrupt(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Corrupt(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Corrupt(m) => f.write_str(m),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<hamstream_core::Error> for CliError {
    fn from(e: hamstream_core::Error) -> Self {
        use hamstream_core::Error as E;
        match e {
            E::Usage(_) | E::Size(_) => CliError::Usage(e.to_string()),
            E::Decode(_) | E::Domain(_) => CliError::Corrupt(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Settings shared by the matching commands.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub k: usize,
    pub seed: u64,
    pub prime: Option<u64>,
    pub alphabet: Alphabet,
}

impl RunConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        RunConfig { k, seed, prime: None, alphabet: Alphabet::Bytes }
    }

    pub fn sketch_params(&self) -> CliResult<SketchParams> {
        let field = match self.prime {
            None => FieldParams::goldilocks(),
            Some(p) => FieldParams::new(p, DEFAULT_MAX_N.min(p.saturating_sub(1)))
                .map_err(|e| CliError::Usage(format!("--prime {p}: {e}")))?,
        };
        Ok(SketchParams::new(self.k, field, &mut ChaCha8Rng::seed_from_u64(self.seed)))
    }
}

/// Calls `f` on every symbol of `r`, reading in [`READ_CHUNK`] blocks.
pub fn for_each_symbol<R: Read>(
    mut r: R,
    alphabet: Alphabet,
    mut f: impl FnMut(u64) -> CliResult<()>,
) -> CliResult<()> {
    let mut buf = vec![0u8; READ_CHUNK];
    let mut carry: Vec<u8> = Vec::with_capacity(4);
    loop {
        let got = match r.read(&mut buf) {
            Ok(0) => break,
            Ok(g) => g,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e.into()),
        };
        match alphabet {
            Alphabet::Bytes => {
                for &b in &buf[..got] {
                    f(b as u64)?;
                }
            }
            Alphabet::Tokens => {
                for &b in &buf[..got] {
                    carry.push(b);
                    if carry.len() == 4 {
                        f(u32::from_le_bytes([carry[0], carry[1], carry[2], carry[3]]) as u64)?;
                        carry.clear();
                    }
                }
            }
        }
    }
    if !carry.is_empty() {
        return Err(CliError::Io(format!("input ends inside a 4-byte token ({} trailing bytes)", carry.len())));
    }
    Ok(())
}

pub fn read_symbols<R: Read>(r: R, alphabet: Alphabet) -> CliResult<Vec<u64>> {
    let mut v = Vec::new();
    for_each_symbol(r, alphabet, |a| {
        v.push(a);
        Ok(())
    })?;
    Ok(v)
}

/// Streaming matcher: one pass over the pattern, then one over the text.
pub fn cmd_match<P: Read, T: Read, W: Write>(cfg: &RunConfig, pattern: P, text: T, out: W) -> CliResult<()> {
    let params = cfg.sketch_params()?;
    let mut reader = PatternReader::new(cfg.k, &params)?;
    for_each_symbol(pattern, cfg.alphabet, |a| Ok(reader.push(a)?))?;
    let idx = reader.finish()?;
    let mut m = StreamMatcher::new(&idx)?;
    let mut out = io::BufWriter::new(out);
    for_each_symbol(text, cfg.alphabet, |a| {
        if let Some(rec) = m.push(a)? {
            let mi = rec.mi.expect("stream matcher reports mismatches");
            writeln!(out, "{}", format_line(rec.start, &mi, cfg.alphabet))?;
        }
        Ok(())
    })?;
    out.flush()?;
    Ok(())
}

/// Brute-force reference with the same output as [`cmd_match`].
pub fn cmd_oracle<P: Read, T: Read, W: Write>(cfg: &RunConfig, pattern: P, text: T, out: W) -> CliResult<()> {
    let p = read_symbols(pattern, cfg.alphabet)?;
    if p.is_empty() || p.len() < cfg.k {
        return Err(CliError::Usage(format!("pattern length {} must be positive and at least k = {}", p.len(), cfg.k)));
    }
    let t = read_symbols(text, cfg.alphabet)?;
    let mut out = io::BufWriter::new(out);
    for (start, mi) in oracle_occurrences(&p, &t, cfg.k) {
        writeln!(out, "{}", format_line(start, &mi, cfg.alphabet))?;
    }
    out.flush()?;
    Ok(())
}

/// Every alignment of `p` in `t` at Hamming distance at most `k`.
pub fn oracle_occurrences(p: &[u64], t: &[u64], k: usize) -> Vec<(u64, MismatchInfo)> {
    let n = p.len();
    if n == 0 || n > t.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for s in 0..=t.len() - n {
        let mut hd = 0;
        for (a, b) in p.iter().zip(&t[s..s + n]) {
            hd += (a != b) as usize;
            if hd > k {
                break;
            }
        }
        if hd <= k {
            out.push((s as u64, MismatchInfo::between(p, &t[s..s + n])));
        }
    }
    out
}

/// Writes the message for `(pattern, text)` and returns its size in bits.
pub fn cmd_encode<P: Read, T: Read, W: Write>(cfg: &RunConfig, pattern: P, text: T, mut msg: W) -> CliResult<u64> {
    let p = read_symbols(pattern, cfg.alphabet)?;
    if p.len() < cfg.k {
        return Err(CliError::Usage(format!("pattern length {} is below k = {}", p.len(), cfg.k)));
    }
    let t = read_symbols(text, cfg.alphabet)?;
    let bytes = codec::encode(&p, &t, cfg.k)?;
    msg.write_all(&bytes)?;
    msg.flush()?;
    Ok(8 * bytes.len() as u64)
}

pub fn cmd_decode<M: Read, W: Write>(alphabet: Alphabet, mut msg: M, out: W) -> CliResult<()> {
    let mut bytes = Vec::new();
    msg.read_to_end(&mut bytes)?;
    let occ = codec::decode(&bytes).map_err(|e| CliError::Corrupt(e.to_string()))?;
    let mut out = io::BufWriter::new(out);
    for (start, mi) in occ {
        writeln!(out, "{}", format_line(start, &mi, alphabet))?;
    }
    out.flush()?;
    Ok(())
}
