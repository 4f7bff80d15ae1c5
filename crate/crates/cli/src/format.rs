//! The occurrence line format `start<TAB>hd<TAB>i:a>b,i:a>b,...`.
//!
//! In byte mode a symbol is printed as itself when it is a graphic ASCII
//! character other than `,` `:` `>` `\`, and as `\xHH` otherwise. Token mode
//! prints decimal values.

use hamstream_core::sketch::{Mismatch, MismatchInfo};

use crate::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Alphabet {
    #[default]
    Bytes,
    /// Little-endian 32-bit units.
    Tokens,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedLine {
    pub start: u64,
    pub hd: usize,
    pub mismatches: Vec<Mismatch>,
}

fn push_symbol(s: &mut String, a: u64, alphabet: Alphabet) {
    match alphabet {
        Alphabet::Tokens => s.push_str(&a.to_string()),
        Alphabet::Bytes => {
            let c = a as u8 as char;
            if a < 0x80 && c.is_ascii_graphic() && !matches!(c, ',' | ':' | '>' | '\\') {
                s.push(c);
            } else {
                s.push_str(&format!("\\x{a:02x}"));
            }
        }
    }
}

pub fn format_line(start: u64, mi: &MismatchInfo, alphabet: Alphabet) -> String {
    let mut s = format!("{start}\t{}\t", mi.len());
    for (j, m) in mi.iter().enumerate() {
        if j > 0 {
            s.push(',');
        }
        s.push_str(&m.index.to_string());
        s.push(':');
        push_symbol(&mut s, m.a, alphabet);
        s.push('>');
        push_symbol(&mut s, m.b, alphabet);
    }
    s
}

fn bad(line: &str) -> CliError {
    CliError::Corrupt(format!("malformed occurrence line {line:?}"))
}

fn parse_symbol(s: &str, alphabet: Alphabet, line: &str) -> CliResult<u64> {
    match alphabet {
        Alphabet::Tokens => s.parse().map_err(|_| bad(line)),
        Alphabet::Bytes => match s.strip_prefix("\\x") {
            Some(hex) if hex.len() == 2 => u64::from_str_radix(hex, 16).map_err(|_| bad(line)),
            Some(_) => Err(bad(line)),
            None if s.len() == 1 => Ok(s.as_bytes()[0] as u64),
            None => Err(bad(line)),
        },
    }
}

/// Inverse of [`format_line`].
pub fn parse_line(line: &str, alphabet: Alphabet) -> CliResult<ParsedLine> {
    let mut f = line.split('\t');
    let (Some(start), Some(hd), Some(list), None) = (f.next(), f.next(), f.next(), f.next()) else {
        return Err(bad(line));
    };
    let start = start.parse().map_err(|_| bad(line))?;
    let hd: usize = hd.parse().map_err(|_| bad(line))?;
    let mut mismatches = Vec::with_capacity(hd);
    if !list.is_empty() {
        for item in list.split(',') {
            let (index, rest) = item.split_once(':').ok_or_else(|| bad(line))?;
            let (a, b) = rest.split_once('>').ok_or_else(|| bad(line))?;
            mismatches.push(Mismatch {
                index: index.parse().map_err(|_| bad(line))?,
                a: parse_symbol(a, alphabet, line)?,
                b: parse_symbol(b, alphabet, line)?,
            });
        }
    }
    if mismatches.len() != hd {
        return Err(bad(line));
    }
    Ok(ParsedLine { start, hd, mismatches })
}
