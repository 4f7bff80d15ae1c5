//! Recursive hard instances: `S_0 = 0^k`, `S_{i+1} = S_i S'_i S_i`, where
//! `S'_i` is `S_i` with `floor(k/2)` positions changed at random.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{CliError, CliResult};

/// Output is capped at this many symbols.
pub const MAX_HARD_LEN: u64 = 1 << 32;

/// Symbols are ASCII digits, starting from all `'0'`.
pub fn gen_hard(k: usize, levels: u32, seed: u64) -> CliResult<Vec<u8>> {
    let len = 3u64
        .checked_pow(levels)
        .and_then(|x| x.checked_mul(k as u64))
        .filter(|&x| x <= MAX_HARD_LEN)
        .ok_or_else(|| CliError::Usage(format!("k * 3^{levels} exceeds {MAX_HARD_LEN} symbols")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = vec![b'0'; k];
    s.reserve(len as usize - k);
    for _ in 0..levels {
        let m = s.len();
        let mut mid = s.clone();
        for i in sample(&mut rng, m, (k / 2).min(m)) {
            // a digit different from the current one
            let shift = rng.gen_range(1..10u8);
            mid[i] = b'0' + (mid[i] - b'0' + shift) % 10;
        }
        s.extend_from_slice(&mid);
        s.extend_from_within(..m);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_case_and_overflow() {
        assert_eq!(gen_hard(5, 0, 1).unwrap(), b"00000");
        assert!(gen_hard(4, 40, 1).is_err());
        assert_eq!(gen_hard(4, 1, 9).unwrap().len(), 12);
        assert_eq!(gen_hard(3, 2, 9).unwrap(), gen_hard(3, 2, 9).unwrap());
    }
}
