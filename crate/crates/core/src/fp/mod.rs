//! Prime-field scalar arithmetic.
//!
//! Elements are plain `u64` values kept in canonical form `[0, p)`. The
//! default modulus is the NTT-friendly prime `2^64 - 2^32 + 1`, which gets a
//! dedicated reduction path; any other prime falls back to `u128` remainder.

mod ntt;
mod poly;

pub use ntt::{ntt, ntt_inverse};
pub(crate) use poly::poly_mul_trunc;
pub use poly::{poly_inv_series, poly_mul, poly_mul_schoolbook, Poly};

use crate::error::{Error, Result};

/// `2^64 - 2^32 + 1`.
pub const GOLDILOCKS: u64 = 0xffff_ffff_0000_0001;
const EPSILON: u64 = 0xffff_ffff;

/// Default largest supported string length.
pub const DEFAULT_MAX_N: u64 = 1 << 32;

/// Modulus and transform data for one prime field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldParams {
    p: u64,
    /// Generator of the subgroup of order `2^two_adicity`, used by the transform.
    generator: u64,
    two_adicity: u32,
    max_n: u64,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self::goldilocks()
    }
}

impl FieldParams {
    pub fn goldilocks() -> Self {
        // 7 is a primitive root modulo GOLDILOCKS.
        let two_adicity = 32;
        let mut f = FieldParams { p: GOLDILOCKS, generator: 1, two_adicity, max_n: DEFAULT_MAX_N };
        f.generator = f.pow(7, (GOLDILOCKS - 1) >> two_adicity);
        f
    }

    /// Builds parameters for an arbitrary prime `p > max_n`.
    ///
    /// `p - 1` must carry at least one factor of two; the transform capacity is
    /// `2^v` where `2^v` is the largest power of two dividing `p - 1`.
    pub fn new(p: u64, max_n: u64) -> Result<Self> {
        if p == GOLDILOCKS {
            return Ok(FieldParams { max_n, ..Self::goldilocks() });
        }
        if !is_prime(p) {
            return Err(Error::Domain("modulus is not prime"));
        }
        if p <= max_n {
            return Err(Error::Size(format!("prime {p} must exceed max length {max_n}")));
        }
        let two_adicity = (p - 1).trailing_zeros();
        let odd = (p - 1) >> two_adicity;
        let mut f = FieldParams { p, generator: 1, two_adicity, max_n };
        // Search for a non-residue; its odd-part power generates the 2-Sylow subgroup.
        for cand in 2..p {
            if f.pow(cand, (p - 1) / 2) == p - 1 {
                f.generator = f.pow(cand, odd);
                break;
            }
        }
        Ok(f)
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn max_n(&self) -> u64 {
        self.max_n
    }

    #[inline]
    pub fn two_adicity(&self) -> u32 {
        self.two_adicity
    }

    #[inline]
    pub fn generator(&self) -> u64 {
        self.generator
    }

    /// Largest transform length supported by this field.
    pub fn transform_capacity(&self) -> usize {
        1usize << self.two_adicity.min(usize::BITS - 2)
    }

    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        if a >= self.p {
            a - self.p
        } else {
            a
        }
    }

    #[inline]
    pub fn from_u64(&self, a: u64) -> u64 {
        a % self.p
    }

    /// Embeds a signed integer.
    pub fn from_i64(&self, a: i64) -> u64 {
        if a >= 0 {
            (a as u64) % self.p
        } else {
            self.neg(a.unsigned_abs() % self.p)
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let (s, carry) = a.overflowing_add(b);
        if carry || s >= self.p {
            s.wrapping_sub(self.p)
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a.wrapping_sub(b).wrapping_add(self.p)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let x = a as u128 * b as u128;
        if self.p == GOLDILOCKS {
            reduce_goldilocks(x)
        } else {
            (x % self.p as u128) as u64
        }
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; zero has none.
    pub fn inv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::Domain("inverse of zero"));
        }
        Ok(self.pow(a, self.p - 2))
    }

    /// Inverts every element of `values` with a single exponentiation.
    pub fn batch_inv(&self, values: &[u64]) -> Result<Vec<u64>> {
        let mut prefix = Vec::with_capacity(values.len());
        let mut acc = 1u64;
        for &v in values {
            if v == 0 {
                return Err(Error::Domain("inverse of zero"));
            }
            prefix.push(acc);
            acc = self.mul(acc, v);
        }
        let mut inv_acc = self.inv(acc)?;
        let mut out = vec![0; values.len()];
        for i in (0..values.len()).rev() {
            out[i] = self.mul(inv_acc, prefix[i]);
            inv_acc = self.mul(inv_acc, values[i]);
        }
        Ok(out)
    }

    /// Primitive root of unity of order `2^log_n`.
    pub(crate) fn root_of_unity(&self, log_n: u32) -> Result<u64> {
        if log_n > self.two_adicity {
            return Err(Error::Size(format!(
                "transform of length 2^{log_n} exceeds field capacity 2^{}",
                self.two_adicity
            )));
        }
        Ok(self.pow(self.generator, 1u64 << (self.two_adicity - log_n)))
    }
}

#[inline]
fn reduce_goldilocks(x: u128) -> u64 {
    let lo = x as u64;
    let hi = (x >> 64) as u64;
    let hi_hi = hi >> 32;
    let hi_lo = hi & EPSILON;
    let (mut t0, borrow) = lo.overflowing_sub(hi_hi);
    if borrow {
        t0 = t0.wrapping_sub(EPSILON);
    }
    let t1 = hi_lo * EPSILON;
    let (mut r, carry) = t0.overflowing_add(t1);
    if carry {
        r = r.wrapping_add(EPSILON);
    }
    if r >= GOLDILOCKS {
        r -= GOLDILOCKS;
    }
    r
}

fn mulmod_u128(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod_u128(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod_u128(acc, b, m);
        }
        b = mulmod_u128(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 325, 9375, 28178, 450775, 9780504, 1795265022] {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = powmod_u128(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod_u128(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverse_edge_cases() {
        let f = FieldParams::goldilocks();
        assert_eq!(f.inv(1).unwrap(), 1);
        assert_eq!(f.inv(GOLDILOCKS - 1).unwrap(), GOLDILOCKS - 1);
        assert_eq!(f.inv(0), Err(Error::Domain("inverse of zero")));
    }

    #[test]
    fn inverse_random() {
        let f = FieldParams::goldilocks();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = rng.gen_range(1..GOLDILOCKS);
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn goldilocks_reduction_matches_u128() {
        let f = FieldParams::goldilocks();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let a = rng.gen_range(0..GOLDILOCKS);
            let b = rng.gen_range(0..GOLDILOCKS);
            assert_eq!(f.mul(a, b), mulmod_u128(a, b, GOLDILOCKS));
        }
        let edge = [0, 1, EPSILON, GOLDILOCKS - 1, GOLDILOCKS - 2, 1 << 32, (1 << 63) + 5];
        for &a in &edge {
            for &b in &edge {
                assert_eq!(f.mul(a, b), mulmod_u128(a, b, GOLDILOCKS));
            }
        }
    }

    #[test]
    fn custom_prime_roots() {
        // 998244353 = 119 * 2^23 + 1
        let f = FieldParams::new(998_244_353, 1 << 20).unwrap();
        assert_eq!(f.two_adicity(), 23);
        let w = f.root_of_unity(23).unwrap();
        assert_eq!(f.pow(w, 1 << 23), 1);
        assert_ne!(f.pow(w, 1 << 22), 1);
        assert!(FieldParams::new(998_244_351, 10).is_err());
        assert!(FieldParams::new(17, 100).is_err());
    }

    #[test]
    fn batch_inverse() {
        let f = FieldParams::goldilocks();
        let vals = [3u64, 5, 7, GOLDILOCKS - 1];
        let inv = f.batch_inv(&vals).unwrap();
        for (v, i) in vals.iter().zip(&inv) {
            assert_eq!(f.mul(*v, *i), 1);
        }
        assert!(f.batch_inv(&[1, 0]).is_err());
    }

    #[test]
    fn primality() {
        assert!(is_prime(GOLDILOCKS));
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(561));
        assert!(is_prime(1_000_000_007));
    }
}
