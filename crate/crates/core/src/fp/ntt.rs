use super::FieldParams;
use crate::error::{Error, Result};

fn bit_reverse(a: &mut [u64]) {
    let n = a.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
}

fn transform(f: &FieldParams, a: &mut [u64], root: u64) {
    let n = a.len();
    bit_reverse(a);
    let mut len = 2;
    while len <= n {
        let w_len = f.pow(root, (n / len) as u64);
        let half = len / 2;
        // twiddles for this stage
        let mut tw = Vec::with_capacity(half);
        let mut w = 1u64;
        for _ in 0..half {
            tw.push(w);
            w = f.mul(w, w_len);
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for j in 0..half {
                let u = lo[j];
                let v = f.mul(hi[j], tw[j]);
                lo[j] = f.add(u, v);
                hi[j] = f.sub(u, v);
            }
        }
        len <<= 1;
    }
}

fn check_len(f: &FieldParams, n: usize) -> Result<u32> {
    if !n.is_power_of_two() {
        return Err(Error::Usage(format!("transform length {n} is not a power of two")));
    }
    let log_n = n.trailing_zeros();
    if log_n > f.two_adicity() {
        return Err(Error::Size(format!("transform length {n} exceeds field capacity")));
    }
    Ok(log_n)
}

/// In-place forward transform; `a.len()` must be a power of two.
pub fn ntt(f: &FieldParams, a: &mut [u64]) -> Result<()> {
    let log_n = check_len(f, a.len())?;
    let root = f.root_of_unity(log_n)?;
    transform(f, a, root);
    Ok(())
}

/// In-place inverse transform, including the `1/n` scaling.
pub fn ntt_inverse(f: &FieldParams, a: &mut [u64]) -> Result<()> {
    let log_n = check_len(f, a.len())?;
    let root = f.inv(f.root_of_unity(log_n)?)?;
    transform(f, a, root);
    let n_inv = f.inv(f.from_u64(a.len() as u64))?;
    for x in a.iter_mut() {
        *x = f.mul(*x, n_inv);
    }
    Ok(())
}
