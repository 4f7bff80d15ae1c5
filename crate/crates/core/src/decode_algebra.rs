//! Syndrome decoding primitives: error-locator recovery, root finding and
//! transposed Vandermonde products/solves.

use rand::Rng;

use crate::error::{Error, Result};
use crate::fp::{FieldParams, Poly};

fn berlekamp_massey(f: &FieldParams, s: &[u64]) -> (Vec<u64>, usize) {
    let mut c = vec![1u64];
    let mut b = vec![1u64];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut last_d = 1u64;
    for n in 0..s.len() {
        let mut d = s[n];
        for i in 1..=l.min(c.len() - 1) {
            d = f.add(d, f.mul(c[i], s[n - i]));
        }
        if d == 0 {
            m += 1;
            continue;
        }
        let coef = f.mul(d, f.inv(last_d).expect("nonzero discrepancy"));
        let prev = c.clone();
        if c.len() < b.len() + m {
            c.resize(b.len() + m, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + m] = f.sub(c[i + m], f.mul(coef, bi));
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = prev;
            last_d = d;
            m = 1;
        } else {
            m += 1;
        }
    }
    c.resize(l + 1, 0);
    (c, l)
}

/// Shortest linear recurrence generating `s` (Berlekamp-Massey).
///
/// The result `C(z)` has `C(0) = 1`; for `s_j = sum r_i x_i^j` with at most
/// `|s|/2` terms it is `prod (1 - x_i z)`. Excess errors produce an arbitrary
/// polynomial that the caller must reject by verification.
pub fn key_equation(f: &FieldParams, s: &[u64]) -> Poly {
    Poly::new(berlekamp_massey(f, s).0)
}

/// [`key_equation`] plus the recurrence length `L`, which exceeds the degree
/// of the locator when a node is zero.
pub fn key_equation_with_len(f: &FieldParams, s: &[u64]) -> (Poly, usize) {
    let (c, l) = berlekamp_massey(f, s);
    (Poly::new(c), l)
}

/// Returns every root of `a` assuming it splits into distinct linear factors.
///
/// `None` means `a` does not split that way or the randomized splitting ran
/// out of budget.
pub fn find_distinct_roots<R: Rng + ?Sized>(f: &FieldParams, a: &Poly, rng: &mut R) -> Option<Vec<u64>> {
    let deg = a.degree()?;
    if deg == 0 {
        return Some(Vec::new());
    }
    let a = a.monic(f).ok()?;
    let p = f.modulus();
    if deg > 1 {
        // gcd(A, X^p - X) keeps exactly the distinct linear factors.
        let x = Poly::new(vec![0, 1]);
        let xp = x.pow_mod(f, p, &a).ok()?;
        let g = Poly::gcd(f, &a, &xp.sub(f, &x)).ok()?;
        if g.degree() != Some(deg) {
            return None;
        }
    }
    let budget = 64 * (64 - p.leading_zeros() as usize);
    let mut attempts = 0usize;
    let mut roots = Vec::with_capacity(deg);
    let mut stack = vec![a];
    while let Some(g) = stack.pop() {
        match g.degree() {
            Some(0) | None => continue,
            Some(1) => {
                roots.push(f.neg(g.coeffs[0]));
                continue;
            }
            _ => {}
        }
        let mut split = None;
        while split.is_none() {
            attempts += 1;
            if attempts > budget {
                return None;
            }
            let r = rng.gen_range(0..p);
            let base = Poly::new(vec![r, 1]);
            let h = base.pow_mod(f, (p - 1) / 2, &g).ok()?.sub(f, &Poly::constant(1));
            let d = Poly::gcd(f, &g, &h).ok()?;
            if let Some(dd) = d.degree() {
                if dd > 0 && Some(dd) < g.degree() {
                    split = Some(d);
                }
            }
        }
        let d = split.unwrap();
        let (q, _) = g.div_rem(f, &d).ok()?;
        stack.push(d);
        stack.push(q);
    }
    roots.sort_unstable();
    Some(roots)
}

fn check_distinct(betas: &[u64]) -> Result<()> {
    let mut sorted = betas.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Domain("repeated Vandermonde node"));
    }
    Ok(())
}

/// `s_j = sum_i alpha_i beta_i^j` for `0 <= j < m`.
pub fn vand_mul(f: &FieldParams, alphas: &[u64], betas: &[u64], m: usize) -> Result<Vec<u64>> {
    if alphas.len() != betas.len() {
        return Err(Error::Usage("alphas and betas differ in length".into()));
    }
    check_distinct(betas)?;
    Ok(vand_mul_unchecked(f, alphas, betas, m))
}

pub(crate) fn vand_mul_unchecked(f: &FieldParams, alphas: &[u64], betas: &[u64], m: usize) -> Vec<u64> {
    let mut s = vec![0u64; m];
    for (&a, &b) in alphas.iter().zip(betas) {
        let mut t = a;
        for sj in s.iter_mut() {
            *sj = f.add(*sj, t);
            t = f.mul(t, b);
        }
    }
    s
}

/// Solves `s_j = sum_i alpha_i beta_i^j` (`0 <= j < |betas|`) for the alphas.
pub fn vand_solve(f: &FieldParams, s: &[u64], betas: &[u64]) -> Result<Vec<u64>> {
    let n = betas.len();
    if s.len() != n {
        return Err(Error::Usage(format!("{} syndromes for {n} nodes", s.len())));
    }
    check_distinct(betas)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let master = Poly::from_roots(f, betas);
    let mut out = Vec::with_capacity(n);
    for &b in betas {
        // q = master / (z - b), by synthetic division from the top.
        let mut q = vec![0u64; n];
        let mut carry = 0u64;
        for j in (0..n).rev() {
            carry = f.add(master.coeffs[j + 1], f.mul(carry, b));
            q[j] = carry;
        }
        let mut num = 0u64;
        let mut den = 0u64;
        let mut pw = 1u64;
        for j in 0..n {
            num = f.add(num, f.mul(q[j], s[j]));
            den = f.add(den, f.mul(q[j], pw));
            pw = f.mul(pw, b);
        }
        out.push(f.mul(num, f.inv(den)?));
    }
    Ok(out)
}
