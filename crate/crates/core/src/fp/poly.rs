use super::{ntt, ntt_inverse, FieldParams};
use crate::error::{Error, Result};

/// Dense polynomial; `coeffs[i]` is the coefficient of `X^i`.
///
/// Constructors normalize, so the last coefficient is nonzero unless the
/// polynomial is zero (empty vector).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    pub coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: u64) -> Self {
        Poly::new(vec![c])
    }

    /// `X - a` over `f`.
    pub fn linear_root(f: &FieldParams, a: u64) -> Self {
        Poly::new(vec![f.neg(a), 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn eval(&self, f: &FieldParams, x: u64) -> u64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn add(&self, f: &FieldParams, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                f.add(a, b)
            })
            .collect();
        Poly::new(c)
    }

    pub fn sub(&self, f: &FieldParams, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                f.sub(a, b)
            })
            .collect();
        Poly::new(c)
    }

    pub fn scale(&self, f: &FieldParams, c: u64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn monic(&self, f: &FieldParams) -> Result<Poly> {
        let l = f.inv(self.lead())?;
        Ok(self.scale(f, l))
    }

    /// Euclidean division; `d` must be nonzero.
    pub fn div_rem(&self, f: &FieldParams, d: &Poly) -> Result<(Poly, Poly)> {
        let dd = d.degree().ok_or(Error::Domain("division by zero polynomial"))?;
        if self.coeffs.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let lead_inv = f.inv(d.lead())?;
        let mut r = self.coeffs.clone();
        let mut q = vec![0u64; r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = f.mul(r[i + dd], lead_inv);
            q[i] = c;
            if c != 0 {
                for (j, &dc) in d.coeffs.iter().enumerate() {
                    r[i + j] = f.sub(r[i + j], f.mul(c, dc));
                }
            }
        }
        r.truncate(dd);
        Ok((Poly::new(q), Poly::new(r)))
    }

    pub fn rem(&self, f: &FieldParams, d: &Poly) -> Result<Poly> {
        Ok(self.div_rem(f, d)?.1)
    }

    /// Monic greatest common divisor (zero if both inputs are zero).
    pub fn gcd(f: &FieldParams, a: &Poly, b: &Poly) -> Result<Poly> {
        let mut a = a.clone();
        let mut b = b.clone();
        while !b.is_zero() {
            let r = a.rem(f, &b)?;
            a = b;
            b = r;
        }
        if a.is_zero() {
            Ok(a)
        } else {
            a.monic(f)
        }
    }

    /// `self * other mod m`, quadratic.
    pub fn mul_mod(&self, f: &FieldParams, other: &Poly, m: &Poly) -> Result<Poly> {
        poly_mul_schoolbook(f, self, other).rem(f, m)
    }

    /// `self^e mod m` by square-and-multiply.
    pub fn pow_mod(&self, f: &FieldParams, mut e: u64, m: &Poly) -> Result<Poly> {
        let mut base = self.rem(f, m)?;
        let mut acc = Poly::constant(1).rem(f, m)?;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_mod(f, &base, m)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_mod(f, &base, m)?;
            }
        }
        Ok(acc)
    }

    /// Expands `prod (X - r)`.
    pub fn from_roots(f: &FieldParams, roots: &[u64]) -> Poly {
        let mut c = vec![1u64];
        for &r in roots {
            let nr = f.neg(r);
            c.push(0);
            for i in (0..c.len()).rev() {
                let lower = if i > 0 { c[i - 1] } else { 0 };
                c[i] = f.add(f.mul(c[i], nr), lower);
            }
        }
        Poly::new(c)
    }
}

/// Quadratic product; reference for [`poly_mul`] and the fast path for small inputs.
pub fn poly_mul_schoolbook(f: &FieldParams, a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() || b.is_zero() {
        return Poly::zero();
    }
    let mut c = vec![0u64; a.coeffs.len() + b.coeffs.len() - 1];
    for (i, &x) in a.coeffs.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.coeffs.iter().enumerate() {
            c[i + j] = f.add(c[i + j], f.mul(x, y));
        }
    }
    Poly::new(c)
}

const SCHOOLBOOK_CUTOFF: usize = 32;

/// Product of two polynomials via the number-theoretic transform.
pub fn poly_mul(f: &FieldParams, a: &Poly, b: &Poly) -> Result<Poly> {
    if a.is_zero() || b.is_zero() {
        return Ok(Poly::zero());
    }
    let out_len = a.coeffs.len() + b.coeffs.len() - 1;
    let size = out_len.next_power_of_two();
    if size > f.transform_capacity() {
        return Err(Error::Size(format!(
            "product length {out_len} exceeds transform capacity {}",
            f.transform_capacity()
        )));
    }
    if a.coeffs.len().min(b.coeffs.len()) <= SCHOOLBOOK_CUTOFF {
        return Ok(poly_mul_schoolbook(f, a, b));
    }
    let mut fa = a.coeffs.clone();
    fa.resize(size, 0);
    let mut fb = b.coeffs.clone();
    fb.resize(size, 0);
    ntt(f, &mut fa)?;
    ntt(f, &mut fb)?;
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = f.mul(*x, *y);
    }
    ntt_inverse(f, &mut fa)?;
    fa.truncate(out_len);
    Ok(Poly::new(fa))
}

/// Product truncated to the first `t` coefficients; falls back to the
/// quadratic product when the field's transform is too short.
pub(crate) fn poly_mul_trunc(f: &FieldParams, a: &[u64], b: &[u64], t: usize) -> Result<Vec<u64>> {
    let a = Poly::new(a[..a.len().min(t)].to_vec());
    let b = Poly::new(b[..b.len().min(t)].to_vec());
    let mut c = match poly_mul(f, &a, &b) {
        Err(Error::Size(_)) => poly_mul_schoolbook(f, &a, &b).coeffs,
        r => r?.coeffs,
    };
    c.resize(t, 0);
    Ok(c)
}

/// Power series inverse of `a` modulo `X^t`.
pub fn poly_inv_series(f: &FieldParams, a: &Poly, t: usize) -> Result<Poly> {
    let a0 = a.coeffs.first().copied().unwrap_or(0);
    if a0 == 0 {
        return Err(Error::Domain("series inverse needs a nonzero constant term"));
    }
    let mut g = vec![f.inv(a0)?];
    let mut m = 1;
    while m < t {
        m = (2 * m).min(t);
        // g <- g * (2 - a*g) mod X^m
        let ag = poly_mul_trunc(f, &a.coeffs, &g, m)?;
        let mut corr: Vec<u64> = ag.iter().map(|&x| f.neg(x)).collect();
        corr[0] = f.add(corr[0], 2);
        g = poly_mul_trunc(f, &g, &corr, m)?;
    }
    g.truncate(t);
    Ok(Poly::new(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::GOLDILOCKS;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(rng: &mut ChaCha8Rng, len: usize) -> Poly {
        Poly::new((0..len).map(|_| rng.gen_range(0..GOLDILOCKS)).collect())
    }

    #[test]
    fn small_products() {
        let f = FieldParams::goldilocks();
        let p = GOLDILOCKS;
        let r = poly_mul(&f, &Poly::new(vec![1, 1]), &Poly::new(vec![1, p - 1])).unwrap();
        assert_eq!(r.coeffs, vec![1, 0, p - 1]);
        let r = poly_mul(&f, &Poly::constant(6), &Poly::constant(7)).unwrap();
        assert_eq!(r.coeffs, vec![42]);
    }

    #[test]
    fn matches_schoolbook() {
        let f = FieldParams::goldilocks();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_poly(&mut rng, 32);
        let b = random_poly(&mut rng, 32);
        assert_eq!(poly_mul(&f, &a, &b).unwrap(), poly_mul_schoolbook(&f, &a, &b));
        for _ in 0..1000 {
            let la = rng.gen_range(0..=257);
            let lb = rng.gen_range(0..=257);
            let a = random_poly(&mut rng, la);
            let b = random_poly(&mut rng, lb);
            assert_eq!(poly_mul(&f, &a, &b).unwrap(), poly_mul_schoolbook(&f, &a, &b));
        }
    }

    #[test]
    fn capacity_exceeded() {
        let f = FieldParams::new(97, 10).unwrap(); // 96 = 32 * 3
        let a = Poly::new(vec![1; 20]);
        assert!(matches!(poly_mul(&f, &a, &a), Err(Error::Size(_))));
        let b = Poly::new(vec![1; 10]);
        assert_eq!(poly_mul(&f, &b, &b).unwrap(), poly_mul_schoolbook(&f, &b, &b));
    }

    #[test]
    fn series_inverse() {
        let f = FieldParams::goldilocks();
        let p = GOLDILOCKS;
        assert_eq!(poly_inv_series(&f, &Poly::constant(1), 5).unwrap().coeffs, vec![1]);
        assert_eq!(poly_inv_series(&f, &Poly::new(vec![1, 1]), 3).unwrap().coeffs, vec![1, p - 1, 1]);
        assert!(poly_inv_series(&f, &Poly::new(vec![0, 1]), 3).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let mut a = random_poly(&mut rng, 80);
            if a.coeffs[0] == 0 {
                a.coeffs[0] = 1;
            }
            let g = poly_inv_series(&f, &a, 64).unwrap();
            let prod = poly_mul_trunc(&f, &a.coeffs, &g.coeffs, 64).unwrap();
            let mut one = vec![0; 64];
            one[0] = 1;
            assert_eq!(prod, one);
        }
    }

    #[test]
    fn division_and_gcd() {
        let f = FieldParams::goldilocks();
        let a = Poly::from_roots(&f, &[1, 2, 3]);
        let b = Poly::from_roots(&f, &[2, 3, 9]);
        assert_eq!(Poly::gcd(&f, &a, &b).unwrap(), Poly::from_roots(&f, &[2, 3]));
        let (q, r) = a.div_rem(&f, &Poly::linear_root(&f, 1)).unwrap();
        assert!(r.is_zero());
        assert_eq!(q, Poly::from_roots(&f, &[2, 3]));
        assert_eq!(a.eval(&f, 3), 0);
        assert_eq!(a.eval(&f, 4), 6);
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        proptest::collection::vec(0..GOLDILOCKS, 0..80).prop_map(Poly::new)
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            let f = FieldParams::goldilocks();
            let ab = poly_mul(&f, &a, &b).unwrap();
            prop_assert_eq!(&ab, &poly_mul(&f, &b, &a).unwrap());
            let ab_c = poly_mul(&f, &ab, &c).unwrap();
            let a_bc = poly_mul(&f, &a, &poly_mul(&f, &b, &c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let lhs = poly_mul(&f, &a, &b.add(&f, &c)).unwrap();
            let rhs = ab.add(&f, &poly_mul(&f, &a, &c).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
