/// `Ham[i] = HD(P, T[i-|P|+1..=i])` for every `|P|-1 <= i < |T|`, in order.
pub fn hamming_all_naive(p: &[u64], t: &[u64]) -> Vec<usize> {
    if p.is_empty() || p.len() > t.len() {
        return Vec::new();
    }
    t.windows(p.len()).map(|w| w.iter().zip(p).filter(|(a, b)| a != b).count()).collect()
}

/// `(T (x) P)(i)` for `0 <= i < |P|+|T|-1`; zero elsewhere.
pub fn cross_correlation_naive(t: &[u64], p: &[u64]) -> Vec<i64> {
    if p.is_empty() || t.is_empty() {
        return Vec::new();
    }
    let m = p.len();
    let mut out = vec![0i64; m + t.len() - 1];
    for (i, o) in out.iter_mut().enumerate() {
        // sum over j of [T[i-j] == P[m-1-j]]
        for j in 0..m {
            if j <= i && i - j < t.len() && t[i - j] == p[m - 1 - j] {
                *o += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(hamming_all_naive(&[0], &[0, 1, 0]), vec![0, 1, 0]);
        assert_eq!(hamming_all_naive(&[3, 4, 5], &[3, 4, 5]), vec![0]);
        assert!(hamming_all_naive(&[1, 2], &[1]).is_empty());
    }

    #[test]
    fn correlation_identity() {
        let p = [1u64, 0, 1, 1];
        let t = [1u64, 1, 0, 1, 1, 0, 0, 1];
        let cc = cross_correlation_naive(&t, &p);
        let ham = hamming_all_naive(&p, &t);
        for (k, h) in ham.iter().enumerate() {
            assert_eq!(cc[k + p.len() - 1], (p.len() - h) as i64);
        }
    }
}
