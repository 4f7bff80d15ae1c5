mod common;

use common::*;
use hamstream_core::readonly::readonly_kmismatch;
use hamstream_core::sketch::sketch_build;
use rand::Rng;

#[test]
fn agrees_with_oracle_with_prefix_sketches() {
    let mut r = rng(77);
    for round in 0..300 {
        let k = [0, 1, 3, 8, 32][round % 5];
        let n = r.gen_range(k.max(1)..=[64, 700, 4096][round % 3]);
        let sigma = [2u64, 4, 256][r.gen_range(0..3)];
        let p = pattern(&mut r, n, k, sigma, round / 5);
        let len = r.gen_range(n..2 * n + 8);
        let t = text(&mut r, &p, len, k, sigma);
        let pr = params(k, round as u64);
        let got = readonly_kmismatch(&p, &t, k, &pr).unwrap();
        let want = oracle(&p, &t, k);
        assert_eq!(got.len(), want.len(), "round {round}");
        for (g, (s, mi)) in got.iter().zip(&want) {
            assert_eq!((g.start, g.mi.as_ref()), (*s, Some(mi)));
            if round % 10 == 0 {
                assert_eq!(g.prefix_sketch.as_ref(), Some(&sketch_build(&t[..*s as usize], &pr).unwrap()));
            }
        }
    }
}
