mod common;

use common::*;
use hamstream_core::codec::{chunk_driver, decode, encode, encode_with, OccMessage, OccurrenceSource};
use rand::Rng;

#[test]
fn decode_inverts_encode() {
    let mut r = rng(31);
    for round in 0..500 {
        let k = [0, 1, 2, 5, 16][round % 5];
        let n = r.gen_range(k.max(1)..=[40, 300, 2048][round % 3]);
        let sigma = [2u64, 4, 256][r.gen_range(0..3)];
        let p = pattern(&mut r, n, k, sigma, round / 5);
        let mut t = text(&mut r, &p, 5 * n / 4, k, sigma);
        t.truncate(5 * n / 4);
        let bytes = encode(&p, &t, k).unwrap();
        let msg = OccMessage::from_bytes(&bytes).unwrap();
        assert_eq!((msg.n, msg.k), (n as u64, k as u64));
        if let Some(body) = &msg.body {
            let ps = &body.ps;
            assert!(ps.adjacent_mismatches() as u64 <= 8 * ps.k());
            assert!(ps.class_diversity() as u64 <= 16 * ps.k());
        }
        assert_eq!(decode(&bytes).unwrap(), oracle(&p, &t, k), "round {round}");
    }
}

#[test]
fn streaming_source_gives_the_same_message() {
    let mut r = rng(32);
    for round in 0..40 {
        let k = r.gen_range(0..6);
        let n = r.gen_range(k.max(1)..500);
        let p = pattern(&mut r, n, k, 4, round);
        let mut t = text(&mut r, &p, 5 * n / 4, k, 4);
        t.truncate(5 * n / 4);
        assert_eq!(
            encode(&p, &t, k).unwrap(),
            encode_with(&p, &t, k, OccurrenceSource::ReadOnly { seed: round as u64 }).unwrap()
        );
    }
}

#[test]
fn corrupt_messages_are_rejected() {
    let p: Vec<u64> = (0..64).map(|i| i % 5).collect();
    let bytes = encode(&p, &p, 3).unwrap();
    for cut in 0..bytes.len() - 1 {
        assert!(decode(&bytes[..cut]).is_err(), "prefix of {cut} bytes accepted");
    }
}

#[test]
fn long_texts_through_chunks() {
    let mut r = rng(33);
    for round in 0..20 {
        let k = r.gen_range(0..4);
        let n = r.gen_range(k.max(1)..200);
        let p = pattern(&mut r, n, k, 3, round);
        let t = text(&mut r, &p, 6 * n, k, 3);
        assert_eq!(chunk_driver(&p, &t, k).unwrap(), oracle(&p, &t, k));
    }
}
