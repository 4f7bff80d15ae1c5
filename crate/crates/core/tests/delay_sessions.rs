mod common;

use std::collections::VecDeque;

use common::*;
use hamstream_core::delay::DelayBuffer;
use hamstream_core::sketch::{sketch_build, RollingSketcher};
use hamstream_core::OccurrenceRecord;
use rand::Rng;

#[test]
fn records_leave_exactly_delta_ticks_later() {
    let mut r = rng(91);
    let mut emitted = 0;
    for round in 0..100 {
        let k = r.gen_range(0..5);
        let n = r.gen_range(k.max(2)..200);
        let sigma = [2u64, 3, 256][round % 3];
        let p = pattern(&mut r, n, k, sigma, round);
        let t = text(&mut r, &p, 5 * n, k, sigma);
        let delta = r.gen_range((n as u64).div_ceil(4)..=4 * n as u64);
        let pr = params(k, round as u64);
        let mut buf = DelayBuffer::new(&sketch_build(&p, &pr).unwrap(), delta, &pr).unwrap();
        let want: VecDeque<_> = oracle(&p, &t, k).into();
        let mut queue = want.clone();
        let mut fed: VecDeque<(u64, OccurrenceRecord)> = VecDeque::new();
        let mut shadow = RollingSketcher::new(&pr);
        for tick in 0..(t.len() as u64 + delta + 1) {
            let mut incoming = None;
            if queue.front().is_some_and(|(s, _)| s + n as u64 - 1 == tick) {
                let (s, mi) = queue.pop_front().unwrap();
                while shadow.len() < s {
                    shadow.append(t[shadow.len() as usize]).unwrap();
                }
                let rec = OccurrenceRecord { start: s, hd: mi.len(), mi: Some(mi), prefix_sketch: Some(shadow.snapshot()) };
                fed.push_back((tick, rec.clone()));
                incoming = Some(rec);
            }
            let got = buf.tick(incoming).unwrap();
            if fed.front().is_some_and(|(ft, _)| ft + delta == tick) {
                let (_, rec) = fed.pop_front().unwrap();
                let full = sketch_build(&t[..rec.start as usize], &pr).unwrap();
                assert_eq!(rec.prefix_sketch.as_ref(), Some(&full));
                assert_eq!(got, Some(rec), "round {round} tick {tick}");
                emitted += 1;
            } else {
                assert_eq!(got, None, "round {round} tick {tick}");
            }
        }
        assert!(fed.is_empty() && queue.is_empty());
    }
    assert!(emitted > 300);
}
