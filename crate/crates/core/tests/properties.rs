use ovc_core::oracle::{oracle_detect, oracle_score_by_sweep};
use ovc_core::sensor_sim::{
    open_rig, tick_ns, FrameSource, SensorEvent, SensorRigConfig, SyntheticScene,
};
use ovc_core::transport::{decode_bundle, encode_bundle, RingChannel};
use ovc_core::{
    corner_score, detect_corners, detect_frame, segment_test, suppress_map, Corner, DetectorConfig,
    Frame, FrontEnd, Polarity, SensorId,
};
use proptest::prelude::*;

/// Frames of moderate size whose pixels cluster around a few levels, so that
/// corners actually occur.
fn frame_strategy() -> impl Strategy<Value = Frame> {
    (7usize..40, 7usize..40).prop_flat_map(|(w, h)| {
        prop::collection::vec(
            prop_oneof![Just(0u8), Just(90), Just(160), any::<u8>()],
            w * h,
        )
        .prop_map(move |px| Frame::from_pixels(w, h, px).unwrap())
    })
}

fn rotate_cw(f: &Frame) -> Frame {
    let (w, h) = (f.width(), f.height());
    let mut px = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            // New frame is h wide; (x, y) lands on (h - 1 - y, x).
            px[x * h + (h - 1 - y)] = f.get(x, y);
        }
    }
    Frame::from_pixels(h, w, px).unwrap()
}

fn lanes() -> impl Strategy<Value = usize> {
    prop_oneof![Just(1usize), Just(2), Just(4), Just(8)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn hardware_path_matches_oracle(f in frame_strategy(), t in 0u8..=80, l in lanes()) {
        let cfg = DetectorConfig::new(t as i64, l as i64).unwrap();
        prop_assert_eq!(detect_corners(&f, cfg).unwrap(), oracle_detect(&f, cfg));
    }

    #[test]
    fn lane_width_never_changes_output(f in frame_strategy(), t in 0u8..=80) {
        let base = detect_frame(&f, DetectorConfig::new(t as i64, 1).unwrap()).unwrap();
        for l in [2, 4, 8] {
            let other = detect_frame(&f, DetectorConfig::new(t as i64, l).unwrap()).unwrap();
            prop_assert_eq!(&base, &other);
        }
    }

    #[test]
    fn streaming_front_end_matches_batch(f in frame_strategy(), t in 0u8..=80, l in lanes()) {
        let cfg = DetectorConfig::new(t as i64, l as i64).unwrap();
        let mut fe = FrontEnd::new(f.width(), f.height(), cfg).unwrap();
        let streamed = fe.process(&f).unwrap().to_vec();
        let batch = suppress_map(&detect_frame(&f, cfg).unwrap());
        prop_assert_eq!(&streamed, &batch);
        // A second pass over the same state must not leak anything across frames.
        prop_assert_eq!(fe.process(&f).unwrap(), &batch[..]);
    }

    #[test]
    fn raising_threshold_only_removes_candidates(f in frame_strategy(), t in 0u8..=120, dt in 1u8..=60) {
        let lo = detect_frame(&f, DetectorConfig::new(t as i64, 4).unwrap()).unwrap();
        let hi = detect_frame(&f, DetectorConfig::new((t + dt) as i64, 4).unwrap()).unwrap();
        let lo = lo.candidates();
        for c in hi.candidates() {
            prop_assert!(lo.contains(&c), "{:?} appeared at the higher threshold", c);
        }
    }

    #[test]
    fn quarter_turn_rotates_corners(f in frame_strategy(), t in 0u8..=80) {
        let cfg = DetectorConfig::new(t as i64, 4).unwrap();
        let h = f.height() as u16;
        let mut expected: Vec<Corner> = detect_corners(&f, cfg)
            .unwrap()
            .into_iter()
            .map(|c| Corner::new(h - 1 - c.y, c.x, c.score, c.polarity))
            .collect();
        expected.sort();
        prop_assert_eq!(detect_corners(&rotate_cw(&f), cfg).unwrap(), expected);
    }

    #[test]
    fn no_two_corners_touch(f in frame_strategy(), t in 0u8..=80) {
        let corners = detect_corners(&f, DetectorConfig::new(t as i64, 4).unwrap()).unwrap();
        for (i, a) in corners.iter().enumerate() {
            for b in &corners[i + 1..] {
                prop_assert!(a.x.abs_diff(b.x) > 1 || a.y.abs_diff(b.y) > 1, "{:?} {:?}", a, b);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn score_is_largest_passing_threshold_plus_one(center: u8, ring: [u8; 16]) {
        let (score, pol) = corner_score(center, &ring);
        prop_assert_eq!(score, oracle_score_by_sweep(center, &ring));
        for t in 0..=254u8 {
            let hit = segment_test(center, &ring, t);
            prop_assert_eq!(hit.is_some(), score > t);
            if hit.is_some() {
                prop_assert_eq!(hit, pol);
            }
        }
    }

    #[test]
    fn ring_rotation_keeps_score(center: u8, ring: [u8; 16], k in 0usize..16) {
        let mut rotated = ring;
        rotated.rotate_left(k);
        prop_assert_eq!(corner_score(center, &ring), corner_score(center, &rotated));
    }
}

fn corner_strategy(w: usize, h: usize) -> impl Strategy<Value = Corner> {
    (0..w as u16, 0..h as u16, any::<u16>(), any::<bool>()).prop_map(|(x, y, s, d)| {
        Corner::new(x, y, s, if d { Polarity::Dark } else { Polarity::Bright })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bundle_round_trip(
        (f, corners) in frame_strategy().prop_flat_map(|f| {
            let (w, h) = (f.width(), f.height());
            (Just(f), prop::collection::vec(corner_strategy(w, h), 0..100))
        }),
        right: bool,
        id: u64,
        ts: u64,
    ) {
        let sensor = if right { SensorId::Right } else { SensorId::Left };
        let f = f.with_stamp(sensor, id, ts);
        let bytes = encode_bundle(&f, &corners).unwrap();
        prop_assert_eq!(bytes.len(), 32 + f.width() * f.height() + 8 * corners.len());
        let (f2, c2) = decode_bundle(&bytes).unwrap();
        prop_assert_eq!(&f2, &f);
        prop_assert_eq!(&c2, &corners);
    }

    #[test]
    fn truncated_bundles_are_rejected(f in frame_strategy(), cut in 1usize..64) {
        let corners = [Corner::new(1, 1, 9, Polarity::Bright)];
        let bytes = encode_bundle(&f, &corners).unwrap();
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(decode_bundle(&bytes[..keep]).is_err());
    }

    #[test]
    fn ring_conserves_items(cap in 1usize..8, ops in prop::collection::vec(any::<bool>(), 0..400)) {
        let (tx, rx) = RingChannel::new::<u32>(cap);
        let mut next = 0u32;
        let mut last = None;
        for push in ops {
            if push {
                tx.push(next);
                next += 1;
            } else if let Some(v) = rx.try_pop().unwrap() {
                prop_assert!(last.is_none_or(|l| v > l));
                last = Some(v);
            }
            let s = rx.stats();
            prop_assert_eq!(s.pushes, s.pops + s.drops + s.occupancy as u64);
            prop_assert!(s.occupancy <= cap);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rig_timestamps_never_go_back(frame_hz in prop_oneof![Just(10u32), Just(20), Just(25), Just(50)], mult in 1u32..=12, seed: u64) {
        let cfg = SensorRigConfig {
            width: 16,
            height: 16,
            frame_rate_hz: frame_hz,
            imu_rate_hz: frame_hz * mult,
            seed,
            source: FrameSource::Synthetic(SyntheticScene::default()),
        };
        let mut rig = open_rig(cfg).unwrap();
        let mut last = 0;
        let mut pairs = 0u64;
        for _ in 0..200 {
            let ev = rig.next_event().unwrap();
            prop_assert!(ev.timestamp_ns() >= last);
            last = ev.timestamp_ns();
            if let SensorEvent::FramePair { left, right } = ev {
                prop_assert_eq!(left.timestamp_ns, tick_ns(pairs, frame_hz));
                prop_assert_eq!(left.timestamp_ns, right.timestamp_ns);
                pairs += 1;
            }
        }
    }
}
