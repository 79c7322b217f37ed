//! Brute-force reference for the detect → score → suppress chain.
//!
//! Nothing here is shared with the streaming modules except the core types:
//! the circle is derived from geometry, arcs are enumerated one by one, and
//! suppression walks the full image. It is slow on purpose.

use crate::types::{Corner, DetectorConfig, Frame, Polarity, MIN_ARC, RING_SIZE};

/// The lattice points whose distance from the origin rounds to three, ordered
/// clockwise (y down) starting straight up.
pub fn circle_by_geometry() -> Vec<(i32, i32)> {
    let mut pts = Vec::new();
    for dy in -3i32..=3 {
        for dx in -3i32..=3 {
            let r = ((dx * dx + dy * dy) as f64).sqrt();
            if r.round() == 3.0 {
                pts.push((dx, dy));
            }
        }
    }
    let angle = |&(dx, dy): &(i32, i32)| {
        let a = (dx as f64).atan2(-(dy as f64));
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    };
    pts.sort_by(|a, b| angle(a).partial_cmp(&angle(b)).unwrap());
    pts
}

/// Best contrast among same-sign arcs of length 9..=16, for one polarity.
/// `sign` is +1 for bright, −1 for dark.
fn best_arc(diffs: &[i32], sign: i32) -> i32 {
    let n = diffs.len();
    let mut best = 0;
    for start in 0..n {
        for len in MIN_ARC..=n {
            let mut all_same = true;
            let mut min = i32::MAX;
            for k in 0..len {
                let v = sign * diffs[(start + k) % n];
                if v <= 0 {
                    all_same = false;
                    break;
                }
                min = min.min(v);
            }
            if !all_same {
                // Longer arcs from this start contain the offending entry too.
                break;
            }
            best = best.max(min);
        }
    }
    best
}

fn classify(center: u8, ring: &[u8]) -> (i32, i32) {
    let diffs: Vec<i32> = ring.iter().map(|&p| p as i32 - center as i32).collect();
    (best_arc(&diffs, 1), best_arc(&diffs, -1))
}

/// Candidate test by direct arc enumeration: is there an arc of ≥ 9 entries
/// all exceeding `t` in the same direction?
pub fn oracle_segment_test(center: u8, ring: &[u8; RING_SIZE], t: u8) -> Option<Polarity> {
    let diffs: Vec<i32> = ring.iter().map(|&p| p as i32 - center as i32).collect();
    for (sign, pol) in [(1, Polarity::Bright), (-1, Polarity::Dark)] {
        for start in 0..RING_SIZE {
            if (0..MIN_ARC).all(|k| sign * diffs[(start + k) % RING_SIZE] > t as i32) {
                return Some(pol);
            }
        }
    }
    None
}

/// Largest `t` such that the pixel is still a candidate at threshold `t − 1`,
/// found by sweeping every threshold.
pub fn oracle_score_by_sweep(center: u8, ring: &[u8; RING_SIZE]) -> u8 {
    let mut score = 0u8;
    for t in 1..=255u16 {
        if oracle_segment_test(center, ring, (t - 1) as u8).is_some() {
            score = t as u8;
        }
    }
    score
}

/// Per-pixel post-threshold scores and polarities for the whole frame.
pub fn oracle_score_map(frame: &Frame, config: DetectorConfig) -> Vec<(u8, Polarity)> {
    let circle = circle_by_geometry();
    let (w, h) = (frame.width(), frame.height());
    let t = config.threshold() as i32;
    let mut map = vec![(0u8, Polarity::Bright); w * h];
    for y in 3..h.saturating_sub(3) {
        for x in 3..w.saturating_sub(3) {
            let ring: Vec<u8> = circle
                .iter()
                .map(|&(dx, dy)| frame.get((x as i32 + dx) as usize, (y as i32 + dy) as usize))
                .collect();
            let (bright, dark) = classify(frame.get(x, y), &ring);
            if bright > t {
                map[y * w + x] = (bright as u8, Polarity::Bright);
            } else if dark > t {
                map[y * w + x] = (dark as u8, Polarity::Dark);
            }
        }
    }
    map
}

/// Full reference pipeline. Output is in raster order.
pub fn oracle_detect(frame: &Frame, config: DetectorConfig) -> Vec<Corner> {
    let (w, h) = (frame.width(), frame.height());
    let map = oracle_score_map(frame, config);
    let score = |x: i64, y: i64| -> u8 {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0
        } else {
            map[y as usize * w + x as usize].0
        }
    };
    let mut corners = Vec::new();
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let s = score(x, y);
            if s == 0 {
                continue;
            }
            let mut neighbours = (-1..=1)
                .flat_map(|dy| (-1..=1).map(move |dx| (dx, dy)))
                .filter(|&d| d != (0, 0));
            if neighbours.all(|(dx, dy)| score(x + dx, y + dy) < s) {
                let pol = map[y as usize * w + x as usize].1;
                corners.push(Corner::new(x as u16, y as u16, s as u16, pol));
            }
        }
    }
    corners
}
