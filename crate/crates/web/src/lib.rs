//! Browser bindings for the corner detector demo in `www/`.
//!
//! Everything crosses the boundary as numbers and flat typed arrays, so the
//! same functions run (and are tested) natively.

use ovc_core::detector::sample_ring;
use ovc_core::sensor_sim::{stamp_motif, synthetic_pair, SyntheticScene};
use ovc_core::transport::bundle_len;
use ovc_core::{
    corner_score, detect_frame, ring_offsets, segment_test, suppress_map, DetectorConfig, Frame,
    Polarity,
};
use wasm_bindgen::prelude::*;

fn config(threshold: i32, lanes: u32) -> Result<DetectorConfig, String> {
    DetectorConfig::new(threshold as i64, lanes as i64).map_err(|e| e.to_string())
}

/// An editable grayscale image plus the result of the last detection.
#[wasm_bindgen]
pub struct Scene {
    frame: Frame,
    scores: Vec<u8>,
    corners: usize,
}

#[wasm_bindgen]
impl Scene {
    /// Left image of the simulated rig's first frame.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64, width: u32, height: u32, motifs: u32) -> Result<Scene, String> {
        let (w, h) = (width as usize, height as usize);
        let scene = SyntheticScene {
            motif_count: motifs as usize,
            ..Default::default()
        };
        let (left, _) = synthetic_pair(seed, 0, w, h, &scene);
        let frame = Frame::from_pixels(w, h, left).map_err(|e| e.to_string())?;
        Ok(Scene {
            frame,
            scores: vec![0; w * h],
            corners: 0,
        })
    }

    pub fn width(&self) -> u32 {
        self.frame.width() as u32
    }

    pub fn height(&self) -> u32 {
        self.frame.height() as u32
    }

    pub fn pixels(&self) -> Vec<u8> {
        self.frame.pixels().to_vec()
    }

    /// Stamps a 7×7 motif whose center differs from its surround by
    /// `contrast` (negative for a dark center). Returns false when it would
    /// not fit.
    pub fn stamp(&mut self, x: u32, y: u32, contrast: i32) -> bool {
        let (w, h) = (self.frame.width(), self.frame.height());
        let (x, y) = (x as usize, y as usize);
        if x < 3 || y < 3 || x + 3 >= w || y + 3 >= h {
            return false;
        }
        let surround = if contrast < 0 { 200 } else { 55 };
        let center = (surround as i32 + contrast).clamp(0, 255) as u8;
        let mut px =
            std::mem::replace(&mut self.frame, Frame::filled(7, 7, 0).unwrap()).into_pixels();
        stamp_motif(&mut px, w, x, y, surround, center);
        self.frame = Frame::from_pixels(w, h, px).expect("dimensions unchanged");
        true
    }

    /// Runs detection and suppression. Returns corners flattened as
    /// `[x, y, score, polarity, ...]` with polarity 0 bright, 1 dark.
    pub fn detect(&mut self, threshold: i32, lanes: u32) -> Result<Vec<u32>, String> {
        let map =
            detect_frame(&self.frame, config(threshold, lanes)?).map_err(|e| e.to_string())?;
        let corners = suppress_map(&map);
        self.scores = map.to_image();
        self.corners = corners.len();
        Ok(corners
            .iter()
            .flat_map(|c| {
                [
                    c.x as u32,
                    c.y as u32,
                    c.score as u32,
                    c.polarity.as_u8() as u32,
                ]
            })
            .collect())
    }

    /// Pre-suppression scores of the last detection, one byte per pixel.
    pub fn score_map(&self) -> Vec<u8> {
        self.scores.clone()
    }

    /// Size in bytes of the bundle the last detection would be sent as.
    pub fn bundle_bytes(&self) -> u32 {
        bundle_len(self.frame.width(), self.frame.height(), self.corners) as u32
    }

    /// Center followed by the 16 ring values around `(x, y)`, or empty when
    /// the ring would leave the image.
    pub fn ring_at(&self, x: u32, y: u32) -> Vec<u8> {
        let (x, y) = (x as usize, y as usize);
        if x < 3 || y < 3 || x + 3 >= self.frame.width() || y + 3 >= self.frame.height() {
            return Vec::new();
        }
        let mut out = vec![self.frame.get(x, y)];
        out.extend_from_slice(&sample_ring(&self.frame, x, y));
        out
    }
}

/// Ring offsets flattened as `[dx0, dy0, dx1, dy1, ...]`, clockwise from north.
#[wasm_bindgen]
pub fn ring_layout() -> Vec<i32> {
    ring_offsets()
        .iter()
        .flat_map(|(dx, dy)| [dx as i32, dy as i32])
        .collect()
}

/// Segment test of a hand-edited ring: `[verdict, score]` where verdict is
/// -1 for no corner, 0 bright, 1 dark.
#[wasm_bindgen]
pub fn probe_ring(center: u8, ring: &[u8], threshold: u8) -> Result<Vec<i32>, String> {
    let ring: &[u8; 16] = ring
        .try_into()
        .map_err(|_| format!("ring needs 16 values, got {}", ring.len()))?;
    let verdict = match segment_test(center, ring, threshold) {
        None => -1,
        Some(Polarity::Bright) => 0,
        Some(Polarity::Dark) => 1,
    };
    let (score, _) = corner_score(center, ring);
    Ok(vec![verdict, score as i32])
}
