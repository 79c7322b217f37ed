//! Randomized equivalence check of the streaming pipeline against the oracle.

use crate::oracle::oracle_detect;
use crate::pipeline::FrontEnd;
use crate::sensor_sim::stamp_motif;
use crate::types::{Corner, DetectorConfig, Frame, LANE_WIDTHS};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

pub const DEFAULT_SIZES: [(usize, usize); 3] = [(16, 16), (64, 64), (257, 129)];
pub const DEFAULT_THRESHOLDS: [u8; 4] = [0, 10, 20, 60];

/// Deliberate defects for exercising the mismatch path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// The streaming side loses its last corner.
    DropLastCorner,
    /// The streaming side reports every score one higher.
    BumpScores,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub trials: usize,
    pub sizes: Vec<(usize, usize)>,
    pub thresholds: Vec<u8>,
    pub lanes: Vec<usize>,
    pub fault: Option<Fault>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 7,
            trials: 100,
            sizes: DEFAULT_SIZES.to_vec(),
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            lanes: LANE_WIDTHS.to_vec(),
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub threshold: u8,
    pub lanes: usize,
    pub expected: Vec<Corner>,
    pub got: Vec<Corner>,
}

impl Mismatch {
    /// Command line that replays exactly this case.
    pub fn reproducer(&self) -> String {
        format!(
            "ovc verify --seed {} --trials 1 --sizes {}x{} --thresholds {} --lanes {}",
            self.seed, self.width, self.height, self.threshold, self.lanes
        )
    }

    /// First corner present on one side only.
    pub fn first_difference(&self) -> Option<(Option<Corner>, Option<Corner>)> {
        let n = self.expected.len().max(self.got.len());
        (0..n)
            .map(|i| (self.expected.get(i).copied(), self.got.get(i).copied()))
            .find(|(a, b)| a != b)
    }
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mismatch seed={} size={}x{} t={} lanes={}: oracle {} corners, streaming {}",
            self.seed,
            self.width,
            self.height,
            self.threshold,
            self.lanes,
            self.expected.len(),
            self.got.len()
        )?;
        if let Some((a, b)) = self.first_difference() {
            write!(f, "; first difference oracle={a:?} streaming={b:?}")?;
        }
        write!(f, "\n  reproduce: {}", self.reproducer())
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub frames: usize,
    pub comparisons: usize,
    pub corners_checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Test frame for `seed` at the given size. Mixes several textures so that
/// both isolated corners and score plateaus (ties) show up.
pub fn random_frame(seed: u64, width: usize, height: usize) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((width as u64) << 32) | height as u64);
    let n = width * height;
    let mut px = vec![0u8; n];
    match rng.random_range(0..4u8) {
        0 => rng.fill_bytes(&mut px),
        1 => {
            let block = rng.random_range(2..=4usize);
            let bw = width.div_ceil(block);
            let cells: Vec<u8> = (0..bw * height.div_ceil(block))
                .map(|_| rng.random())
                .collect();
            for y in 0..height {
                for x in 0..width {
                    px[y * width + x] = cells[(y / block) * bw + x / block];
                }
            }
        }
        2 => {
            let base = rng.random_range(32..224i32);
            let amp = rng.random_range(1..64i32);
            for p in px.iter_mut() {
                *p = (base + rng.random_range(-amp..=amp)).clamp(0, 255) as u8;
            }
        }
        _ => {
            let gx = rng.random_range(-2.0..2.0f32);
            let gy = rng.random_range(-2.0..2.0f32);
            for y in 0..height {
                for x in 0..width {
                    let v = 128.0
                        + gx * (x as f32 - width as f32 / 2.0)
                        + gy * (y as f32 - height as f32 / 2.0)
                        + rng.random_range(-6.0..6.0f32);
                    px[y * width + x] = v.clamp(0.0, 255.0) as u8;
                }
            }
            let motifs = rng.random_range(1..=(n / 200).max(2));
            for _ in 0..motifs {
                let cx = rng.random_range(3..width - 3);
                let cy = rng.random_range(3..height - 3);
                let surround: u8 = rng.random();
                let center: u8 = rng.random();
                stamp_motif(&mut px, width, cx, cy, surround, center);
            }
        }
    }
    Frame::from_pixels(width, height, px).expect("sizes are at least 7x7")
}

fn apply_fault(fault: Option<Fault>, corners: &mut Vec<Corner>) {
    match fault {
        None => {}
        Some(Fault::DropLastCorner) => {
            corners.pop();
        }
        Some(Fault::BumpScores) => corners.iter_mut().for_each(|c| c.score += 1),
    }
}

/// Runs every (trial, size, threshold, lane width) combination. Trial `i`
/// uses frame seed `seed + i`, so a failure replays with `--trials 1`.
pub fn run_verify(cfg: &VerifyConfig) -> VerifyReport {
    let mut report = VerifyReport::default();
    for trial in 0..cfg.trials {
        let seed = cfg.seed.wrapping_add(trial as u64);
        for &(w, h) in &cfg.sizes {
            let frame = random_frame(seed, w, h);
            report.frames += 1;
            for &t in &cfg.thresholds {
                let base = DetectorConfig::new(t as i64, 1).expect("threshold in range");
                let expected = oracle_detect(&frame, base);
                for &lanes in &cfg.lanes {
                    let dc = DetectorConfig::new(t as i64, lanes as i64).expect("valid lane width");
                    let mut fe = FrontEnd::new(w, h, dc).expect("sizes are at least 7x7");
                    let mut got = fe.process(&frame).expect("frame is valid").to_vec();
                    apply_fault(cfg.fault, &mut got);
                    report.comparisons += 1;
                    report.corners_checked += expected.len();
                    if got != expected {
                        report.mismatches.push(Mismatch {
                            seed,
                            width: w,
                            height: h,
                            threshold: t,
                            lanes,
                            expected: expected.clone(),
                            got,
                        });
                    }
                }
            }
        }
    }
    report
}
