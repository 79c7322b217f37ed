//! Deterministic stand-in for the sensor board: two global-shutter cameras
//! triggered together and an IMU, all stamped on one nanosecond timebase
//! starting at zero.
//!
//! Frame `k` is triggered at `k·10⁹/frame_rate` ns and IMU sample `j` at
//! `j·10⁹/imu_rate` ns (exact integer division of the product, so there is no
//! drift for rates that do not divide 10⁹). Because the IMU rate is an integer
//! multiple of the frame rate, every trigger coincides with an IMU sample; at
//! equal timestamps the IMU sample is emitted first.

use crate::pgm;
use crate::types::{Frame, FrameError, ImuSample, SensorId, WINDOW};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use thiserror::Error;

pub const NS_PER_S: u64 = 1_000_000_000;
pub const DEFAULT_FRAME_RATE_HZ: u32 = 20;
pub const DEFAULT_IMU_RATE_HZ: u32 = 200;
pub const DEFAULT_WIDTH: usize = 1280;
pub const DEFAULT_HEIGHT: usize = 1024;
pub const DEFAULT_SEED: u64 = 7;
const GRAVITY: f32 = 9.806_65;

#[derive(Debug, Error)]
pub enum RigError {
    #[error("imu rate {imu} Hz is not a multiple of frame rate {frame} Hz")]
    BadRateRatio { frame: u32, imu: u32 },
    #[error("rates must be positive (frame {frame} Hz, imu {imu} Hz)")]
    ZeroRate { frame: u32, imu: u32 },
    #[error("image not found: {0}")]
    FileNotFound(PathBuf),
    #[error("{path}: {reason}")]
    BadImageFormat { path: PathBuf, reason: String },
    #[error("image sequence is empty")]
    EmptySequence,
    #[error("image sequence exhausted")]
    EndOfSequence,
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Parameters of the synthetic scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    /// Mean background intensity.
    pub base: u8,
    /// Peak-to-peak amplitude of the white-noise background.
    pub noise_amplitude: u8,
    /// Number of 7×7 corner motifs injected per frame.
    pub motif_count: usize,
    /// Intensity difference between a motif's center and its surround.
    pub motif_contrast: u8,
    /// Horizontal shift of the motifs in the right image.
    pub disparity: usize,
}

impl Default for SyntheticScene {
    fn default() -> Self {
        SyntheticScene {
            base: 128,
            noise_amplitude: 16,
            motif_count: 256,
            motif_contrast: 100,
            disparity: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrameSource {
    Synthetic(SyntheticScene),
    /// Each file feeds both cameras. Files are cycled when `looping` is set.
    ImageSequence {
        paths: Vec<PathBuf>,
        looping: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorRigConfig {
    pub width: usize,
    pub height: usize,
    pub frame_rate_hz: u32,
    pub imu_rate_hz: u32,
    pub seed: u64,
    pub source: FrameSource,
}

impl Default for SensorRigConfig {
    fn default() -> Self {
        SensorRigConfig {
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
            frame_rate_hz: DEFAULT_FRAME_RATE_HZ,
            imu_rate_hz: DEFAULT_IMU_RATE_HZ,
            seed: DEFAULT_SEED,
            source: FrameSource::Synthetic(SyntheticScene::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateReport {
    /// IMU samples per frame trigger.
    pub ratio: u32,
    /// Nominal periods; exact when the rate divides 10⁹.
    pub frame_period_ns: u64,
    pub imu_period_ns: u64,
}

pub fn frames_per_imu_window(frame_rate_hz: u32, imu_rate_hz: u32) -> Result<RateReport, RigError> {
    if frame_rate_hz == 0 || imu_rate_hz == 0 {
        return Err(RigError::ZeroRate {
            frame: frame_rate_hz,
            imu: imu_rate_hz,
        });
    }
    if !imu_rate_hz.is_multiple_of(frame_rate_hz) {
        return Err(RigError::BadRateRatio {
            frame: frame_rate_hz,
            imu: imu_rate_hz,
        });
    }
    Ok(RateReport {
        ratio: imu_rate_hz / frame_rate_hz,
        frame_period_ns: NS_PER_S / frame_rate_hz as u64,
        imu_period_ns: NS_PER_S / imu_rate_hz as u64,
    })
}

/// Timestamp of the `k`-th tick of a `rate_hz` clock.
pub fn tick_ns(k: u64, rate_hz: u32) -> u64 {
    (k as u128 * NS_PER_S as u128 / rate_hz as u128) as u64
}

#[derive(Debug, Clone, PartialEq)]
pub enum SensorEvent {
    FramePair { left: Frame, right: Frame },
    Imu(ImuSample),
}

impl SensorEvent {
    pub fn timestamp_ns(&self) -> u64 {
        match self {
            SensorEvent::FramePair { left, .. } => left.timestamp_ns,
            SensorEvent::Imu(s) => s.timestamp_ns,
        }
    }
}

/// Stateful event source. Single-threaded; move it, don't share it.
pub struct RigHandle {
    config: SensorRigConfig,
    images: Vec<Vec<u8>>,
    next_frame: u64,
    next_imu: u64,
    imu_rng: ChaCha8Rng,
}

const IMU_STREAM: u64 = u64::MAX;
const MOTIF_STREAM_BASE: u64 = 1 << 63;

pub fn open_rig(config: SensorRigConfig) -> Result<RigHandle, RigError> {
    frames_per_imu_window(config.frame_rate_hz, config.imu_rate_hz)?;
    let mut config = config;
    let mut images = Vec::new();
    match &config.source {
        FrameSource::Synthetic(_) => {
            if config.width < WINDOW || config.height < WINDOW {
                return Err(FrameError::DimensionTooSmall {
                    width: config.width,
                    height: config.height,
                }
                .into());
            }
        }
        FrameSource::ImageSequence { paths, .. } => {
            if paths.is_empty() {
                return Err(RigError::EmptySequence);
            }
            let mut dims = None;
            for path in paths {
                if !path.exists() {
                    return Err(RigError::FileNotFound(path.clone()));
                }
                let img = pgm::read(path).map_err(|e| RigError::BadImageFormat {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
                crate::types::validate_frame(img.width, img.height, &img.pixels)?;
                match dims {
                    None => dims = Some((img.width, img.height)),
                    Some(d) if d != (img.width, img.height) => {
                        return Err(RigError::BadImageFormat {
                            path: path.clone(),
                            reason: format!(
                                "{}x{} differs from the sequence's {}x{}",
                                img.width, img.height, d.0, d.1
                            ),
                        })
                    }
                    Some(_) => {}
                }
                images.push(img.pixels);
            }
            let (w, h) = dims.unwrap();
            config.width = w;
            config.height = h;
        }
    }
    let mut imu_rng = ChaCha8Rng::seed_from_u64(config.seed);
    imu_rng.set_stream(IMU_STREAM);
    Ok(RigHandle {
        config,
        images,
        next_frame: 0,
        next_imu: 0,
        imu_rng,
    })
}

impl RigHandle {
    /// Effective configuration; in sequence mode the dimensions come from the files.
    pub fn config(&self) -> &SensorRigConfig {
        &self.config
    }

    pub fn next_event(&mut self) -> Result<SensorEvent, RigError> {
        let frame_ts = tick_ns(self.next_frame, self.config.frame_rate_hz);
        let imu_ts = tick_ns(self.next_imu, self.config.imu_rate_hz);
        if imu_ts <= frame_ts {
            let seq = self.next_imu;
            self.next_imu += 1;
            return Ok(SensorEvent::Imu(self.imu_sample(seq, imu_ts)));
        }
        let k = self.next_frame;
        let (left, right) = self.frame_pair(k, frame_ts)?;
        self.next_frame += 1;
        Ok(SensorEvent::FramePair { left, right })
    }

    /// Timestamp of the event `next_event` would return.
    pub fn peek_timestamp(&self) -> u64 {
        tick_ns(self.next_frame, self.config.frame_rate_hz)
            .min(tick_ns(self.next_imu, self.config.imu_rate_hz))
    }

    fn imu_sample(&mut self, seq: u64, timestamp_ns: u64) -> ImuSample {
        let rng = &mut self.imu_rng;
        let mut noise = |scale: f32| rng.random_range(-scale..=scale);
        ImuSample {
            seq,
            timestamp_ns,
            accel: [noise(0.05), noise(0.05), GRAVITY + noise(0.05)],
            gyro: [noise(0.01), noise(0.01), noise(0.01)],
        }
    }

    fn frame_pair(&self, k: u64, ts: u64) -> Result<(Frame, Frame), RigError> {
        let (w, h) = (self.config.width, self.config.height);
        let (lp, rp) = match &self.config.source {
            FrameSource::Synthetic(scene) => synthetic_pair(self.config.seed, k, w, h, scene),
            FrameSource::ImageSequence { looping, .. } => {
                let n = self.images.len() as u64;
                if !looping && k >= n {
                    return Err(RigError::EndOfSequence);
                }
                let img = self.images[(k % n) as usize].clone();
                (img.clone(), img)
            }
        };
        Ok((
            Frame::new(SensorId::Left, k, ts, w, h, lp)?,
            Frame::new(SensorId::Right, k, ts, w, h, rp)?,
        ))
    }
}

fn noise_image(rng: &mut ChaCha8Rng, w: usize, h: usize, scene: &SyntheticScene) -> Vec<u8> {
    let mut px = vec![0u8; w * h];
    rng.fill_bytes(&mut px);
    let amp = scene.noise_amplitude as i32;
    let lo = scene.base as i32 - amp / 2;
    for p in px.iter_mut() {
        *p = (lo + ((*p as i32 * (amp + 1)) >> 8)).clamp(0, 255) as u8;
    }
    px
}

/// Writes a 7×7 motif centred on `(cx, cy)`: a flat square whose center
/// differs from it by `contrast`.
pub fn stamp_motif(px: &mut [u8], w: usize, cx: usize, cy: usize, surround: u8, center: u8) {
    for y in cy - 3..=cy + 3 {
        px[y * w + cx - 3..=y * w + cx + 3].fill(surround);
    }
    px[cy * w + cx] = center;
}

/// Left and right images of frame `k` of the synthetic scene.
pub fn synthetic_pair(
    seed: u64,
    k: u64,
    w: usize,
    h: usize,
    scene: &SyntheticScene,
) -> (Vec<u8>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * k);
    let mut left = noise_image(&mut rng, w, h, scene);
    rng.set_stream(2 * k + 1);
    let mut right = noise_image(&mut rng, w, h, scene);

    let mut motif_rng = ChaCha8Rng::seed_from_u64(seed);
    motif_rng.set_stream(MOTIF_STREAM_BASE | k);
    let d = scene.disparity;
    // Motifs must fit in both images after the shift.
    if w >= 7 + d && h >= 7 {
        let half = scene.motif_contrast / 2;
        for _ in 0..scene.motif_count {
            let cx = motif_rng.random_range(3 + d..w - 3);
            let cy = motif_rng.random_range(3..h - 3);
            let (surround, center) = if motif_rng.random_bool(0.5) {
                let s = scene.base.saturating_add(half);
                (s, s.saturating_sub(scene.motif_contrast))
            } else {
                let s = scene.base.saturating_sub(half);
                (s, s.saturating_add(scene.motif_contrast))
            };
            stamp_motif(&mut left, w, cx, cy, surround, center);
            stamp_motif(&mut right, w, cx - d, cy, surround, center);
        }
    }
    (left, right)
}
