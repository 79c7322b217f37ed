//! Domain types shared by the detector, the sensor simulator and the transport.

use serde::Serialize;
use thiserror::Error;

/// Side length of the square window the segment test looks at.
pub const WINDOW: usize = 7;
/// Number of pixels on the discretized circle.
pub const RING_SIZE: usize = 16;
/// Minimum length of a contiguous arc for a pixel to be a candidate.
pub const MIN_ARC: usize = 9;
/// Distance from a candidate to the edge of its window.
pub const RADIUS: usize = WINDOW / 2;

pub const DEFAULT_THRESHOLD: u8 = 20;
pub const DEFAULT_LANES: usize = 4;
pub const MAX_THRESHOLD: u8 = 254;
pub const LANE_WIDTHS: [usize; 4] = [1, 2, 4, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SensorId {
    Left,
    Right,
}

impl SensorId {
    pub fn as_u8(self) -> u8 {
        match self {
            SensorId::Left => 0,
            SensorId::Right => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(SensorId::Left),
            1 => Some(SensorId::Right),
            _ => None,
        }
    }
}

/// Which side of the center the qualifying arc lies on.
///
/// `Bright` means the arc pixels are brighter than the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub enum Polarity {
    #[default]
    Bright,
    Dark,
}

impl Polarity {
    pub fn as_u8(self) -> u8 {
        match self {
            Polarity::Bright => 0,
            Polarity::Dark => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Polarity::Bright),
            1 => Some(Polarity::Dark),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Bright => "bright",
            Polarity::Dark => "dark",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("frame is {width}x{height}, both sides must be at least {WINDOW}")]
    DimensionTooSmall { width: usize, height: usize },
    #[error("frame is {width}x{height} but holds {actual} pixels")]
    LengthMismatch {
        width: usize,
        height: usize,
        actual: usize,
    },
}

/// One 8-bit monochrome image as it leaves a sensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub sensor_id: SensorId,
    pub frame_id: u64,
    /// Trigger instant on the common timebase.
    pub timestamp_ns: u64,
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(
        sensor_id: SensorId,
        frame_id: u64,
        timestamp_ns: u64,
        width: usize,
        height: usize,
        pixels: Vec<u8>,
    ) -> Result<Self, FrameError> {
        validate_dims(width, height, pixels.len())?;
        Ok(Frame {
            sensor_id,
            frame_id,
            timestamp_ns,
            width,
            height,
            pixels,
        })
    }

    /// A frame outside of any stream: left sensor, id 0, timestamp 0.
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, FrameError> {
        Frame::new(SensorId::Left, 0, 0, width, height, pixels)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, FrameError> {
        Frame::from_pixels(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn with_stamp(mut self, sensor_id: SensorId, frame_id: u64, timestamp_ns: u64) -> Self {
        self.sensor_id = sensor_id;
        self.frame_id = frame_id;
        self.timestamp_ns = timestamp_ns;
        self
    }
}

fn validate_dims(width: usize, height: usize, len: usize) -> Result<(), FrameError> {
    if width < WINDOW || height < WINDOW {
        return Err(FrameError::DimensionTooSmall { width, height });
    }
    if width.checked_mul(height) != Some(len) {
        return Err(FrameError::LengthMismatch {
            width,
            height,
            actual: len,
        });
    }
    Ok(())
}

/// Checks the frame invariants. [`Frame::new`] already enforces them, so this
/// only fails for frames assembled from raw parts.
pub fn validate_frame(width: usize, height: usize, pixels: &[u8]) -> Result<(), FrameError> {
    validate_dims(width, height, pixels.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImuSample {
    pub seq: u64,
    pub timestamp_ns: u64,
    /// m/s²
    pub accel: [f32; 3],
    /// rad/s
    pub gyro: [f32; 3],
}

/// A feature that survived non-maximal suppression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Corner {
    pub y: u16,
    pub x: u16,
    pub score: u16,
    pub polarity: Polarity,
}

impl Corner {
    pub fn new(x: u16, y: u16, score: u16, polarity: Polarity) -> Self {
        Corner {
            x,
            y,
            score,
            polarity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("threshold {0} outside 0..=254")]
    BadThreshold(i64),
    #[error("lane width {0} is not one of 1, 2, 4, 8")]
    BadLaneWidth(i64),
    #[error("ring size {0} is fixed at 16")]
    BadRingSize(usize),
    #[error("minimum arc {0} is fixed at 9")]
    BadMinArc(usize),
    #[error("window {0} is fixed at 7")]
    BadWindow(usize),
}

/// Detector parameters. Ring size, minimum arc and window are fixed; only the
/// threshold and lane width vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DetectorConfig {
    threshold: u8,
    lane_width: usize,
}

impl DetectorConfig {
    pub fn new(threshold: i64, lane_width: i64) -> Result<Self, ConfigError> {
        if !(0..=MAX_THRESHOLD as i64).contains(&threshold) {
            return Err(ConfigError::BadThreshold(threshold));
        }
        if !LANE_WIDTHS.iter().any(|&l| l as i64 == lane_width) {
            return Err(ConfigError::BadLaneWidth(lane_width));
        }
        Ok(DetectorConfig {
            threshold: threshold as u8,
            lane_width: lane_width as usize,
        })
    }

    /// Like [`DetectorConfig::new`] but also takes the geometry constants, so
    /// callers reading them from elsewhere get a typed rejection.
    pub fn with_geometry(
        threshold: i64,
        lane_width: i64,
        ring_size: usize,
        min_arc: usize,
        window: usize,
    ) -> Result<Self, ConfigError> {
        if ring_size != RING_SIZE {
            return Err(ConfigError::BadRingSize(ring_size));
        }
        if min_arc != MIN_ARC {
            return Err(ConfigError::BadMinArc(min_arc));
        }
        if window != WINDOW {
            return Err(ConfigError::BadWindow(window));
        }
        DetectorConfig::new(threshold, lane_width)
    }

    pub fn threshold(&self) -> u8 {
        self.threshold
    }

    pub fn lane_width(&self) -> usize {
        self.lane_width
    }

    pub fn ring_size(&self) -> usize {
        RING_SIZE
    }

    pub fn min_arc(&self) -> usize {
        MIN_ARC
    }

    pub fn window(&self) -> usize {
        WINDOW
    }
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            threshold: DEFAULT_THRESHOLD,
            lane_width: DEFAULT_LANES,
        }
    }
}

/// Convenience for the `make_config` contract.
pub fn make_config(threshold: i64, lane_width: i64) -> Result<DetectorConfig, ConfigError> {
    DetectorConfig::new(threshold, lane_width)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_resolution_frame_is_valid() {
        let f = Frame::filled(1280, 1024, 0).unwrap();
        assert_eq!(f.pixels().len(), 1_310_720);
        assert!(validate_frame(1280, 1024, f.pixels()).is_ok());
    }

    #[test]
    fn small_frame_rejected() {
        assert_eq!(
            validate_frame(6, 6, &[0; 36]),
            Err(FrameError::DimensionTooSmall {
                width: 6,
                height: 6
            })
        );
        assert!(matches!(
            Frame::filled(7, 6, 0),
            Err(FrameError::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn pixel_count_mismatch() {
        assert_eq!(
            validate_frame(8, 8, &[0; 63]),
            Err(FrameError::LengthMismatch {
                width: 8,
                height: 8,
                actual: 63
            })
        );
    }

    #[test]
    fn config_examples() {
        let c = make_config(20, 4).unwrap();
        assert_eq!((c.threshold(), c.lane_width()), (20, 4));
        assert_eq!((c.ring_size(), c.min_arc(), c.window()), (16, 9, 7));
        assert!(make_config(0, 1).is_ok());
        assert_eq!(make_config(300, 4), Err(ConfigError::BadThreshold(300)));
        assert_eq!(make_config(-1, 4), Err(ConfigError::BadThreshold(-1)));
        assert_eq!(make_config(255, 4), Err(ConfigError::BadThreshold(255)));
        assert_eq!(make_config(20, 3), Err(ConfigError::BadLaneWidth(3)));
        assert_eq!(make_config(20, 16), Err(ConfigError::BadLaneWidth(16)));
    }

    #[test]
    fn geometry_constants_are_fixed() {
        assert!(DetectorConfig::with_geometry(20, 4, 16, 9, 7).is_ok());
        assert_eq!(
            DetectorConfig::with_geometry(20, 4, 12, 9, 7),
            Err(ConfigError::BadRingSize(12))
        );
        assert_eq!(
            DetectorConfig::with_geometry(20, 4, 16, 12, 7),
            Err(ConfigError::BadMinArc(12))
        );
        assert_eq!(
            DetectorConfig::with_geometry(20, 4, 16, 9, 5),
            Err(ConfigError::BadWindow(5))
        );
    }
}
