//! Detector and suppressor chained for one sensor, the way the hardware wires
//! them: score rows flow into the suppressor as soon as they are complete.

use crate::detector::{DetectError, DetectorSink, ScoreRow, StreamingDetector};
use crate::nms::{NmsError, NmsState};
use crate::types::{Corner, DetectorConfig, Frame};
use std::time::{Duration, Instant};

struct Chain<'a> {
    nms: &'a mut NmsState,
    out: &'a mut Vec<Corner>,
    nms_time: Option<&'a mut Duration>,
    err: Option<NmsError>,
}

impl DetectorSink for Chain<'_> {
    fn score_row(&mut self, row: &ScoreRow) {
        let start = self.nms_time.is_some().then(Instant::now);
        let out = &mut *self.out;
        if let Err(e) = self.nms.push_score_row(row, |c| out.push(c)) {
            self.err.get_or_insert(e);
        }
        if let (Some(t), Some(start)) = (self.nms_time.as_deref_mut(), start) {
            *t += start.elapsed();
        }
    }
}

/// Streaming front end for one sensor: detector → 3×3 suppression.
pub struct FrontEnd {
    config: DetectorConfig,
    detector: StreamingDetector,
    nms: NmsState,
    corners: Vec<Corner>,
    time_nms: bool,
    nms_time: Duration,
}

impl FrontEnd {
    pub fn new(width: usize, height: usize, config: DetectorConfig) -> Result<Self, DetectError> {
        Ok(FrontEnd {
            config,
            detector: StreamingDetector::new(width, height, config)?,
            nms: NmsState::new(width, height),
            corners: Vec::new(),
            time_nms: false,
            nms_time: Duration::ZERO,
        })
    }

    /// Accumulate time spent in suppression, readable via [`nms_time`](Self::nms_time).
    pub fn with_stage_timing(mut self) -> Self {
        self.time_nms = true;
        self
    }

    pub fn nms_time(&self) -> Duration {
        self.nms_time
    }

    pub fn config(&self) -> DetectorConfig {
        self.config
    }

    /// Streams one frame through and returns its corners in raster order.
    pub fn process(&mut self, frame: &Frame) -> Result<&[Corner], DetectError> {
        if frame.width() != self.detector.width() || frame.height() != self.detector.height() {
            *self = FrontEnd {
                time_nms: self.time_nms,
                nms_time: self.nms_time,
                ..FrontEnd::new(frame.width(), frame.height(), self.config)?
            };
        }
        self.detector.reset();
        self.nms.reset();
        self.corners.clear();
        let mut chain = Chain {
            nms: &mut self.nms,
            out: &mut self.corners,
            nms_time: self.time_nms.then_some(&mut self.nms_time),
            err: None,
        };
        self.detector.stream_frame(frame, &mut chain)?;
        if let Some(e) = chain.err {
            unreachable!("detector produced out-of-order score rows: {e}");
        }
        Ok(&self.corners)
    }
}

/// One-shot streaming detection.
pub fn detect_corners(frame: &Frame, config: DetectorConfig) -> Result<Vec<Corner>, DetectError> {
    let mut fe = FrontEnd::new(frame.width(), frame.height(), config)?;
    Ok(fe.process(frame)?.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::detect_frame;
    use crate::nms::suppress_map;

    #[test]
    fn streaming_matches_batch_and_reuses_state() {
        let (w, h) = (41, 30);
        let px: Vec<u8> = (0..w * h)
            .map(|i| ((i * 2654435761usize) >> 13) as u8)
            .collect();
        let frame = Frame::from_pixels(w, h, px).unwrap();
        let cfg = DetectorConfig::new(15, 4).unwrap();
        let batch = suppress_map(&detect_frame(&frame, cfg).unwrap());
        assert!(!batch.is_empty());
        let mut fe = FrontEnd::new(w, h, cfg).unwrap().with_stage_timing();
        assert_eq!(fe.process(&frame).unwrap(), &batch[..]);
        assert_eq!(fe.process(&frame).unwrap(), &batch[..]);
        // A different geometry rebuilds the buffers.
        let small = Frame::filled(9, 9, 1).unwrap();
        assert!(fe.process(&small).unwrap().is_empty());
    }
}
