//! End-to-end drivers: the threaded stream simulation and the throughput
//! benchmark, both summarised as a [`RunReport`].

use crate::pipeline::FrontEnd;
use crate::sensor_sim::{open_rig, RigError, SensorEvent, SensorRigConfig, NS_PER_S};
use crate::transport::{decode_bundle, encode_bundle_into, BundleError, FrameBundle, RingChannel};
use crate::types::{DetectorConfig, Frame, SensorId};
use serde::Serialize;
use std::path::PathBuf;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub detector_s: f64,
    pub nms_s: f64,
    pub transport_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    /// Stereo frame pairs pushed through the front end.
    pub frames_processed: u64,
    pub imu_samples: u64,
    pub corners_total: u64,
    pub wall_time_s: f64,
    /// Frame pairs per wall-clock second; zero when nothing ran.
    pub frames_per_second: f64,
    /// Bundles the full ring discarded before the consumer got to them.
    pub drops: u64,
    pub stages: StageTimings,
}

impl RunReport {
    fn finish(mut self, wall: Duration) -> Self {
        self.wall_time_s = wall.as_secs_f64();
        self.frames_per_second = if self.frames_processed == 0 || self.wall_time_s == 0.0 {
            0.0
        } else {
            self.frames_processed as f64 / self.wall_time_s
        };
        self
    }
}

impl std::fmt::Display for RunReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "frame pairs      {}", self.frames_processed)?;
        writeln!(f, "imu samples      {}", self.imu_samples)?;
        writeln!(f, "corners          {}", self.corners_total)?;
        writeln!(f, "wall time        {:.3} s", self.wall_time_s)?;
        writeln!(f, "pairs/second     {:.2}", self.frames_per_second)?;
        writeln!(f, "bundles dropped  {}", self.drops)?;
        writeln!(
            f,
            "stages           detector {:.3} s, nms {:.3} s, transport {:.3} s",
            self.stages.detector_s, self.stages.nms_s, self.stages.transport_s
        )
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Rig(#[from] RigError),
    #[error(transparent)]
    Detect(#[from] crate::detector::DetectError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("stream check failed: {0}")]
    Check(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Times one sensor's detection and encoding.
struct SensorLane {
    front: FrontEnd,
    buf: Vec<u8>,
    process_time: Duration,
    encode_time: Duration,
}

impl SensorLane {
    fn new(w: usize, h: usize, config: DetectorConfig) -> Result<Self, RunError> {
        Ok(SensorLane {
            front: FrontEnd::new(w, h, config)?.with_stage_timing(),
            buf: Vec::new(),
            process_time: Duration::ZERO,
            encode_time: Duration::ZERO,
        })
    }

    /// Returns the corner count; the encoded bundle is left in `self.buf`.
    fn run(&mut self, frame: &Frame) -> Result<usize, RunError> {
        let t0 = Instant::now();
        let corners = self.front.process(frame)?;
        let t1 = Instant::now();
        encode_bundle_into(frame, corners, &mut self.buf)?;
        self.process_time += t1 - t0;
        self.encode_time += t1.elapsed();
        Ok(corners.len())
    }

    fn add_to(&self, stages: &mut StageTimings) {
        let nms = self.front.nms_time();
        stages.nms_s += nms.as_secs_f64();
        stages.detector_s += self.process_time.saturating_sub(nms).as_secs_f64();
        stages.transport_s += self.encode_time.as_secs_f64();
    }
}

#[derive(Debug, Clone)]
pub enum BenchInput {
    /// Frames from the synthetic rig with this seed.
    Seed(u64),
    /// One image fed to both sensors.
    Image(Frame),
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub input: BenchInput,
    pub frames: u64,
    pub detector: DetectorConfig,
    pub width: usize,
    pub height: usize,
}

/// Distinct synthetic pairs cycled by the benchmark.
const BENCH_PAIRS: u64 = 4;

/// Sustained detector + suppression + encode throughput on stereo pairs,
/// single-threaded. Frame generation is outside the timed region.
pub fn bench(cfg: &BenchConfig) -> Result<RunReport, RunError> {
    let pairs: Vec<(Frame, Frame)> = match &cfg.input {
        BenchInput::Image(img) => {
            let left = img.clone().with_stamp(SensorId::Left, 0, 0);
            let right = img.clone().with_stamp(SensorId::Right, 0, 0);
            vec![(left, right)]
        }
        BenchInput::Seed(seed) => {
            let mut rig = open_rig(SensorRigConfig {
                width: cfg.width,
                height: cfg.height,
                seed: *seed,
                ..SensorRigConfig::default()
            })?;
            let mut pairs = Vec::new();
            while (pairs.len() as u64) < BENCH_PAIRS.min(cfg.frames.max(1)) {
                if let SensorEvent::FramePair { left, right } = rig.next_event()? {
                    pairs.push((left, right));
                }
            }
            pairs
        }
    };
    let (w, h) = (pairs[0].0.width(), pairs[0].0.height());
    let mut left = SensorLane::new(w, h, cfg.detector)?;
    let mut right = SensorLane::new(w, h, cfg.detector)?;
    let mut report = RunReport::default();

    let start = Instant::now();
    for i in 0..cfg.frames {
        let (l, r) = &pairs[(i % pairs.len() as u64) as usize];
        report.corners_total += left.run(l)? as u64;
        report.corners_total += right.run(r)? as u64;
        report.frames_processed += 1;
    }
    let wall = start.elapsed();
    left.add_to(&mut report.stages);
    right.add_to(&mut report.stages);
    Ok(report.finish(wall))
}

#[derive(Debug, Clone)]
pub struct StreamConfig {
    pub rig: SensorRigConfig,
    pub detector: DetectorConfig,
    pub ring_capacity: usize,
    /// Simulated seconds; events with timestamps before this are processed.
    pub duration_s: f64,
    /// Pace the producer to the wall clock.
    pub realtime: bool,
    /// Write every delivered bundle as `<sensor>_<frame_id>.ovcb`.
    pub dump_dir: Option<PathBuf>,
}

/// Runs sensors → two front ends → ring → consumer on two threads.
///
/// The producer checks pair synchrony and timestamp monotonicity of the event
/// stream; the consumer decodes every bundle and checks per-sensor ordering.
/// `corners_total` counts what the producer emitted, so it does not depend on
/// scheduling.
pub fn stream(cfg: &StreamConfig) -> Result<RunReport, RunError> {
    let mut rig = open_rig(cfg.rig.clone())?;
    let (w, h) = (rig.config().width, rig.config().height);
    let end_ns = (cfg.duration_s.max(0.0) * NS_PER_S as f64).round() as u64;
    let (tx, rx) = RingChannel::new::<FrameBundle>(cfg.ring_capacity);
    let dump_dir = cfg.dump_dir.clone();
    if let Some(dir) = &dump_dir {
        std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
            path: dir.clone(),
            source,
        })?;
    }

    let start = Instant::now();
    let consumer = std::thread::spawn(move || -> Result<u64, RunError> {
        let mut last = [None::<(u64, u64)>; 2];
        let mut received = 0u64;
        while let Ok(bundle) = rx.pop() {
            let (frame, _corners) = decode_bundle(bundle.as_bytes())?;
            let slot = frame.sensor_id.as_u8() as usize;
            if let Some((id, ts)) = last[slot] {
                if frame.frame_id <= id || frame.timestamp_ns < ts {
                    return Err(RunError::Check(format!(
                        "{:?} bundle {} at {} ns after {} at {} ns",
                        frame.sensor_id, frame.frame_id, frame.timestamp_ns, id, ts
                    )));
                }
            }
            last[slot] = Some((frame.frame_id, frame.timestamp_ns));
            if let Some(dir) = &dump_dir {
                let side = match frame.sensor_id {
                    SensorId::Left => "left",
                    SensorId::Right => "right",
                };
                let path = dir.join(format!("{side}_{:06}.ovcb", frame.frame_id));
                std::fs::write(&path, bundle.as_bytes())
                    .map_err(|source| RunError::Io { path, source })?;
            }
            received += 1;
        }
        Ok(received)
    });

    let produced = (|| -> Result<RunReport, RunError> {
        let mut left = SensorLane::new(w, h, cfg.detector)?;
        let mut right = SensorLane::new(w, h, cfg.detector)?;
        let mut report = RunReport::default();
        let mut last_ts = 0u64;
        while rig.peek_timestamp() < end_ns {
            let event = rig.next_event()?;
            let ts = event.timestamp_ns();
            if ts < last_ts {
                return Err(RunError::Check(format!("time went back: {ts} < {last_ts}")));
            }
            last_ts = ts;
            if cfg.realtime {
                let due = Duration::from_nanos(ts);
                if let Some(wait) = due.checked_sub(start.elapsed()) {
                    std::thread::sleep(wait);
                }
            }
            match event {
                SensorEvent::Imu(_) => report.imu_samples += 1,
                SensorEvent::FramePair { left: l, right: r } => {
                    if l.timestamp_ns != r.timestamp_ns || l.frame_id != r.frame_id {
                        return Err(RunError::Check(format!(
                            "pair out of sync: left {}@{} right {}@{}",
                            l.frame_id, l.timestamp_ns, r.frame_id, r.timestamp_ns
                        )));
                    }
                    report.corners_total += left.run(&l)? as u64;
                    tx.push(FrameBundle::from_encoded(std::mem::take(&mut left.buf)));
                    report.corners_total += right.run(&r)? as u64;
                    tx.push(FrameBundle::from_encoded(std::mem::take(&mut right.buf)));
                    report.frames_processed += 1;
                }
            }
        }
        left.add_to(&mut report.stages);
        right.add_to(&mut report.stages);
        report.drops = tx.drop_count();
        Ok(report)
    })();
    drop(tx);
    let received = consumer.join().expect("consumer thread panicked");
    let report = produced?;
    let received = received?;
    log::debug!(
        "consumer received {received} bundles, {} dropped",
        report.drops
    );
    Ok(report.finish(start.elapsed()))
}
