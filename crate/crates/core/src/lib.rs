//! Software model of a stereo vision front end: a lane-parallel streaming AST
//! corner detector with 3×3 non-maximal suppression, a synchronized
//! dual-camera + IMU simulator, and a frame-bundle transport where the feature
//! list trails the raw image in one buffer.
//!
//! The dataflow is
//!
//! ```text
//! sensor_sim ─► detector ─► nms ─► transport ─► consumer
//!  (pairs+IMU)  (7 lines)  (3 rows)  (bundle ring)
//! ```
//!
//! and [`oracle`] holds a brute-force reference for the detect/score/suppress
//! chain used to check the streaming path.

pub mod detector;
pub mod nms;
pub mod oracle;
pub mod pgm;
pub mod pipeline;
pub mod run;
pub mod sensor_sim;
pub mod transport;
pub mod types;
pub mod verify;

pub use detector::{
    corner_score, detect_frame, ring_offsets, segment_test, ScoreMap, ScoreRow, StreamingDetector,
};
pub use nms::{suppress_map, NmsState};
pub use pipeline::{detect_corners, FrontEnd};
pub use types::{
    make_config, validate_frame, Corner, DetectorConfig, Frame, FrameError, ImuSample, Polarity,
    SensorId,
};
