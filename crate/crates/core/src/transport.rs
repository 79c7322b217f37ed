//! Frame bundles and the bounded channel that carries them.
//!
//! A bundle is one contiguous buffer: a 32-byte header, the raw pixels, then
//! the feature list. All integers are little-endian.
//!
//! ```text
//! offset  size  field
//!      0     4  magic          0x4F564331 ("OVC1" read as a big-endian word)
//!      4     2  version        1
//!      6     1  sensor_id      0 = left, 1 = right
//!      7     1  flags          0
//!      8     8  frame_id
//!     16     8  timestamp_ns
//!     24     2  width
//!     26     2  height
//!     28     4  feature_count
//!     32     w*h pixels, row-major
//!      …     8*n features { x: u16, y: u16, score: u16, polarity: u8, pad: u8 }
//! ```

use crate::types::{Corner, Frame, FrameError, Polarity, SensorId};
use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use thiserror::Error;

pub const MAGIC: u32 = 0x4F56_4331;
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 32;
pub const FEATURE_LEN: usize = 8;
pub const DEFAULT_RING_CAPACITY: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleError {
    #[error("feature count {0} does not fit in 32 bits")]
    TooManyFeatures(usize),
    #[error("frame {width}x{height} does not fit the 16-bit header fields")]
    FrameTooLarge { width: usize, height: usize },
    #[error("corner ({x}, {y}) lies outside the {width}x{height} frame")]
    CornerOutOfBounds {
        x: u16,
        y: u16,
        width: usize,
        height: usize,
    },
    #[error("bad magic {0:#010x}")]
    BadMagic(u32),
    #[error("unsupported bundle version {0}")]
    BadVersion(u16),
    #[error("bundle truncated: {actual} bytes, need {expected}")]
    TruncatedBundle { expected: usize, actual: usize },
    #[error("bundle is {actual} bytes, header describes {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("unknown sensor id {0}")]
    BadSensor(u8),
    #[error("feature {index} has unknown polarity {value}")]
    BadPolarity { index: usize, value: u8 },
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Decoded bundle header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BundleHeader {
    pub version: u16,
    pub sensor_id: SensorId,
    pub flags: u8,
    pub frame_id: u64,
    pub timestamp_ns: u64,
    pub width: u16,
    pub height: u16,
    pub feature_count: u32,
}

impl BundleHeader {
    pub fn pixel_len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Exact size of the bundle this header describes.
    pub fn bundle_len(&self) -> usize {
        bundle_len(
            self.width as usize,
            self.height as usize,
            self.feature_count as usize,
        )
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, BundleError> {
        if bytes.len() < HEADER_LEN {
            return Err(BundleError::TruncatedBundle {
                expected: HEADER_LEN,
                actual: bytes.len(),
            });
        }
        let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]);
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let magic = u32_at(0);
        if magic != MAGIC {
            return Err(BundleError::BadMagic(magic));
        }
        let version = u16_at(4);
        if version != VERSION {
            return Err(BundleError::BadVersion(version));
        }
        let sensor_id = SensorId::from_u8(bytes[6]).ok_or(BundleError::BadSensor(bytes[6]))?;
        Ok(BundleHeader {
            version,
            sensor_id,
            flags: bytes[7],
            frame_id: u64_at(8),
            timestamp_ns: u64_at(16),
            width: u16_at(24),
            height: u16_at(26),
            feature_count: u32_at(28),
        })
    }
}

pub fn bundle_len(width: usize, height: usize, features: usize) -> usize {
    HEADER_LEN + width * height + FEATURE_LEN * features
}

/// Serializes into `out`, replacing its contents. Lets a producer reuse one
/// allocation per frame.
pub fn encode_bundle_into(
    frame: &Frame,
    corners: &[Corner],
    out: &mut Vec<u8>,
) -> Result<(), BundleError> {
    let (w, h) = (frame.width(), frame.height());
    let (Ok(w16), Ok(h16)) = (u16::try_from(w), u16::try_from(h)) else {
        return Err(BundleError::FrameTooLarge {
            width: w,
            height: h,
        });
    };
    let count =
        u32::try_from(corners.len()).map_err(|_| BundleError::TooManyFeatures(corners.len()))?;
    if let Some(c) = corners
        .iter()
        .find(|c| c.x as usize >= w || c.y as usize >= h)
    {
        return Err(BundleError::CornerOutOfBounds {
            x: c.x,
            y: c.y,
            width: w,
            height: h,
        });
    }

    out.clear();
    out.reserve(bundle_len(w, h, corners.len()));
    out.extend_from_slice(&MAGIC.to_le_bytes());
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(frame.sensor_id.as_u8());
    out.push(0);
    out.extend_from_slice(&frame.frame_id.to_le_bytes());
    out.extend_from_slice(&frame.timestamp_ns.to_le_bytes());
    out.extend_from_slice(&w16.to_le_bytes());
    out.extend_from_slice(&h16.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(frame.pixels());
    for c in corners {
        out.extend_from_slice(&c.x.to_le_bytes());
        out.extend_from_slice(&c.y.to_le_bytes());
        out.extend_from_slice(&c.score.to_le_bytes());
        out.push(c.polarity.as_u8());
        out.push(0);
    }
    Ok(())
}

pub fn encode_bundle(frame: &Frame, corners: &[Corner]) -> Result<Vec<u8>, BundleError> {
    let mut out = Vec::new();
    encode_bundle_into(frame, corners, &mut out)?;
    Ok(out)
}

pub fn decode_bundle(bytes: &[u8]) -> Result<(Frame, Vec<Corner>), BundleError> {
    let header = BundleHeader::parse(bytes)?;
    let expected = header.bundle_len();
    if bytes.len() < expected {
        return Err(BundleError::TruncatedBundle {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(BundleError::LengthMismatch {
            expected,
            actual: bytes.len(),
        });
    }
    let pix_end = HEADER_LEN + header.pixel_len();
    let frame = Frame::new(
        header.sensor_id,
        header.frame_id,
        header.timestamp_ns,
        header.width as usize,
        header.height as usize,
        bytes[HEADER_LEN..pix_end].to_vec(),
    )?;
    let corners = bytes[pix_end..]
        .chunks_exact(FEATURE_LEN)
        .enumerate()
        .map(|(index, r)| {
            let polarity =
                Polarity::from_u8(r[6]).ok_or(BundleError::BadPolarity { index, value: r[6] })?;
            Ok(Corner::new(
                u16::from_le_bytes([r[0], r[1]]),
                u16::from_le_bytes([r[2], r[3]]),
                u16::from_le_bytes([r[4], r[5]]),
                polarity,
            ))
        })
        .collect::<Result<Vec<_>, BundleError>>()?;
    Ok((frame, corners))
}

/// An encoded bundle, as carried by [`RingChannel`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameBundle(Vec<u8>);

impl FrameBundle {
    pub fn encode(frame: &Frame, corners: &[Corner]) -> Result<Self, BundleError> {
        encode_bundle(frame, corners).map(FrameBundle)
    }

    /// Wraps the output of [`encode_bundle_into`] without re-validating it.
    pub(crate) fn from_encoded(bytes: Vec<u8>) -> Self {
        FrameBundle(bytes)
    }

    /// Wraps bytes after checking that they decode.
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self, BundleError> {
        decode_bundle(&bytes)?;
        Ok(FrameBundle(bytes))
    }

    pub fn header(&self) -> BundleHeader {
        BundleHeader::parse(&self.0).expect("FrameBundle always holds a valid header")
    }

    pub fn pixels(&self) -> &[u8] {
        &self.0[HEADER_LEN..HEADER_LEN + self.header().pixel_len()]
    }

    /// Raw feature records following the pixels.
    pub fn feature_bytes(&self) -> &[u8] {
        &self.0[HEADER_LEN + self.header().pixel_len()..]
    }

    pub fn decode(&self) -> Result<(Frame, Vec<Corner>), BundleError> {
        decode_bundle(&self.0)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PushOutcome {
    Accepted,
    /// Accepted after discarding the oldest queued item.
    Dropped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PopError {
    #[error("producer disconnected and ring drained")]
    Disconnected,
}

/// Snapshot of channel counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ChannelStats {
    pub pushes: u64,
    pub pops: u64,
    pub drops: u64,
    pub occupancy: usize,
}

struct Shared<T> {
    capacity: usize,
    queue: Mutex<Inner<T>>,
    ready: Condvar,
    drops: AtomicU64,
    closed: AtomicBool,
}

struct Inner<T> {
    items: VecDeque<T>,
    pushes: u64,
    pops: u64,
}

/// Bounded drop-oldest ring shared by one producer and one consumer.
///
/// When full, a push discards the oldest queued item and still succeeds.
pub struct RingChannel;

impl RingChannel {
    /// Creates a ring of `capacity` slots (at least one).
    #[allow(clippy::new_ret_no_self)]
    pub fn new<T>(capacity: usize) -> (Producer<T>, Consumer<T>) {
        let capacity = capacity.max(1);
        let shared = Arc::new(Shared {
            capacity,
            queue: Mutex::new(Inner {
                items: VecDeque::with_capacity(capacity),
                pushes: 0,
                pops: 0,
            }),
            ready: Condvar::new(),
            drops: AtomicU64::new(0),
            closed: AtomicBool::new(false),
        });
        (
            Producer {
                shared: shared.clone(),
            },
            Consumer { shared },
        )
    }
}

fn stats<T>(shared: &Shared<T>) -> ChannelStats {
    let q = shared.queue.lock().unwrap();
    ChannelStats {
        pushes: q.pushes,
        pops: q.pops,
        drops: shared.drops.load(Ordering::Acquire),
        occupancy: q.items.len(),
    }
}

pub struct Producer<T> {
    shared: Arc<Shared<T>>,
}

impl<T> Producer<T> {
    pub fn push(&self, item: T) -> PushOutcome {
        let mut q = self.shared.queue.lock().unwrap();
        let outcome = if q.items.len() == self.shared.capacity {
            q.items.pop_front();
            self.shared.drops.fetch_add(1, Ordering::AcqRel);
            PushOutcome::Dropped
        } else {
            PushOutcome::Accepted
        };
        q.items.push_back(item);
        q.pushes += 1;
        drop(q);
        self.shared.ready.notify_one();
        outcome
    }

    pub fn capacity(&self) -> usize {
        self.shared.capacity
    }

    pub fn drop_count(&self) -> u64 {
        self.shared.drops.load(Ordering::Acquire)
    }

    pub fn stats(&self) -> ChannelStats {
        stats(&self.shared)
    }
}

impl<T> Drop for Producer<T> {
    fn drop(&mut self) {
        // Flip the flag under the lock so a consumer about to wait sees it.
        let _q = self.shared.queue.lock().unwrap();
        self.shared.closed.store(true, Ordering::Release);
        self.shared.ready.notify_all();
    }
}

pub struct Consumer<T> {
    shared: Arc<Shared<T>>,
}

impl<T> Consumer<T> {
    /// Non-blocking pop. `Ok(None)` means empty with the producer still alive.
    pub fn try_pop(&self) -> Result<Option<T>, PopError> {
        let mut q = self.shared.queue.lock().unwrap();
        match q.items.pop_front() {
            Some(item) => {
                q.pops += 1;
                Ok(Some(item))
            }
            None if self.shared.closed.load(Ordering::Acquire) => Err(PopError::Disconnected),
            None => Ok(None),
        }
    }

    /// Waits for an item; fails once the producer is gone and the ring is empty.
    pub fn pop(&self) -> Result<T, PopError> {
        let mut q = self.shared.queue.lock().unwrap();
        loop {
            if let Some(item) = q.items.pop_front() {
                q.pops += 1;
                return Ok(item);
            }
            if self.shared.closed.load(Ordering::Acquire) {
                return Err(PopError::Disconnected);
            }
            q = self.shared.ready.wait(q).unwrap();
        }
    }

    pub fn drop_count(&self) -> u64 {
        self.shared.drops.load(Ordering::Acquire)
    }

    pub fn stats(&self) -> ChannelStats {
        stats(&self.shared)
    }
}
