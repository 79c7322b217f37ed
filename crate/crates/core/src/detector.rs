//! Streaming AST corner detector.
//!
//! Pixels arrive in raster order, `lane_width` at a time, and are written into
//! a rolling buffer of seven lines. As soon as the pixel three columns to the
//! right of a candidate on the bottom line of its window is resident, the
//! candidate is scored, so the candidates of row `r` all leave the detector
//! while row `r + 3` is being consumed.
//!
//! A candidate passes the segment test when some wrap-around arc of at least
//! nine circle pixels is entirely brighter than `center + t` or entirely darker
//! than `center - t`. Its score is the largest threshold it would still pass
//! at, i.e. the best arc's weakest difference, so `score > t` exactly when the
//! pixel is a candidate at `t`.

use crate::types::{DetectorConfig, Frame, Polarity, MIN_ARC, RADIUS, RING_SIZE, WINDOW};
use thiserror::Error;

/// Circle of radius three inside the 7×7 window, clockwise from straight up.
/// `(dx, dy)` with `dy` growing downwards.
pub const RING: [(i8, i8); RING_SIZE] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RingOffsets([(i8, i8); RING_SIZE]);

impl RingOffsets {
    pub fn get(&self, i: usize) -> (i8, i8) {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        RING_SIZE
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = (i8, i8)> + '_ {
        self.0.iter().copied()
    }

    pub fn as_array(&self) -> &[(i8, i8); RING_SIZE] {
        &self.0
    }
}

pub fn ring_offsets() -> RingOffsets {
    RingOffsets(RING)
}

/// The 16 circle intensities around `(x, y)`. The window must fit.
pub fn sample_ring(frame: &Frame, x: usize, y: usize) -> [u8; RING_SIZE] {
    let mut ring = [0u8; RING_SIZE];
    for (slot, &(dx, dy)) in ring.iter_mut().zip(RING.iter()) {
        *slot = frame.get(
            (x as isize + dx as isize) as usize,
            (y as isize + dy as isize) as usize,
        );
    }
    ring
}

#[inline(always)]
fn diffs(center: u8, ring: &[u8; RING_SIZE]) -> [i16; RING_SIZE] {
    let c = center as i16;
    let mut d = [0i16; RING_SIZE];
    for i in 0..RING_SIZE {
        d[i] = ring[i] as i16 - c;
    }
    d
}

/// Bit `i` set when circle entry `i` is brighter (resp. darker) than the
/// center by more than `t`.
#[inline(always)]
fn sign_masks(d: &[i16; RING_SIZE], t: i16) -> (u16, u16) {
    let mut bright = 0u16;
    let mut dark = 0u16;
    for (i, &v) in d.iter().enumerate() {
        bright |= ((v > t) as u16) << i;
        dark |= ((-v > t) as u16) << i;
    }
    (bright, dark)
}

/// True when the 16-bit circular mask holds a run of at least [`MIN_ARC`] ones.
#[inline(always)]
fn has_arc(mask: u16) -> bool {
    let doubled = mask as u32 | (mask as u32) << RING_SIZE;
    let mut run = doubled;
    for k in 1..MIN_ARC {
        run &= doubled >> k;
    }
    run & 0xFFFF != 0
}

/// Max over the 16 wrap-around windows of nine entries of the window minimum.
#[inline(always)]
fn best_window_min(v: &[i16; RING_SIZE]) -> i16 {
    let mut best = i16::MIN;
    for start in 0..RING_SIZE {
        let mut m = i16::MAX;
        for k in 0..MIN_ARC {
            m = m.min(v[(start + k) & (RING_SIZE - 1)]);
        }
        best = best.max(m);
    }
    best
}

pub fn segment_test(center: u8, ring: &[u8; RING_SIZE], threshold: u8) -> Option<Polarity> {
    let d = diffs(center, ring);
    let (bright, dark) = sign_masks(&d, threshold as i16);
    // Two arcs of nine cannot both fit on sixteen entries.
    if has_arc(bright) {
        Some(Polarity::Bright)
    } else if has_arc(dark) {
        Some(Polarity::Dark)
    } else {
        None
    }
}

/// Weakest-link contrast of the best same-sign arc of length ≥ 9.
///
/// Returns `(0, None)` when no such arc exists. Longer arcs can only lower the
/// minimum, so it is enough to look at arcs of exactly nine entries.
pub fn corner_score(center: u8, ring: &[u8; RING_SIZE]) -> (u8, Option<Polarity>) {
    let d = diffs(center, ring);
    score_from_diffs(&d)
}

#[inline(always)]
fn score_from_diffs(d: &[i16; RING_SIZE]) -> (u8, Option<Polarity>) {
    let bright = best_window_min(d);
    if bright > 0 {
        return (bright.min(255) as u8, Some(Polarity::Bright));
    }
    let neg = d.map(|v| -v);
    let dark = best_window_min(&neg);
    if dark > 0 {
        return (dark.min(255) as u8, Some(Polarity::Dark));
    }
    (0, None)
}

/// Compass pre-check. Any nine-arc covers two neighbouring compass points,
/// and every neighbouring pair is one of {N, S} with one of {E, W}. Saturated
/// bounds are exact: nothing exceeds 255 or undercuts 0.
#[inline(always)]
fn compass_may_pass(lines: &[u8], win: &[usize; WINDOW], c: usize, t: u8) -> bool {
    let mid = win[RADIUS] + c;
    let v = lines[mid];
    let n = lines[win[0] + c];
    let s = lines[win[WINDOW - 1] + c];
    let e = lines[mid + 3];
    let w = lines[mid - 3];
    let bright = n.max(s).min(e.max(w)) > v.saturating_add(t);
    let dark = n.min(s).max(e.min(w)) < v.saturating_sub(t);
    bright | dark
}

/// Full segment test and score of column `c`; zero when not a candidate.
#[inline(never)]
fn score_candidate(lines: &[u8], win: &[usize; WINDOW], c: usize, t: u8) -> (u8, Polarity) {
    let mut ring = [0u8; RING_SIZE];
    for (slot, &(dx, dy)) in ring.iter_mut().zip(RING.iter()) {
        *slot = lines[win[(RADIUS as i8 + dy) as usize] + (c as isize + dx as isize) as usize];
    }
    let d = diffs(lines[win[RADIUS] + c], &ring);
    let (bright, dark) = sign_masks(&d, t as i16);
    if !has_arc(bright) && !has_arc(dark) {
        return (0, Polarity::Bright);
    }
    match score_from_diffs(&d) {
        (score, Some(p)) => (score, p),
        (_, None) => unreachable!("a qualifying arc always has a positive score"),
    }
}

/// Candidate scores of one image row. Zero marks a non-candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreRow {
    pub y: usize,
    pub scores: Vec<u8>,
    /// Polarity bit per column; `true` for dark.
    pub dark: Vec<bool>,
}

impl ScoreRow {
    pub fn zeros(y: usize, width: usize) -> Self {
        ScoreRow {
            y,
            scores: vec![0; width],
            dark: vec![false; width],
        }
    }

    pub fn width(&self) -> usize {
        self.scores.len()
    }

    pub fn polarity(&self, x: usize) -> Polarity {
        if self.dark[x] {
            Polarity::Dark
        } else {
            Polarity::Bright
        }
    }

    fn clear(&mut self, y: usize) {
        self.y = y;
        self.scores.fill(0);
        self.dark.fill(false);
    }
}

/// Dense candidate score map of a whole frame, prior to suppression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreMap {
    width: usize,
    height: usize,
    rows: Vec<ScoreRow>,
}

impl ScoreMap {
    pub fn new(width: usize, height: usize) -> Self {
        ScoreMap {
            width,
            height,
            rows: (0..height).map(|y| ScoreRow::zeros(y, width)).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn rows(&self) -> &[ScoreRow] {
        &self.rows
    }

    pub fn score(&self, x: usize, y: usize) -> u8 {
        self.rows[y].scores[x]
    }

    pub fn polarity(&self, x: usize, y: usize) -> Polarity {
        self.rows[y].polarity(x)
    }

    pub fn set(&mut self, x: usize, y: usize, score: u8, polarity: Polarity) {
        self.rows[y].scores[x] = score;
        self.rows[y].dark[x] = polarity == Polarity::Dark;
    }

    /// Nonzero entries in raster order.
    pub fn candidates(&self) -> Vec<Candidate> {
        let mut out = Vec::new();
        for row in &self.rows {
            for (x, &s) in row.scores.iter().enumerate() {
                if s > 0 {
                    out.push(Candidate {
                        x,
                        y: row.y,
                        score: s,
                        polarity: row.polarity(x),
                    });
                }
            }
        }
        out
    }

    /// Scores as an 8-bit image, handy for dumping to PGM.
    pub fn to_image(&self) -> Vec<u8> {
        self.rows
            .iter()
            .flat_map(|r| r.scores.iter().copied())
            .collect()
    }
}

/// A pixel that passed the segment test, before suppression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Candidate {
    pub y: usize,
    pub x: usize,
    pub score: u8,
    pub polarity: Polarity,
}

/// Receives the detector's output as it is produced.
pub trait DetectorSink {
    /// A nonzero candidate score, in raster order.
    fn candidate(&mut self, _candidate: Candidate) {}
    /// A finished score row. Rows arrive in ascending order without gaps,
    /// zero rows at the borders included.
    fn score_row(&mut self, _row: &ScoreRow) {}
}

impl DetectorSink for Vec<Candidate> {
    fn candidate(&mut self, candidate: Candidate) {
        self.push(candidate);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DetectError {
    #[error("pushed past the end of a {width}x{height} frame")]
    GeometryOverflow { width: usize, height: usize },
    #[error("lane group of {got} pixels, detector is configured for {expected}")]
    LaneMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Frame(#[from] crate::types::FrameError),
}

/// Line-buffered detector for one sensor.
///
/// Each row is delivered as `ceil(width / lane_width)` lane groups; the last
/// group of a row is zero-padded when the width is not a multiple of the lane
/// width, and the pad is never evaluated.
pub struct StreamingDetector {
    threshold: u8,
    lanes: usize,
    width: usize,
    height: usize,
    /// `WINDOW` lines of `width` pixels; row `k` lives in slot `k % WINDOW`.
    lines: Vec<u8>,
    /// Offsets in `lines` of the window rows, top to bottom, for the row
    /// currently being scored.
    window: [usize; WINDOW],
    /// Offset in `lines` of the row being written.
    write_base: usize,
    row: usize,
    col: usize,
    next_candidate: usize,
    scores: ScoreRow,
    done: bool,
}

impl StreamingDetector {
    pub fn new(width: usize, height: usize, config: DetectorConfig) -> Result<Self, DetectError> {
        if width < WINDOW || height < WINDOW {
            return Err(crate::types::FrameError::DimensionTooSmall { width, height }.into());
        }
        Ok(StreamingDetector {
            threshold: config.threshold(),
            lanes: config.lane_width(),
            width,
            height,
            lines: vec![0; WINDOW * width],
            window: [0; WINDOW],
            write_base: 0,
            row: 0,
            col: 0,
            next_candidate: RADIUS,
            scores: ScoreRow::zeros(0, width),
            done: false,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn lane_width(&self) -> usize {
        self.lanes
    }

    /// Row the next pushed pixel belongs to.
    pub fn cursor(&self) -> (usize, usize) {
        (self.col, self.row)
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Rewinds to the top of a new frame of the same geometry.
    pub fn reset(&mut self) {
        self.write_base = 0;
        self.row = 0;
        self.col = 0;
        self.next_candidate = RADIUS;
        self.scores.clear(0);
        self.done = false;
    }

    pub fn push_pixels<S: DetectorSink>(
        &mut self,
        group: &[u8],
        sink: &mut S,
    ) -> Result<(), DetectError> {
        if group.len() != self.lanes {
            return Err(DetectError::LaneMismatch {
                expected: self.lanes,
                got: group.len(),
            });
        }
        if self.done {
            return Err(DetectError::GeometryOverflow {
                width: self.width,
                height: self.height,
            });
        }

        let real = self.lanes.min(self.width - self.col);
        let base = self.write_base + self.col;
        self.lines[base..base + real].copy_from_slice(&group[..real]);
        self.col += real;

        if self.row + 1 >= WINDOW {
            self.evaluate_ready(sink);
        }
        if self.col == self.width {
            self.finish_row(sink);
        }
        Ok(())
    }

    fn evaluate_ready<S: DetectorSink>(&mut self, sink: &mut S) {
        let hi = self.col.saturating_sub(RADIUS).min(self.width - RADIUS);
        if self.next_candidate >= hi {
            return;
        }
        let y = self.row - RADIUS;
        let (lines, win, t) = (&self.lines[..], &self.window, self.threshold);
        for c in self.next_candidate..hi {
            if !compass_may_pass(lines, win, c, t) {
                continue;
            }
            let (score, polarity) = score_candidate(lines, win, c, t);
            if score > 0 {
                self.scores.scores[c] = score;
                self.scores.dark[c] = polarity == Polarity::Dark;
                sink.candidate(Candidate {
                    x: c,
                    y,
                    score,
                    polarity,
                });
            }
        }
        self.next_candidate = hi;
    }

    fn update_window(&mut self) {
        self.write_base = self.row % WINDOW * self.width;
        if self.row + 1 >= WINDOW {
            let first = self.row + 1 - WINDOW;
            self.window = std::array::from_fn(|j| (first + j) % WINDOW * self.width);
        }
    }

    fn finish_row<S: DetectorSink>(&mut self, sink: &mut S) {
        if self.row >= RADIUS {
            self.scores.y = self.row - RADIUS;
            sink.score_row(&self.scores);
        }
        if self.row + 1 == self.height {
            for y in self.height - RADIUS..self.height {
                self.scores.clear(y);
                sink.score_row(&self.scores);
            }
            self.done = true;
        } else {
            self.scores.clear(0);
        }
        self.row += 1;
        self.col = 0;
        self.next_candidate = RADIUS;
        self.update_window();
    }

    /// Feeds a whole frame through [`push_pixels`](Self::push_pixels) in lane
    /// groups, padding the last group of each row.
    pub fn stream_frame<S: DetectorSink>(
        &mut self,
        frame: &Frame,
        sink: &mut S,
    ) -> Result<(), DetectError> {
        let mut pad = [0u8; 8];
        for y in 0..frame.height() {
            for group in lane_groups(frame.row(y), self.lanes, &mut pad) {
                self.push_pixels(group, sink)?;
            }
        }
        Ok(())
    }
}

/// Splits a row into lane groups of exactly `lanes` pixels, zero-padding the
/// tail into `pad`.
pub fn lane_groups<'a>(
    row: &'a [u8],
    lanes: usize,
    pad: &'a mut [u8; 8],
) -> impl Iterator<Item = &'a [u8]> + 'a {
    let full = row.len() / lanes * lanes;
    let tail = &row[full..];
    let has_tail = !tail.is_empty();
    if has_tail {
        pad.fill(0);
        pad[..tail.len()].copy_from_slice(tail);
    }
    let pad: &'a [u8] = &pad[..lanes];
    row[..full]
        .chunks_exact(lanes)
        .chain(has_tail.then_some(pad))
}

struct MapSink<'a>(&'a mut ScoreMap);

impl DetectorSink for MapSink<'_> {
    fn score_row(&mut self, row: &ScoreRow) {
        self.0.rows[row.y].clone_from(row);
    }
}

/// Dense score map of `frame`, computed by streaming it through a fresh
/// [`StreamingDetector`].
pub fn detect_frame(frame: &Frame, config: DetectorConfig) -> Result<ScoreMap, DetectError> {
    let mut detector = StreamingDetector::new(frame.width(), frame.height(), config)?;
    let mut map = ScoreMap::new(frame.width(), frame.height());
    detector.stream_frame(frame, &mut MapSink(&mut map))?;
    Ok(map)
}
