//! Streaming 3×3 non-maximal suppression over candidate score rows.
//!
//! A position survives when its score is nonzero and strictly greater than
//! all eight neighbours; equal neighbours suppress each other. Neighbours
//! outside the map count as zero.

use crate::detector::{ScoreMap, ScoreRow};
use crate::types::{Corner, Polarity};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum NmsError {
    #[error("score row {got} pushed, expected row {expected}")]
    RowOrderViolation { expected: usize, got: usize },
    #[error("score row of width {got}, suppressor expects {expected}")]
    WidthMismatch { expected: usize, got: usize },
}

/// Rolling three-row suppressor for one sensor.
pub struct NmsState {
    width: usize,
    height: usize,
    /// Row `y` lives in slot `y % 3`.
    scores: [Vec<u8>; 3],
    dark: [Vec<bool>; 3],
    zeros: Vec<u8>,
    next_y: usize,
}

impl NmsState {
    pub fn new(width: usize, height: usize) -> Self {
        NmsState {
            width,
            height,
            scores: std::array::from_fn(|_| vec![0; width]),
            dark: std::array::from_fn(|_| vec![false; width]),
            zeros: vec![0; width],
            next_y: 0,
        }
    }

    pub fn reset(&mut self) {
        self.next_y = 0;
    }

    /// Row the suppressor expects next.
    pub fn next_row(&self) -> usize {
        self.next_y
    }

    /// Takes score row `y` and emits, in raster order, the corners of row
    /// `y - 1`, which just became decidable. The last row of the frame is
    /// decided on arrival, with zeros below it.
    pub fn push_score_row<F: FnMut(Corner)>(
        &mut self,
        row: &ScoreRow,
        mut emit: F,
    ) -> Result<(), NmsError> {
        if row.y != self.next_y || row.y >= self.height {
            return Err(NmsError::RowOrderViolation {
                expected: self.next_y,
                got: row.y,
            });
        }
        if row.width() != self.width {
            return Err(NmsError::WidthMismatch {
                expected: self.width,
                got: row.width(),
            });
        }
        let y = row.y;
        let slot = y % 3;
        self.scores[slot].copy_from_slice(&row.scores);
        self.dark[slot].copy_from_slice(&row.dark);
        self.next_y += 1;

        if y >= 1 {
            self.decide(y - 1, &mut emit);
        }
        if y + 1 == self.height {
            self.decide(y, &mut emit);
            self.next_y = 0;
        }
        Ok(())
    }

    fn decide<F: FnMut(Corner)>(&self, y: usize, emit: &mut F) {
        let above: &[u8] = if y == 0 {
            &self.zeros
        } else {
            &self.scores[(y - 1) % 3]
        };
        let below: &[u8] = if y + 1 == self.height {
            &self.zeros
        } else {
            &self.scores[(y + 1) % 3]
        };
        let mid = &self.scores[y % 3];
        let dark = &self.dark[y % 3];
        let w = self.width;
        let at = |r: &[u8], x: usize, dx: isize| -> u8 {
            let xx = x as isize + dx;
            if xx < 0 || xx as usize >= w {
                0
            } else {
                r[xx as usize]
            }
        };
        for x in 0..w {
            let s = mid[x];
            if s == 0 {
                continue;
            }
            let mut is_max = true;
            for dx in -1..=1isize {
                if at(above, x, dx) >= s || at(below, x, dx) >= s {
                    is_max = false;
                    break;
                }
            }
            if is_max && at(mid, x, -1) < s && at(mid, x, 1) < s {
                let polarity = if dark[x] {
                    Polarity::Dark
                } else {
                    Polarity::Bright
                };
                emit(Corner::new(x as u16, y as u16, s as u16, polarity));
            }
        }
    }
}

/// Suppresses a complete score map by streaming it through [`NmsState`].
pub fn suppress_map(map: &ScoreMap) -> Vec<Corner> {
    let mut nms = NmsState::new(map.width(), map.height());
    let mut out = Vec::new();
    for row in map.rows() {
        nms.push_score_row(row, |c| out.push(c))
            .expect("a score map has consecutive rows of one width");
    }
    out
}
