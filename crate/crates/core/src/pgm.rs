//! Binary PGM (P5, maxval 255) reading and writing.

use std::io::{self, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("not a binary PGM: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

fn header_token<'a>(data: &'a [u8], pos: &mut usize) -> Result<&'a [u8], PgmError> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() && data[*pos] != b'#' {
        *pos += 1;
    }
    if start == *pos {
        return Err(PgmError::Format("truncated header".into()));
    }
    Ok(&data[start..*pos])
}

fn header_number(data: &[u8], pos: &mut usize, what: &str) -> Result<usize, PgmError> {
    let tok = header_token(data, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| PgmError::Format(format!("bad {what}")))
}

pub fn decode(data: &[u8]) -> Result<Image, PgmError> {
    let mut pos = 0;
    if header_token(data, &mut pos)? != b"P5" {
        return Err(PgmError::Format("magic is not P5".into()));
    }
    let width = header_number(data, &mut pos, "width")?;
    let height = header_number(data, &mut pos, "height")?;
    let maxval = header_number(data, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(PgmError::Format(format!(
            "maxval {maxval}, only 255 is supported"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= data.len() || !data[pos].is_ascii_whitespace() {
        return Err(PgmError::Format("missing raster".into()));
    }
    pos += 1;
    let len = width
        .checked_mul(height)
        .ok_or_else(|| PgmError::Format("dimensions overflow".into()))?;
    let raster = &data[pos..];
    if raster.len() < len {
        return Err(PgmError::Format(format!(
            "raster has {} bytes, expected {len}",
            raster.len()
        )));
    }
    Ok(Image {
        width,
        height,
        pixels: raster[..len].to_vec(),
    })
}

pub fn encode(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

pub fn read(path: impl AsRef<Path>) -> Result<Image, PgmError> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|source| PgmError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&data)
}

pub fn write(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
    pixels: &[u8],
) -> Result<(), PgmError> {
    let path = path.as_ref();
    let io_err = |source| PgmError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = std::fs::File::create(path).map_err(io_err)?;
    f.write_all(&encode(width, height, pixels)).map_err(io_err)
}
