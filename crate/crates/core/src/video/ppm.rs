//! Binary P6 PPM with a maximum value of 255.
//!
//! The writer always emits the canonical header `P6\n<w> <h>\n255\n`.
//! The reader accepts any netpbm-conforming header (arbitrary whitespace,
//! `#` comments) but rejects payloads that are short or followed by
//! trailing bytes.

use std::fs;
use std::path::Path;

use crate::error::{LeapError, Result};
use crate::video::Frame;

fn format_err(msg: impl Into<String>) -> LeapError {
    LeapError::Format(msg.into())
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format_err(format!("missing {what} in header")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_err(format!("{what} does not fit in 32 bits")))
    }
}

/// Decodes a binary P6 image.
pub fn read_ppm(bytes: &[u8]) -> Result<Frame> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(format_err("expected P6 magic"));
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maximum value")?;
    if maxval != 255 {
        return Err(format_err(format!("maximum value {maxval} unsupported, need 255")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(format_err("header not terminated by whitespace")),
    }
    let payload = &bytes[cur.pos..];
    let expected = width as usize * height as usize * 3;
    if payload.len() < expected {
        return Err(format_err(format!(
            "truncated payload: {} of {expected} bytes",
            payload.len()
        )));
    }
    if payload.len() > expected {
        return Err(format_err(format!(
            "{} trailing bytes after raster",
            payload.len() - expected
        )));
    }
    Frame::from_rgb_bytes(width, height, payload)
}

/// Encodes a frame as canonical binary P6.
pub fn write_ppm(frame: &Frame) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", frame.width(), frame.height());
    let mut out = Vec::with_capacity(header.len() + frame.len() * 3);
    out.extend_from_slice(header.as_bytes());
    for p in frame.pixels() {
        out.extend_from_slice(&[p.r, p.g, p.b]);
    }
    out
}

pub fn load(path: impl AsRef<Path>) -> Result<Frame> {
    read_ppm(&fs::read(path)?)
}

pub fn save(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_ppm(frame))?;
    Ok(())
}
