use std::time::SystemTime;

use crate::error::{LeapError, Result};

/// Largest width or height representable in a 12-bit dimension register.
pub const MAX_DIMENSION: u32 = 4095;

/// One RGB24 pixel.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Pixel {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Pixel {
    pub const BLACK: Pixel = Pixel::gray(0);
    pub const WHITE: Pixel = Pixel::gray(255);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Pixel { r, g, b }
    }

    pub const fn gray(v: u8) -> Self {
        Pixel { r: v, g: v, b: v }
    }

    pub fn luma(self) -> u8 {
        luma(self)
    }
}

/// Fixed-point luma, `(77 r + 150 g + 29 b) >> 8`.
///
/// The coefficients sum to 256, so pure gray maps to itself exactly.
pub fn luma(p: Pixel) -> u8 {
    ((77 * p.r as u32 + 150 * p.g as u32 + 29 * p.b as u32) >> 8) as u8
}

/// An owned RGB24 raster.
///
/// Equality compares dimensions, pixels and frame index. The capture
/// timestamp is metadata and does not take part.
#[derive(Debug, Clone)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Vec<Pixel>,
    pub index: u64,
    pub capture_time: SystemTime,
}

impl PartialEq for Frame {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.index == other.index
            && self.pixels == other.pixels
    }
}

impl Eq for Frame {}

pub(crate) fn check_dimensions(width: u32, height: u32) -> Result<()> {
    if (1..=MAX_DIMENSION).contains(&width) && (1..=MAX_DIMENSION).contains(&height) {
        Ok(())
    } else {
        Err(LeapError::Dimension { width, height })
    }
}

impl Frame {
    /// A frame filled with a single color, index 0.
    pub fn new(width: u32, height: u32, fill: Pixel) -> Result<Self> {
        check_dimensions(width, height)?;
        Ok(Frame {
            width,
            height,
            pixels: vec![fill; (width * height) as usize],
            index: 0,
            capture_time: SystemTime::now(),
        })
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<Pixel>) -> Result<Self> {
        check_dimensions(width, height)?;
        if pixels.len() != (width * height) as usize {
            return Err(LeapError::Consistency(format!(
                "{} pixels supplied for a {width}x{height} frame",
                pixels.len()
            )));
        }
        Ok(Frame {
            width,
            height,
            pixels,
            index: 0,
            capture_time: SystemTime::now(),
        })
    }

    /// Builds a frame from packed `r g b` bytes.
    pub fn from_rgb_bytes(width: u32, height: u32, bytes: &[u8]) -> Result<Self> {
        check_dimensions(width, height)?;
        let expected = (width * height) as usize * 3;
        if bytes.len() != expected {
            return Err(LeapError::Consistency(format!(
                "{} bytes supplied, {expected} required",
                bytes.len()
            )));
        }
        let pixels = bytes
            .chunks_exact(3)
            .map(|c| Pixel::new(c[0], c[1], c[2]))
            .collect();
        Self::from_pixels(width, height, pixels)
    }

    pub fn with_index(mut self, index: u64) -> Self {
        self.index = index;
        self
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Pixel] {
        &mut self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> Pixel {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, p: Pixel) {
        self.pixels[(y * self.width + x) as usize] = p;
    }

    pub fn to_rgb_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| [p.r, p.g, p.b]).collect()
    }

    /// Same raster, fresh pixel data produced by `f`. Index and timestamp carry over.
    pub fn map_pixels(&self, f: impl FnMut(&Pixel) -> Pixel) -> Frame {
        Frame {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(f).collect(),
            index: self.index,
            capture_time: self.capture_time,
        }
    }

    /// Fills an axis-aligned rectangle, clipped to the frame.
    pub fn fill_rect(&mut self, x: u32, y: u32, w: u32, h: u32, p: Pixel) {
        let x_end = x.saturating_add(w).min(self.width);
        let y_end = y.saturating_add(h).min(self.height);
        for yy in y.min(self.height)..y_end {
            let row = (yy * self.width) as usize;
            for xx in x.min(self.width)..x_end {
                self.pixels[row + xx as usize] = p;
            }
        }
    }
}
