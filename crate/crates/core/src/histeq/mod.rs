//! Histogram equalization.
//!
//! The batch path (`compute_histogram` → `build_lut` → `apply_lut`) is the
//! reference. [`HistEqState`] is the streaming model of the hardware core:
//! one token in per clock, reset-gated reconfiguration through a packed
//! [`GpioWord`].

mod gpio;
mod state;

use serde::{Deserialize, Serialize};

use crate::error::{LeapError, Result};
use crate::video::{luma, Frame, Pixel, MAX_DIMENSION};

pub use gpio::{pack_gpio, unpack_gpio, GpioWord};
pub use state::HistEqState;

pub const LEVELS: usize = 256;

/// Occurrence counts for each 8-bit level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub bins: [u32; LEVELS],
}

impl Default for Histogram {
    fn default() -> Self {
        Histogram { bins: [0; LEVELS] }
    }
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().map(|&b| b as u64).sum()
    }

    #[inline]
    pub fn add(&mut self, level: u8) {
        self.bins[level as usize] += 1;
    }

    pub fn clear(&mut self) {
        self.bins = [0; LEVELS];
    }
}

/// 256-entry intensity mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lut {
    pub map: [u8; LEVELS],
}

impl Default for Lut {
    fn default() -> Self {
        Self::identity()
    }
}

impl Lut {
    pub fn identity() -> Self {
        let mut map = [0u8; LEVELS];
        for (v, m) in map.iter_mut().enumerate() {
            *m = v as u8;
        }
        Lut { map }
    }

    #[inline]
    pub fn get(&self, level: u8) -> u8 {
        self.map[level as usize]
    }

    pub fn is_monotone(&self) -> bool {
        self.map.windows(2).all(|w| w[0] <= w[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorMode {
    /// Equalize luma, then scale each channel by the luma gain.
    #[default]
    LumaGain,
    /// Equalize each channel against its own histogram.
    PerChannel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingMode {
    /// Buffer the frame, then apply its own LUT.
    TwoPass,
    /// Apply the LUT measured on the previous frame.
    #[default]
    FrameDelayed,
}

impl std::str::FromStr for ColorMode {
    type Err = LeapError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "luma_gain" | "luma-gain" => Ok(ColorMode::LumaGain),
            "per_channel" | "per-channel" => Ok(ColorMode::PerChannel),
            _ => Err(LeapError::Configuration(format!("unknown color mode `{s}`"))),
        }
    }
}

impl std::str::FromStr for TimingMode {
    type Err = LeapError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_pass" | "two-pass" => Ok(TimingMode::TwoPass),
            "frame_delayed" | "frame-delayed" => Ok(TimingMode::FrameDelayed),
            _ => Err(LeapError::Configuration(format!("unknown timing mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistEqConfig {
    pub rows: u32,
    pub cols: u32,
    pub color_mode: ColorMode,
    pub timing_mode: TimingMode,
}

impl HistEqConfig {
    pub fn new(rows: u32, cols: u32, color_mode: ColorMode, timing_mode: TimingMode) -> Result<Self> {
        let cfg = HistEqConfig {
            rows,
            cols,
            color_mode,
            timing_mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Two-pass luma-gain configuration sized for `frame`.
    pub fn for_frame(frame: &Frame) -> Self {
        HistEqConfig {
            rows: frame.height(),
            cols: frame.width(),
            color_mode: ColorMode::LumaGain,
            timing_mode: TimingMode::TwoPass,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.rows > MAX_DIMENSION || self.cols > MAX_DIMENSION {
            return Err(LeapError::Configuration(format!(
                "rows {} / cols {} must lie in 1..=4095",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> u64 {
        self.rows as u64 * self.cols as u64
    }
}

pub fn compute_histogram(frame: &Frame) -> Histogram {
    let mut h = Histogram::default();
    for &p in frame.pixels() {
        h.add(luma(p));
    }
    h
}

pub(crate) fn channel_histograms(frame: &Frame) -> [Histogram; 3] {
    let mut hs: [Histogram; 3] = Default::default();
    for p in frame.pixels() {
        hs[0].add(p.r);
        hs[1].add(p.g);
        hs[2].add(p.b);
    }
    hs
}

/// CDF-min normalized equalization LUT.
///
/// `LUT[v] = round(255 * (cdf(v) - cdf_min) / (n - cdf_min))` with halves
/// rounded away from zero; levels below the first occupied bin map to 0.
/// A histogram with a single occupied level yields the identity.
pub fn build_lut(hist: &Histogram, n: u64) -> Result<Lut> {
    let total = hist.total();
    if n == 0 || total != n {
        return Err(LeapError::Consistency(format!(
            "histogram holds {total} samples, expected {n}"
        )));
    }
    let Some(first) = hist.bins.iter().position(|&b| b > 0) else {
        unreachable!("nonzero total implies an occupied bin");
    };
    let cdf_min = hist.bins[first] as u64;
    if cdf_min == n {
        return Ok(Lut::identity());
    }
    let den = n - cdf_min;
    let mut map = [0u8; LEVELS];
    let mut cdf = 0u64;
    for (v, &count) in hist.bins.iter().enumerate() {
        cdf += count as u64;
        if v >= first {
            let num = 255 * (cdf - cdf_min);
            map[v] = ((2 * num + den) / (2 * den)) as u8;
        }
    }
    Ok(Lut { map })
}

/// Luma-gain mapping of one pixel through `lut`.
#[inline]
pub fn gain_pixel(p: Pixel, lut: &Lut) -> Pixel {
    let y = luma(p) as u32;
    let y_out = lut.get(y as u8);
    if y == 0 {
        return Pixel::gray(y_out);
    }
    let scale = |c: u8| -> u8 {
        let v = (2 * c as u32 * y_out as u32 + y) / (2 * y);
        v.min(255) as u8
    };
    Pixel::new(scale(p.r), scale(p.g), scale(p.b))
}

#[inline]
pub(crate) fn per_channel_pixel(p: Pixel, luts: &[Lut; 3]) -> Pixel {
    Pixel::new(luts[0].get(p.r), luts[1].get(p.g), luts[2].get(p.b))
}

pub(crate) fn channel_luts(hists: &[Histogram; 3], n: u64) -> Result<[Lut; 3]> {
    Ok([
        build_lut(&hists[0], n)?,
        build_lut(&hists[1], n)?,
        build_lut(&hists[2], n)?,
    ])
}

/// Applies a LUT. In [`ColorMode::PerChannel`] the `lut` argument is unused:
/// three LUTs are derived from the frame's own channel histograms.
pub fn apply_lut(frame: &Frame, lut: &Lut, mode: ColorMode) -> Frame {
    match mode {
        ColorMode::LumaGain => frame.map_pixels(|&p| gain_pixel(p, lut)),
        ColorMode::PerChannel => {
            let luts = channel_luts(&channel_histograms(frame), frame.len() as u64)
                .expect("channel histograms always total the pixel count");
            frame.map_pixels(|&p| per_channel_pixel(p, &luts))
        }
    }
}

/// Same-frame equalization of `frame`, whose dimensions must match `cfg`.
pub fn equalize(frame: &Frame, cfg: &HistEqConfig) -> Result<Frame> {
    if frame.dimensions() != (cfg.cols, cfg.rows) {
        return Err(LeapError::Configuration(format!(
            "frame is {}x{} but the core is configured for {}x{}",
            frame.width(),
            frame.height(),
            cfg.cols,
            cfg.rows
        )));
    }
    let lut = match cfg.color_mode {
        ColorMode::LumaGain => build_lut(&compute_histogram(frame), frame.len() as u64)?,
        ColorMode::PerChannel => Lut::identity(),
    };
    Ok(apply_lut(frame, &lut, cfg.color_mode))
}
