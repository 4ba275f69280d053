use crate::error::{LeapError, Result};
use crate::histeq::{
    build_lut, channel_luts, gain_pixel, per_channel_pixel, ColorMode, GpioWord, HistEqConfig,
    Histogram, Lut, TimingMode,
};
use crate::video::{detokenize, luma, tokenize, Frame, Pixel, StreamToken};

#[derive(Debug, Clone)]
enum PixelMap {
    Luma(Lut),
    PerChannel([Lut; 3]),
}

impl PixelMap {
    fn identity(mode: ColorMode) -> Self {
        match mode {
            ColorMode::LumaGain => PixelMap::Luma(Lut::identity()),
            ColorMode::PerChannel => PixelMap::PerChannel([Lut::identity(); 3]),
        }
    }

    #[inline]
    fn apply(&self, p: Pixel) -> Pixel {
        match self {
            PixelMap::Luma(lut) => gain_pixel(p, lut),
            PixelMap::PerChannel(luts) => per_channel_pixel(p, luts),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Accumulator {
    luma: Histogram,
    channels: [Histogram; 3],
}

impl Accumulator {
    #[inline]
    fn add(&mut self, p: Pixel, mode: ColorMode) {
        match mode {
            ColorMode::LumaGain => self.luma.add(luma(p)),
            ColorMode::PerChannel => {
                self.channels[0].add(p.r);
                self.channels[1].add(p.g);
                self.channels[2].add(p.b);
            }
        }
    }

    fn build(&self, mode: ColorMode, n: u64) -> Result<PixelMap> {
        Ok(match mode {
            ColorMode::LumaGain => PixelMap::Luma(build_lut(&self.luma, n)?),
            ColorMode::PerChannel => PixelMap::PerChannel(channel_luts(&self.channels, n)?),
        })
    }

    fn clear(&mut self) {
        self.luma.clear();
        self.channels.iter_mut().for_each(Histogram::clear);
    }
}

/// Pixel-streaming model of the equalization core.
///
/// Tokens arrive one at a time in raster order. In
/// [`TimingMode::FrameDelayed`] every token is answered immediately using
/// the LUT measured on the previous frame. In [`TimingMode::TwoPass`] the
/// frame is buffered and the whole equalized frame is emitted when its
/// last pixel arrives.
#[derive(Debug, Clone)]
pub struct HistEqState {
    config: HistEqConfig,
    in_reset: bool,
    active: PixelMap,
    accumulating: Accumulator,
    pixel_cursor: u64,
    frame_buf: Vec<Pixel>,
}

impl HistEqState {
    /// A core that has been reset and released with `config`'s dimensions.
    pub fn new(config: HistEqConfig) -> Result<Self> {
        config.validate()?;
        Ok(HistEqState {
            config,
            in_reset: false,
            active: PixelMap::identity(config.color_mode),
            accumulating: Accumulator::default(),
            pixel_cursor: 0,
            frame_buf: Vec::new(),
        })
    }

    pub fn config(&self) -> &HistEqConfig {
        &self.config
    }

    pub fn in_reset(&self) -> bool {
        self.in_reset
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.config.rows, self.config.cols)
    }

    /// Position of the next expected pixel within the current frame.
    pub fn pixel_cursor(&self) -> u64 {
        self.pixel_cursor
    }

    /// The LUT currently applied in luma-gain mode.
    pub fn active_lut(&self) -> Option<&Lut> {
        match &self.active {
            PixelMap::Luma(l) => Some(l),
            PixelMap::PerChannel(_) => None,
        }
    }

    /// Applies a GPIO control word.
    ///
    /// A word with the reset bit set holds the core in reset, latches its
    /// dimensions and discards all accumulated state. A word with reset clear
    /// releases the core, but only if it carries the latched dimensions;
    /// changing dimensions outside reset is a protocol error.
    pub fn configure(&mut self, word: GpioWord) -> Result<()> {
        let (rows, cols) = (word.rows(), word.cols());
        if word.reset() {
            self.in_reset = true;
            self.config.rows = rows;
            self.config.cols = cols;
            self.clear_frame();
            self.active = PixelMap::identity(self.config.color_mode);
            return Ok(());
        }
        if (rows, cols) != (self.config.rows, self.config.cols) {
            return Err(LeapError::Protocol(format!(
                "dimension change to {rows}x{cols} requested without reset (latched {}x{})",
                self.config.rows, self.config.cols
            )));
        }
        if self.in_reset {
            self.config.validate()?;
            self.in_reset = false;
        }
        Ok(())
    }

    fn clear_frame(&mut self) {
        self.accumulating.clear();
        self.pixel_cursor = 0;
        self.frame_buf.clear();
    }

    /// Feeds one token, appending any emitted tokens to `out`.
    pub fn push_pixel(&mut self, token: StreamToken, out: &mut Vec<StreamToken>) -> Result<()> {
        if self.in_reset {
            return Err(LeapError::ResetViolation);
        }
        let cols = self.config.cols as u64;
        let n = self.config.pixel_count();
        let i = self.pixel_cursor;
        let last_col = i % cols == cols - 1;
        if token.sof != (i == 0) {
            return Err(LeapError::Framing(format!(
                "sof={} at pixel {i} of a {n}-pixel frame",
                token.sof
            )));
        }
        if token.eol != last_col {
            return Err(LeapError::Framing(format!(
                "eol={} at column {} of {cols}",
                token.eol,
                i % cols
            )));
        }

        let mode = self.config.color_mode;
        self.accumulating.add(token.pixel, mode);
        match self.config.timing_mode {
            TimingMode::FrameDelayed => out.push(StreamToken {
                pixel: self.active.apply(token.pixel),
                ..token
            }),
            TimingMode::TwoPass => self.frame_buf.push(token.pixel),
        }
        self.pixel_cursor += 1;

        if self.pixel_cursor == n {
            let map = self.accumulating.build(mode, n)?;
            if self.config.timing_mode == TimingMode::TwoPass {
                let w = cols as usize;
                out.extend(self.frame_buf.iter().enumerate().map(|(k, &p)| StreamToken {
                    pixel: map.apply(p),
                    sof: k == 0,
                    eol: k % w == w - 1,
                }));
            }
            self.active = map;
            self.clear_frame();
        }
        Ok(())
    }

    /// Streams a whole frame through the core.
    ///
    /// Returns the emitted frame, if the core produced a complete one.
    /// The output keeps the input's index and timestamp.
    pub fn push_frame(&mut self, frame: &Frame) -> Result<Option<Frame>> {
        let mut out = Vec::with_capacity(frame.len());
        for t in tokenize(frame) {
            self.push_pixel(t, &mut out)?;
        }
        if out.is_empty() {
            return Ok(None);
        }
        let mut f = detokenize(&out, self.config.cols, self.config.rows)?;
        f.index = frame.index;
        f.capture_time = frame.capture_time;
        Ok(Some(f))
    }
}
