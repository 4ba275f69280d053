//! Frame sources and sinks for the scheduler.

use std::path::{Path, PathBuf};

use crate::error::{LeapError, Result};
use crate::inference::simulate_work;
use crate::video::sequence::{self, SequenceMeta, SequenceWriter};
use crate::video::{Frame, Pixel};

pub trait FrameSource: Send {
    /// `(width, height)` of every frame this source yields.
    fn resolution(&self) -> (u32, u32);

    /// Nominal frame rate; 0 means unpaced.
    fn fps(&self) -> f64;

    /// Next frame, or `None` at end of stream.
    fn next_frame(&mut self) -> Result<Option<Frame>>;
}

pub trait FrameSink: Send {
    fn write(&mut self, frame: Frame) -> Result<()>;

    fn finish(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Endless generated video: a bright square orbiting the quadrants of a dim
/// background, one quadrant step every 8 frames.
#[derive(Debug, Clone)]
pub struct SyntheticSource {
    width: u32,
    height: u32,
    fps: f64,
    /// Simulated capture latency per frame.
    pub read_ms: f64,
    next_index: u64,
}

impl SyntheticSource {
    pub fn new(width: u32, height: u32, fps: f64) -> Result<Self> {
        // validates dimensions
        Frame::new(width, height, Pixel::BLACK)?;
        if !(fps >= 0.0 && fps.is_finite()) {
            return Err(LeapError::Configuration(format!("invalid fps {fps}")));
        }
        Ok(SyntheticSource {
            width,
            height,
            fps,
            read_ms: 0.0,
            next_index: 0,
        })
    }

    pub fn with_read_ms(mut self, read_ms: f64) -> Self {
        self.read_ms = read_ms;
        self
    }

    pub fn render(&self, index: u64) -> Frame {
        let mut f = Frame::new(self.width, self.height, Pixel::gray(40))
            .expect("dimensions validated at construction")
            .with_index(index);
        let q = (index / 8) % 4;
        let (hw, hh) = (self.width / 2, self.height / 2);
        let (sw, sh) = ((self.width / 4).max(1), (self.height / 4).max(1));
        let x = (q % 2) as u32 * hw + hw.saturating_sub(sw) / 2;
        let y = (q / 2) as u32 * hh + hh.saturating_sub(sh) / 2;
        f.fill_rect(x, y, sw, sh, Pixel::gray(200));
        f
    }
}

impl FrameSource for SyntheticSource {
    fn resolution(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    fn fps(&self) -> f64 {
        self.fps
    }

    fn next_frame(&mut self) -> Result<Option<Frame>> {
        simulate_work(self.read_ms);
        let f = self.render(self.next_index);
        self.next_index += 1;
        Ok(Some(f))
    }
}

/// Reads a frame-sequence directory in index order.
#[derive(Debug, Clone)]
pub struct DirSource {
    dir: PathBuf,
    meta: SequenceMeta,
    resolution: (u32, u32),
    pub read_ms: f64,
    next_index: u64,
}

impl DirSource {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let meta = sequence::read_meta(&dir)?;
        if meta.count == 0 {
            return Err(LeapError::Configuration(format!("{} holds no frames", dir.display())));
        }
        let first = sequence::read_frame(&dir, 0)?;
        Ok(DirSource {
            dir,
            meta,
            resolution: first.dimensions(),
            read_ms: 0.0,
            next_index: 0,
        })
    }

    pub fn with_read_ms(mut self, read_ms: f64) -> Self {
        self.read_ms = read_ms;
        self
    }

    pub fn meta(&self) -> SequenceMeta {
        self.meta
    }
}

impl FrameSource for DirSource {
    fn resolution(&self) -> (u32, u32) {
        self.resolution
    }

    fn fps(&self) -> f64 {
        self.meta.fps as f64
    }

    fn next_frame(&mut self) -> Result<Option<Frame>> {
        if self.next_index >= self.meta.count {
            return Ok(None);
        }
        simulate_work(self.read_ms);
        let f = sequence::read_frame(&self.dir, self.next_index)?;
        if f.dimensions() != self.resolution {
            return Err(LeapError::Format(format!(
                "frame {} is {}x{}, stream is {}x{}",
                self.next_index,
                f.width(),
                f.height(),
                self.resolution.0,
                self.resolution.1
            )));
        }
        self.next_index += 1;
        Ok(Some(f))
    }
}

/// Keeps what it is given; used for tests and in-memory runs.
#[derive(Debug, Default, Clone)]
pub struct CollectSink {
    /// Simulated output latency per frame.
    pub write_ms: f64,
    pub keep_frames: bool,
    pub indices: Vec<u64>,
    pub frames: Vec<Frame>,
}

impl CollectSink {
    pub fn new(write_ms: f64) -> Self {
        CollectSink {
            write_ms,
            ..Default::default()
        }
    }

    pub fn keeping_frames(mut self) -> Self {
        self.keep_frames = true;
        self
    }
}

impl FrameSink for CollectSink {
    fn write(&mut self, frame: Frame) -> Result<()> {
        simulate_work(self.write_ms);
        self.indices.push(frame.index);
        if self.keep_frames {
            self.frames.push(frame);
        }
        Ok(())
    }
}

/// Writes frames into a frame-sequence directory.
#[derive(Debug)]
pub struct DirSink {
    writer: SequenceWriter,
    pub write_ms: f64,
}

impl DirSink {
    pub fn create(dir: impl AsRef<Path>, fps: u32) -> Result<Self> {
        Ok(DirSink {
            writer: SequenceWriter::create(dir.as_ref(), fps)?,
            write_ms: 0.0,
        })
    }

    pub fn with_write_ms(mut self, write_ms: f64) -> Self {
        self.write_ms = write_ms;
        self
    }
}

impl FrameSink for DirSink {
    fn write(&mut self, frame: Frame) -> Result<()> {
        simulate_work(self.write_ms);
        self.writer.write(&frame)
    }

    fn finish(&mut self) -> Result<()> {
        self.writer.finish().map(|_| ())
    }
}
