//! Frame-sequence directories: `frame_%06d.ppm` files plus a `stream.meta`
//! file holding `fps=<integer>` and `count=<integer>` lines.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{LeapError, Result};
use crate::video::{ppm, Frame};

pub const META_FILE: &str = "stream.meta";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceMeta {
    pub fps: u32,
    pub count: u64,
}

impl SequenceMeta {
    pub fn render(&self) -> String {
        format!("fps={}\ncount={}\n", self.fps, self.count)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut fps = None;
        let mut count = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LeapError::Format(format!("malformed meta line `{line}`")))?;
            let bad = |_| LeapError::Format(format!("non-integer value in `{line}`"));
            match key.trim() {
                "fps" => fps = Some(value.trim().parse().map_err(bad)?),
                "count" => count = Some(value.trim().parse().map_err(bad)?),
                _ => {}
            }
        }
        match (fps, count) {
            (Some(fps), Some(count)) => Ok(SequenceMeta { fps, count }),
            _ => Err(LeapError::Format("stream.meta needs both fps and count".into())),
        }
    }
}

pub fn frame_file_name(index: u64) -> String {
    format!("frame_{index:06}.ppm")
}

pub fn read_meta(dir: impl AsRef<Path>) -> Result<SequenceMeta> {
    SequenceMeta::parse(&fs::read_to_string(dir.as_ref().join(META_FILE))?)
}

/// Loads frame `index` of a sequence directory, stamping the index on it.
pub fn read_frame(dir: impl AsRef<Path>, index: u64) -> Result<Frame> {
    Ok(ppm::load(dir.as_ref().join(frame_file_name(index)))?.with_index(index))
}

/// Writes frames one at a time; `finish` records the metadata.
#[derive(Debug)]
pub struct SequenceWriter {
    dir: PathBuf,
    fps: u32,
    count: u64,
}

impl SequenceWriter {
    pub fn create(dir: impl Into<PathBuf>, fps: u32) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(SequenceWriter { dir, fps, count: 0 })
    }

    /// Writes `frame` under its own index.
    pub fn write(&mut self, frame: &Frame) -> Result<()> {
        ppm::save(frame, self.dir.join(frame_file_name(frame.index)))?;
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn finish(&self) -> Result<SequenceMeta> {
        let meta = SequenceMeta {
            fps: self.fps,
            count: self.count,
        };
        fs::write(self.dir.join(META_FILE), meta.render())?;
        Ok(meta)
    }
}

/// Writes a whole sequence, numbering frames from zero.
pub fn write_sequence(dir: impl Into<PathBuf>, frames: &[Frame], fps: u32) -> Result<SequenceMeta> {
    let mut w = SequenceWriter::create(dir, fps)?;
    for (i, f) in frames.iter().enumerate() {
        w.write(&f.clone().with_index(i as u64))?;
    }
    w.finish()
}
