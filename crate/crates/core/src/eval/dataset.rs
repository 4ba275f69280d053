use std::fs;
use std::path::{Path, PathBuf};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LeapError, Result};
use crate::eval::{write_manifest, GtBox, ManifestEntry};
use crate::video::{ppm, Frame, Pixel};

pub const CLASSIFICATION_MANIFEST: &str = "classification.jsonl";
pub const DETECTION_MANIFEST: &str = "detection.jsonl";
const IMAGE_DIR: &str = "images";

/// Parameters of one synthetic image: a bright square on a flat background,
/// centered in quadrant `quadrant`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sample {
    pub size: u32,
    pub background: u8,
    pub foreground: u8,
    pub quadrant: u32,
}

impl Sample {
    /// Ground-truth box of the square, class = quadrant.
    pub fn gt_box(&self) -> GtBox {
        let side = self.size / 4;
        let half = self.size / 2;
        let offset = (half - side) / 2;
        GtBox {
            x: (self.quadrant % 2) * half + offset,
            y: (self.quadrant / 2) * half + offset,
            w: side,
            h: side,
            class_id: self.quadrant,
        }
    }
}

pub fn render_sample(s: &Sample) -> Result<Frame> {
    let mut f = Frame::new(s.size, s.size, Pixel::gray(s.background))?;
    let b = s.gt_box();
    f.fill_rect(b.x, b.y, b.w, b.h, Pixel::gray(s.foreground));
    Ok(f)
}

pub(crate) fn draw_samples(n: usize, seed: u64, size: u32) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let quadrant = rng.random_range(0..4u32);
            let background = rng.random_range(30..=60u8);
            let foreground = rng.random_range(180..=230u8);
            Sample {
                size,
                background,
                foreground,
                quadrant,
            }
        })
        .collect()
}

/// Paths written by [`gen_synthetic_dataset`].
#[derive(Debug, Clone)]
pub struct DatasetFiles {
    pub root: PathBuf,
    pub classification_manifest: PathBuf,
    pub detection_manifest: PathBuf,
    pub images: Vec<PathBuf>,
    pub samples: Vec<Sample>,
}

/// Writes `n` seeded synthetic images plus a classification and a detection
/// manifest into `out_dir`. Manifest paths are relative to `out_dir`.
pub fn gen_synthetic_dataset(n: usize, seed: u64, size: u32, out_dir: &Path) -> Result<DatasetFiles> {
    if n == 0 {
        return Err(LeapError::Range("dataset needs at least one image".into()));
    }
    if size < 16 {
        return Err(LeapError::Range(format!("image size {size} below the minimum of 16")));
    }
    fs::create_dir_all(out_dir.join(IMAGE_DIR))?;
    let samples = draw_samples(n, seed, size);
    let mut images = Vec::with_capacity(n);
    let mut cls = Vec::with_capacity(n);
    let mut det = Vec::with_capacity(n);
    for (i, s) in samples.iter().enumerate() {
        let rel = format!("{IMAGE_DIR}/sample_{i:06}.ppm");
        let path = out_dir.join(&rel);
        ppm::save(&render_sample(s)?, &path)?;
        images.push(path);
        cls.push(ManifestEntry::Classification {
            path: rel.clone(),
            label: s.quadrant as usize,
        });
        det.push(ManifestEntry::Detection {
            path: rel,
            boxes: vec![s.gt_box()],
        });
    }
    let classification_manifest = out_dir.join(CLASSIFICATION_MANIFEST);
    let detection_manifest = out_dir.join(DETECTION_MANIFEST);
    write_manifest(&classification_manifest, &cls)?;
    write_manifest(&detection_manifest, &det)?;
    Ok(DatasetFiles {
        root: out_dir.to_path_buf(),
        classification_manifest,
        detection_manifest,
        images,
        samples,
    })
}
