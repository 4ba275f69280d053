//! Inference backends and result overlay.
//!
//! A backend splits inference into preprocess, infer and postprocess so the
//! scheduler can time and pipeline the three steps separately.

mod mock;
mod overlay;
mod toy;

use serde::{Deserialize, Serialize};

use crate::error::{LeapError, Result};
use crate::video::Frame;

pub use mock::{simulate_work, MockBackend, MockConfig};
pub use overlay::{overlay, BADGE_SIZE, BORDER_THICKNESS, PALETTE};
pub use toy::{
    classify_quadrant, detect_bright_square, quadrant_contrasts, BrightSquareDetector,
    QuadrantClassifier, NONE_CLASS, QUADRANT_CLASSES,
};

/// Dense numeric payload with a shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if expected != data.len() {
            return Err(LeapError::Consistency(format!(
                "tensor of shape {dims:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor { dims, data })
    }

    /// `[height, width]` plane of pixel lumas.
    pub fn luma_plane(frame: &Frame) -> Self {
        Tensor {
            dims: vec![frame.height() as usize, frame.width() as usize],
            data: frame.pixels().iter().map(|&p| crate::luma(p) as f32).collect(),
        }
    }

    pub fn empty() -> Self {
        Tensor {
            dims: vec![0],
            data: Vec::new(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }
}

/// Backend output before postprocessing.
#[derive(Debug, Clone, PartialEq)]
pub enum RawOutput {
    Tensor(Tensor),
    Decoded(Prediction),
}

/// One detected box, pixel units, top-left origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub class_id: u32,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prediction {
    ClassScores { scores: Vec<f64> },
    Detections { items: Vec<Detection> },
}

impl Prediction {
    /// Highest-scoring class; ties go to the lower class id.
    pub fn argmax(&self) -> Option<usize> {
        match self {
            Prediction::ClassScores { scores } => argmax(scores),
            Prediction::Detections { .. } => None,
        }
    }

    pub fn one_hot(classes: usize, class: usize) -> Self {
        let mut scores = vec![0.0; classes];
        if class < classes {
            scores[class] = 1.0;
        }
        Prediction::ClassScores { scores }
    }
}

pub(crate) fn argmax(scores: &[f64]) -> Option<usize> {
    scores
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &s)| match best {
            Some((_, b)) if b >= s => best,
            _ => Some((i, s)),
        })
        .map(|(i, _)| i)
}

/// An inference engine. Implementations are immutable after construction
/// so one instance can serve several workers.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    /// Fixed input resolution, or `None` to run at the frame's own size.
    fn input_size(&self) -> Option<(u32, u32)>;

    fn preprocess(&self, frame: &Frame) -> Result<Tensor>;

    fn infer(&self, input: &Tensor) -> Result<RawOutput>;

    fn postprocess(&self, raw: RawOutput) -> Result<Prediction>;

    fn predict(&self, frame: &Frame) -> Result<Prediction> {
        let t = self.preprocess(frame)?;
        let raw = self.infer(&t)?;
        self.postprocess(raw)
    }
}
