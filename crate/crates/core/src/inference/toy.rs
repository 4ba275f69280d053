//! Deterministic stand-ins for a classifier and a detector.
//!
//! Both key on how far a bright region stands out from the rest of the
//! frame, so darkening the input makes them fail and equalization brings
//! them back.

use crate::error::{LeapError, Result};
use crate::inference::{Backend, Detection, Prediction, RawOutput, Tensor};
use crate::video::{resize_nearest, Frame};

/// Quadrant classes are 0 = top-left, 1 = top-right, 2 = bottom-left, 3 = bottom-right.
pub const QUADRANT_CLASSES: usize = 4;
/// Class reported when no quadrant stands out.
pub const NONE_CLASS: usize = 4;

fn plane_shape(t: &Tensor) -> Result<(usize, usize)> {
    match *t.dims() {
        [h, w] => Ok((w, h)),
        _ => Err(LeapError::Consistency(format!(
            "expected a [height, width] plane, got {:?}",
            t.dims()
        ))),
    }
}

#[inline]
fn quadrant_of(x: usize, y: usize, w: usize, h: usize) -> usize {
    (y >= h / 2) as usize * 2 + (x >= w / 2) as usize
}

/// Per-quadrant contrast of a luma plane: the quadrant's mean luma minus the
/// mean luma of all pixels outside it. `None` for planes smaller than 2×2.
pub fn quadrant_contrasts(plane: &Tensor) -> Result<Option<[f64; 4]>> {
    let (w, h) = plane_shape(plane)?;
    if w < 2 || h < 2 {
        return Ok(None);
    }
    let mut sums = [0u64; 4];
    let mut counts = [0u64; 4];
    for (i, &v) in plane.data().iter().enumerate() {
        let q = quadrant_of(i % w, i / w, w, h);
        sums[q] += v as u64;
        counts[q] += 1;
    }
    let total_sum: u64 = sums.iter().sum();
    let total_count = (w * h) as u64;
    let mut out = [0.0; 4];
    for q in 0..4 {
        let inside = sums[q] as f64 / counts[q] as f64;
        let outside = (total_sum - sums[q]) as f64 / (total_count - counts[q]) as f64;
        out[q] = inside - outside;
    }
    Ok(Some(out))
}

fn scores_from_contrasts(contrasts: Option<[f64; 4]>, threshold: f64) -> Vec<f64> {
    let mut scores = vec![0.0; QUADRANT_CLASSES + 1];
    let Some(c) = contrasts else {
        scores[NONE_CLASS] = 1.0;
        return scores;
    };
    let best = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if best < threshold {
        scores[NONE_CLASS] = 1.0;
        return scores;
    }
    let positive: f64 = c.iter().map(|v| v.max(0.0)).sum();
    for q in 0..QUADRANT_CLASSES {
        scores[q] = c[q].max(0.0) / positive;
    }
    scores
}

/// Five-way quadrant classifier.
///
/// A quadrant wins when its contrast (see [`quadrant_contrasts`]) reaches
/// `threshold`; otherwise the "none" class takes all the mass. Scores sum to 1.
#[derive(Debug, Clone)]
pub struct QuadrantClassifier {
    pub threshold: f64,
    pub input_size: Option<(u32, u32)>,
}

impl QuadrantClassifier {
    pub fn new(threshold: f64) -> Self {
        QuadrantClassifier {
            threshold,
            input_size: None,
        }
    }
}

impl Backend for QuadrantClassifier {
    fn name(&self) -> &str {
        "quadrant"
    }

    fn input_size(&self) -> Option<(u32, u32)> {
        self.input_size
    }

    fn preprocess(&self, frame: &Frame) -> Result<Tensor> {
        match self.input_size {
            Some((w, h)) if frame.dimensions() != (w, h) => {
                Ok(Tensor::luma_plane(&resize_nearest(frame, w, h)?))
            }
            _ => Ok(Tensor::luma_plane(frame)),
        }
    }

    fn infer(&self, input: &Tensor) -> Result<RawOutput> {
        let data = match quadrant_contrasts(input)? {
            Some(c) => c.iter().map(|&v| v as f32).collect(),
            None => Vec::new(),
        };
        Ok(RawOutput::Tensor(Tensor::new(vec![data.len()], data)?))
    }

    fn postprocess(&self, raw: RawOutput) -> Result<Prediction> {
        match raw {
            RawOutput::Tensor(t) => {
                let contrasts = match t.data() {
                    [a, b, c, d] => Some([*a as f64, *b as f64, *c as f64, *d as f64]),
                    [] => None,
                    other => {
                        return Err(LeapError::Consistency(format!(
                            "expected 4 contrasts, got {}",
                            other.len()
                        )))
                    }
                };
                Ok(Prediction::ClassScores {
                    scores: scores_from_contrasts(contrasts, self.threshold),
                })
            }
            RawOutput::Decoded(p) => Ok(p),
        }
    }

    // contrasts are computed in f64 directly so no f32 rounding can move a
    // borderline frame across the threshold
    fn predict(&self, frame: &Frame) -> Result<Prediction> {
        let plane = self.preprocess(frame)?;
        Ok(Prediction::ClassScores {
            scores: scores_from_contrasts(quadrant_contrasts(&plane)?, self.threshold),
        })
    }
}

pub fn classify_quadrant(frame: &Frame, contrast_threshold: f64) -> Vec<f64> {
    scores_from_contrasts(
        quadrant_contrasts(&Tensor::luma_plane(frame)).expect("luma plane is two-dimensional"),
        contrast_threshold,
    )
}

fn bright_square(plane: &Tensor, k: f64) -> Result<Option<Detection>> {
    let (w, h) = plane_shape(plane)?;
    let data = plane.data();
    let mean = data.iter().map(|&v| v as f64).sum::<f64>() / data.len() as f64;
    let cut = mean + k;
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    let (mut hits, mut hit_sum) = (0u64, 0f64);
    for (i, &v) in data.iter().enumerate() {
        if (v as f64) > cut {
            let (x, y) = (i % w, i / w);
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            hits += 1;
            hit_sum += v as f64;
        }
    }
    if hits == 0 {
        return Ok(None);
    }
    let contrast = hit_sum / hits as f64 - mean;
    let (bw, bh) = (x1 - x0 + 1, y1 - y0 + 1);
    // class by the quadrant holding the box center
    let cx2 = x0 + x1;
    let cy2 = y0 + y1;
    let class_id = ((cy2 >= h) as u32) * 2 + (cx2 >= w) as u32;
    Ok(Some(Detection {
        x: x0 as f64,
        y: y0 as f64,
        w: bw as f64,
        h: bh as f64,
        class_id,
        score: (contrast / 255.0).clamp(0.0, 1.0),
    }))
}

/// Single-object detector: bounding box of every pixel brighter than the
/// global mean luma plus `k`.
pub fn detect_bright_square(frame: &Frame, k: f64) -> Vec<Detection> {
    bright_square(&Tensor::luma_plane(frame), k)
        .expect("luma plane is two-dimensional")
        .into_iter()
        .collect()
}

#[derive(Debug, Clone)]
pub struct BrightSquareDetector {
    pub k: f64,
}

impl BrightSquareDetector {
    pub fn new(k: f64) -> Self {
        BrightSquareDetector { k }
    }
}

impl Backend for BrightSquareDetector {
    fn name(&self) -> &str {
        "square"
    }

    fn input_size(&self) -> Option<(u32, u32)> {
        None
    }

    fn preprocess(&self, frame: &Frame) -> Result<Tensor> {
        Ok(Tensor::luma_plane(frame))
    }

    // boxes stay in f64; an f32 tensor round trip would perturb the scores
    fn infer(&self, input: &Tensor) -> Result<RawOutput> {
        Ok(RawOutput::Decoded(Prediction::Detections {
            items: bright_square(input, self.k)?.into_iter().collect(),
        }))
    }

    fn postprocess(&self, raw: RawOutput) -> Result<Prediction> {
        match raw {
            RawOutput::Decoded(p) => Ok(p),
            RawOutput::Tensor(_) => Err(LeapError::Consistency("detector expects decoded boxes".into())),
        }
    }

    fn predict(&self, frame: &Frame) -> Result<Prediction> {
        Ok(Prediction::Detections {
            items: detect_bright_square(frame, self.k),
        })
    }
}
