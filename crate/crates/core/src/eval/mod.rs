//! Accuracy experiments: darken the input, optionally re-enhance it, and
//! score a backend on the result.

mod dataset;
mod harness;
mod map;
mod topk;

use serde::{Deserialize, Serialize};

use crate::error::{LeapError, Result};
use crate::video::Frame;

pub use dataset::{gen_synthetic_dataset, render_sample, DatasetFiles, Sample, CLASSIFICATION_MANIFEST, DETECTION_MANIFEST};
pub use harness::{
    read_manifest, run_eval, write_manifest, AccuracyReport, AccuracyRow, EvalOptions, EvalReport,
    GtBox, ManifestEntry, MapReport, MapRow,
};
pub use map::{average_precision, class_average_precision, iou, map_50_95, BoxF, IOU_THRESHOLDS, RECALL_POINTS};
pub use topk::top_k_accuracy;

pub const DEFAULT_DARKEN_DIVISOR: u32 = 8;

/// Floor-divides every channel by `divisor`.
pub fn darken(frame: &Frame, divisor: u32) -> Result<Frame> {
    if divisor == 0 {
        return Err(LeapError::Range("darken divisor must be at least 1".into()));
    }
    let d = divisor.min(256) as u16;
    Ok(frame.map_pixels(|p| crate::Pixel::new(
        (p.r as u16 / d) as u8,
        (p.g as u16 / d) as u8,
        (p.b as u16 / d) as u8,
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantTag {
    Original,
    Dark,
    DarkHisteq,
}

impl VariantTag {
    pub const ALL: [VariantTag; 3] = [VariantTag::Original, VariantTag::Dark, VariantTag::DarkHisteq];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantTag::Original => "original",
            VariantTag::Dark => "dark",
            VariantTag::DarkHisteq => "dark_histeq",
        }
    }
}

impl std::str::FromStr for VariantTag {
    type Err = LeapError;

    fn from_str(s: &str) -> Result<Self> {
        VariantTag::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| LeapError::Configuration(format!("unknown variant `{s}`")))
    }
}

/// One arm of the comparison: which transform to apply before inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalVariant {
    pub tag: VariantTag,
    pub darken_divisor: u32,
}

impl EvalVariant {
    pub fn new(tag: VariantTag, darken_divisor: u32) -> Result<Self> {
        if darken_divisor == 0 {
            return Err(LeapError::Range("darken divisor must be at least 1".into()));
        }
        Ok(EvalVariant { tag, darken_divisor })
    }

    /// The three standard arms with a shared divisor.
    pub fn standard(darken_divisor: u32) -> Result<Vec<Self>> {
        VariantTag::ALL
            .into_iter()
            .map(|t| EvalVariant::new(t, darken_divisor))
            .collect()
    }
}
