use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LeapError, Result};
use crate::eval::{darken, map_50_95, top_k_accuracy, EvalVariant, VariantTag, IOU_THRESHOLDS};
use crate::histeq::{equalize, ColorMode, HistEqConfig, TimingMode};
use crate::inference::{Backend, Detection, Prediction};
use crate::video::{ppm, Frame};

/// Ground-truth box in integer pixel units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GtBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    pub class_id: u32,
}

/// One manifest line: an image path with either a class label or boxes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum ManifestEntry {
    Classification { path: String, label: usize },
    Detection { path: String, boxes: Vec<GtBox> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    path: String,
    label: Option<usize>,
    boxes: Option<Vec<GtBox>>,
}

impl ManifestEntry {
    pub fn path(&self) -> &str {
        match self {
            ManifestEntry::Classification { path, .. } | ManifestEntry::Detection { path, .. } => path,
        }
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let raw: RawEntry = serde_json::from_str(line)?;
        match (raw.label, raw.boxes) {
            (Some(label), None) => Ok(ManifestEntry::Classification { path: raw.path, label }),
            (None, Some(boxes)) => Ok(ManifestEntry::Detection { path: raw.path, boxes }),
            _ => Err(LeapError::Consistency(format!(
                "manifest entry `{}` needs exactly one of label / boxes",
                raw.path
            ))),
        }
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let file = fs::File::open(path)?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(ManifestEntry::parse_line(&line)?);
    }
    Ok(out)
}

pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    for e in entries {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub color_mode: ColorMode,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            color_mode: ColorMode::LumaGain,
        }
    }
}

/// Enhancement settings recorded in every report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistEqUsed {
    pub timing_mode: TimingMode,
    pub color_mode: ColorMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub tag: VariantTag,
    pub darken_divisor: u32,
    pub top1: f64,
    pub top5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub task: String,
    pub backend: String,
    pub histeq: HistEqUsed,
    pub samples: usize,
    pub variants: Vec<AccuracyRow>,
}

impl AccuracyReport {
    pub fn row(&self, tag: VariantTag) -> Option<&AccuracyRow> {
        self.variants.iter().find(|r| r.tag == tag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRow {
    pub tag: VariantTag,
    pub darken_divisor: u32,
    pub map: f64,
    pub iou_thresholds: Vec<f64>,
    pub ap_per_threshold: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub task: String,
    pub backend: String,
    pub histeq: HistEqUsed,
    pub samples: usize,
    pub variants: Vec<MapRow>,
}

impl MapReport {
    pub fn row(&self, tag: VariantTag) -> Option<&MapRow> {
        self.variants.iter().find(|r| r.tag == tag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EvalReport {
    Accuracy(AccuracyReport),
    Map(MapReport),
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

fn transform(frame: &Frame, variant: &EvalVariant, color_mode: ColorMode) -> Result<Frame> {
    match variant.tag {
        VariantTag::Original => Ok(frame.clone()),
        VariantTag::Dark => darken(frame, variant.darken_divisor),
        VariantTag::DarkHisteq => {
            let dark = darken(frame, variant.darken_divisor)?;
            let cfg = HistEqConfig {
                color_mode,
                ..HistEqConfig::for_frame(&dark)
            };
            equalize(&dark, &cfg)
        }
    }
}

/// Scores `backend` on every variant of the manifest's images.
///
/// Each variant is evaluated independently on freshly transformed copies:
/// `original` as loaded, `dark` floor-divided, `dark_histeq` darkened then
/// equalized with the two-pass path. Manifest paths resolve against `base_dir`.
pub fn run_eval(
    entries: &[ManifestEntry],
    base_dir: &Path,
    variants: &[EvalVariant],
    backend: &dyn Backend,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let classification = matches!(entries.first(), Some(ManifestEntry::Classification { .. }));
    if entries
        .iter()
        .any(|e| matches!(e, ManifestEntry::Classification { .. }) != classification)
    {
        return Err(LeapError::Consistency("manifest mixes classification and detection entries".into()));
    }
    let frames = entries
        .iter()
        .map(|e| ppm::load(base_dir.join(e.path())))
        .collect::<Result<Vec<_>>>()?;
    let histeq = HistEqUsed {
        timing_mode: TimingMode::TwoPass,
        color_mode: opts.color_mode,
    };

    if classification {
        let labels: Vec<usize> = entries
            .iter()
            .map(|e| match e {
                ManifestEntry::Classification { label, .. } => *label,
                ManifestEntry::Detection { .. } => unreachable!(),
            })
            .collect();
        let mut rows = Vec::with_capacity(variants.len());
        for v in variants {
            let mut scores = Vec::with_capacity(frames.len());
            for f in &frames {
                match backend.predict(&transform(f, v, opts.color_mode)?)? {
                    Prediction::ClassScores { scores: s } => scores.push(s),
                    Prediction::Detections { .. } => {
                        return Err(LeapError::Consistency(format!(
                            "backend `{}` returned detections for a classification manifest",
                            backend.name()
                        )))
                    }
                }
            }
            rows.push(AccuracyRow {
                tag: v.tag,
                darken_divisor: v.darken_divisor,
                top1: top_k_accuracy(&scores, &labels, 1)?,
                top5: top_k_accuracy(&scores, &labels, 5)?,
            });
        }
        Ok(EvalReport::Accuracy(AccuracyReport {
            task: "classification".into(),
            backend: backend.name().into(),
            histeq,
            samples: frames.len(),
            variants: rows,
        }))
    } else {
        let gts: Vec<Vec<GtBox>> = entries
            .iter()
            .map(|e| match e {
                ManifestEntry::Detection { boxes, .. } => boxes.clone(),
                ManifestEntry::Classification { .. } => unreachable!(),
            })
            .collect();
        let mut rows = Vec::with_capacity(variants.len());
        for v in variants {
            let mut preds: Vec<Vec<Detection>> = Vec::with_capacity(frames.len());
            for f in &frames {
                match backend.predict(&transform(f, v, opts.color_mode)?)? {
                    Prediction::Detections { items } => preds.push(items),
                    Prediction::ClassScores { .. } => {
                        return Err(LeapError::Consistency(format!(
                            "backend `{}` returned class scores for a detection manifest",
                            backend.name()
                        )))
                    }
                }
            }
            let score = map_50_95(&preds, &gts)?;
            rows.push(MapRow {
                tag: v.tag,
                darken_divisor: v.darken_divisor,
                map: score.map,
                iou_thresholds: IOU_THRESHOLDS.to_vec(),
                ap_per_threshold: score.ap_per_threshold,
            });
        }
        Ok(EvalReport::Map(MapReport {
            task: "detection".into(),
            backend: backend.name().into(),
            histeq,
            samples: frames.len(),
            variants: rows,
        }))
    }
}
