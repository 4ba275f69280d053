//! COCO-style average precision.

use serde::{Deserialize, Serialize};

use crate::error::{LeapError, Result};
use crate::eval::GtBox;
use crate::inference::Detection;

/// IoU thresholds 0.50, 0.55, ..., 0.95, derived from integer percents so
/// each value is the correctly rounded double of its decimal.
pub const IOU_THRESHOLDS: [f64; 10] = {
    let mut t = [0.0; 10];
    let mut i = 0;
    while i < 10 {
        t[i] = (50 + 5 * i) as f64 / 100.0;
        i += 1;
    }
    t
};

/// Number of recall sample points used for interpolation (0.00 to 1.00).
pub const RECALL_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxF {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoxF {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        BoxF { x, y, w, h }
    }
}

impl From<&Detection> for BoxF {
    fn from(d: &Detection) -> Self {
        BoxF::new(d.x, d.y, d.w, d.h)
    }
}

impl From<&GtBox> for BoxF {
    fn from(g: &GtBox) -> Self {
        BoxF::new(g.x as f64, g.y as f64, g.w as f64, g.h as f64)
    }
}

/// Intersection over union; degenerate boxes give 0.
pub fn iou(a: BoxF, b: BoxF) -> f64 {
    if a.w <= 0.0 || a.h <= 0.0 || b.w <= 0.0 || b.h <= 0.0 {
        return 0.0;
    }
    let iw = ((a.x + a.w).min(b.x + b.w) - a.x.max(b.x)).max(0.0);
    let ih = ((a.y + a.h).min(b.y + b.h) - a.y.max(b.y)).max(0.0);
    let inter = iw * ih;
    let union = a.w * a.h + b.w * b.h - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

fn check_lengths(preds: &[Vec<Detection>], gts: &[Vec<GtBox>]) -> Result<()> {
    if preds.len() != gts.len() {
        return Err(LeapError::Consistency(format!(
            "{} prediction lists for {} images",
            preds.len(),
            gts.len()
        )));
    }
    Ok(())
}

/// AP for one class at one IoU threshold, or `None` when the class has no
/// ground truth.
///
/// Detections are ranked by descending score across all images (equal
/// scores keep image order, then detection order). Each detection claims
/// the unmatched same-class box in its image with the highest IoU at or
/// above `threshold`, the lowest box index winning IoU ties. The result is
/// the mean over 101 recall points of the interpolated precision, i.e. the
/// best precision achieved at any recall at least that high.
pub fn class_average_precision(
    preds: &[Vec<Detection>],
    gts: &[Vec<GtBox>],
    threshold: f64,
    class: u32,
) -> Result<Option<f64>> {
    check_lengths(preds, gts)?;
    let npos: usize = gts
        .iter()
        .map(|g| g.iter().filter(|b| b.class_id == class).count())
        .sum();
    if npos == 0 {
        return Ok(None);
    }

    let mut ranked: Vec<(usize, &Detection)> = preds
        .iter()
        .enumerate()
        .flat_map(|(img, ds)| ds.iter().filter(|d| d.class_id == class).map(move |d| (img, d)))
        .collect();
    ranked.sort_by(|a, b| b.1.score.total_cmp(&a.1.score));

    let mut matched: Vec<Vec<bool>> = gts.iter().map(|g| vec![false; g.len()]).collect();
    let mut tp = 0usize;
    let mut curve = Vec::with_capacity(ranked.len());
    for (k, (img, det)) in ranked.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (gi, g) in gts[*img].iter().enumerate() {
            if g.class_id != class || matched[*img][gi] {
                continue;
            }
            let o = iou(BoxF::from(*det), BoxF::from(g));
            if o >= threshold && best.is_none_or(|(_, b)| o > b) {
                best = Some((gi, o));
            }
        }
        if let Some((gi, _)) = best {
            matched[*img][gi] = true;
            tp += 1;
        }
        let recall = tp as f64 / npos as f64;
        let precision = tp as f64 / (k + 1) as f64;
        curve.push((recall, precision));
    }

    // right-to-left running max gives the interpolated precision envelope
    let mut envelope = curve.clone();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i].1 = envelope[i].1.max(envelope[i + 1].1);
    }
    let mut sum = 0.0;
    for r in 0..RECALL_POINTS {
        let level = r as f64 / 100.0;
        if let Some(&(_, p)) = envelope.iter().find(|(rec, _)| *rec >= level) {
            sum += p;
        }
    }
    Ok(Some(sum / RECALL_POINTS as f64))
}

fn gt_classes(gts: &[Vec<GtBox>]) -> Vec<u32> {
    let mut classes: Vec<u32> = gts.iter().flatten().map(|g| g.class_id).collect();
    classes.sort_unstable();
    classes.dedup();
    classes
}

/// AP at one IoU threshold, averaged over the classes present in the
/// ground truth. No ground truth at all scores 0.
pub fn average_precision(preds: &[Vec<Detection>], gts: &[Vec<GtBox>], threshold: f64) -> Result<f64> {
    let classes = gt_classes(gts);
    if classes.is_empty() {
        check_lengths(preds, gts)?;
        return Ok(0.0);
    }
    let mut total = 0.0;
    for &c in &classes {
        total += class_average_precision(preds, gts, threshold, c)?.unwrap_or(0.0);
    }
    Ok(total / classes.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapScore {
    pub map: f64,
    pub ap_per_threshold: Vec<f64>,
}

/// Mean of [`average_precision`] over the ten thresholds 0.50:0.05:0.95.
pub fn map_50_95(preds: &[Vec<Detection>], gts: &[Vec<GtBox>]) -> Result<MapScore> {
    let ap_per_threshold = IOU_THRESHOLDS
        .iter()
        .map(|&t| average_precision(preds, gts, t))
        .collect::<Result<Vec<_>>>()?;
    let map = ap_per_threshold.iter().sum::<f64>() / IOU_THRESHOLDS.len() as f64;
    Ok(MapScore { map, ap_per_threshold })
}
