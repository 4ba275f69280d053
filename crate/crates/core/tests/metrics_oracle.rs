//! mAP engine against a brute-force re-derivation of the PR curve.

use leap_core::eval::{average_precision, iou, map_50_95, BoxF, GtBox, IOU_THRESHOLDS};
use leap_core::inference::Detection;
use proptest::prelude::*;

fn ap_oracle(preds: &[Vec<Detection>], gts: &[Vec<GtBox>], t: f64) -> f64 {
    let npos: usize = gts.iter().map(Vec::len).sum();
    if npos == 0 {
        return 0.0;
    }
    let mut ranked: Vec<(usize, usize)> = preds
        .iter()
        .enumerate()
        .flat_map(|(i, d)| (0..d.len()).map(move |j| (i, j)))
        .collect();
    ranked.sort_by(|a, b| preds[b.0][b.1].score.total_cmp(&preds[a.0][a.1].score));
    let mut taken: Vec<Vec<bool>> = gts.iter().map(|g| vec![false; g.len()]).collect();
    let (mut tp, mut points) = (0usize, Vec::new());
    for (k, &(i, j)) in ranked.iter().enumerate() {
        let d = &preds[i][j];
        let mut best: Option<(usize, f64)> = None;
        for (g, b) in gts[i].iter().enumerate() {
            let o = iou(BoxF::from(d), BoxF::from(b));
            if !taken[i][g] && o >= t && best.is_none_or(|(_, bo)| o > bo) {
                best = Some((g, o));
            }
        }
        if let Some((g, _)) = best {
            taken[i][g] = true;
            tp += 1;
        }
        points.push((tp as f64 / npos as f64, tp as f64 / (k + 1) as f64));
    }
    (0..=100)
        .map(|r| {
            points
                .iter()
                .filter(|(rec, _)| *rec >= r as f64 / 100.0)
                .map(|(_, p)| *p)
                .fold(0.0, f64::max)
        })
        .sum::<f64>()
        / 101.0
}

fn det(x: f64, y: f64, w: f64, h: f64, score: f64) -> Detection {
    Detection { x, y, w, h, class_id: 0, score }
}

#[test]
fn hand_built_pr_curve() {
    // FP ranked first, then a TP whose IoU with its GT is exactly 0.6
    let gts = vec![vec![GtBox { x: 0, y: 0, w: 10, h: 10, class_id: 0 }]];
    let preds = vec![vec![det(50.0, 50.0, 10.0, 10.0, 0.9), det(0.0, 0.0, 6.0, 10.0, 0.8)]];
    for &t in &IOU_THRESHOLDS {
        let want = if t <= 0.6 + 1e-9 { 0.5 } else { 0.0 };
        let got = average_precision(&preds, &gts, t).unwrap();
        assert!((got - want).abs() < 1e-12, "t={t}: {got}");
        assert!((got - ap_oracle(&preds, &gts, t)).abs() < 1e-12);
    }
    assert!((map_50_95(&preds, &gts).unwrap().map - 0.15).abs() < 1e-12);
}

fn gt_strategy() -> impl Strategy<Value = GtBox> {
    (0u32..24, 0u32..24, 2u32..12, 2u32..12).prop_map(|(x, y, w, h)| GtBox { x, y, w, h, class_id: 0 })
}

fn det_strategy() -> impl Strategy<Value = Detection> {
    (0u32..24, 0u32..24, 2u32..12, 2u32..12, 0.0f64..1.0)
        .prop_map(|(x, y, w, h, s)| det(x as f64, y as f64, w as f64, h as f64, s))
}

proptest! {
    #[test]
    fn matches_brute_force(
        images in prop::collection::vec(
            (prop::collection::vec(gt_strategy(), 1..4), prop::collection::vec(det_strategy(), 0..6)),
            1..5,
        )
    ) {
        let (gts, preds): (Vec<_>, Vec<_>) = images.into_iter().unzip();
        let mut sum = 0.0;
        for &t in &IOU_THRESHOLDS {
            let got = average_precision(&preds, &gts, t).unwrap();
            prop_assert!((got - ap_oracle(&preds, &gts, t)).abs() < 1e-9, "t={}", t);
            sum += got;
        }
        prop_assert!((map_50_95(&preds, &gts).unwrap().map - sum / 10.0).abs() < 1e-9);
    }
}
