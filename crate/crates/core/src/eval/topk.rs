use crate::error::{LeapError, Result};

/// 0-based rank of `label` in `scores`, counting ties against higher class ids.
fn rank_of(scores: &[f64], label: usize) -> Option<usize> {
    let s = *scores.get(label)?;
    Some(
        scores
            .iter()
            .enumerate()
            .filter(|&(i, &v)| v > s || (v == s && i < label))
            .count(),
    )
}

/// Fraction of samples whose label is among the `k` best-scoring classes.
///
/// Equal scores rank the lower class id first. A label outside the score
/// vector never counts as a hit. An empty sample set scores 0.
pub fn top_k_accuracy(preds: &[Vec<f64>], labels: &[usize], k: usize) -> Result<f64> {
    if preds.len() != labels.len() {
        return Err(LeapError::Consistency(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    if k == 0 {
        return Err(LeapError::Range("k must be at least 1".into()));
    }
    if preds.is_empty() {
        return Ok(0.0);
    }
    let hits = preds
        .iter()
        .zip(labels)
        .filter(|(scores, &label)| rank_of(scores, label).is_some_and(|r| r < k))
        .count();
    Ok(hits as f64 / preds.len() as f64)
}
