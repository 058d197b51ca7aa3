//! ROC curve sweep and trapezoidal AUC.

use super::PipelineError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    /// Starts at (∞, 0, 0), then one point per distinct score descending;
    /// the final point is always (1, 1).
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Sweep thresholds over the distinct scores, descending. Samples sharing a
/// score enter together, which draws ties as diagonal segments; the
/// trapezoid rule then awards them half credit, matching the Mann–Whitney
/// statistic exactly. Needs at least one positive and one negative.
pub fn roc_curve(scores: &[f64], positive: &[bool]) -> Result<RocCurve, PipelineError> {
    if scores.len() != positive.len() {
        return Err(PipelineError::Format(format!(
            "{} scores vs {} labels",
            scores.len(),
            positive.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(PipelineError::Format("non-finite score".into()));
    }
    let p = positive.iter().filter(|&&b| b).count();
    let n = positive.len() - p;
    if p == 0 || n == 0 {
        return Err(PipelineError::DegenerateClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: s,
            fpr: fp as f64 / n as f64,
            tpr: tp as f64 / p as f64,
        });
    }

    let auc = points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum();
    Ok(RocCurve { points, auc })
}
