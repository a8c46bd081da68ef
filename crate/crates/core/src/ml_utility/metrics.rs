use log::warn;
use serde::{Deserialize, Serialize};

use crate::similarity::average_ranks;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierMetrics {
    pub accuracy: f64,
    pub f1: f64,
    /// Absent when the evaluation set holds a single class.
    pub auc: Option<f64>,
}

/// Area under the ROC curve from the rank-sum statistic, ties sharing
/// average ranks. `None` without both classes.
pub fn auc(positive: &[bool], scores: &[f64]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks.iter().zip(positive).filter(|(_, &p)| p).map(|(r, _)| r).sum();
    let (p, q) = (n_pos as f64, n_neg as f64);
    Some((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

/// F1 score from predicted and actual membership of one class.
pub fn f1(actual: &[bool], predicted: &[bool]) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&a, &p) in actual.iter().zip(predicted) {
        match (a, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            _ => {}
        }
    }
    if tp == 0 {
        return 0.0;
    }
    2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
}

/// Accuracy and F1 at threshold 0.5 plus AUC, for positive-class scores.
pub fn binary_metrics(positive: &[bool], scores: &[f64]) -> ClassifierMetrics {
    let predicted: Vec<bool> = scores.iter().map(|&s| s >= 0.5).collect();
    let correct = predicted.iter().zip(positive).filter(|(a, b)| a == b).count();
    let auc = auc(positive, scores);
    if auc.is_none() {
        warn!("evaluation set holds a single class; AUC left out");
    }
    ClassifierMetrics {
        accuracy: correct as f64 / positive.len().max(1) as f64,
        f1: f1(positive, &predicted),
        auc,
    }
}

/// Arg-max accuracy, macro F1 and macro one-vs-rest AUC over the classes
/// that appear in `labels`.
pub fn multiclass_metrics(labels: &[usize], scores: &[Vec<f64>], n_classes: usize) -> ClassifierMetrics {
    let predicted: Vec<usize> = scores
        .iter()
        .map(|s| {
            let mut best = 0;
            for (i, v) in s.iter().enumerate() {
                if *v > s[best] {
                    best = i;
                }
            }
            best
        })
        .collect();
    let correct = predicted.iter().zip(labels).filter(|(a, b)| a == b).count();
    let (mut f1_sum, mut f1_n) = (0.0, 0usize);
    let (mut auc_sum, mut auc_n) = (0.0, 0usize);
    for c in 0..n_classes {
        let actual: Vec<bool> = labels.iter().map(|&l| l == c).collect();
        if !actual.contains(&true) {
            continue;
        }
        let pred: Vec<bool> = predicted.iter().map(|&p| p == c).collect();
        f1_sum += f1(&actual, &pred);
        f1_n += 1;
        let class_scores: Vec<f64> = scores.iter().map(|s| s[c]).collect();
        if let Some(a) = auc(&actual, &class_scores) {
            auc_sum += a;
            auc_n += 1;
        }
    }
    if auc_n == 0 {
        warn!("evaluation set holds a single class; AUC left out");
    }
    ClassifierMetrics {
        accuracy: correct as f64 / labels.len().max(1) as f64,
        f1: if f1_n == 0 { 0.0 } else { f1_sum / f1_n as f64 },
        auc: (auc_n > 0).then(|| auc_sum / auc_n as f64),
    }
}
