//! Binary classification metrics. Class 1 is the positive class.
//!
//! Metrics with a zero denominator are `None` rather than 0, so degenerate
//! cells stay visible in reports.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("label {0} is not 0 or 1")]
    NonBinaryLabel(u8),
    #[error("only one class present in y_true")]
    SingleClass,
    #[error("score at position {0} is not finite")]
    NonFiniteScore(usize),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn check_pair(y_true: &[u8], y_pred: &[u8]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if let Some(&bad) = y_true.iter().chain(y_pred).find(|&&v| v > 1) {
        return Err(MetricsError::NonBinaryLabel(bad));
    }
    Ok(())
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionCounts> {
    check_pair(y_true, y_pred)?;
    let mut c = ConfusionCounts::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => c.tp += 1,
            (0, 1) => c.fp += 1,
            (0, 0) => c.tn += 1,
            _ => c.fn_ += 1,
        }
    }
    Ok(c)
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn accuracy(c: &ConfusionCounts) -> Option<f64> {
    ratio(c.tp + c.tn, c.total())
}

pub fn precision(c: &ConfusionCounts) -> Option<f64> {
    ratio(c.tp, c.tp + c.fp)
}

pub fn recall(c: &ConfusionCounts) -> Option<f64> {
    ratio(c.tp, c.tp + c.fn_)
}

pub fn f1(c: &ConfusionCounts) -> Option<f64> {
    let (p, r) = (precision(c)?, recall(c)?);
    (p + r > 0.0).then(|| 2.0 * p * r / (p + r))
}

/// Rank-based (Mann-Whitney) AUC with midranks for tied scores.
pub fn roc_auc(y_true: &[u8], scores: &[f64]) -> Result<f64> {
    if y_true.len() != scores.len() {
        return Err(MetricsError::LengthMismatch(y_true.len(), scores.len()));
    }
    if let Some(&bad) = y_true.iter().find(|&&v| v > 1) {
        return Err(MetricsError::NonBinaryLabel(bad));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore(i));
    }
    let n_pos = y_true.iter().filter(|&&y| y == 1).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // ranks are 1-based; a tie group spanning positions i..j gets (i+1+j)/2
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = order[i..j].iter().filter(|&&k| y_true[k] == 1).count();
        rank_sum_pos += midrank * pos_in_group as f64;
        i = j;
    }
    let (np, nn) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn))
}

/// Cohen's kappa; `None` when chance agreement is 1.
pub fn cohen_kappa(y_true: &[u8], y_pred: &[u8]) -> Result<Option<f64>> {
    let c = confusion(y_true, y_pred)?;
    let n = c.total() as f64;
    let p_o = (c.tp + c.tn) as f64 / n;
    let true_pos = (c.tp + c.fn_) as f64 / n;
    let pred_pos = (c.tp + c.fp) as f64 / n;
    let p_e = true_pos * pred_pos + (1.0 - true_pos) * (1.0 - pred_pos);
    if p_e >= 1.0 {
        return Ok(None);
    }
    Ok(Some((p_o - p_e) / (1.0 - p_e)))
}

/// Hard labels from probabilities: `p >= threshold` maps to 1.
pub fn threshold_scores(scores: &[f64], threshold: f64) -> Vec<u8> {
    scores.iter().map(|&s| u8::from(s >= threshold)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub roc_auc: Option<f64>,
    pub kappa: Option<f64>,
    pub threshold: f64,
    pub confusion: ConfusionCounts,
}

impl MetricReport {
    /// Evaluates probability scores against truth at `threshold`.
    pub fn evaluate(y_true: &[u8], scores: &[f64], threshold: f64) -> Result<Self> {
        let y_pred = threshold_scores(scores, threshold);
        let c = confusion(y_true, &y_pred)?;
        let roc_auc = match roc_auc(y_true, scores) {
            Ok(v) => Some(v),
            Err(MetricsError::SingleClass) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            accuracy: accuracy(&c),
            precision: precision(&c),
            recall: recall(&c),
            f1: f1(&c),
            roc_auc,
            kappa: cohen_kappa(y_true, &y_pred)?,
            threshold,
            confusion: c,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_examples() {
        let c = confusion(&[1, 0], &[1, 0]).unwrap();
        assert_eq!(c, ConfusionCounts { tp: 1, fp: 0, tn: 1, fn_: 0 });
        let c = confusion(&[1, 1], &[0, 0]).unwrap();
        assert_eq!(c.fn_, 2);
        assert_eq!(confusion(&[1], &[1, 0]), Err(MetricsError::LengthMismatch(1, 2)));
        assert_eq!(confusion(&[], &[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn ratio_metrics() {
        let perfect = ConfusionCounts { tp: 1, tn: 1, fp: 0, fn_: 0 };
        for m in [accuracy(&perfect), precision(&perfect), recall(&perfect), f1(&perfect)] {
            assert_eq!(m, Some(1.0));
        }
        let none_pred = ConfusionCounts { tp: 0, fp: 0, tn: 3, fn_: 1 };
        assert_eq!(precision(&none_pred), None);
        assert_eq!(f1(&none_pred), None);

        let c = ConfusionCounts { tp: 3, fp: 1, fn_: 2, tn: 4 };
        assert_eq!(precision(&c), Some(0.75));
        assert_eq!(recall(&c), Some(0.6));
        assert!((f1(&c).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn auc_examples() {
        assert_eq!(roc_auc(&[0, 0, 1, 1], &[0.1, 0.2, 0.8, 0.9]).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0, 1, 0, 1], &[0.3; 4]).unwrap(), 0.5);
        assert_eq!(roc_auc(&[1, 1], &[0.3, 0.4]), Err(MetricsError::SingleClass));
        assert_eq!(
            roc_auc(&[1, 0], &[f64::NAN, 0.4]),
            Err(MetricsError::NonFiniteScore(0))
        );
        // one positive tied with one of two negatives: (1 + 0.5) / 2
        assert_eq!(roc_auc(&[1, 0, 0], &[0.5, 0.5, 0.1]).unwrap(), 0.75);
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(cohen_kappa(&[1, 0, 1, 0], &[1, 0, 1, 0]).unwrap(), Some(1.0));
        assert_eq!(cohen_kappa(&[1, 0, 1, 0], &[0, 1, 0, 1]).unwrap(), Some(-1.0));
        // p_o = 0.5 = p_e
        assert_eq!(cohen_kappa(&[1, 0, 1, 0], &[1, 1, 1, 1]).unwrap(), Some(0.0));
        // everything one class on both sides: p_e = 1
        assert_eq!(cohen_kappa(&[1, 1], &[1, 1]).unwrap(), None);
    }

    #[test]
    fn report_flags_undefined() {
        let r = MetricReport::evaluate(&[1, 0, 1, 0], &[0.1, 0.2, 0.3, 0.4], 0.5).unwrap();
        assert_eq!(r.precision, None);
        assert_eq!(r.recall, Some(0.0));
        assert_eq!(r.accuracy, Some(0.5));
        assert_eq!(r.roc_auc, Some(0.25));
        assert_eq!(r.threshold, 0.5);
    }
}
