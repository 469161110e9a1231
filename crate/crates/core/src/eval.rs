//! Precision-recall, ROC, AUC and F-measure against ground-truth masks.
//!
//! Curves are sampled at the 256 thresholds `t = k / 255`, a pixel being
//! predicted salient when its map value is strictly greater than `t`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::adaptive_threshold;
use crate::raster::{BinaryMask, SaliencyMap};

pub const THRESHOLD_COUNT: usize = 256;

/// The `k`-th sweep threshold, `k / 255`.
pub fn threshold(k: usize) -> f64 {
    k as f64 / 255.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `tp / (tp + fp)`; an empty prediction is vacuously precise (1).
    pub fn precision(&self) -> f64 {
        ratio_or_one(self.tp, self.tp + self.fp)
    }

    /// `tp / (tp + fn)`; with no positives in the ground truth nothing can be
    /// missed (1).
    pub fn recall(&self) -> f64 {
        ratio_or_one(self.tp, self.tp + self.fn_)
    }

    /// `fp / (fp + tn)`, `None` when the ground truth has no negatives.
    pub fn fpr(&self) -> Option<f64> {
        let neg = self.fp + self.tn;
        (neg > 0).then(|| self.fp as f64 / neg as f64)
    }

    /// Same as recall, `None` when the ground truth has no positives.
    pub fn tpr(&self) -> Option<f64> {
        let pos = self.tp + self.fn_;
        (pos > 0).then(|| self.tp as f64 / pos as f64)
    }
}

fn ratio_or_one(num: u64, den: u64) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

fn check_dims(map: &SaliencyMap, gt: &BinaryMask) -> Result<()> {
    if map.dims() != gt.dims() {
        return Err(Error::ShapeMismatch {
            expected: gt.dims(),
            actual: map.dims(),
        });
    }
    Ok(())
}

pub fn confusion_at_threshold(map: &SaliencyMap, gt: &BinaryMask, t: f64) -> Result<ConfusionCounts> {
    check_dims(map, gt)?;
    let mut c = ConfusionCounts::default();
    for (&v, &truth) in map.values().iter().zip(gt.values()) {
        match (v > t, truth) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Number of sweep thresholds strictly below `v`.
fn thresholds_below(v: f64) -> usize {
    let mut g = (v * 255.0).ceil().clamp(0.0, THRESHOLD_COUNT as f64) as usize;
    while g > 0 && threshold(g - 1) >= v {
        g -= 1;
    }
    while g < THRESHOLD_COUNT && threshold(g) < v {
        g += 1;
    }
    g
}

/// Confusion counts at all 256 thresholds from one pass over the pixels.
pub fn sweep(map: &SaliencyMap, gt: &BinaryMask) -> Result<Vec<ConfusionCounts>> {
    check_dims(map, gt)?;
    // hist[g] counts pixels predicted positive exactly for thresholds k < g.
    let mut pos_hist = [0u64; THRESHOLD_COUNT + 1];
    let mut neg_hist = [0u64; THRESHOLD_COUNT + 1];
    for (&v, &truth) in map.values().iter().zip(gt.values()) {
        let g = thresholds_below(v);
        if truth {
            pos_hist[g] += 1;
        } else {
            neg_hist[g] += 1;
        }
    }
    let positives: u64 = pos_hist.iter().sum();
    let negatives: u64 = neg_hist.iter().sum();
    let mut out = vec![ConfusionCounts::default(); THRESHOLD_COUNT];
    let (mut tp, mut fp) = (0u64, 0u64);
    for k in (0..THRESHOLD_COUNT).rev() {
        tp += pos_hist[k + 1];
        fp += neg_hist[k + 1];
        out[k] = ConfusionCounts {
            tp,
            fp,
            tn: negatives - fp,
            fn_: positives - tp,
        };
    }
    Ok(out)
}

/// `(precision, recall)` per threshold, ascending in `t`.
pub fn pr_curve(map: &SaliencyMap, gt: &BinaryMask) -> Result<Vec<(f64, f64)>> {
    Ok(sweep(map, gt)?
        .iter()
        .map(|c| (c.precision(), c.recall()))
        .collect())
}

fn degenerate(gt: &BinaryMask) -> Option<bool> {
    let count = gt.count();
    if count == 0 {
        Some(false)
    } else if count == gt.values().len() {
        Some(true)
    } else {
        None
    }
}

/// `(fpr, tpr)` per threshold, ascending in `t`.
pub fn roc_curve(map: &SaliencyMap, gt: &BinaryMask) -> Result<Vec<(f64, f64)>> {
    check_dims(map, gt)?;
    if let Some(all) = degenerate(gt) {
        return Err(Error::DegenerateGroundTruth(all));
    }
    Ok(sweep(map, gt)?
        .iter()
        .map(|c| (c.fpr().unwrap_or(0.0), c.tpr().unwrap_or(0.0)))
        .collect())
}

/// Trapezoidal area under the ROC points with `(0,0)` and `(1,1)` appended.
pub fn auc(roc_points: &[(f64, f64)]) -> f64 {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(roc_points.len() + 2);
    pts.push((0.0, 0.0));
    pts.extend_from_slice(roc_points);
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * 0.5)
        .sum()
}

/// `(1 + b2) P R / (b2 P + R)`, 0 when the denominator vanishes.
pub fn f_measure(precision: f64, recall: f64, beta_squared: f64) -> f64 {
    let den = beta_squared * precision + recall;
    if den == 0.0 {
        0.0
    } else {
        (1.0 + beta_squared) * precision * recall / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub beta_squared: f64,
    /// Multiplier of the adaptive threshold used for `f_at_adaptive`.
    pub kappa: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            beta_squared: 0.3,
            kappa: 2.0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_squared > 0.0 && self.beta_squared.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta_squared must be positive, got {}",
                self.beta_squared
            )));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// One map/ground-truth pair to score.
#[derive(Debug, Clone)]
pub struct EvalPair {
    pub id: String,
    pub map: SaliencyMap,
    pub gt: BinaryMask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMetrics {
    pub id: String,
    /// `None` when the ground truth is all-true or all-false.
    pub auc: Option<f64>,
    pub max_f: f64,
    pub f_at_adaptive: f64,
    pub degenerate_gt: bool,
    pub pr_points: Vec<(f64, f64)>,
    /// `None` for degenerate ground truth.
    pub roc_points: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    /// Mean over images with non-degenerate ground truth.
    pub auc: Option<f64>,
    pub max_f: f64,
    pub f_at_adaptive: f64,
    pub images: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub beta_squared: f64,
    pub kappa: f64,
    pub per_image: Vec<ImageMetrics>,
    pub aggregate: AggregateMetrics,
    pub excluded_from_auc: Vec<String>,
}

pub fn evaluate_image(pair: &EvalPair, cfg: &EvalConfig) -> Result<ImageMetrics> {
    let counts = sweep(&pair.map, &pair.gt)?;
    let pr_points: Vec<(f64, f64)> = counts.iter().map(|c| (c.precision(), c.recall())).collect();
    let max_f = pr_points
        .iter()
        .map(|&(p, r)| f_measure(p, r, cfg.beta_squared))
        .fold(0.0, f64::max);
    let t = adaptive_threshold(&pair.map, cfg.kappa);
    let at = confusion_at_threshold(&pair.map, &pair.gt, t)?;
    let f_at_adaptive = f_measure(at.precision(), at.recall(), cfg.beta_squared);
    let degenerate_gt = degenerate(&pair.gt).is_some();
    let roc_points = (!degenerate_gt).then(|| {
        counts
            .iter()
            .map(|c| (c.fpr().unwrap_or(0.0), c.tpr().unwrap_or(0.0)))
            .collect::<Vec<_>>()
    });
    Ok(ImageMetrics {
        id: pair.id.clone(),
        auc: roc_points.as_deref().map(auc),
        max_f,
        f_at_adaptive,
        degenerate_gt,
        pr_points,
        roc_points,
    })
}

/// Scores every pair and averages, in id order.
pub fn evaluate_dataset(pairs: &[EvalPair], cfg: &EvalConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut order: Vec<&EvalPair> = pairs.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let per_image = order
        .into_iter()
        .map(|p| evaluate_image(p, cfg))
        .collect::<Result<Vec<_>>>()?;
    let n = per_image.len() as f64;
    let aucs: Vec<f64> = per_image.iter().filter_map(|m| m.auc).collect();
    let aggregate = AggregateMetrics {
        auc: (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64),
        max_f: per_image.iter().map(|m| m.max_f).sum::<f64>() / n,
        f_at_adaptive: per_image.iter().map(|m| m.f_at_adaptive).sum::<f64>() / n,
        images: per_image.len(),
    };
    let excluded_from_auc = per_image
        .iter()
        .filter(|m| m.degenerate_gt)
        .map(|m| m.id.clone())
        .collect();
    Ok(MetricsReport {
        beta_squared: cfg.beta_squared,
        kappa: cfg.kappa,
        per_image,
        aggregate,
        excluded_from_auc,
    })
}

pub const CSV_HEADER: &str = "threshold,precision,recall,fpr,tpr";

/// One row per threshold; undefined rates are left empty.
pub fn curves_csv(map: &SaliencyMap, gt: &BinaryMask) -> Result<String> {
    let mut out = String::with_capacity(64 * THRESHOLD_COUNT);
    out.push_str(CSV_HEADER);
    out.push('\n');
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (k, c) in sweep(map, gt)?.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            threshold(k),
            c.precision(),
            c.recall(),
            opt(c.fpr()),
            opt(c.tpr())
        );
    }
    Ok(out)
}
