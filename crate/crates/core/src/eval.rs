//! Segmentation and opening-detection metrics.

use std::fmt::Write as _;

use serde::Serialize;

use crate::cloud::{PointCloud, SemanticLabel, LABEL_COUNT};
use crate::error::{Error, Result};
use crate::shape::BBox;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelScores {
    pub label: &'static str,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegMetrics {
    /// Rows are truth, columns prediction, both in label-id order.
    pub confusion: [[u64; LABEL_COUNT]; LABEL_COUNT],
    pub oa: f64,
    /// Labels present in the truth only.
    pub per_label: Vec<LabelScores>,
    pub mu_p: f64,
    pub mu_r: f64,
    pub mu_f1: f64,
    pub mu_iou: f64,
}

impl SegMetrics {
    pub fn label(&self, label: SemanticLabel) -> Option<&LabelScores> {
        self.per_label.iter().find(|s| s.label == label.name())
    }

    pub fn f1(&self, label: SemanticLabel) -> f64 {
        self.label(label).map_or(0.0, |s| s.f1)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn seg_metrics_from_labels(
    pred: &[SemanticLabel],
    truth: &[SemanticLabel],
) -> Result<SegMetrics> {
    if pred.len() != truth.len() {
        return Err(Error::Schema(format!(
            "prediction has {} points, truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    let mut confusion = [[0u64; LABEL_COUNT]; LABEL_COUNT];
    for (p, t) in pred.iter().zip(truth) {
        confusion[t.id()][p.id()] += 1;
    }
    let total: u64 = confusion.iter().flatten().sum();
    let diag: u64 = (0..LABEL_COUNT).map(|i| confusion[i][i]).sum();
    let mut per_label = Vec::new();
    for l in SemanticLabel::ALL {
        let i = l.id();
        let support: u64 = confusion[i].iter().sum();
        if support == 0 {
            continue;
        }
        let tp = confusion[i][i] as f64;
        let predicted: u64 = (0..LABEL_COUNT).map(|r| confusion[r][i]).sum();
        let fp = predicted as f64 - tp;
        let fn_ = support as f64 - tp;
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        per_label.push(LabelScores {
            label: l.name(),
            support,
            precision,
            recall,
            f1: ratio(2.0 * precision * recall, precision + recall),
            iou: ratio(tp, tp + fp + fn_),
        });
    }
    let n = per_label.len() as f64;
    let mean = |f: fn(&LabelScores) -> f64| ratio(per_label.iter().map(f).sum(), n);
    Ok(SegMetrics {
        confusion,
        oa: ratio(diag as f64, total as f64),
        mu_p: mean(|s| s.precision),
        mu_r: mean(|s| s.recall),
        mu_f1: mean(|s| s.f1),
        mu_iou: mean(|s| s.iou),
        per_label,
    })
}

/// Point-by-point comparison; truth labels are each truth point's
/// `true_label`, or its arg-max class when that is absent.
pub fn seg_metrics(pred: &PointCloud, truth: &PointCloud) -> Result<SegMetrics> {
    let p: Vec<_> = pred.iter().map(|r| r.predicted()).collect();
    let t: Vec<_> = truth
        .iter()
        .map(|r| r.true_label.unwrap_or_else(|| r.predicted()))
        .collect();
    seg_metrics_from_labels(&p, &t)
}

pub fn iou_rect(a: &BBox, b: &BBox) -> f64 {
    a.iou(b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectedBox {
    pub facade: String,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthOpening {
    pub facade: String,
    pub bbox: BBox,
    pub measured: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetMetrics {
    pub ao: usize,
    pub mo: usize,
    pub d: usize,
    pub tp: usize,
    pub tp_measured: usize,
    pub fp: usize,
    pub fn_: usize,
    pub dr_ao: f64,
    pub fr_ao: f64,
    pub dr_mo: f64,
    pub fr_mo: f64,
    pub ious: Vec<f64>,
    /// Median IoU over matches.
    pub miou: f64,
    pub mu_iou: f64,
}

impl DetMetrics {
    /// Rates from counts alone; `d = tp + fp`.
    pub fn from_counts(ao: usize, mo: usize, tp: usize, tp_measured: usize, fp: usize) -> Self {
        let d = tp + fp;
        let fr = ratio(fp as f64, d as f64);
        DetMetrics {
            ao,
            mo,
            d,
            tp,
            tp_measured,
            fp,
            fn_: ao.saturating_sub(tp),
            dr_ao: ratio(tp as f64, ao as f64),
            fr_ao: fr,
            dr_mo: ratio(tp_measured as f64, mo as f64),
            fr_mo: fr,
            ious: Vec::new(),
            miou: 0.0,
            mu_iou: 0.0,
        }
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    match n {
        0 => 0.0,
        _ if n % 2 == 1 => sorted[n / 2],
        _ => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    }
}

/// Greedy one-to-one matching, highest IoU first, same façade only.
pub fn det_metrics(pred: &[DetectedBox], truth: &[TruthOpening], iou_threshold: f64) -> DetMetrics {
    let mut pairs = Vec::new();
    for (i, p) in pred.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            if p.facade != t.facade {
                continue;
            }
            let iou = p.bbox.iou(&t.bbox);
            if iou >= iou_threshold {
                pairs.push((iou, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_p = vec![false; pred.len()];
    let mut used_t = vec![false; truth.len()];
    let mut ious = Vec::new();
    let mut tp_measured = 0;
    for (iou, i, j) in pairs {
        if used_p[i] || used_t[j] {
            continue;
        }
        used_p[i] = true;
        used_t[j] = true;
        ious.push(iou);
        tp_measured += truth[j].measured as usize;
    }
    let tp = ious.len();
    let mo = truth.iter().filter(|t| t.measured).count();
    let mut m = DetMetrics::from_counts(truth.len(), mo, tp, tp_measured, pred.len() - tp);
    let mut sorted = ious.clone();
    sorted.sort_by(f64::total_cmp);
    m.miou = median(&sorted);
    m.mu_iou = ratio(ious.iter().sum(), ious.len() as f64);
    m.ious = ious;
    m
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub segmentation_input: Option<SegMetrics>,
    pub segmentation_refined: Option<SegMetrics>,
    pub detection: Option<DetMetrics>,
    pub params: serde_json::Value,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let seg = |s: &mut String, name: &str, m: &SegMetrics| {
            let _ = writeln!(
                s,
                "{name}: OA {:.1}%  muP {:.1}%  muR {:.1}%  muF1 {:.1}%  muIoU {:.1}%",
                100.0 * m.oa,
                100.0 * m.mu_p,
                100.0 * m.mu_r,
                100.0 * m.mu_f1,
                100.0 * m.mu_iou
            );
            for l in &m.per_label {
                let _ = writeln!(
                    s,
                    "  {:<8} F1 {:.1}%  (n = {})",
                    l.label,
                    100.0 * l.f1,
                    l.support
                );
            }
        };
        if let Some(m) = &self.segmentation_input {
            seg(&mut s, "input segmentation", m);
        }
        if let Some(m) = &self.segmentation_refined {
            seg(&mut s, "refined segmentation", m);
        }
        if let Some(d) = &self.detection {
            let _ = writeln!(
                s,
                "detection: AO {} MO {} D {} TP {} FP {}  DR-AO {:.1}%  DR-MO {:.1}%  FR {:.1}%  mIoU {:.1}%  muIoU {:.1}%",
                d.ao,
                d.mo,
                d.d,
                d.tp,
                d.fp,
                100.0 * d.dr_ao,
                100.0 * d.dr_mo,
                100.0 * d.fr_mo,
                100.0 * d.miou,
                100.0 * d.mu_iou
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use SemanticLabel::*;

    #[test]
    fn perfect_and_constant_predictions() {
        let truth = vec![Wall, Window, Wall, Window];
        let m = seg_metrics_from_labels(&truth, &truth).unwrap();
        assert_eq!(m.oa, 1.0);
        assert!(m.per_label.iter().all(|l| l.f1 == 1.0));
        let m = seg_metrics_from_labels(&[Wall; 4], &truth).unwrap();
        assert_eq!(m.oa, 0.5);
        assert_eq!(m.f1(Window), 0.0);
        assert_eq!(m.per_label.len(), 2);
    }

    #[test]
    fn random_case_matches_direct_count() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
            [Wall, Window, Door, Molding][rng.random_range(0..4)]
        };
        let truth: Vec<_> = (0..100).map(|_| pick(&mut rng)).collect();
        let pred: Vec<_> = (0..100).map(|_| pick(&mut rng)).collect();
        let m = seg_metrics_from_labels(&pred, &truth).unwrap();
        for l in [Wall, Window, Door, Molding] {
            let tp = (0..100).filter(|&i| pred[i] == l && truth[i] == l).count() as f64;
            let fp = (0..100).filter(|&i| pred[i] == l && truth[i] != l).count() as f64;
            let fn_ = (0..100).filter(|&i| pred[i] != l && truth[i] == l).count() as f64;
            let s = m.label(l).unwrap();
            assert!((s.precision - tp / (tp + fp)).abs() <= 1e-12);
            assert!((s.recall - tp / (tp + fn_)).abs() <= 1e-12);
            assert!((s.iou - tp / (tp + fp + fn_)).abs() <= 1e-12);
        }
        let correct = (0..100).filter(|&i| pred[i] == truth[i]).count() as f64;
        assert!((m.oa - correct / 100.0).abs() <= 1e-12);
    }

    #[test]
    fn published_detection_totals() {
        let m = DetMetrics::from_counts(101, 87, 80, 80, 1);
        // Printed values are truncated to one decimal.
        assert_abs_diff_eq!(100.0 * m.dr_ao, 79.2, epsilon = 0.1);
        assert_abs_diff_eq!(100.0 * m.dr_mo, 91.9, epsilon = 0.1);
        assert_abs_diff_eq!(100.0 * m.fr_mo, 1.2, epsilon = 0.1);
    }

    fn bx(u: f64, v: f64) -> BBox {
        BBox {
            u_min: u,
            v_min: v,
            width: 1.0,
            height: 1.0,
        }
    }

    #[test]
    fn detection_edge_cases() {
        let truth: Vec<_> = (0..3)
            .map(|k| TruthOpening {
                facade: "f".into(),
                bbox: bx(2.0 * k as f64, 0.0),
                measured: true,
            })
            .collect();
        let m = det_metrics(&[], &truth, 0.5);
        assert_eq!((m.dr_ao, m.fr_ao, m.tp, m.fn_), (0.0, 0.0, 0, 3));
        let pred: Vec<_> = truth
            .iter()
            .map(|t| DetectedBox {
                facade: "f".into(),
                bbox: t.bbox,
            })
            .collect();
        let m = det_metrics(&pred, &truth, 0.5);
        assert_eq!(m.dr_mo, 1.0);
        assert!(m.ious.iter().all(|&i| i == 1.0));
        // Other façade never matches.
        let other = vec![DetectedBox {
            facade: "g".into(),
            bbox: bx(0.0, 0.0),
        }];
        assert_eq!(det_metrics(&other, &truth, 0.5).tp, 0);
    }

    #[test]
    fn iou_examples() {
        assert_eq!(iou_rect(&bx(0., 0.), &bx(0., 0.)), 1.0);
        assert_eq!(iou_rect(&bx(0., 0.), &bx(5., 5.)), 0.0);
        assert_abs_diff_eq!(
            iou_rect(&bx(0., 0.), &bx(0.5, 0.)),
            1.0 / 3.0,
            epsilon = 1e-15
        );
    }

    proptest! {
        #[test]
        fn count_identities(
            t in prop::collection::vec((0.0f64..10.0, 0.0f64..5.0, any::<bool>()), 0..12),
            p in prop::collection::vec((0.0f64..10.0, 0.0f64..5.0), 0..12),
        ) {
            let truth: Vec<_> = t.iter().map(|&(u, v, m)| TruthOpening { facade: "f".into(), bbox: bx(u, v), measured: m }).collect();
            let pred: Vec<_> = p.iter().map(|&(u, v)| DetectedBox { facade: "f".into(), bbox: bx(u, v) }).collect();
            let m = det_metrics(&pred, &truth, 0.5);
            prop_assert_eq!(m.tp + m.fn_, m.ao);
            prop_assert_eq!(m.tp + m.fp, m.d);
            prop_assert!(m.tp_measured <= m.mo);
        }

        #[test]
        fn oa_is_trace_ratio(pairs in prop::collection::vec((0usize..8, 0usize..8), 1..200)) {
            let pred: Vec<_> = pairs.iter().map(|p| SemanticLabel::from_id(p.0).unwrap()).collect();
            let truth: Vec<_> = pairs.iter().map(|p| SemanticLabel::from_id(p.1).unwrap()).collect();
            let m = seg_metrics_from_labels(&pred, &truth).unwrap();
            let trace: u64 = (0..8).map(|i| m.confusion[i][i]).sum();
            let total: u64 = m.confusion.iter().flatten().sum();
            prop_assert!((m.oa - trace as f64 / total as f64).abs() < 1e-15);
            for l in SemanticLabel::ALL {
                let n = truth.iter().filter(|&&x| x == l).count() as u64;
                prop_assert_eq!(m.confusion[l.id()].iter().sum::<u64>(), n);
            }
        }
    }
}
