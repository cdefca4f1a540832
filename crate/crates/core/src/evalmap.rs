//! Detection evaluation: IoU, greedy matching, precision/recall, AP and mAP.
//!
//! Boxes are half-open pixel rectangles `(left, top, width, height)`.
//! Detections are ranked by descending score with ties kept in input order.
//! Each detection claims the unmatched ground truth of its image and class
//! with the highest IoU at or above the threshold (first one on IoU ties);
//! everything else is a false positive.
//!
//! Two protocols are provided: `voc50` (IoU 0.5, all-point interpolation)
//! and `coco` (IoU 0.50:0.05:0.95, 101-point interpolation). mAP averages
//! per-class AP over classes with a defined AP, then over thresholds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundingBox {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl BoundingBox {
    pub fn new(left: f64, top: f64, width: f64, height: f64) -> Result<Self> {
        let finite = [left, top, width, height].iter().all(|v| v.is_finite());
        if !finite || width <= 0.0 || height <= 0.0 {
            return Err(Error::Validation(format!(
                "box ({left}, {top}, {width}, {height}) needs finite coordinates and positive size"
            )));
        }
        Ok(Self {
            left,
            top,
            width,
            height,
        })
    }

    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// Length of the overlap of two intervals. A contained interval contributes
/// its own length exactly, so identical boxes have IoU exactly 1.
fn overlap_1d(a0: f64, alen: f64, b0: f64, blen: f64) -> f64 {
    let (a1, b1) = (a0 + alen, b0 + blen);
    if a0 >= b0 && a1 <= b1 {
        alen
    } else if b0 >= a0 && b1 <= a1 {
        blen
    } else {
        a1.min(b1) - a0.max(b0)
    }
}

/// Intersection over union; 0 for disjoint boxes.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = overlap_1d(a.left, a.width, b.left, b.width);
    let ih = overlap_1d(a.top, a.height, b.top, b.height);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    (inter / (a.area() + b.area() - inter)).min(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub image_id: String,
    pub class_id: usize,
    pub bbox: BoundingBox,
    pub score: f64,
}

impl Detection {
    pub fn new(
        image_id: impl Into<String>,
        class_id: usize,
        bbox: BoundingBox,
        score: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::Validation(format!("score {score} outside [0, 1]")));
        }
        Ok(Self {
            image_id: image_id.into(),
            class_id,
            bbox,
            score,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub image_id: String,
    pub class_id: usize,
    pub bbox: BoundingBox,
}

impl GroundTruth {
    pub fn new(image_id: impl Into<String>, class_id: usize, bbox: BoundingBox) -> Self {
        Self {
            image_id: image_id.into(),
            class_id,
            bbox,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Area under the monotone precision envelope.
    VocAllPoint,
    /// Envelope precision averaged over recall 0, 0.01, ..., 1.
    #[serde(rename = "coco-101-point")]
    Coco101Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Voc50,
    Coco,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Voc50 => "voc50",
            Protocol::Coco => "coco",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "voc50" | "voc" => Ok(Protocol::Voc50),
            "coco" => Ok(Protocol::Coco),
            _ => Err(Error::InvalidConfig(format!(
                "unknown protocol {s:?}, expected voc50 or coco"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalConfig {
    pub iou_thresholds: Vec<f64>,
    pub interpolation: Interpolation,
    /// Detections scoring below this are ignored.
    pub score_floor: f64,
}

impl EvalConfig {
    pub fn new(
        iou_thresholds: Vec<f64>,
        interpolation: Interpolation,
        score_floor: f64,
    ) -> Result<Self> {
        if iou_thresholds.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one IoU threshold is required".into(),
            ));
        }
        if iou_thresholds.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return Err(Error::InvalidConfig(format!(
                "IoU thresholds must lie in (0, 1], got {iou_thresholds:?}"
            )));
        }
        if iou_thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "IoU thresholds must be strictly increasing, got {iou_thresholds:?}"
            )));
        }
        Ok(Self {
            iou_thresholds,
            interpolation,
            score_floor,
        })
    }

    pub fn voc50() -> Self {
        Self::new(vec![0.5], Interpolation::VocAllPoint, 0.0).expect("valid preset")
    }

    pub fn coco() -> Self {
        let thresholds = (0..10).map(|i| f64::from(50 + 5 * i) / 100.0).collect();
        Self::new(thresholds, Interpolation::Coco101Point, 0.0).expect("valid preset")
    }

    pub fn for_protocol(protocol: Protocol) -> Self {
        match protocol {
            Protocol::Voc50 => Self::voc50(),
            Protocol::Coco => Self::coco(),
        }
    }
}

/// Greedy matching of one image's detections of one class against its
/// ground truths. Returns a true-positive flag per detection, in input order.
pub fn match_detections(dets: &[Detection], gts: &[GroundTruth], thr: f64) -> Result<Vec<bool>> {
    let key = dets
        .first()
        .map(|d| (&d.image_id, d.class_id))
        .or_else(|| gts.first().map(|g| (&g.image_id, g.class_id)));
    if let Some((image, class)) = key {
        let mixed = dets
            .iter()
            .any(|d| (&d.image_id, d.class_id) != (image, class))
            || gts
                .iter()
                .any(|g| (&g.image_id, g.class_id) != (image, class));
        if mixed {
            return Err(Error::InvalidInput(
                "match_detections needs a single image id and class id".into(),
            ));
        }
    }
    let mut taken = vec![false; gts.len()];
    let mut flags = vec![false; dets.len()];
    for i in score_order(dets) {
        let mut best: Option<(usize, f64)> = None;
        for (j, gt) in gts.iter().enumerate() {
            if taken[j] {
                continue;
            }
            let o = iou(&dets[i].bbox, &gt.bbox);
            if o >= thr && best.is_none_or(|(_, b)| o > b) {
                best = Some((j, o));
            }
        }
        if let Some((j, _)) = best {
            taken[j] = true;
            flags[i] = true;
        }
    }
    Ok(flags)
}

/// Indices of `dets` by descending score, ties in input order.
fn score_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score));
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub precision: f64,
    pub recall: f64,
}

/// Cumulative precision and recall after each detection of a score-ordered
/// flag list. `None` when there is no ground truth, since recall is then
/// undefined.
pub fn precision_recall(flags: &[bool], n_gt: usize) -> Option<Vec<PrPoint>> {
    if n_gt == 0 {
        return None;
    }
    let mut tp = 0usize;
    let points = flags
        .iter()
        .enumerate()
        .map(|(i, &hit)| {
            tp += usize::from(hit);
            PrPoint {
                precision: tp as f64 / (i + 1) as f64,
                recall: tp as f64 / n_gt as f64,
            }
        })
        .collect();
    Some(points)
}

/// Average precision of a PR curve built by [`precision_recall`].
pub fn average_precision(pr: &[PrPoint], method: Interpolation) -> f64 {
    if pr.is_empty() {
        return 0.0;
    }
    // envelope[i] = max precision over points i.. (recall is nondecreasing)
    let mut envelope: Vec<f64> = pr.iter().map(|p| p.precision).collect();
    for i in (0..envelope.len() - 1).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    match method {
        Interpolation::VocAllPoint => {
            let mut ap = 0.0;
            let mut prev_recall = 0.0;
            for (p, env) in pr.iter().zip(&envelope) {
                if p.recall > prev_recall {
                    ap += (p.recall - prev_recall) * env;
                    prev_recall = p.recall;
                }
            }
            ap
        }
        Interpolation::Coco101Point => {
            let mut total = 0.0;
            let mut k = 0;
            for i in 0..=100 {
                let r = f64::from(i) / 100.0;
                while k < pr.len() && pr[k].recall < r {
                    k += 1;
                }
                if k < pr.len() {
                    total += envelope[k];
                }
            }
            total / 101.0
        }
    }
}

/// Per-class row of an [`EvalReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub class_id: usize,
    pub class_name: String,
    pub n_gt: usize,
    pub n_det: usize,
    /// AP per threshold; `None` when the class has no ground truth.
    pub ap: Vec<Option<f64>>,
    /// Counts at the first (loosest) threshold.
    pub tp: usize,
    pub fp: usize,
    pub missed: usize,
    #[serde(skip)]
    pub pr_curves: Vec<Vec<PrPoint>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub protocol: Option<Protocol>,
    pub config: EvalConfig,
    pub classes: Vec<ClassReport>,
    /// mAP at each threshold.
    pub map_per_threshold: Vec<f64>,
    pub map: f64,
    /// Classes that have detections but no ground truth (AP undefined).
    pub undefined_classes_with_detections: usize,
}

impl EvalReport {
    /// Replaces the numeric class labels with names.
    pub fn label_classes(&mut self, name: impl Fn(usize) -> String) {
        for c in &mut self.classes {
            c.class_name = name(c.class_id);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// PR samples as CSV with header `class,threshold,recall,precision`.
    pub fn pr_csv(&self) -> String {
        let mut out = String::from("class,threshold,recall,precision\n");
        for c in &self.classes {
            for (thr, curve) in self.config.iou_thresholds.iter().zip(&c.pr_curves) {
                for p in curve {
                    let _ = writeln!(out, "{},{},{},{}", c.class_name, thr, p.recall, p.precision);
                }
            }
        }
        out
    }

    /// Fixed-width summary table of per-class AP and mAP.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>6} {:>6} {:>8}",
            "class", "n_gt", "n_det", "AP"
        );
        for c in &self.classes {
            let defined: Vec<f64> = c.ap.iter().flatten().copied().collect();
            let ap = if defined.is_empty() {
                "n/a".to_string()
            } else {
                format!("{:.4}", defined.iter().sum::<f64>() / defined.len() as f64)
            };
            let _ = writeln!(
                out,
                "{:<16} {:>6} {:>6} {:>8}",
                c.class_name, c.n_gt, c.n_det, ap
            );
        }
        let proto = self
            .protocol
            .map_or("custom".to_string(), |p| p.to_string());
        let _ = writeln!(out, "mAP ({proto}): {:.4}", self.map);
        out
    }
}

/// Full evaluation of a detection set against ground truth.
pub fn evaluate(dets: &[Detection], gts: &[GroundTruth], cfg: &EvalConfig) -> Result<EvalReport> {
    if gts.is_empty() {
        return Err(Error::InvalidInput("ground-truth set is empty".into()));
    }
    let classes: BTreeSet<usize> = gts
        .iter()
        .map(|g| g.class_id)
        .chain(dets.iter().map(|d| d.class_id))
        .collect();
    let n_thr = cfg.iou_thresholds.len();
    let mut reports = Vec::new();
    let mut undefined = 0;
    for class in classes {
        let class_gts: Vec<&GroundTruth> = gts.iter().filter(|g| g.class_id == class).collect();
        let kept: Vec<Detection> = dets
            .iter()
            .filter(|d| d.class_id == class && d.score >= cfg.score_floor)
            .cloned()
            .collect();
        let order = score_order(&kept);
        let ranked: Vec<&Detection> = order.iter().map(|&i| &kept[i]).collect();

        let mut gts_by_image: BTreeMap<&str, Vec<GroundTruth>> = BTreeMap::new();
        for g in &class_gts {
            gts_by_image
                .entry(&g.image_id)
                .or_default()
                .push((*g).clone());
        }
        let mut ranks_by_image: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (rank, d) in ranked.iter().enumerate() {
            ranks_by_image.entry(&d.image_id).or_default().push(rank);
        }

        let n_gt = class_gts.len();
        if n_gt == 0 && !ranked.is_empty() {
            undefined += 1;
        }
        let mut ap = Vec::with_capacity(n_thr);
        let mut curves = Vec::with_capacity(n_thr);
        let mut first_tp = 0;
        for (t, &thr) in cfg.iou_thresholds.iter().enumerate() {
            let mut flags = vec![false; ranked.len()];
            for (image, ranks) in &ranks_by_image {
                let image_dets: Vec<Detection> = ranks.iter().map(|&r| ranked[r].clone()).collect();
                let image_gts = gts_by_image.get(image).map_or(&[][..], |v| v.as_slice());
                let image_flags = match_detections(&image_dets, image_gts, thr)?;
                for (&r, f) in ranks.iter().zip(image_flags) {
                    flags[r] = f;
                }
            }
            if t == 0 {
                first_tp = flags.iter().filter(|&&f| f).count();
            }
            match precision_recall(&flags, n_gt) {
                Some(pr) => {
                    ap.push(Some(average_precision(&pr, cfg.interpolation)));
                    curves.push(pr);
                }
                None => {
                    ap.push(None);
                    curves.push(Vec::new());
                }
            }
        }
        reports.push(ClassReport {
            class_id: class,
            class_name: class.to_string(),
            n_gt,
            n_det: ranked.len(),
            ap,
            tp: first_tp,
            fp: ranked.len() - first_tp,
            missed: n_gt - first_tp,
            pr_curves: curves,
        });
    }

    let map_per_threshold: Vec<f64> = (0..n_thr)
        .map(|t| {
            let defined: Vec<f64> = reports.iter().filter_map(|c| c.ap[t]).collect();
            defined.iter().sum::<f64>() / defined.len() as f64
        })
        .collect();
    let map = map_per_threshold.iter().sum::<f64>() / n_thr as f64;
    Ok(EvalReport {
        protocol: None,
        config: cfg.clone(),
        classes: reports,
        map_per_threshold,
        map,
        undefined_classes_with_detections: undefined,
    })
}

/// [`evaluate`] under a named protocol, recorded in the report.
pub fn evaluate_protocol(
    dets: &[Detection],
    gts: &[GroundTruth],
    protocol: Protocol,
) -> Result<EvalReport> {
    let mut report = evaluate(dets, gts, &EvalConfig::for_protocol(protocol))?;
    report.protocol = Some(protocol);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(l: f64, t: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::new(l, t, w, h).unwrap()
    }

    fn det(img: &str, class: usize, b: BoundingBox, score: f64) -> Detection {
        Detection::new(img, class, b, score).unwrap()
    }

    #[test]
    fn iou_examples() {
        let a = bx(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &bx(20.0, 0.0, 5.0, 5.0)), 0.0);
        // touching edges share no area
        assert_eq!(iou(&a, &bx(10.0, 0.0, 5.0, 5.0)), 0.0);
        let b = bx(5.0, 5.0, 10.0, 10.0);
        assert!((iou(&a, &b) - 1.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn box_and_detection_validation() {
        assert!(BoundingBox::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(BoundingBox::new(0.0, 0.0, 1.0, -1.0).is_err());
        assert!(BoundingBox::new(f64::NAN, 0.0, 1.0, 1.0).is_err());
        assert!(Detection::new("a", 0, bx(0.0, 0.0, 1.0, 1.0), 1.5).is_err());
        assert!(Detection::new("a", 0, bx(0.0, 0.0, 1.0, 1.0), -0.1).is_err());
    }

    #[test]
    fn matching_examples() {
        let gt = GroundTruth::new("im", 0, bx(0.0, 0.0, 10.0, 10.0));
        let hit = det("im", 0, bx(0.0, 0.0, 10.0, 8.0), 0.9);
        assert_eq!(
            match_detections(std::slice::from_ref(&hit), std::slice::from_ref(&gt), 0.5).unwrap(),
            vec![true]
        );

        let second = det("im", 0, bx(0.0, 0.0, 10.0, 9.0), 0.8);
        let flags = match_detections(&[hit, second], std::slice::from_ref(&gt), 0.5).unwrap();
        assert_eq!(flags, vec![true, false]);
    }

    #[test]
    fn matching_follows_score_not_input_order() {
        let gt = GroundTruth::new("im", 0, bx(0.0, 0.0, 10.0, 10.0));
        let low = det("im", 0, bx(0.0, 0.0, 10.0, 10.0), 0.3);
        let high = det("im", 0, bx(1.0, 0.0, 10.0, 10.0), 0.9);
        assert_eq!(
            match_detections(&[low, high], &[gt], 0.5).unwrap(),
            vec![false, true]
        );
    }

    #[test]
    fn matching_rejects_mixed_groups() {
        let gt = GroundTruth::new("im", 0, bx(0.0, 0.0, 10.0, 10.0));
        let other = det("im2", 0, bx(0.0, 0.0, 10.0, 10.0), 0.3);
        assert!(matches!(
            match_detections(&[other], std::slice::from_ref(&gt), 0.5),
            Err(Error::InvalidInput(_))
        ));
        let wrong_class = GroundTruth::new("im", 1, bx(0.0, 0.0, 1.0, 1.0));
        assert!(match_detections(&[], &[gt, wrong_class], 0.5).is_err());
    }

    #[test]
    fn pr_examples() {
        let pr = precision_recall(&[true], 1).unwrap();
        assert_eq!(
            pr,
            vec![PrPoint {
                precision: 1.0,
                recall: 1.0
            }]
        );
        let pr = precision_recall(&[true, false], 1).unwrap();
        assert_eq!(
            pr[1],
            PrPoint {
                precision: 0.5,
                recall: 1.0
            }
        );
        let pr = precision_recall(&[true], 2).unwrap();
        assert_eq!(
            pr,
            vec![PrPoint {
                precision: 1.0,
                recall: 0.5
            }]
        );
        assert!(precision_recall(&[true], 0).is_none());
    }

    #[test]
    fn ap_examples() {
        let pr = [
            PrPoint {
                precision: 1.0,
                recall: 1.0,
            },
            PrPoint {
                precision: 0.5,
                recall: 1.0,
            },
        ];
        assert_eq!(average_precision(&pr, Interpolation::VocAllPoint), 1.0);
        assert_eq!(average_precision(&pr, Interpolation::Coco101Point), 1.0);
        let pr = [PrPoint {
            precision: 1.0,
            recall: 0.5,
        }];
        assert_eq!(average_precision(&pr, Interpolation::VocAllPoint), 0.5);
        // recall points 0.00..=0.50 are covered: 51 of 101
        let coco = average_precision(&pr, Interpolation::Coco101Point);
        assert!((coco - 51.0 / 101.0).abs() < 1e-12);
        assert_eq!(average_precision(&[], Interpolation::VocAllPoint), 0.0);
    }

    #[test]
    fn perfect_detection_scores_one() {
        let b = bx(3.0, 4.0, 20.0, 10.0);
        let gts = [GroundTruth::new("im", 2, b)];
        let dets = [det("im", 2, b, 0.7)];
        for p in [Protocol::Voc50, Protocol::Coco] {
            let r = evaluate_protocol(&dets, &gts, p).unwrap();
            assert_eq!(r.map, 1.0);
            assert!(r.map_per_threshold.iter().all(|&m| m == 1.0));
        }
    }

    #[test]
    fn class_without_gt_is_excluded_and_counted() {
        let b = bx(0.0, 0.0, 10.0, 10.0);
        let gts = [GroundTruth::new("im", 0, b)];
        let dets = [det("im", 0, b, 0.9), det("im", 5, b, 0.8)];
        let r = evaluate(&dets, &gts, &EvalConfig::voc50()).unwrap();
        assert_eq!(r.map, 1.0);
        assert_eq!(r.undefined_classes_with_detections, 1);
        assert_eq!(r.classes[1].ap, vec![None]);
    }

    #[test]
    fn missing_detections_give_zero_ap() {
        let b = bx(0.0, 0.0, 10.0, 10.0);
        let gts = [GroundTruth::new("im", 0, b), GroundTruth::new("im", 1, b)];
        let dets = [det("im", 0, b, 0.9)];
        let r = evaluate(&dets, &gts, &EvalConfig::voc50()).unwrap();
        assert_eq!(r.classes[1].ap, vec![Some(0.0)]);
        assert_eq!(r.classes[1].missed, 1);
        assert_eq!(r.map, 0.5);
    }

    #[test]
    fn score_floor_drops_detections() {
        let b = bx(0.0, 0.0, 10.0, 10.0);
        let gts = [GroundTruth::new("im", 0, b)];
        let dets = [det("im", 0, b, 0.05)];
        let cfg = EvalConfig::new(vec![0.5], Interpolation::VocAllPoint, 0.1).unwrap();
        let r = evaluate(&dets, &gts, &cfg).unwrap();
        assert_eq!(r.map, 0.0);
        assert_eq!(r.classes[0].n_det, 0);
    }

    #[test]
    fn empty_ground_truth_is_an_error() {
        assert!(matches!(
            evaluate(&[], &[], &EvalConfig::voc50()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(EvalConfig::new(vec![], Interpolation::VocAllPoint, 0.0).is_err());
        assert!(EvalConfig::new(vec![0.0], Interpolation::VocAllPoint, 0.0).is_err());
        assert!(EvalConfig::new(vec![0.5, 0.5], Interpolation::VocAllPoint, 0.0).is_err());
        assert!(EvalConfig::new(vec![0.7, 0.5], Interpolation::VocAllPoint, 0.0).is_err());
        assert_eq!(EvalConfig::coco().iou_thresholds.len(), 10);
        assert_eq!(EvalConfig::coco().iou_thresholds[9], 0.95);
        assert_eq!("COCO".parse::<Protocol>().unwrap(), Protocol::Coco);
        assert!("map".parse::<Protocol>().is_err());
    }

    #[test]
    fn csv_and_json_outputs() {
        let b = bx(0.0, 0.0, 10.0, 10.0);
        let gts = [GroundTruth::new("im", 0, b)];
        let dets = [
            det("im", 0, b, 0.9),
            det("im", 0, bx(50.0, 50.0, 5.0, 5.0), 0.4),
        ];
        let mut r = evaluate_protocol(&dets, &gts, Protocol::Voc50).unwrap();
        r.label_classes(|_| "dog".into());
        assert_eq!(
            r.pr_csv(),
            "class,threshold,recall,precision\ndog,0.5,1,1\ndog,0.5,1,0.5\n"
        );
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["protocol"], "voc50");
        assert_eq!(json["map"], 1.0);
        assert_eq!(json["classes"][0]["class_name"], "dog");
        assert_eq!(json["config"]["interpolation"], "voc-all-point");
        assert!(r.summary_table().contains("mAP (voc50): 1.0000"));
    }
}
