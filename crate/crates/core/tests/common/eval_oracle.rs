//! Straight-line mAP reference written from the definitions, plus a seeded
//! random scene generator. Shared by the core tests and the acceptance suite.

#![allow(dead_code)]

use darksight::evalmap::{BoundingBox, Detection, GroundTruth};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn overlap(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = (a.left + a.width).min(b.left + b.width) - a.left.max(b.left);
    let iy = (a.top + a.height).min(b.top + b.height) - a.top.max(b.top);
    if ix <= 0.0 || iy <= 0.0 {
        return 0.0;
    }
    let inter = ix * iy;
    inter / (a.width * a.height + b.width * b.height - inter)
}

/// `(class, AP per threshold)` rows; `None` where a class has no ground truth.
pub type ApTable = Vec<(usize, Vec<Option<f64>>)>;

/// AP per class per threshold (`None` when a class has no ground truth)
/// and the mAP.
pub fn reference_eval(
    dets: &[Detection],
    gts: &[GroundTruth],
    thresholds: &[f64],
    coco: bool,
) -> (ApTable, f64) {
    let mut classes: Vec<usize> = gts.iter().map(|g| g.class_id).collect();
    classes.extend(dets.iter().map(|d| d.class_id));
    classes.sort();
    classes.dedup();

    let mut table = Vec::new();
    for &c in &classes {
        let n_gt = gts.iter().filter(|g| g.class_id == c).count();
        let mut ranked: Vec<(f64, usize)> = dets
            .iter()
            .enumerate()
            .filter(|(_, d)| d.class_id == c)
            .map(|(i, d)| (d.score, i))
            .collect();
        ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));

        let mut aps = Vec::new();
        for &thr in thresholds {
            if n_gt == 0 {
                aps.push(None);
                continue;
            }
            let mut used = vec![false; gts.len()];
            let mut precision = Vec::new();
            let mut recall = Vec::new();
            let mut tp = 0.0;
            for (k, &(_, di)) in ranked.iter().enumerate() {
                let d = &dets[di];
                let mut best: Option<usize> = None;
                let mut best_iou = -1.0;
                for (gi, g) in gts.iter().enumerate() {
                    if used[gi] || g.class_id != c || g.image_id != d.image_id {
                        continue;
                    }
                    let o = overlap(&d.bbox, &g.bbox);
                    if o >= thr && o > best_iou {
                        best = Some(gi);
                        best_iou = o;
                    }
                }
                if let Some(gi) = best {
                    used[gi] = true;
                    tp += 1.0;
                }
                precision.push(tp / (k as f64 + 1.0));
                recall.push(tp / n_gt as f64);
            }
            let n = precision.len();
            let env = |k: usize| (k..n).map(|j| precision[j]).fold(0.0, f64::max);
            let ap = if coco {
                let mut s = 0.0;
                for t in 0..=100 {
                    let r = t as f64 / 100.0;
                    s += (0..n)
                        .filter(|&j| recall[j] >= r)
                        .map(|j| precision[j])
                        .fold(0.0, f64::max);
                }
                s / 101.0
            } else {
                let mut s = 0.0;
                for k in 0..n {
                    let prev = if k == 0 { 0.0 } else { recall[k - 1] };
                    s += (recall[k] - prev) * env(k);
                }
                s
            };
            aps.push(Some(ap));
        }
        table.push((c, aps));
    }

    let mut total = 0.0;
    for t in 0..thresholds.len() {
        let defined: Vec<f64> = table.iter().filter_map(|(_, a)| a[t]).collect();
        total += defined.iter().sum::<f64>() / defined.len() as f64;
    }
    (table, total / thresholds.len() as f64)
}

fn random_box(rng: &mut ChaCha8Rng) -> BoundingBox {
    let w = rng.random_range(5.0..60.0);
    let h = rng.random_range(5.0..60.0);
    BoundingBox::new(
        rng.random_range(0.0..100.0),
        rng.random_range(0.0..100.0),
        w,
        h,
    )
    .unwrap()
}

/// `n_images` images with up to `max_boxes` ground truths and up to
/// `max_boxes` detections each, over `n_classes` classes. Detections are a
/// mix of jittered ground truths and clutter; some scores are quantized to
/// produce ties.
pub fn random_scene(
    seed: u64,
    n_images: usize,
    n_classes: usize,
    max_boxes: usize,
) -> (Vec<Detection>, Vec<GroundTruth>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dets = Vec::new();
    let mut gts = Vec::new();
    for img in 0..n_images {
        let id = format!("img{img:03}");
        let n_gt = rng.random_range(0..=max_boxes);
        let start = gts.len();
        for _ in 0..n_gt {
            let class = rng.random_range(0..n_classes);
            gts.push(GroundTruth::new(&id, class, random_box(&mut rng)));
        }
        let n_det = rng.random_range(0..=max_boxes);
        for _ in 0..n_det {
            let mut score: f64 = rng.random_range(0.0..=1.0);
            if rng.random_bool(0.3) {
                score = (score * 10.0).round() / 10.0;
            }
            let image_gts = &gts[start..];
            let (class, bbox) = if !image_gts.is_empty() && rng.random_bool(0.7) {
                let g = &image_gts[rng.random_range(0..image_gts.len())];
                let j = |r: &mut ChaCha8Rng| r.random_range(-6.0..6.0);
                let b = BoundingBox::new(
                    g.bbox.left + j(&mut rng),
                    g.bbox.top + j(&mut rng),
                    (g.bbox.width + j(&mut rng)).max(1.0),
                    (g.bbox.height + j(&mut rng)).max(1.0),
                )
                .unwrap();
                let class = if rng.random_bool(0.9) {
                    g.class_id
                } else {
                    rng.random_range(0..n_classes)
                };
                (class, b)
            } else {
                (rng.random_range(0..n_classes), random_box(&mut rng))
            };
            dets.push(Detection::new(&id, class, bbox, score).unwrap());
        }
    }
    if gts.is_empty() {
        gts.push(GroundTruth::new("img000", 0, random_box(&mut rng)));
    }
    (dets, gts)
}
