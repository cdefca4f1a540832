mod common;

use common::eval_oracle::{random_scene, reference_eval};
use darksight::evalmap::{
    evaluate, iou, match_detections, BoundingBox, Detection, EvalConfig, GroundTruth, Interpolation,
};
use proptest::prelude::*;

fn assert_matches_reference(dets: &[Detection], gts: &[GroundTruth], cfg: &EvalConfig) {
    let report = evaluate(dets, gts, cfg).unwrap();
    let coco = cfg.interpolation == Interpolation::Coco101Point;
    let (table, map) = reference_eval(dets, gts, &cfg.iou_thresholds, coco);
    assert_eq!(report.classes.len(), table.len());
    for (c, (class, aps)) in report.classes.iter().zip(&table) {
        assert_eq!(c.class_id, *class);
        for (got, want) in c.ap.iter().zip(aps) {
            match (got, want) {
                (Some(g), Some(w)) => assert!((g - w).abs() <= 1e-9, "class {class}: {g} vs {w}"),
                (None, None) => {}
                _ => panic!("definedness differs for class {class}"),
            }
        }
    }
    assert!((report.map - map).abs() <= 1e-9, "{} vs {map}", report.map);
}

#[test]
fn evaluate_matches_reference_on_seeded_scenes() {
    for seed in 0..20 {
        let (dets, gts) = random_scene(seed, 20, 3, 6);
        assert_matches_reference(&dets, &gts, &EvalConfig::voc50());
        assert_matches_reference(&dets, &gts, &EvalConfig::coco());
    }
}

#[test]
fn matching_matches_reference_order() {
    // single image, single class: the reference's greedy pass must agree
    for seed in 100..140 {
        let (dets, gts) = random_scene(seed, 1, 1, 6);
        let gts: Vec<_> = gts.into_iter().filter(|g| g.image_id == "img000").collect();
        let dets: Vec<_> = dets
            .into_iter()
            .filter(|d| d.image_id == "img000")
            .collect();
        let flags = match_detections(&dets, &gts, 0.5).unwrap();
        // recompute greedily by a full sort
        let mut order: Vec<usize> = (0..dets.len()).collect();
        order.sort_by(|&a, &b| {
            dets[b]
                .score
                .partial_cmp(&dets[a].score)
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut used = vec![false; gts.len()];
        let mut expected = vec![false; dets.len()];
        for i in order {
            let best = (0..gts.len())
                .filter(|&j| !used[j] && iou(&dets[i].bbox, &gts[j].bbox) >= 0.5)
                .fold(None::<usize>, |acc, j| match acc {
                    Some(k)
                        if iou(&dets[i].bbox, &gts[k].bbox) >= iou(&dets[i].bbox, &gts[j].bbox) =>
                    {
                        Some(k)
                    }
                    _ => Some(j),
                });
            if let Some(j) = best {
                used[j] = true;
                expected[i] = true;
            }
        }
        assert_eq!(flags, expected, "seed {seed}");
    }
}

#[test]
fn duplicating_the_image_set_keeps_map() {
    // Each copy lands right after its original in the ranking, which leaves
    // the precision envelope unchanged. Tied scores across different
    // originals would interleave differently, so scores are made distinct.
    for seed in 200..210 {
        let (mut dets, gts) = random_scene(seed, 8, 3, 5);
        for (i, d) in dets.iter_mut().enumerate() {
            d.score = d.score * 0.9 + i as f64 * 1e-6;
        }
        let rename = |s: &str| format!("{s}_copy");
        let mut dets2 = dets.clone();
        dets2.extend(dets.iter().map(|d| Detection {
            image_id: rename(&d.image_id),
            ..d.clone()
        }));
        let mut gts2 = gts.clone();
        gts2.extend(gts.iter().map(|g| GroundTruth {
            image_id: rename(&g.image_id),
            ..g.clone()
        }));
        for cfg in [EvalConfig::voc50(), EvalConfig::coco()] {
            let a = evaluate(&dets, &gts, &cfg).unwrap().map;
            let b = evaluate(&dets2, &gts2, &cfg).unwrap().map;
            assert!((a - b).abs() < 1e-9, "seed {seed}: {a} vs {b}");
        }
    }
}

fn arb_box() -> impl Strategy<Value = BoundingBox> {
    (-50.0..50.0f64, -50.0..50.0f64, 0.5..40.0f64, 0.5..40.0f64)
        .prop_map(|(l, t, w, h)| BoundingBox::new(l, t, w, h).unwrap())
}

proptest! {
    #[test]
    fn iou_symmetric_bounded_translation_invariant(a in arb_box(), b in arb_box(), dx in -20.0..20.0f64, dy in -20.0..20.0f64) {
        let ab = iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ab, iou(&b, &a));
        let shift = |x: &BoundingBox| BoundingBox::new(x.left + dx, x.top + dy, x.width, x.height).unwrap();
        prop_assert!((iou(&shift(&a), &shift(&b)) - ab).abs() < 1e-9);
        prop_assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn raising_threshold_never_raises_ap(seed in 0u64..500) {
        let (dets, gts) = random_scene(seed, 6, 3, 5);
        let mut prev: Option<Vec<Option<f64>>> = None;
        for thr in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let cfg = EvalConfig::new(vec![thr], Interpolation::VocAllPoint, 0.0).unwrap();
            let aps: Vec<Option<f64>> = evaluate(&dets, &gts, &cfg).unwrap().classes.iter().map(|c| c.ap[0]).collect();
            if let Some(p) = &prev {
                for (a, b) in p.iter().zip(&aps) {
                    if let (Some(a), Some(b)) = (a, b) {
                        prop_assert!(b <= &(a + 1e-12));
                    }
                }
            }
            prev = Some(aps);
        }
    }

    #[test]
    fn score_rescaling_keeps_report(seed in 0u64..500, factor in 0.01..1.0f64) {
        let (dets, gts) = random_scene(seed, 6, 3, 5);
        let scaled: Vec<Detection> = dets.iter().map(|d| Detection { score: d.score * factor, ..d.clone() }).collect();
        for cfg in [EvalConfig::voc50(), EvalConfig::coco()] {
            let a = evaluate(&dets, &gts, &cfg).unwrap();
            let b = evaluate(&scaled, &gts, &cfg).unwrap();
            prop_assert_eq!(a.map, b.map);
            prop_assert!((0.0..=1.0).contains(&a.map));
        }
    }

    #[test]
    fn pr_curve_shape(seed in 0u64..500) {
        let (dets, gts) = random_scene(seed, 6, 2, 6);
        let report = evaluate(&dets, &gts, &EvalConfig::voc50()).unwrap();
        for c in &report.classes {
            let curve = &c.pr_curves[0];
            for w in curve.windows(2) {
                prop_assert!(w[1].recall >= w[0].recall);
            }
            for p in curve {
                prop_assert!(p.precision >= 0.0 && p.precision <= 1.0);
            }
        }
    }
}
