//! Seeded inputs for the benchmarks.

use darksight::evalmap::{BoundingBox, Detection, GroundTruth};
use darksight::tensor::Tensor;
use darksight::RasterImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random `[1, channels, extent, extent]` activation and a 3×3 kernel
/// mapping `channels` to `channels`.
pub fn conv_inputs(channels: usize, extent: usize) -> (Tensor, Tensor) {
    let mut r = rng(1);
    let x = Tensor::randn(&[1, channels, extent, extent], 1.0, &mut r);
    let k = Tensor::randn(&[channels, channels, 3, 3], 0.1, &mut r);
    (x, k)
}

/// A dim RGB image with uniform noise.
pub fn dark_image(width: usize, height: usize) -> RasterImage {
    let mut r = rng(2);
    let data = (0..width * height * 3)
        .map(|_| r.random_range(0..80u8))
        .collect();
    RasterImage::new(width, height, 3, data).expect("consistent extent")
}

fn random_box(r: &mut ChaCha8Rng) -> BoundingBox {
    let w = r.random_range(10.0..120.0);
    let h = r.random_range(10.0..120.0);
    BoundingBox::new(r.random_range(0.0..500.0), r.random_range(0.0..400.0), w, h)
        .expect("positive extent")
}

/// `images` images with `per_image` ground truths and twice as many
/// detections each, half of them near a ground truth.
pub fn eval_scene(
    images: usize,
    per_image: usize,
    classes: usize,
) -> (Vec<Detection>, Vec<GroundTruth>) {
    let mut r = rng(3);
    let mut dets = Vec::new();
    let mut gts = Vec::new();
    for i in 0..images {
        let id = format!("im{i}");
        for _ in 0..per_image {
            let class = r.random_range(0..classes);
            let b = random_box(&mut r);
            let near = BoundingBox::new(
                b.left + r.random_range(-5.0..5.0),
                b.top + r.random_range(-5.0..5.0),
                b.width,
                b.height,
            )
            .expect("positive extent");
            gts.push(GroundTruth::new(&id, class, b));
            dets.push(
                Detection::new(&id, class, near, r.random_range(0.0..1.0)).expect("score in range"),
            );
            let clutter = random_box(&mut r);
            dets.push(
                Detection::new(&id, class, clutter, r.random_range(0.0..1.0))
                    .expect("score in range"),
            );
        }
    }
    (dets, gts)
}
