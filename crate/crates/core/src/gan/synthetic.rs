//! Synthetic dark/bright image domains with known object boxes, and a fixed
//! brightness-threshold detector, for exercising the training loop and the
//! evaluation path at toy scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::evalmap::{BoundingBox, Detection, GroundTruth};
use crate::gan::TrainConfig;
use crate::pixelops::{rgb_to_yuv_pixel, to_u8, RasterImage};

/// Class id of every synthetic object.
pub const TOY_CLASS: usize = 0;
/// Luma (in `[0, 1]`) at or above which the toy detector sees an object.
pub const TOY_DETECT_LUMA: f64 = 0.5;
const MIN_COMPONENT: usize = 4;

/// Extent of the toy images.
pub const TOY_SIZE: usize = 16;
/// Images per toy training domain; with batch 4 an epoch is 10 steps.
pub const TOY_DOMAIN_SIZE: usize = 40;

/// Training setup for the toy domains: 20 epochs of 10 steps at batch 4,
/// two-layer PatchGANs of base 8, lr 2e-3, identity weight 0.5. Without the
/// identity term the small generators tend to invert object contrast while
/// still brightening the image.
pub fn toy_config(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 20,
        batch_size: 4,
        lr: 2e-3,
        lambda_idt: 0.5,
        seed,
        image_size: TOY_SIZE,
        disc_base: 8,
        disc_layers: 2,
        ..TrainConfig::default()
    }
}

/// A scene rendered twice: dark (domain A) and brightened (domain B).
#[derive(Debug, Clone, PartialEq)]
pub struct ToyScene {
    pub dark: RasterImage,
    pub bright: RasterImage,
    pub boxes: Vec<BoundingBox>,
}

struct Pattern {
    size: usize,
    /// RGB intensities in `[0, 1]`, row-major.
    pixels: Vec<[f64; 3]>,
    boxes: Vec<BoundingBox>,
}

fn tinted<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> [f64; 3] {
    let v = rng.random_range(lo..hi);
    [0, 1, 2].map(|_| (v * rng.random_range(0.9..1.1)).clamp(0.0, 1.0))
}

/// A dim background with one to three non-touching bright rectangles.
fn pattern<R: Rng + ?Sized>(rng: &mut R, size: usize) -> Pattern {
    let bg = tinted(rng, 0.1, 0.3);
    let mut pixels = vec![bg; size * size];
    let mut rects: Vec<(usize, usize, usize, usize)> = Vec::new();
    let wanted = rng.random_range(1..=3);
    let max_side = (size / 2).max(2);
    for _ in 0..20 {
        if rects.len() == wanted {
            break;
        }
        let w = rng.random_range(2.min(max_side)..=max_side);
        let h = rng.random_range(2.min(max_side)..=max_side);
        let x = rng.random_range(0..=size - w);
        let y = rng.random_range(0..=size - h);
        // keep a one-pixel gap so objects stay separate components
        let clear = rects
            .iter()
            .all(|&(rx, ry, rw, rh)| x > rx + rw || rx > x + w || y > ry + rh || ry > y + h);
        if clear {
            rects.push((x, y, w, h));
        }
    }
    let mut boxes = Vec::new();
    for &(x, y, w, h) in &rects {
        let color = tinted(rng, 0.6, 1.0);
        for row in y..y + h {
            for col in x..x + w {
                pixels[row * size + col] = color;
            }
        }
        boxes.push(BoundingBox::new(x as f64, y as f64, w as f64, h as f64).expect("positive"));
    }
    Pattern {
        size,
        pixels,
        boxes,
    }
}

fn render(p: &Pattern, f: impl Fn(f64) -> f64) -> RasterImage {
    let data = p
        .pixels
        .iter()
        .flat_map(|px| px.map(|v| to_u8(f(v) * 255.0)))
        .collect();
    RasterImage::new(p.size, p.size, 3, data).expect("consistent extent")
}

fn darken(v: f64) -> f64 {
    0.3 * v
}

fn brighten(v: f64) -> f64 {
    0.2 + 0.8 * v
}

/// `n` paired scenes, for evaluating a trained translator.
pub fn toy_scenes(n: usize, size: usize, seed: u64) -> Vec<ToyScene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let p = pattern(&mut rng, size);
            ToyScene {
                dark: render(&p, darken),
                bright: render(&p, brighten),
                boxes: p.boxes,
            }
        })
        .collect()
}

/// Two unpaired training domains of `n` images each: dark renderings and
/// bright renderings of independently drawn patterns.
pub fn toy_domains(n: usize, size: usize, seed: u64) -> (Vec<RasterImage>, Vec<RasterImage>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = (0..n)
        .map(|_| render(&pattern(&mut rng, size), darken))
        .collect();
    let b = (0..n)
        .map(|_| render(&pattern(&mut rng, size), brighten))
        .collect();
    (a, b)
}

fn luma_values(img: &RasterImage) -> Vec<f64> {
    (0..img.height())
        .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
        .map(|(x, y)| {
            let p = img.pixel(x, y);
            let yv = if img.channels() == 3 {
                rgb_to_yuv_pixel([p[0], p[1], p[2]])[0]
            } else {
                p[0]
            };
            yv as f64 / 255.0
        })
        .collect()
}

/// Mean BT.601 luma in `[0, 1]`.
pub fn mean_luma(img: &RasterImage) -> f64 {
    let l = luma_values(img);
    l.iter().sum::<f64>() / l.len() as f64
}

/// Detects bright blobs: 4-connected components of pixels with luma at or
/// above [`TOY_DETECT_LUMA`], at least four pixels large, reported as their
/// bounding boxes with the component's mean luma as score.
pub fn toy_detect(img: &RasterImage, image_id: &str) -> Vec<Detection> {
    let (w, h) = (img.width(), img.height());
    let luma = luma_values(img);
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for start in 0..w * h {
        if seen[start] || luma[start] < TOY_DETECT_LUMA {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let (mut x0, mut y0, mut x1, mut y1) = (w, h, 0, 0);
        let (mut count, mut total) = (0usize, 0.0);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            count += 1;
            total += luma[i];
            let mut visit = |j: usize| {
                if !seen[j] && luma[j] >= TOY_DETECT_LUMA {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if count < MIN_COMPONENT {
            continue;
        }
        let bbox = BoundingBox::new(
            x0 as f64,
            y0 as f64,
            (x1 - x0 + 1) as f64,
            (y1 - y0 + 1) as f64,
        )
        .expect("nonempty component");
        let score = (total / count as f64).clamp(0.0, 1.0);
        out.push(Detection::new(image_id, TOY_CLASS, bbox, score).expect("score in range"));
    }
    out
}

/// Ground truth of a scene set, with image ids `toy_{index}`.
pub fn toy_ground_truth(scenes: &[ToyScene]) -> Vec<GroundTruth> {
    scenes
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            s.boxes
                .iter()
                .map(move |b| GroundTruth::new(format!("toy_{i}"), TOY_CLASS, *b))
        })
        .collect()
}
