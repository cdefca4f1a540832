//! Fixture builders shared by the command tests and the acceptance suite.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use darksight::datasets::{write_detections, write_ppm, ClassTable};
use darksight::evalmap::{Detection, GroundTruth};
use darksight::RasterImage;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn core_fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub fn write_images(dir: &Path, prefix: &str, images: &[RasterImage]) {
    fs::create_dir_all(dir).unwrap();
    for (i, img) in images.iter().enumerate() {
        fs::write(
            dir.join(format!("{prefix}{i:03}.ppm")),
            write_ppm(img).unwrap(),
        )
        .unwrap();
    }
}

/// Writes one annotation file per image id (empty files for ids without
/// boxes) in the `class left top width height` line format.
pub fn write_annotations(dir: &Path, ids: &[String], gts: &[GroundTruth], classes: &ClassTable) {
    fs::create_dir_all(dir).unwrap();
    for id in ids {
        let mut text = String::from("% class left top width height\n");
        for g in gts.iter().filter(|g| &g.image_id == id) {
            text += &format!(
                "{} {} {} {} {}\n",
                token(classes.name(g.class_id).unwrap()),
                g.bbox.left,
                g.bbox.top,
                g.bbox.width,
                g.bbox.height
            );
        }
        fs::write(dir.join(format!("{id}.jpg.txt")), text).unwrap();
    }
}

// Annotation lines are whitespace-separated, so multi-word names use their
// one-word alias.
fn token(name: &str) -> &str {
    match name {
        "dining table" => "table",
        other => other,
    }
}

pub fn write_dets(path: &Path, dets: &[Detection], classes: &ClassTable) {
    fs::write(path, write_detections(dets, classes).unwrap()).unwrap();
}

/// A config small enough for a training run to take well under a second.
pub const TINY_CONFIG: &str = "\
arch = resnet:2:1
epochs = 2
batch_size = 2
lr = 0.002
pool_size = 4
seed = 5
image_size = 8
disc_base = 2
disc_layers = 1
";
