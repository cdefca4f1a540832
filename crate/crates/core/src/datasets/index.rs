use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::datasets::{parse_exdark_annotations, read_ppm, ClassTable, SkippedLine};
use crate::error::{Error, Result};
use crate::evalmap::GroundTruth;

const IMAGE_EXTENSIONS: [&str; 5] = ["jpg", "jpeg", "png", "ppm", "bmp"];

/// Image id for an annotation or image file name: a trailing `.txt` is
/// removed, then a trailing image extension. `2015_00001.jpg.txt`,
/// `2015_00001.jpg` and `2015_00001.txt` all map to `2015_00001`.
pub fn image_id_from_file_name(name: &str) -> String {
    let stem = name.strip_suffix(".txt").unwrap_or(name);
    match stem.rsplit_once('.') {
        Some((base, ext)) if IMAGE_EXTENSIONS.contains(&ext.to_ascii_lowercase().as_str()) => {
            base.to_string()
        }
        _ => stem.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRecord {
    pub id: String,
    pub path: PathBuf,
    /// Known when the image itself was found next to the annotations.
    pub width: Option<usize>,
    pub height: Option<usize>,
}

/// Immutable set of images and their ground-truth boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetIndex {
    records: BTreeMap<String, ImageRecord>,
    ground_truth: Vec<GroundTruth>,
    warnings: Vec<(PathBuf, SkippedLine)>,
}

impl DatasetIndex {
    /// Checks that image ids are unique and every box names a known image.
    pub fn new(records: Vec<ImageRecord>, ground_truth: Vec<GroundTruth>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for r in records {
            let id = r.id.clone();
            if map.insert(id.clone(), r).is_some() {
                return Err(Error::Validation(format!("duplicate image id {id:?}")));
            }
        }
        if let Some(g) = ground_truth.iter().find(|g| !map.contains_key(&g.image_id)) {
            return Err(Error::Validation(format!(
                "ground truth references unknown image id {:?}",
                g.image_id
            )));
        }
        Ok(Self {
            records: map,
            ground_truth,
            warnings: Vec::new(),
        })
    }

    /// Loads every `*.txt` annotation file in `dir`. When `image_dir` is
    /// given, a PPM image with the same id there supplies width and height.
    pub fn load(dir: &Path, classes: &ClassTable, image_dir: Option<&Path>) -> Result<Self> {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"))
            .collect();
        files.sort();
        let mut records = Vec::new();
        let mut gts = Vec::new();
        let mut warnings = Vec::new();
        for path in files {
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default();
            let id = image_id_from_file_name(name);
            let text = fs::read_to_string(&path)?;
            let parsed = parse_exdark_annotations(&text, &id, classes).map_err(|e| match e {
                Error::Parse { line, message } => Error::Parse {
                    line,
                    message: format!("{}: {message}", path.display()),
                },
                other => other,
            })?;
            let (width, height) = match image_dir.and_then(|d| find_ppm(d, &id)) {
                Some(img_path) => {
                    let img = read_ppm(&fs::read(&img_path)?)?;
                    (Some(img.width()), Some(img.height()))
                }
                None => (None, None),
            };
            warnings.extend(parsed.skipped.into_iter().map(|s| (path.clone(), s)));
            gts.extend(parsed.boxes);
            records.push(ImageRecord {
                id,
                path,
                width,
                height,
            });
        }
        let mut index = Self::new(records, gts)?;
        index.warnings = warnings;
        Ok(index)
    }

    pub fn images(&self) -> impl Iterator<Item = &ImageRecord> {
        self.records.values()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.records.contains_key(id)
    }

    pub fn ground_truth(&self) -> &[GroundTruth] {
        &self.ground_truth
    }

    /// Annotation lines skipped for unknown classes.
    pub fn warnings(&self) -> &[(PathBuf, SkippedLine)] {
        &self.warnings
    }
}

fn find_ppm(dir: &Path, id: &str) -> Option<PathBuf> {
    let p = dir.join(format!("{id}.ppm"));
    p.is_file().then_some(p)
}
