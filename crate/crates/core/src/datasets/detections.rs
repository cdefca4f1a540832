use serde::{Deserialize, Serialize};

use crate::datasets::ClassTable;
use crate::error::{Error, Result};
use crate::evalmap::{BoundingBox, Detection};

/// One record of the detections interchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionRecord {
    image_id: String,
    class_name: String,
    /// `[left, top, width, height]` in pixels.
    bbox: [f64; 4],
    score: f64,
}

/// Detections plus the class names that were outside the vocabulary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedDetections {
    pub detections: Vec<Detection>,
    /// `(record index, class name)` of dropped records.
    pub unknown_classes: Vec<(usize, String)>,
}

/// Parses a JSON array of `{image_id, class_name, bbox: [l, t, w, h], score}`.
///
/// Records whose class is not in `classes` are dropped and listed in
/// [`ParsedDetections::unknown_classes`]; a detector trained on a larger
/// vocabulary emits such classes routinely.
pub fn parse_detections(text: &str, classes: &ClassTable) -> Result<ParsedDetections> {
    let records: Vec<DetectionRecord> = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let mut out = ParsedDetections::default();
    for (i, r) in records.into_iter().enumerate() {
        let [l, t, w, h] = r.bbox;
        let bbox = BoundingBox::new(l, t, w, h)
            .map_err(|e| Error::Validation(format!("record {i}: {e}")))?;
        if !(0.0..=1.0).contains(&r.score) {
            return Err(Error::Validation(format!(
                "record {i}: score {} outside [0, 1]",
                r.score
            )));
        }
        match classes.resolve(&r.class_name) {
            Ok(class_id) => out
                .detections
                .push(Detection::new(r.image_id, class_id, bbox, r.score)?),
            Err(_) => out.unknown_classes.push((i, r.class_name)),
        }
    }
    Ok(out)
}

/// Serializes detections to the interchange format.
pub fn write_detections(dets: &[Detection], classes: &ClassTable) -> Result<String> {
    let records = dets
        .iter()
        .map(|d| {
            let class_name = classes
                .name(d.class_id)
                .ok_or_else(|| Error::NoMapping(d.class_id.to_string()))?;
            Ok(DetectionRecord {
                image_id: d.image_id.clone(),
                class_name: class_name.to_string(),
                bbox: [d.bbox.left, d.bbox.top, d.bbox.width, d.bbox.height],
                score: d.score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(serde_json::to_string_pretty(&records).expect("records serialize"))
}
