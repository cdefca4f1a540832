use crate::datasets::ClassTable;
use crate::error::{Error, Result};
use crate::evalmap::{BoundingBox, GroundTruth};

/// A line skipped because its class is not in the vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedLine {
    pub line: usize,
    pub class_name: String,
}

/// Parsed annotation file for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationFile {
    pub boxes: Vec<GroundTruth>,
    pub skipped: Vec<SkippedLine>,
}

/// Parses ExDark-style annotation text for image `image_id`.
///
/// Each non-comment line is `classname left top width height`, optionally
/// followed by extra fields which are ignored. Lines starting with `%` and
/// blank lines are skipped. Unknown classes are collected in
/// [`AnnotationFile::skipped`] rather than failing the file.
pub fn parse_exdark_annotations(
    text: &str,
    image_id: &str,
    classes: &ClassTable,
) -> Result<AnnotationFile> {
    let mut boxes = Vec::new();
    let mut skipped = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 5 {
            return Err(Error::Parse {
                line,
                message: format!("expected `class left top width height`, got {trimmed:?}"),
            });
        }
        let mut coords = [0.0; 4];
        for (slot, (name, field)) in coords
            .iter_mut()
            .zip(["left", "top", "width", "height"].iter().zip(&fields[1..5]))
        {
            *slot = field.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("{name} field {field:?} is not a number"),
            })?;
        }
        let bbox = BoundingBox::new(coords[0], coords[1], coords[2], coords[3]).map_err(|e| {
            Error::Parse {
                line,
                message: e.to_string(),
            }
        })?;
        match classes.resolve(fields[0]) {
            Ok(class_id) => boxes.push(GroundTruth::new(image_id, class_id, bbox)),
            Err(_) => skipped.push(SkippedLine {
                line,
                class_name: fields[0].to_string(),
            }),
        }
    }
    Ok(AnnotationFile { boxes, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ClassTable {
        ClassTable::exdark()
    }

    #[test]
    fn parses_exdark_line() {
        let text = "% bbGt version=3\nBicycle 204 28 271 193 0 0 0 0 0 0 0\n";
        let parsed = parse_exdark_annotations(text, "2015_00001", &table()).unwrap();
        assert_eq!(parsed.boxes.len(), 1);
        let gt = &parsed.boxes[0];
        assert_eq!(table().name(gt.class_id), Some("bicycle"));
        assert_eq!(gt.image_id, "2015_00001");
        assert_eq!(
            gt.bbox,
            BoundingBox::new(204.0, 28.0, 271.0, 193.0).unwrap()
        );
    }

    #[test]
    fn comment_only_file_is_empty() {
        let parsed = parse_exdark_annotations("% bbGt version=3\n\n", "x", &table()).unwrap();
        assert!(parsed.boxes.is_empty() && parsed.skipped.is_empty());
    }

    #[test]
    fn malformed_field_names_line() {
        let err = parse_exdark_annotations("% h\nPeople 5 5 10 x", "x", &table()).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("height"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_exdark_annotations("People 5 5", "x", &table()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_exdark_annotations("People 5 5 0 4", "x", &table()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn unknown_class_is_skipped_with_warning() {
        let text = "Unicorn 1 1 4 4\nDog 1 1 4 4\n";
        let parsed = parse_exdark_annotations(text, "x", &table()).unwrap();
        assert_eq!(parsed.boxes.len(), 1);
        assert_eq!(
            parsed.skipped,
            vec![SkippedLine {
                line: 1,
                class_name: "Unicorn".into()
            }]
        );
    }
}
