//! Ingestion and interchange formats.
//!
//! - ExDark-style annotation text (`classname l t w h [extras...]`, `%` comments)
//! - detection dumps as JSON records `{image_id, class_name, bbox, score}`
//! - the class vocabulary shared by both, with ExDark-to-COCO aliases
//! - binary PPM (P6, maxval 255)

mod classes;
mod detections;
mod exdark;
mod index;
mod ppm;

pub use classes::{map_class_name, ClassTable, EXDARK_CLASSES};
pub use detections::{parse_detections, write_detections, ParsedDetections};
pub use exdark::{parse_exdark_annotations, AnnotationFile, SkippedLine};
pub use index::{image_id_from_file_name, DatasetIndex, ImageRecord};
pub use ppm::{read_ppm, write_ppm};
