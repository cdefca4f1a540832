//! Low-light object detection toolkit.
//!
//! Two enhancement paths for dark images and the detection evaluation used to
//! compare them:
//!
//! - [`pixelops`]: BT.601 YCbCr conversion and luma histogram equalization.
//! - [`tensor`] and [`gan`]: a small float64 reverse-mode tensor engine and the
//!   two CycleGAN generator families (ResNet and U-Net) with a PatchGAN
//!   discriminator, trained at toy scale.
//! - [`evalmap`]: IoU matching, precision/recall, per-class AP and mAP under
//!   VOC and COCO style protocols.
//! - [`datasets`]: ExDark-style annotations, detection dumps, class mapping,
//!   and binary PPM IO.

pub mod datasets;
pub mod error;
pub mod evalmap;
pub mod gan;
pub mod pixelops;
pub mod tensor;

pub use datasets::{ClassTable, DatasetIndex};
pub use error::{Error, Result};
pub use evalmap::{BoundingBox, Detection, EvalConfig, EvalReport, GroundTruth};
pub use gan::{NetworkSpec, TrainConfig, WeightStore};
pub use pixelops::{Histogram, RasterImage};
pub use tensor::{Graph, NodeId, Tensor};
