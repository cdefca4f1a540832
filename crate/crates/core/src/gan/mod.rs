//! CycleGAN for unpaired dark-to-bright translation.
//!
//! Generators are ResNet or U-Net stacks, discriminators are PatchGANs;
//! all are described by a [`NetworkSpec`] and run on the [`crate::tensor`]
//! engine. Images enter the networks scaled to `[-1, 1]` and leave through
//! tanh.

mod losses;
mod network;
mod pool;
mod spec;
pub mod synthetic;
mod train;
mod weights;

pub use losses::{
    cyclegan_losses, discriminator_objective, generator_objective, BoundNets, CycleGan,
    GeneratorTerms, LossValues,
};
pub use network::{forward_graph, Network, INIT_STD, NORM_EPS};
pub use pool::ImagePool;
pub use spec::{
    build_patchgan, build_patchgan_layers, build_resnet9_generator, build_unet256_generator, Layer,
    NetworkSpec,
};
pub use train::{
    init_cyclegan, metrics_csv, train, GeneratorArch, MetricRow, TrainConfig, TrainOutcome,
};
pub use weights::{load_weights, save_weights, WeightStore, WEIGHTS_MAGIC, WEIGHTS_VERSION};

use crate::error::{Error, Result};
use crate::pixelops::{to_u8, RasterImage};
use crate::tensor::Tensor;

/// `[1, 3, H, W]` tensor with samples mapped `v -> v/127.5 - 1`.
pub fn normalize_in(img: &RasterImage) -> Result<Tensor> {
    if img.channels() != 3 {
        return Err(Error::InvalidShape(format!(
            "expected a 3-channel image, got {}",
            img.channels()
        )));
    }
    let (w, h) = (img.width(), img.height());
    let mut data = vec![0.0; 3 * w * h];
    for (i, px) in img.data().chunks_exact(3).enumerate() {
        for c in 0..3 {
            data[c * w * h + i] = px[c] as f64 / 127.5 - 1.0;
        }
    }
    Tensor::new(&[1, 3, h, w], data)
}

/// Inverse of [`normalize_in`] for a `[1, 3, H, W]` tensor, clamping to
/// `[0, 255]` and rounding half away from zero.
pub fn denormalize_out(t: &Tensor) -> Result<RasterImage> {
    let [n, c, h, w] = t.dims4()?;
    if n != 1 || c != 3 {
        return Err(Error::InvalidShape(format!(
            "expected a [1, 3, H, W] tensor, got {:?}",
            t.shape()
        )));
    }
    let d = t.data();
    let mut data = vec![0u8; 3 * w * h];
    for i in 0..w * h {
        for ch in 0..3 {
            data[3 * i + ch] = to_u8((d[ch * w * h + i] + 1.0) * 127.5);
        }
    }
    RasterImage::new(w, h, 3, data)
}

/// Runs a stored generator on one image.
pub fn translate(
    weights: &WeightStore,
    spec: &NetworkSpec,
    img: &RasterImage,
) -> Result<RasterImage> {
    let net = Network::from_store(spec, weights)?;
    translate_with(&net, img)
}

/// [`translate`] for an already-built network.
pub fn translate_with(net: &Network, img: &RasterImage) -> Result<RasterImage> {
    let x = normalize_in(img)?;
    let [_, h, w] = net.spec().output_shape([3, img.height(), img.width()])?;
    if (h, w) != (img.height(), img.width()) {
        return Err(Error::InvalidConfig(format!(
            "{} maps {}x{} to {h}x{w}; not a generator for this extent",
            net.spec().name(),
            img.height(),
            img.width()
        )));
    }
    denormalize_out(&net.forward(&x)?)
}
