use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tensor::kernels::{conv_out_extent, conv_transpose_out_extent};
use crate::tensor::{Activation, PadMode};

/// One entry of a layer stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layer {
    /// Convolution with bias, optionally followed by instance norm and an
    /// activation (in that order).
    Conv {
        in_ch: usize,
        out_ch: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
        pad_mode: PadMode,
        norm: bool,
        act: Option<Activation>,
    },
    /// Transposed convolution with bias, then optional norm and activation.
    ConvTranspose {
        in_ch: usize,
        out_ch: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
        norm: bool,
        act: Option<Activation>,
    },
    /// `x + IN(conv(ReLU(IN(conv(x)))))` with 3×3 reflect-padded convs.
    Residual {
        channels: usize,
    },
    MaxPool {
        kernel: usize,
        stride: usize,
    },
    /// Pushes the current activation as the skip for encoder level `level`.
    SaveSkip {
        level: usize,
    },
    /// Concatenates the saved skip of `level` after the current channels.
    ConcatSkip {
        level: usize,
    },
}

/// Declarative layer stack shared by generators and discriminators.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    name: String,
    in_ch: usize,
    base: usize,
    /// Input height and width must be multiples of this.
    extent_multiple: usize,
    layers: Vec<Layer>,
}

fn conv(in_ch: usize, out_ch: usize, kernel: usize, stride: usize, pad: usize) -> Layer {
    Layer::Conv {
        in_ch,
        out_ch,
        kernel,
        stride,
        pad,
        pad_mode: PadMode::Zero,
        norm: true,
        act: Some(Activation::Relu),
    }
}

fn with(layer: Layer, pad_mode: PadMode, norm: bool, act: Option<Activation>) -> Layer {
    match layer {
        Layer::Conv {
            in_ch,
            out_ch,
            kernel,
            stride,
            pad,
            ..
        } => Layer::Conv {
            in_ch,
            out_ch,
            kernel,
            stride,
            pad,
            pad_mode,
            norm,
            act,
        },
        other => other,
    }
}

fn check_counts(what: &str, values: &[(&str, usize)]) -> Result<()> {
    for (name, v) in values {
        if *v == 0 {
            return Err(Error::InvalidConfig(format!("{what}: {name} must be >= 1")));
        }
    }
    Ok(())
}

/// ResNet generator: 7×7 reflect stem, two stride-2 downsamplings,
/// `n_blocks` residual blocks, two stride-2 transposed convs, and a 7×7
/// reflect conv to `in_ch` with tanh.
pub fn build_resnet9_generator(in_ch: usize, base: usize, n_blocks: usize) -> Result<NetworkSpec> {
    check_counts(
        "resnet generator",
        &[("in_ch", in_ch), ("base", base), ("n_blocks", n_blocks)],
    )?;
    let relu = Some(Activation::Relu);
    let mut layers = vec![
        with(conv(in_ch, base, 7, 1, 3), PadMode::Reflect, true, relu),
        conv(base, 2 * base, 3, 2, 1),
        conv(2 * base, 4 * base, 3, 2, 1),
    ];
    layers.extend((0..n_blocks).map(|_| Layer::Residual { channels: 4 * base }));
    for (i, o) in [(4 * base, 2 * base), (2 * base, base)] {
        layers.push(Layer::ConvTranspose {
            in_ch: i,
            out_ch: o,
            kernel: 4,
            stride: 2,
            pad: 1,
            norm: true,
            act: relu,
        });
    }
    layers.push(with(
        conv(base, in_ch, 7, 1, 3),
        PadMode::Reflect,
        false,
        Some(Activation::Tanh),
    ));
    NetworkSpec::new(format!("resnet_{n_blocks}"), in_ch, base, 4, layers)
}

/// U-Net generator with `depth` max-pooled encoder levels. Level `i` has
/// `min(base·2^i, 8·base)` channels; the decoder mirrors it with stride-2
/// transposed convs and concatenates the level's skip before a 3×3 conv.
pub fn build_unet256_generator(in_ch: usize, base: usize, depth: usize) -> Result<NetworkSpec> {
    check_counts(
        "unet generator",
        &[("in_ch", in_ch), ("base", base), ("depth", depth)],
    )?;
    if depth > 16 {
        return Err(Error::InvalidConfig(format!(
            "unet depth {depth} is too large"
        )));
    }
    let width = |level: usize| (base << level.min(3)).min(8 * base);
    let leaky = Some(Activation::LEAKY);
    let mut layers = Vec::new();
    let mut ch = in_ch;
    for level in 0..depth {
        layers.push(with(
            conv(ch, width(level), 3, 1, 1),
            PadMode::Zero,
            true,
            leaky,
        ));
        layers.push(Layer::SaveSkip { level });
        layers.push(Layer::MaxPool {
            kernel: 2,
            stride: 2,
        });
        ch = width(level);
    }
    // innermost level has no norm: at 1×1 it would erase the signal
    layers.push(with(
        conv(ch, width(depth), 3, 1, 1),
        PadMode::Zero,
        false,
        leaky,
    ));
    ch = width(depth);
    for level in (0..depth).rev() {
        let w = width(level);
        layers.push(Layer::ConvTranspose {
            in_ch: ch,
            out_ch: w,
            kernel: 4,
            stride: 2,
            pad: 1,
            norm: true,
            act: Some(Activation::Relu),
        });
        layers.push(Layer::ConcatSkip { level });
        layers.push(conv(2 * w, w, 3, 1, 1));
        ch = w;
    }
    layers.push(with(
        conv(ch, in_ch, 1, 1, 0),
        PadMode::Zero,
        false,
        Some(Activation::Tanh),
    ));
    NetworkSpec::new(format!("unet_{depth}"), in_ch, base, 1 << depth, layers)
}

/// The 70×70 PatchGAN: three stride-2 layers.
pub fn build_patchgan(in_ch: usize, base: usize) -> Result<NetworkSpec> {
    build_patchgan_layers(in_ch, base, 3)
}

/// PatchGAN with `n_layers` stride-2 convs (3 gives the 70×70 receptive
/// field). Fewer layers suit inputs too small for three halvings.
pub fn build_patchgan_layers(in_ch: usize, base: usize, n_layers: usize) -> Result<NetworkSpec> {
    check_counts(
        "patchgan",
        &[("in_ch", in_ch), ("base", base), ("n_layers", n_layers)],
    )?;
    let leaky = Some(Activation::LEAKY);
    let width = |i: usize| (base << i.min(3)).min(8 * base);
    let mut layers = vec![with(
        conv(in_ch, base, 4, 2, 1),
        PadMode::Zero,
        false,
        leaky,
    )];
    for i in 1..n_layers {
        layers.push(with(
            conv(width(i - 1), width(i), 4, 2, 1),
            PadMode::Zero,
            true,
            leaky,
        ));
    }
    layers.push(with(
        conv(width(n_layers - 1), width(n_layers), 4, 1, 1),
        PadMode::Zero,
        true,
        leaky,
    ));
    layers.push(with(
        conv(width(n_layers), 1, 4, 1, 1),
        PadMode::Zero,
        false,
        None,
    ));
    NetworkSpec::new(format!("patchgan_{n_layers}"), in_ch, base, 1, layers)
}

impl NetworkSpec {
    /// Validates channel flow and skip links of a layer stack.
    pub fn new(
        name: impl Into<String>,
        in_ch: usize,
        base: usize,
        extent_multiple: usize,
        layers: Vec<Layer>,
    ) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            in_ch,
            base,
            extent_multiple: extent_multiple.max(1),
            layers,
        };
        spec.channel_flow()?;
        Ok(spec)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn in_channels(&self) -> usize {
        self.in_ch
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn extent_multiple(&self) -> usize {
        self.extent_multiple
    }

    /// Output channels, checking every layer's input channel count and that
    /// each skip is saved once, consumed once, and consumed in reverse order.
    fn channel_flow(&self) -> Result<usize> {
        let mut ch = self.in_ch;
        let mut skips: Vec<(usize, usize)> = Vec::new();
        let mut seen = Vec::new();
        let mismatch = |i: usize, want: usize, got: usize| {
            Error::InvalidConfig(format!(
                "layer {i} expects {want} input channels, stack provides {got}"
            ))
        };
        for (i, layer) in self.layers.iter().enumerate() {
            match *layer {
                Layer::Conv { in_ch, out_ch, .. } | Layer::ConvTranspose { in_ch, out_ch, .. } => {
                    if in_ch != ch {
                        return Err(mismatch(i, in_ch, ch));
                    }
                    if out_ch == 0 {
                        return Err(Error::InvalidConfig(format!("layer {i} has 0 outputs")));
                    }
                    ch = out_ch;
                }
                Layer::Residual { channels } => {
                    if channels != ch {
                        return Err(mismatch(i, channels, ch));
                    }
                }
                Layer::MaxPool { .. } => {}
                Layer::SaveSkip { level } => {
                    if seen.contains(&level) {
                        return Err(Error::InvalidConfig(format!("skip {level} saved twice")));
                    }
                    seen.push(level);
                    skips.push((level, ch));
                }
                Layer::ConcatSkip { level } => match skips.pop() {
                    Some((saved, sch)) if saved == level => ch += sch,
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "layer {i} concatenates skip {level}, which is not the innermost open level"
                        )))
                    }
                },
            }
        }
        if let Some((level, _)) = skips.pop() {
            return Err(Error::InvalidConfig(format!(
                "skip {level} is never consumed"
            )));
        }
        Ok(ch)
    }

    /// Checks the divisibility precondition on an input extent.
    pub fn check_extent(&self, height: usize, width: usize) -> Result<()> {
        let m = self.extent_multiple;
        if height == 0 || width == 0 || !height.is_multiple_of(m) || !width.is_multiple_of(m) {
            return Err(Error::InvalidConfig(format!(
                "{}: input {height}x{width} is not divisible by {m}",
                self.name
            )));
        }
        Ok(())
    }

    /// Output `[C, H, W]` for an input `[C, H, W]`, by shape algebra alone.
    pub fn output_shape(&self, input: [usize; 3]) -> Result<[usize; 3]> {
        let [c, mut h, mut w] = input;
        if c != self.in_ch {
            return Err(Error::InvalidShape(format!(
                "{} expects {} channels, got {c}",
                self.name, self.in_ch
            )));
        }
        self.check_extent(h, w)?;
        let mut ch = c;
        let mut skips = Vec::new();
        for layer in &self.layers {
            match *layer {
                Layer::Conv {
                    out_ch,
                    kernel,
                    stride,
                    pad,
                    pad_mode,
                    ..
                } => {
                    if pad_mode == PadMode::Reflect && (pad >= h || pad >= w) {
                        return Err(Error::InvalidShape(format!(
                            "reflect pad {pad} needs extent > {pad}, got {h}x{w}"
                        )));
                    }
                    h = conv_out_extent(h, kernel, stride, pad)?;
                    w = conv_out_extent(w, kernel, stride, pad)?;
                    ch = out_ch;
                }
                Layer::ConvTranspose {
                    out_ch,
                    kernel,
                    stride,
                    pad,
                    ..
                } => {
                    h = conv_transpose_out_extent(h, kernel, stride, pad)?;
                    w = conv_transpose_out_extent(w, kernel, stride, pad)?;
                    ch = out_ch;
                }
                Layer::Residual { .. } => {
                    if h < 2 || w < 2 {
                        return Err(Error::InvalidShape(format!(
                            "residual block needs extent >= 2, got {h}x{w}"
                        )));
                    }
                }
                Layer::MaxPool { kernel, stride } => {
                    h = conv_out_extent(h, kernel, stride, 0)?;
                    w = conv_out_extent(w, kernel, stride, 0)?;
                }
                Layer::SaveSkip { .. } => skips.push((ch, h, w)),
                Layer::ConcatSkip { .. } => {
                    let (sc, sh, sw) = skips.pop().expect("validated at construction");
                    if (sh, sw) != (h, w) {
                        return Err(Error::InvalidShape(format!(
                            "skip is {sh}x{sw} but decoder is at {h}x{w}"
                        )));
                    }
                    ch += sc;
                }
            }
        }
        Ok([ch, h, w])
    }

    /// Receptive field (in input pixels) of one output unit along an axis,
    /// ignoring the spatial coupling of instance norm.
    pub fn receptive_field(&self) -> usize {
        self.layers.iter().rev().fold(1, |rf, layer| match *layer {
            Layer::Conv { kernel, stride, .. } | Layer::MaxPool { kernel, stride } => {
                (rf - 1) * stride + kernel
            }
            Layer::Residual { .. } => rf + 4,
            _ => rf,
        })
    }

    /// Parameter names and shapes in canonical order.
    pub fn parameters(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let p = format!("layers.{i}");
            let norm_params = |out: &mut Vec<(String, Vec<usize>)>, prefix: &str, c: usize| {
                out.push((format!("{prefix}.gamma"), vec![c]));
                out.push((format!("{prefix}.beta"), vec![c]));
            };
            match *layer {
                Layer::Conv {
                    in_ch,
                    out_ch,
                    kernel,
                    norm,
                    ..
                } => {
                    out.push((format!("{p}.weight"), vec![out_ch, in_ch, kernel, kernel]));
                    out.push((format!("{p}.bias"), vec![out_ch]));
                    if norm {
                        norm_params(&mut out, &format!("{p}.norm"), out_ch);
                    }
                }
                Layer::ConvTranspose {
                    in_ch,
                    out_ch,
                    kernel,
                    norm,
                    ..
                } => {
                    out.push((format!("{p}.weight"), vec![in_ch, out_ch, kernel, kernel]));
                    out.push((format!("{p}.bias"), vec![out_ch]));
                    if norm {
                        norm_params(&mut out, &format!("{p}.norm"), out_ch);
                    }
                }
                Layer::Residual { channels: c } => {
                    for j in 1..=2 {
                        out.push((format!("{p}.conv{j}.weight"), vec![c, c, 3, 3]));
                        out.push((format!("{p}.conv{j}.bias"), vec![c]));
                        norm_params(&mut out, &format!("{p}.norm{j}"), c);
                    }
                }
                Layer::MaxPool { .. } | Layer::SaveSkip { .. } | Layer::ConcatSkip { .. } => {}
            }
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters()
            .iter()
            .map(|(_, s)| s.iter().product::<usize>())
            .sum()
    }

    /// Canonical text description; the fingerprint hashes exactly this.
    pub fn describe(&self) -> String {
        let mut s = format!(
            "{} in_ch={} base={} multiple={}\n",
            self.name, self.in_ch, self.base, self.extent_multiple
        );
        for layer in &self.layers {
            s.push_str(&describe_layer(layer));
            s.push('\n');
        }
        s
    }

    /// First eight bytes (little-endian) of the SHA-256 of [`describe`](Self::describe).
    pub fn fingerprint(&self) -> u64 {
        let digest = Sha256::digest(self.describe().as_bytes());
        u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }
}

fn describe_act(act: Option<Activation>) -> String {
    match act {
        None => "none".into(),
        Some(Activation::Relu) => "relu".into(),
        Some(Activation::Tanh) => "tanh".into(),
        Some(Activation::LeakyRelu(s)) => format!("leaky({s})"),
    }
}

fn describe_layer(layer: &Layer) -> String {
    match *layer {
        Layer::Conv {
            in_ch,
            out_ch,
            kernel,
            stride,
            pad,
            pad_mode,
            norm,
            act,
        } => format!(
            "conv {in_ch}->{out_ch} k{kernel} s{stride} p{pad} {} norm={norm} act={}",
            match pad_mode {
                PadMode::Zero => "zero",
                PadMode::Reflect => "reflect",
            },
            describe_act(act)
        ),
        Layer::ConvTranspose {
            in_ch,
            out_ch,
            kernel,
            stride,
            pad,
            norm,
            act,
        } => format!(
            "convT {in_ch}->{out_ch} k{kernel} s{stride} p{pad} norm={norm} act={}",
            describe_act(act)
        ),
        Layer::Residual { channels } => format!("residual {channels}"),
        Layer::MaxPool { kernel, stride } => format!("maxpool k{kernel} s{stride}"),
        Layer::SaveSkip { level } => format!("save {level}"),
        Layer::ConcatSkip { level } => format!("concat {level}"),
    }
}
