//! Forward and backward math for each differentiable primitive.
//!
//! These work on plain [`Tensor`]s and are shared by the graph and by tests
//! that check them in isolation.

use crate::error::{Error, Result};
use crate::tensor::{same_shape, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PadMode {
    Zero,
    Reflect,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Relu,
    LeakyRelu(f64),
    Tanh,
}

impl Activation {
    /// Leaky ReLU with slope 0.2 on the negative side.
    pub const LEAKY: Activation = Activation::LeakyRelu(0.2);

    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::LeakyRelu(slope) => {
                if v > 0.0 {
                    v
                } else {
                    slope * v
                }
            }
            Activation::Tanh => v.tanh(),
        }
    }

    /// Derivative given the pre-activation input and the output.
    fn derivative(self, input: f64, output: f64) -> f64 {
        match self {
            Activation::Relu => {
                if input > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu(slope) => {
                if input > 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            Activation::Tanh => 1.0 - output * output,
        }
    }
}

/// Convolution geometry shared by the forward and backward passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeometry {
    pub stride: usize,
    pub pad: usize,
    pub pad_mode: PadMode,
}

impl ConvGeometry {
    pub fn new(stride: usize, pad: usize, pad_mode: PadMode) -> Self {
        Self {
            stride,
            pad,
            pad_mode,
        }
    }
}

/// Output extent of a convolution along one axis.
pub fn conv_out_extent(input: usize, kernel: usize, stride: usize, pad: usize) -> Result<usize> {
    if stride == 0 {
        return Err(Error::InvalidShape("stride must be >= 1".into()));
    }
    let padded = input + 2 * pad;
    if kernel == 0 || kernel > padded {
        return Err(Error::InvalidShape(format!(
            "kernel {kernel} does not fit padded extent {padded}"
        )));
    }
    Ok((padded - kernel) / stride + 1)
}

/// Output extent of a transposed convolution along one axis.
pub fn conv_transpose_out_extent(
    input: usize,
    kernel: usize,
    stride: usize,
    pad: usize,
) -> Result<usize> {
    if stride == 0 || kernel == 0 {
        return Err(Error::InvalidShape("stride and kernel must be >= 1".into()));
    }
    let full = (input - 1) * stride + kernel;
    if full <= 2 * pad {
        return Err(Error::InvalidShape(format!(
            "transposed convolution with pad {pad} leaves no output from extent {full}"
        )));
    }
    Ok(full - 2 * pad)
}

/// Source index of padded coordinate `i` (which may lie in the border).
fn pad_source(i: isize, len: usize, mode: PadMode) -> Option<usize> {
    let n = len as isize;
    if (0..n).contains(&i) {
        return Some(i as usize);
    }
    match mode {
        PadMode::Zero => None,
        PadMode::Reflect => {
            let r = if i < 0 { -i } else { 2 * (n - 1) - i };
            Some(r as usize)
        }
    }
}

/// Per-axis map from padded coordinate to source coordinate.
fn pad_map(len: usize, pad: usize, mode: PadMode) -> Vec<Option<usize>> {
    (0..len + 2 * pad)
        .map(|i| pad_source(i as isize - pad as isize, len, mode))
        .collect()
}

fn pad_planes(x: &Tensor, geom: ConvGeometry) -> Result<(Vec<f64>, usize, usize)> {
    let [n, c, h, w] = x.dims4()?;
    let p = geom.pad;
    if geom.pad_mode == PadMode::Reflect && (p >= h || p >= w) {
        return Err(Error::InvalidShape(format!(
            "reflect pad {p} needs spatial extents > {p}, got {h}x{w}"
        )));
    }
    if p == 0 {
        return Ok((x.data().to_vec(), h, w));
    }
    let (hp, wp) = (h + 2 * p, w + 2 * p);
    let rows = pad_map(h, p, geom.pad_mode);
    let cols = pad_map(w, p, geom.pad_mode);
    let src = x.data();
    let mut out = vec![0.0; n * c * hp * wp];
    for plane in 0..n * c {
        let sp = &src[plane * h * w..(plane + 1) * h * w];
        let dp = &mut out[plane * hp * wp..(plane + 1) * hp * wp];
        for (i, ri) in rows.iter().enumerate() {
            let Some(ri) = ri else { continue };
            for (j, cj) in cols.iter().enumerate() {
                if let Some(cj) = cj {
                    dp[i * wp + j] = sp[ri * w + cj];
                }
            }
        }
    }
    Ok((out, hp, wp))
}

/// Folds a gradient w.r.t. the padded input back onto the unpadded input.
fn unpad_grad(gp: &[f64], dims: [usize; 4], geom: ConvGeometry) -> Vec<f64> {
    let [n, c, h, w] = dims;
    let p = geom.pad;
    if p == 0 {
        return gp.to_vec();
    }
    let (hp, wp) = (h + 2 * p, w + 2 * p);
    let rows = pad_map(h, p, geom.pad_mode);
    let cols = pad_map(w, p, geom.pad_mode);
    let mut out = vec![0.0; n * c * h * w];
    for plane in 0..n * c {
        let sp = &gp[plane * hp * wp..(plane + 1) * hp * wp];
        let dp = &mut out[plane * h * w..(plane + 1) * h * w];
        for (i, ri) in rows.iter().enumerate() {
            let Some(ri) = ri else { continue };
            for (j, cj) in cols.iter().enumerate() {
                if let Some(cj) = cj {
                    dp[ri * w + cj] += sp[i * wp + j];
                }
            }
        }
    }
    out
}

fn check_bias(bias: Option<&Tensor>, channels: usize) -> Result<()> {
    if let Some(b) = bias {
        if b.shape() != [channels] {
            return Err(Error::InvalidShape(format!(
                "bias shape {:?} does not match {channels} output channels",
                b.shape()
            )));
        }
    }
    Ok(())
}

/// 2-D cross-correlation. `x` is `[N, Cin, H, W]`, `k` is `[Cout, Cin, kh, kw]`.
pub fn conv2d(x: &Tensor, k: &Tensor, bias: Option<&Tensor>, geom: ConvGeometry) -> Result<Tensor> {
    let [n, cin, h, w] = x.dims4()?;
    let [cout, kcin, kh, kw] = k.dims4()?;
    if kcin != cin {
        return Err(Error::InvalidShape(format!(
            "conv2d: input has {cin} channels, kernel expects {kcin}"
        )));
    }
    check_bias(bias, cout)?;
    let ho = conv_out_extent(h, kh, geom.stride, geom.pad)?;
    let wo = conv_out_extent(w, kw, geom.stride, geom.pad)?;
    let (xp, hp, wp) = pad_planes(x, geom)?;
    let s = geom.stride;
    let kd = k.data();
    let mut out = vec![0.0; n * cout * ho * wo];
    for b in 0..n {
        for co in 0..cout {
            let op = &mut out[(b * cout + co) * ho * wo..(b * cout + co + 1) * ho * wo];
            if let Some(bias) = bias {
                op.fill(bias.data()[co]);
            }
            for ci in 0..cin {
                let xplane = &xp[(b * cin + ci) * hp * wp..(b * cin + ci + 1) * hp * wp];
                for ki in 0..kh {
                    for kj in 0..kw {
                        let wv = kd[((co * cin + ci) * kh + ki) * kw + kj];
                        for oh in 0..ho {
                            let row = &xplane[(oh * s + ki) * wp + kj..];
                            let orow = &mut op[oh * wo..(oh + 1) * wo];
                            for (ow, o) in orow.iter_mut().enumerate() {
                                *o += wv * row[ow * s];
                            }
                        }
                    }
                }
            }
        }
    }
    Tensor::new(&[n, cout, ho, wo], out)
}

/// Gradients of [`conv2d`] given the upstream gradient `g`.
/// Returns `(dx, dk, dbias)`; `dx` is skipped unless `need_x`.
pub fn conv2d_backward(
    x: &Tensor,
    k: &Tensor,
    g: &Tensor,
    geom: ConvGeometry,
    need_x: bool,
) -> Result<(Option<Tensor>, Tensor, Tensor)> {
    let dims = x.dims4()?;
    let [n, cin, _, _] = dims;
    let [cout, _, kh, kw] = k.dims4()?;
    let [_, _, ho, wo] = g.dims4()?;
    let (xp, hp, wp) = pad_planes(x, geom)?;
    let s = geom.stride;
    let kd = k.data();
    let gd = g.data();
    let mut dk = vec![0.0; k.numel()];
    let mut dxp = if need_x {
        vec![0.0; xp.len()]
    } else {
        Vec::new()
    };
    let mut db = vec![0.0; cout];
    for b in 0..n {
        for co in 0..cout {
            let gp = &gd[(b * cout + co) * ho * wo..(b * cout + co + 1) * ho * wo];
            db[co] += gp.iter().sum::<f64>();
            for ci in 0..cin {
                let base = (b * cin + ci) * hp * wp;
                for ki in 0..kh {
                    for kj in 0..kw {
                        let widx = ((co * cin + ci) * kh + ki) * kw + kj;
                        let mut acc = 0.0;
                        for oh in 0..ho {
                            let off = base + (oh * s + ki) * wp + kj;
                            let grow = &gp[oh * wo..(oh + 1) * wo];
                            for (ow, gv) in grow.iter().enumerate() {
                                acc += gv * xp[off + ow * s];
                            }
                        }
                        dk[widx] += acc;
                        if need_x {
                            let wv = kd[widx];
                            for oh in 0..ho {
                                let off = base + (oh * s + ki) * wp + kj;
                                let grow = &gp[oh * wo..(oh + 1) * wo];
                                for (ow, gv) in grow.iter().enumerate() {
                                    dxp[off + ow * s] += wv * gv;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let dx = if need_x {
        Some(Tensor::new(x.shape(), unpad_grad(&dxp, dims, geom))?)
    } else {
        None
    };
    Ok((dx, Tensor::new(k.shape(), dk)?, Tensor::new(&[cout], db)?))
}

/// Transposed convolution (the adjoint of [`conv2d`] with zero padding).
/// `x` is `[N, Cin, H, W]`, `k` is `[Cin, Cout, kh, kw]`.
pub fn conv_transpose2d(
    x: &Tensor,
    k: &Tensor,
    bias: Option<&Tensor>,
    stride: usize,
    pad: usize,
) -> Result<Tensor> {
    let [n, cin, h, w] = x.dims4()?;
    let [kcin, cout, kh, kw] = k.dims4()?;
    if kcin != cin {
        return Err(Error::InvalidShape(format!(
            "conv_transpose2d: input has {cin} channels, kernel expects {kcin}"
        )));
    }
    check_bias(bias, cout)?;
    let ho = conv_transpose_out_extent(h, kh, stride, pad)?;
    let wo = conv_transpose_out_extent(w, kw, stride, pad)?;
    let (hf, wf) = ((h - 1) * stride + kh, (w - 1) * stride + kw);
    let xd = x.data();
    let kd = k.data();
    let mut full = vec![0.0; hf * wf];
    let mut out = vec![0.0; n * cout * ho * wo];
    for b in 0..n {
        for co in 0..cout {
            full.fill(0.0);
            for ci in 0..cin {
                let xplane = &xd[(b * cin + ci) * h * w..(b * cin + ci + 1) * h * w];
                for ki in 0..kh {
                    for kj in 0..kw {
                        let wv = kd[((ci * cout + co) * kh + ki) * kw + kj];
                        for ih in 0..h {
                            let frow = &mut full[(ih * stride + ki) * wf + kj..];
                            for (iw, xv) in xplane[ih * w..(ih + 1) * w].iter().enumerate() {
                                frow[iw * stride] += wv * xv;
                            }
                        }
                    }
                }
            }
            let bv = bias.map_or(0.0, |b| b.data()[co]);
            let op = &mut out[(b * cout + co) * ho * wo..(b * cout + co + 1) * ho * wo];
            for oh in 0..ho {
                for ow in 0..wo {
                    op[oh * wo + ow] = full[(oh + pad) * wf + ow + pad] + bv;
                }
            }
        }
    }
    Tensor::new(&[n, cout, ho, wo], out)
}

/// Gradients of [`conv_transpose2d`]: `(dx, dk, dbias)`.
pub fn conv_transpose2d_backward(
    x: &Tensor,
    k: &Tensor,
    g: &Tensor,
    stride: usize,
    pad: usize,
    need_x: bool,
) -> Result<(Option<Tensor>, Tensor, Tensor)> {
    let [n, cin, h, w] = x.dims4()?;
    let [_, cout, kh, kw] = k.dims4()?;
    let [_, _, ho, wo] = g.dims4()?;
    let (hf, wf) = ((h - 1) * stride + kh, (w - 1) * stride + kw);
    let xd = x.data();
    let kd = k.data();
    let gd = g.data();
    let mut dx = if need_x {
        vec![0.0; x.numel()]
    } else {
        Vec::new()
    };
    let mut dk = vec![0.0; k.numel()];
    let mut db = vec![0.0; cout];
    let mut gfull = vec![0.0; hf * wf];
    for b in 0..n {
        for co in 0..cout {
            let gp = &gd[(b * cout + co) * ho * wo..(b * cout + co + 1) * ho * wo];
            db[co] += gp.iter().sum::<f64>();
            for oh in 0..ho {
                for ow in 0..wo {
                    gfull[(oh + pad) * wf + ow + pad] = gp[oh * wo + ow];
                }
            }
            for ci in 0..cin {
                let xoff = (b * cin + ci) * h * w;
                for ki in 0..kh {
                    for kj in 0..kw {
                        let widx = ((ci * cout + co) * kh + ki) * kw + kj;
                        let wv = kd[widx];
                        let mut acc = 0.0;
                        for ih in 0..h {
                            let frow = &gfull[(ih * stride + ki) * wf + kj..];
                            for iw in 0..w {
                                let gv = frow[iw * stride];
                                acc += gv * xd[xoff + ih * w + iw];
                                if need_x {
                                    dx[xoff + ih * w + iw] += wv * gv;
                                }
                            }
                        }
                        dk[widx] += acc;
                    }
                }
            }
        }
    }
    let dx = if need_x {
        Some(Tensor::new(x.shape(), dx)?)
    } else {
        None
    };
    Ok((dx, Tensor::new(k.shape(), dk)?, Tensor::new(&[cout], db)?))
}

/// Values saved by [`instance_norm`] for its backward pass.
#[derive(Debug, Clone)]
pub struct InstanceNormCache {
    pub normalized: Tensor,
    pub inv_std: Vec<f64>,
}

/// Per-(sample, channel) normalization over the spatial extent with biased
/// variance, followed by a per-channel affine map.
pub fn instance_norm(
    x: &Tensor,
    gamma: &Tensor,
    beta: &Tensor,
    eps: f64,
) -> Result<(Tensor, InstanceNormCache)> {
    let [n, c, h, w] = x.dims4()?;
    if gamma.shape() != [c] || beta.shape() != [c] {
        return Err(Error::InvalidShape(format!(
            "instance_norm: affine parameters must have shape [{c}]"
        )));
    }
    let hw = h * w;
    let xd = x.data();
    let mut xhat = vec![0.0; xd.len()];
    let mut out = vec![0.0; xd.len()];
    let mut inv_std = vec![0.0; n * c];
    for plane in 0..n * c {
        let ch = plane % c;
        let xs = &xd[plane * hw..(plane + 1) * hw];
        let mean = xs.iter().sum::<f64>() / hw as f64;
        let var = xs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / hw as f64;
        let istd = 1.0 / (var + eps).sqrt();
        inv_std[plane] = istd;
        let (g, b) = (gamma.data()[ch], beta.data()[ch]);
        for i in 0..hw {
            let nv = (xs[i] - mean) * istd;
            xhat[plane * hw + i] = nv;
            out[plane * hw + i] = nv * g + b;
        }
    }
    Ok((
        Tensor::new(x.shape(), out)?,
        InstanceNormCache {
            normalized: Tensor::new(x.shape(), xhat)?,
            inv_std,
        },
    ))
}

/// Gradients of [`instance_norm`]: `(dx, dgamma, dbeta)`.
pub fn instance_norm_backward(
    g: &Tensor,
    gamma: &Tensor,
    cache: &InstanceNormCache,
) -> Result<(Tensor, Tensor, Tensor)> {
    let [n, c, h, w] = g.dims4()?;
    let hw = h * w;
    let gd = g.data();
    let xhat = cache.normalized.data();
    let mut dx = vec![0.0; gd.len()];
    let mut dgamma = vec![0.0; c];
    let mut dbeta = vec![0.0; c];
    for plane in 0..n * c {
        let ch = plane % c;
        let gs = &gd[plane * hw..(plane + 1) * hw];
        let xs = &xhat[plane * hw..(plane + 1) * hw];
        let sum_g: f64 = gs.iter().sum();
        let sum_gx: f64 = gs.iter().zip(xs).map(|(a, b)| a * b).sum();
        dgamma[ch] += sum_gx;
        dbeta[ch] += sum_g;
        let scale = gamma.data()[ch] * cache.inv_std[plane];
        let (mg, mgx) = (sum_g / hw as f64, sum_gx / hw as f64);
        for i in 0..hw {
            dx[plane * hw + i] = scale * (gs[i] - mg - xs[i] * mgx);
        }
    }
    Ok((
        Tensor::new(g.shape(), dx)?,
        Tensor::new(&[c], dgamma)?,
        Tensor::new(&[c], dbeta)?,
    ))
}

pub fn activation(x: &Tensor, kind: Activation) -> Tensor {
    x.map(|v| kind.apply(v))
}

pub fn activation_backward(x: &Tensor, y: &Tensor, g: &Tensor, kind: Activation) -> Tensor {
    let data = x
        .data()
        .iter()
        .zip(y.data())
        .zip(g.data())
        .map(|((&xi, &yi), &gi)| gi * kind.derivative(xi, yi))
        .collect();
    Tensor::new(x.shape(), data).expect("same shape")
}

/// Window maximum without padding. Also returns, for each output element, the
/// flat input index that produced it (first in row-major window order on
/// ties).
pub fn max_pool2d(x: &Tensor, kernel: usize, stride: usize) -> Result<(Tensor, Vec<usize>)> {
    let [n, c, h, w] = x.dims4()?;
    if kernel == 0 || kernel > h || kernel > w {
        return Err(Error::InvalidShape(format!(
            "max_pool2d: window {kernel} does not fit {h}x{w}"
        )));
    }
    let ho = conv_out_extent(h, kernel, stride, 0)?;
    let wo = conv_out_extent(w, kernel, stride, 0)?;
    let xd = x.data();
    let mut out = Vec::with_capacity(n * c * ho * wo);
    let mut argmax = Vec::with_capacity(n * c * ho * wo);
    for plane in 0..n * c {
        let base = plane * h * w;
        for oh in 0..ho {
            for ow in 0..wo {
                let mut best = base + oh * stride * w + ow * stride;
                for ki in 0..kernel {
                    for kj in 0..kernel {
                        let idx = base + (oh * stride + ki) * w + ow * stride + kj;
                        if xd[idx] > xd[best] {
                            best = idx;
                        }
                    }
                }
                out.push(xd[best]);
                argmax.push(best);
            }
        }
    }
    Ok((Tensor::new(&[n, c, ho, wo], out)?, argmax))
}

pub fn max_pool2d_backward(input_shape: &[usize], argmax: &[usize], g: &Tensor) -> Tensor {
    let mut dx = Tensor::zeros(input_shape);
    for (&idx, &gv) in argmax.iter().zip(g.data()) {
        dx.data_mut()[idx] += gv;
    }
    dx
}

/// Concatenation along the channel axis.
pub fn concat_channels(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let [n, ca, h, w] = a.dims4()?;
    let [nb, cb, hb, wb] = b.dims4()?;
    if (n, h, w) != (nb, hb, wb) {
        return Err(Error::InvalidShape(format!(
            "concat: {:?} and {:?} differ outside the channel axis",
            a.shape(),
            b.shape()
        )));
    }
    let (la, lb) = (ca * h * w, cb * h * w);
    let mut out = Vec::with_capacity(a.numel() + b.numel());
    for i in 0..n {
        out.extend_from_slice(&a.data()[i * la..(i + 1) * la]);
        out.extend_from_slice(&b.data()[i * lb..(i + 1) * lb]);
    }
    Tensor::new(&[n, ca + cb, h, w], out)
}

/// Splits a channel-axis gradient back into the two concatenated parts.
pub fn concat_channels_backward(g: &Tensor, ca: usize) -> Result<(Tensor, Tensor)> {
    let [n, c, h, w] = g.dims4()?;
    let cb = c - ca;
    let (la, lb) = (ca * h * w, cb * h * w);
    let mut ga = Vec::with_capacity(n * la);
    let mut gb = Vec::with_capacity(n * lb);
    for i in 0..n {
        let chunk = &g.data()[i * (la + lb)..(i + 1) * (la + lb)];
        ga.extend_from_slice(&chunk[..la]);
        gb.extend_from_slice(&chunk[la..]);
    }
    Ok((
        Tensor::new(&[n, ca, h, w], ga)?,
        Tensor::new(&[n, cb, h, w], gb)?,
    ))
}

/// Mean absolute difference.
pub fn l1_loss(a: &Tensor, b: &Tensor) -> Result<f64> {
    same_shape(a, b, "l1_loss")?;
    let s: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(s / a.numel() as f64)
}

/// Mean squared difference.
pub fn mse_loss(a: &Tensor, b: &Tensor) -> Result<f64> {
    same_shape(a, b, "mse_loss")?;
    let s: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(s / a.numel() as f64)
}

/// Gradient of [`l1_loss`] w.r.t. `a`, scaled by `upstream`.
pub fn l1_loss_backward(a: &Tensor, b: &Tensor, upstream: f64) -> Tensor {
    let scale = upstream / a.numel() as f64;
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| {
            if x > y {
                scale
            } else if x < y {
                -scale
            } else {
                0.0
            }
        })
        .collect();
    Tensor::new(a.shape(), data).expect("same shape")
}

/// Gradient of [`mse_loss`] w.r.t. `a`, scaled by `upstream`.
pub fn mse_loss_backward(a: &Tensor, b: &Tensor, upstream: f64) -> Tensor {
    let scale = 2.0 * upstream / a.numel() as f64;
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| scale * (x - y))
        .collect();
    Tensor::new(a.shape(), data).expect("same shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geom(stride: usize, pad: usize) -> ConvGeometry {
        ConvGeometry::new(stride, pad, PadMode::Zero)
    }

    /// Straight six-deep loop with explicit bounds checks for padding.
    fn naive_conv(x: &Tensor, k: &Tensor, b: &Tensor, stride: usize, pad: usize) -> Tensor {
        let [n, cin, h, w] = x.dims4().unwrap();
        let [cout, _, kh, kw] = k.dims4().unwrap();
        let ho = (h + 2 * pad - kh) / stride + 1;
        let wo = (w + 2 * pad - kw) / stride + 1;
        let mut out = Tensor::zeros(&[n, cout, ho, wo]);
        for bi in 0..n {
            for co in 0..cout {
                for oh in 0..ho {
                    for ow in 0..wo {
                        let mut acc = b.data()[co];
                        for ci in 0..cin {
                            for ki in 0..kh {
                                for kj in 0..kw {
                                    let ih = (oh * stride + ki) as isize - pad as isize;
                                    let iw = (ow * stride + kj) as isize - pad as isize;
                                    if ih < 0 || iw < 0 || ih >= h as isize || iw >= w as isize {
                                        continue;
                                    }
                                    let xi = ((bi * cin + ci) * h + ih as usize) * w + iw as usize;
                                    let wi = ((co * cin + ci) * kh + ki) * kw + kj;
                                    acc += x.data()[xi] * k.data()[wi];
                                }
                            }
                        }
                        out.data_mut()[((bi * cout + co) * ho + oh) * wo + ow] = acc;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn conv_all_ones() {
        let x = Tensor::full(&[1, 1, 3, 3], 1.0);
        let k = Tensor::full(&[1, 1, 3, 3], 1.0);
        let y = conv2d(&x, &k, None, geom(1, 0)).unwrap();
        assert_eq!(y.shape(), &[1, 1, 1, 1]);
        assert_eq!(y.data(), &[9.0]);
    }

    #[test]
    fn conv_identity_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Tensor::randn(&[2, 1, 4, 5], 1.0, &mut rng);
        let k = Tensor::full(&[1, 1, 1, 1], 1.0);
        assert_eq!(conv2d(&x, &k, None, geom(1, 0)).unwrap(), x);
    }

    #[test]
    fn conv_matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = Tensor::randn(&[1, 2, 5, 5], 1.0, &mut rng);
        let k = Tensor::randn(&[3, 2, 3, 3], 1.0, &mut rng);
        let b = Tensor::randn(&[3], 1.0, &mut rng);
        let fast = conv2d(&x, &k, Some(&b), geom(2, 1)).unwrap();
        let slow = naive_conv(&x, &k, &b, 2, 1);
        assert_eq!(fast.shape(), &[1, 3, 3, 3]);
        for (a, e) in fast.data().iter().zip(slow.data()) {
            assert!((a - e).abs() < 1e-12, "{a} vs {e}");
        }
    }

    #[test]
    fn conv_shape_errors() {
        let x = Tensor::zeros(&[1, 2, 4, 4]);
        let k = Tensor::zeros(&[1, 3, 3, 3]);
        assert!(matches!(
            conv2d(&x, &k, None, geom(1, 0)),
            Err(Error::InvalidShape(_))
        ));
        let k = Tensor::zeros(&[1, 2, 5, 5]);
        assert!(conv2d(&x, &k, None, geom(1, 0)).is_err());
        let k = Tensor::zeros(&[1, 2, 3, 3]);
        assert!(conv2d(&x, &k, None, geom(0, 0)).is_err());
        assert!(conv2d(&x, &k, Some(&Tensor::zeros(&[2])), geom(1, 0)).is_err());
        let reflect = ConvGeometry::new(1, 4, PadMode::Reflect);
        assert!(conv2d(&x, &k, None, reflect).is_err());
    }

    #[test]
    fn reflect_padding_mirrors_without_edge_repeat() {
        let x = Tensor::new(&[1, 1, 3, 3], (1..=9).map(f64::from).collect()).unwrap();
        let (p, hp, wp) = pad_planes(&x, ConvGeometry::new(1, 2, PadMode::Reflect)).unwrap();
        assert_eq!((hp, wp), (7, 7));
        let col: Vec<f64> = (0..hp).map(|i| p[i * wp + 2]).collect();
        assert_eq!(col, vec![7.0, 4.0, 1.0, 4.0, 7.0, 4.0, 1.0]);
    }

    #[test]
    fn transpose_shape_and_bias() {
        let x = Tensor::zeros(&[1, 1, 2, 2]);
        let k = Tensor::full(&[1, 1, 2, 2], 1.0);
        let b = Tensor::new(&[1], vec![0.25]).unwrap();
        let y = conv_transpose2d(&x, &k, Some(&b), 2, 0).unwrap();
        assert_eq!(y.shape(), &[1, 1, 4, 4]);
        assert!(y.data().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn transpose_is_adjoint_of_conv() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (h, k, s, p) in [(5, 3, 2, 1), (6, 4, 2, 1), (7, 3, 1, 1), (8, 3, 3, 0)] {
            let ho = conv_out_extent(h, k, s, p).unwrap();
            // adjoint identity needs the transpose to land back on h
            if conv_transpose_out_extent(ho, k, s, p).unwrap() != h {
                continue;
            }
            let x = Tensor::randn(&[2, 3, h, h], 1.0, &mut rng);
            let kern = Tensor::randn(&[4, 3, k, k], 1.0, &mut rng);
            let y = Tensor::randn(&[2, 4, ho, ho], 1.0, &mut rng);
            let lhs = conv2d(&x, &kern, None, geom(s, p))
                .unwrap()
                .dot(&y)
                .unwrap();
            let rhs = x
                .dot(&conv_transpose2d(&y, &kern, None, s, p).unwrap())
                .unwrap();
            assert!(
                (lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0),
                "{lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn instance_norm_examples() {
        let x = Tensor::full(&[1, 2, 3, 3], 4.0);
        let ones = Tensor::full(&[2], 1.0);
        let (y, _) = instance_norm(&x, &ones, &Tensor::zeros(&[2]), 1e-5).unwrap();
        assert!(y.data().iter().all(|&v| v.abs() <= 1e-3));
        let (y, _) = instance_norm(&x, &ones, &Tensor::full(&[2], 0.5), 1e-5).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn instance_norm_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Tensor::randn(&[1, 1, 8, 8], 3.0, &mut rng);
        let gamma = Tensor::new(&[1], vec![1.7]).unwrap();
        let beta = Tensor::new(&[1], vec![-0.3]).unwrap();
        let (y, _) = instance_norm(&x, &gamma, &beta, 0.0).unwrap();
        let mean = y.mean();
        let std = (y.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 64.0).sqrt();
        assert!((mean + 0.3).abs() < 1e-6);
        assert!((std - 1.7).abs() < 1e-6);
    }

    #[test]
    fn activation_examples() {
        assert_eq!(Activation::Relu.apply(-1.0), 0.0);
        assert_eq!(Activation::Relu.apply(2.0), 2.0);
        assert_eq!(Activation::LEAKY.apply(-1.0), -0.2);
        assert_eq!(Activation::Tanh.apply(0.0), 0.0);
    }

    #[test]
    fn max_pool_examples() {
        let x = Tensor::new(&[1, 1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (y, arg) = max_pool2d(&x, 2, 2).unwrap();
        assert_eq!(y.data(), &[4.0]);
        assert_eq!(arg, vec![3]);

        let c = Tensor::full(&[1, 2, 4, 4], 0.7);
        let (y, arg) = max_pool2d(&c, 2, 2).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.7));
        // ties go to the first element of each window
        assert_eq!(&arg[..4], &[0, 2, 8, 10]);
        assert!(max_pool2d(&c, 5, 1).is_err());
    }

    #[test]
    fn loss_examples() {
        let a = Tensor::new(&[2], vec![0.0, 0.0]).unwrap();
        let b = Tensor::new(&[2], vec![1.0, 3.0]).unwrap();
        assert_eq!(l1_loss(&a, &b).unwrap(), 2.0);
        assert_eq!(mse_loss(&a, &b).unwrap(), 5.0);
        assert_eq!(l1_loss(&b, &b).unwrap(), 0.0);
        assert_eq!(mse_loss(&b, &b).unwrap(), 0.0);
        assert!(l1_loss(&a, &Tensor::zeros(&[3])).is_err());
        assert!(mse_loss(&a, &Tensor::zeros(&[1, 2])).is_err());
    }

    #[test]
    fn concat_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Tensor::randn(&[2, 1, 2, 3], 1.0, &mut rng);
        let b = Tensor::randn(&[2, 3, 2, 3], 1.0, &mut rng);
        let c = concat_channels(&a, &b).unwrap();
        assert_eq!(c.shape(), &[2, 4, 2, 3]);
        let (ga, gb) = concat_channels_backward(&c, 1).unwrap();
        assert_eq!((ga, gb), (a, b));
    }
}
