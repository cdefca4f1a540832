//! Color conversion, luma histograms and histogram equalization.
//!
//! Color conversion uses the BT.601 full-range (JPEG) YCbCr matrix with a
//! +128 chroma offset. All float-to-byte conversions round half away from
//! zero and clamp to `[0, 255]`, so every result here is bit-exact and
//! reproducible.
//!
//! Enhancement equalizes the luma plane only; Cb and Cr pass through
//! untouched.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// 8-bit raster, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "image extent must be at least 1x1, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidInput(format!(
                "images have 1 or 3 channels, got {channels}"
            )));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::InvalidInput(format!(
                "{width}x{height}x{channels} image needs {expected} samples, got {}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image with every sample set to `value`.
    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Samples of pixel `(x, y)`.
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    /// Single-channel copy of channel `c`.
    pub fn plane(&self, c: usize) -> Result<RasterImage> {
        if c >= self.channels {
            return Err(Error::InvalidInput(format!(
                "channel {c} out of range for {}-channel image",
                self.channels
            )));
        }
        let data = self
            .data
            .iter()
            .skip(c)
            .step_by(self.channels)
            .copied()
            .collect();
        RasterImage::new(self.width, self.height, 1, data)
    }

    /// Interleaves three single-channel planes of equal extent.
    pub fn from_planes(planes: [&RasterImage; 3]) -> Result<RasterImage> {
        let (w, h) = (planes[0].width, planes[0].height);
        for p in planes {
            if p.channels != 1 || p.width != w || p.height != h {
                return Err(Error::InvalidInput(
                    "planes must be single-channel and of equal extent".into(),
                ));
            }
        }
        let mut data = Vec::with_capacity(w * h * 3);
        for i in 0..w * h {
            data.extend(planes.iter().map(|p| p.data[i]));
        }
        RasterImage::new(w, h, 3, data)
    }

    fn require_channels(&self, channels: usize, op: &str) -> Result<()> {
        if self.channels != channels {
            return Err(Error::InvalidInput(format!(
                "{op} needs a {channels}-channel image, got {} channels",
                self.channels
            )));
        }
        Ok(())
    }
}

/// Rounds half away from zero and clamps into the byte range.
pub fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// BT.601 full-range RGB to YCbCr, interleaved `Y, Cb, Cr`.
pub fn rgb_to_yuv(img: &RasterImage) -> Result<RasterImage> {
    img.require_channels(3, "rgb_to_yuv")?;
    let mut out = Vec::with_capacity(img.data.len());
    for px in img.data.chunks_exact(3) {
        out.extend_from_slice(&rgb_to_yuv_pixel([px[0], px[1], px[2]]));
    }
    RasterImage::new(img.width, img.height, 3, out)
}

/// Inverse of [`rgb_to_yuv`] up to rounding.
pub fn yuv_to_rgb(img: &RasterImage) -> Result<RasterImage> {
    img.require_channels(3, "yuv_to_rgb")?;
    let mut out = Vec::with_capacity(img.data.len());
    for px in img.data.chunks_exact(3) {
        out.extend_from_slice(&yuv_to_rgb_pixel([px[0], px[1], px[2]]));
    }
    RasterImage::new(img.width, img.height, 3, out)
}

pub fn rgb_to_yuv_pixel([r, g, b]: [u8; 3]) -> [u8; 3] {
    let (r, g, b) = (f64::from(r), f64::from(g), f64::from(b));
    [
        to_u8(0.299 * r + 0.587 * g + 0.114 * b),
        to_u8(-0.168736 * r - 0.331264 * g + 0.5 * b + 128.0),
        to_u8(0.5 * r - 0.418688 * g - 0.081312 * b + 128.0),
    ]
}

pub fn yuv_to_rgb_pixel([y, cb, cr]: [u8; 3]) -> [u8; 3] {
    let y = f64::from(y);
    let cb = f64::from(cb) - 128.0;
    let cr = f64::from(cr) - 128.0;
    [
        to_u8(y + 1.402 * cr),
        to_u8(y - 0.344136 * cb - 0.714136 * cr),
        to_u8(y + 1.772 * cb),
    ]
}

/// 256-bin histogram of an 8-bit plane with its cumulative counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    bins: [u64; 256],
    cdf: [u64; 256],
    total: u64,
}

impl Histogram {
    pub fn from_samples(samples: &[u8]) -> Self {
        let mut bins = [0u64; 256];
        for &v in samples {
            bins[v as usize] += 1;
        }
        let mut cdf = [0u64; 256];
        let mut running = 0;
        for (c, &b) in cdf.iter_mut().zip(bins.iter()) {
            running += b;
            *c = running;
        }
        Self {
            bins,
            cdf,
            total: running,
        }
    }

    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    pub fn cdf(&self) -> &[u64; 256] {
        &self.cdf
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Smallest nonzero cumulative count, i.e. the cdf at the darkest
    /// occupied bin. Zero for an empty histogram.
    pub fn cdf_min(&self) -> u64 {
        self.cdf.iter().copied().find(|&c| c > 0).unwrap_or(0)
    }

    /// The equalization lookup table. Identity when every sample shares one
    /// value.
    pub fn equalization_lut(&self) -> [u8; 256] {
        let mut lut = [0u8; 256];
        let cdf_min = self.cdf_min();
        if self.total == cdf_min {
            for (v, slot) in lut.iter_mut().enumerate() {
                *slot = v as u8;
            }
            return lut;
        }
        let span = (self.total - cdf_min) as f64;
        for (slot, &c) in lut.iter_mut().zip(self.cdf.iter()) {
            // Bins below the darkest occupied one are never looked up.
            let above = c.saturating_sub(cdf_min) as f64;
            *slot = to_u8(above / span * 255.0);
        }
        lut
    }
}

/// Histogram of a single-channel (luma) image.
pub fn luma_histogram(img: &RasterImage) -> Result<Histogram> {
    img.require_channels(1, "luma_histogram")?;
    Ok(Histogram::from_samples(&img.data))
}

/// Classical cdf-based histogram equalization of one 8-bit plane.
pub fn equalize_channel(channel: &RasterImage) -> Result<RasterImage> {
    let lut = luma_histogram(channel)?.equalization_lut();
    let data = channel.data.iter().map(|&v| lut[v as usize]).collect();
    RasterImage::new(channel.width, channel.height, 1, data)
}

/// The YCbCr image with its Y plane equalized, before conversion back to RGB.
pub fn enhance_he_ycbcr(img: &RasterImage) -> Result<RasterImage> {
    img.require_channels(3, "enhance_he")?;
    let yuv = rgb_to_yuv(img)?;
    let y = equalize_channel(&yuv.plane(0)?)?;
    let cb = yuv.plane(1)?;
    let cr = yuv.plane(2)?;
    RasterImage::from_planes([&y, &cb, &cr])
}

/// Luma histogram equalization of an RGB image.
pub fn enhance_he(img: &RasterImage) -> Result<RasterImage> {
    yuv_to_rgb(&enhance_he_ycbcr(img)?)
}

/// Luma plane of an image: the image itself when single-channel, otherwise
/// the Y plane of its YCbCr conversion.
pub fn luma_plane(img: &RasterImage) -> Result<RasterImage> {
    match img.channels {
        1 => Ok(img.clone()),
        _ => rgb_to_yuv(img)?.plane(0),
    }
}

/// One row of a histogram report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistogramRow {
    pub bin: u8,
    pub count: u64,
}

/// 256 `(bin, count)` rows of the image's luma histogram, ordered by bin.
pub fn histogram_report(img: &RasterImage) -> Result<Vec<HistogramRow>> {
    let hist = luma_histogram(&luma_plane(img)?)?;
    Ok(hist
        .bins()
        .iter()
        .enumerate()
        .map(|(bin, &count)| HistogramRow {
            bin: bin as u8,
            count,
        })
        .collect())
}

/// CSV rendering of a histogram report with header `bin,count`.
pub fn histogram_csv(rows: &[HistogramRow]) -> String {
    let mut out = String::from("bin,count\n");
    for row in rows {
        let _ = writeln!(out, "{},{}", row.bin, row.count);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, data: &[u8]) -> RasterImage {
        RasterImage::new(w, h, 1, data.to_vec()).unwrap()
    }

    #[test]
    fn rgb_to_yuv_examples() {
        assert_eq!(rgb_to_yuv_pixel([255, 255, 255]), [255, 128, 128]);
        assert_eq!(rgb_to_yuv_pixel([0, 0, 0]), [0, 128, 128]);
        // Y = 76.245, Cb = 84.97232, Cr = 255.5 -> clamped
        assert_eq!(rgb_to_yuv_pixel([255, 0, 0]), [76, 85, 255]);
    }

    #[test]
    fn yuv_to_rgb_examples() {
        assert_eq!(yuv_to_rgb_pixel([255, 128, 128]), [255, 255, 255]);
        assert_eq!(yuv_to_rgb_pixel([0, 128, 128]), [0, 0, 0]);
    }

    #[test]
    fn color_ops_reject_gray() {
        let img = gray(2, 2, &[1, 2, 3, 4]);
        assert!(matches!(rgb_to_yuv(&img), Err(Error::InvalidInput(_))));
        assert!(matches!(yuv_to_rgb(&img), Err(Error::InvalidInput(_))));
        assert!(matches!(enhance_he(&img), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn raster_invariants() {
        assert!(RasterImage::new(0, 1, 1, vec![]).is_err());
        assert!(RasterImage::new(2, 2, 2, vec![0; 8]).is_err());
        assert!(RasterImage::new(2, 2, 3, vec![0; 11]).is_err());
    }

    #[test]
    fn histogram_examples() {
        let h = luma_histogram(&gray(2, 2, &[128; 4])).unwrap();
        assert_eq!(h.bins()[128], 4);
        assert_eq!(h.bins().iter().sum::<u64>(), 4);

        let h = luma_histogram(&gray(2, 2, &[10, 10, 20, 30])).unwrap();
        assert_eq!((h.bins()[10], h.bins()[20], h.bins()[30]), (2, 1, 1));
        assert_eq!(h.total(), 4);
        let cdf = h.cdf();
        assert!(cdf[..10].iter().all(|&c| c == 0));
        assert!(cdf[10..20].iter().all(|&c| c == 2));
        assert!(cdf[20..30].iter().all(|&c| c == 3));
        assert!(cdf[30..].iter().all(|&c| c == 4));
    }

    #[test]
    fn histogram_requires_single_channel() {
        let img = RasterImage::filled(1, 1, 3, 0).unwrap();
        assert!(luma_histogram(&img).is_err());
    }

    #[test]
    fn equalize_examples() {
        let out = equalize_channel(&gray(2, 2, &[10, 10, 20, 30])).unwrap();
        assert_eq!(out.data(), &[0, 0, 128, 255]);

        let two_level = gray(2, 2, &[0, 255, 0, 255]);
        assert_eq!(equalize_channel(&two_level).unwrap(), two_level);

        let constant = gray(3, 2, &[77; 6]);
        assert_eq!(equalize_channel(&constant).unwrap(), constant);
    }

    #[test]
    fn equalize_full_range_uniform_is_stable() {
        let data: Vec<u8> = (0..=255).collect();
        let img = gray(16, 16, &data);
        let out = equalize_channel(&img).unwrap();
        for (a, b) in img.data().iter().zip(out.data()) {
            assert!((*a as i32 - *b as i32).abs() <= 1);
        }
    }

    #[test]
    fn constant_gray_enhance_is_identity_up_to_round_trip() {
        let img = RasterImage::filled(3, 3, 3, 90).unwrap();
        let out = enhance_he(&img).unwrap();
        for (a, b) in img.data().iter().zip(out.data()) {
            assert!((*a as i32 - *b as i32).abs() <= 1);
        }
    }

    #[test]
    fn report_rows() {
        let img = gray(2, 3, &[128; 6]);
        let rows = histogram_report(&img).unwrap();
        assert_eq!(rows.len(), 256);
        assert_eq!(rows[128].count, 6);
        assert!(rows.iter().enumerate().all(|(i, r)| r.bin as usize == i));
        assert_eq!(rows.iter().map(|r| r.count).sum::<u64>(), 6);
        let csv = histogram_csv(&rows);
        assert!(csv.starts_with("bin,count\n0,0\n"));
        assert!(csv.contains("\n128,6\n"));
        assert_eq!(csv.lines().count(), 257);
    }

    #[test]
    fn planes_round_trip() {
        let img = RasterImage::new(2, 1, 3, vec![1, 2, 3, 4, 5, 6]).unwrap();
        let p: Vec<_> = (0..3).map(|c| img.plane(c).unwrap()).collect();
        assert_eq!(p[1].data(), &[2, 5]);
        assert_eq!(
            RasterImage::from_planes([&p[0], &p[1], &p[2]]).unwrap(),
            img
        );
        assert!(img.plane(3).is_err());
    }
}
