use crate::error::{Error, Result};
use crate::pixelops::RasterImage;

/// Decodes a binary PPM (`P6`, maxval 255). Header comments are accepted;
/// bytes after the pixel payload are ignored.
pub fn read_ppm(bytes: &[u8]) -> Result<RasterImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        let magic = String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned();
        return Err(Error::UnsupportedFormat(format!(
            "expected P6 magic, found {magic:?}"
        )));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (slot, name) in fields.iter_mut().zip(["width", "height", "maxval"]) {
        *slot = header_number(bytes, &mut pos, name)?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "maxval {maxval} (only 255 is supported)"
        )));
    }
    // exactly one whitespace byte separates the header from the payload
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(Error::UnsupportedFormat(
                "missing whitespace after maxval".into(),
            ))
        }
    }
    if width == 0 || height == 0 {
        return Err(Error::UnsupportedFormat(format!(
            "zero extent {width}x{height}"
        )));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::UnsupportedFormat(format!("extent {width}x{height} too large")))?;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: payload.len(),
        });
    }
    RasterImage::new(width, height, 3, payload[..expected].to_vec())
}

fn header_number(bytes: &[u8], pos: &mut usize, name: &str) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => {
                return Err(Error::UnsupportedFormat(format!(
                    "header ends before {name}"
                )))
            }
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .filter(|s| !s.is_empty() && s.len() <= 9)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::UnsupportedFormat(format!("malformed {name} in header")))
}

/// Encodes a 3-channel image as `P6\n{w} {h}\n255\n` followed by raw samples.
pub fn write_ppm(img: &RasterImage) -> Result<Vec<u8>> {
    if img.channels() != 3 {
        return Err(Error::UnsupportedFormat(format!(
            "P6 needs 3 channels, image has {}",
            img.channels()
        )));
    }
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    Ok(out)
}
