//! PGM (P2 / P5, maxval 255) reading and P5 writing.

use std::path::Path;

use super::Image;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

struct Header {
    binary: bool,
    width: usize,
    height: usize,
    /// Offset of the first pixel byte (P5) or first pixel token (P2).
    data_start: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("{what} out of range")))
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::MalformedHeader("missing 'P' magic number".into()));
    }
    let binary = match bytes[1] {
        b'2' => false,
        b'5' => true,
        b'1' | b'3' | b'4' | b'6' | b'7' => {
            return Err(Error::UnsupportedFormat(format!(
                "P{} is not a grayscale PGM",
                bytes[1] as char
            )))
        }
        _ => return Err(Error::MalformedHeader("unknown magic number".into())),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "maxval {maxval}, only 255 is supported"
        )));
    }
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(Error::MalformedHeader("missing separator after maxval".into())),
        }
    }
    Ok(Header {
        binary,
        width,
        height,
        data_start: cur.pos,
    })
}

/// Decodes an in-memory PGM file.
pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    let h = parse_header(bytes)?;
    let n = h.width * h.height;
    let data = if h.binary {
        let raster = &bytes[h.data_start..];
        if raster.len() < n {
            return Err(Error::TruncatedData {
                expected: n,
                found: raster.len(),
            });
        }
        raster[..n].iter().map(|&b| f64::from(b)).collect()
    } else {
        let mut cur = Cursor {
            bytes,
            pos: h.data_start,
        };
        let mut data = Vec::with_capacity(n);
        for found in 0..n {
            cur.skip_space_and_comments();
            if cur.pos >= bytes.len() {
                return Err(Error::TruncatedData { expected: n, found });
            }
            let v = cur.number("pixel value")?;
            if v > 255 {
                return Err(Error::MalformedHeader(format!("pixel value {v} exceeds maxval")));
            }
            data.push(v as f64);
        }
        data
    };
    Ok(Image::from_raw(h.width, h.height, data))
}

/// Reads a PGM file from disk.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes)
}

/// Quantizes a grey value to a byte: round half away from zero, then clamp.
fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Encodes an image as binary P5 PGM.
pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.pixels().iter().map(|&v| quantize(v)));
    out
}

/// Writes an image as P5 PGM. Values are rounded and clamped to `[0, 255]`
/// on the way out; the image itself is not modified.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode_pgm(img))
}
