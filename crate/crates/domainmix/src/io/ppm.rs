//! Binary netpbm image files: P6 (RGB) and P5 (grayscale).
//!
//! Samples are a single byte each, scaled by the header maxval into `[0, 1]`
//! on load and quantized with round-to-nearest against 255 on save, so a
//! save/load round trip moves no sample by more than 1/255. Malformed files
//! are rejected with the byte offset of the first offending byte.

use std::path::Path;

use crate::image::ImageTensor;
use crate::io::IoError;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn err(&self, reason: impl Into<String>) -> IoError {
        IoError::malformed(self.path, self.pos, reason)
    }

    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn read_uint(&mut self, what: &str) -> Result<usize, IoError> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(format!("expected {what} (unsigned integer)")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("digits are ascii")
            .parse()
            .map_err(|_| {
                self.pos = start;
                self.err(format!("{what} out of range"))
            })
    }
}

/// Loads a binary P6 (3-channel) or P5 (1-channel) image.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageTensor, IoError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| IoError::file(path, e))?;
    let mut cur = Cursor {
        bytes: &bytes,
        pos: 0,
        path,
    };
    if bytes.len() < 2 {
        return Err(cur.err("truncated header, no magic number"));
    }
    let channels = match &bytes[..2] {
        b"P6" => 3,
        b"P5" => 1,
        _ => return Err(cur.err("unsupported magic number, expected P6 or P5")),
    };
    cur.pos = 2;
    let width = cur.read_uint("width")?;
    let height = cur.read_uint("height")?;
    let maxval = cur.read_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(cur.err("image dimensions must be positive"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(cur.err(format!("unsupported maxval {maxval}, expected 1..=255")));
    }
    match bytes.get(cur.pos) {
        Some(b' ' | b'\t' | b'\r' | b'\n') => cur.pos += 1,
        _ => return Err(cur.err("expected single whitespace byte after maxval")),
    }
    let expected = height * width * channels;
    let got = bytes.len() - cur.pos;
    if got != expected {
        return Err(cur.err(format!("expected {expected} sample bytes, found {got}")));
    }
    let scale = 1.0 / maxval as f64;
    let data = bytes[cur.pos..].iter().map(|&b| b as f64 * scale).collect();
    ImageTensor::new(height, width, channels, data)
        .map_err(|e| IoError::malformed(path, cur.pos, e.to_string()))
}

/// Saves a 3-channel image as binary P6 or a 1-channel image as binary P5,
/// clamping samples to `[0, 1]` and quantizing to 8 bits.
pub fn save_image(image: &ImageTensor, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let magic = if image.channels() == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(
        image
            .data()
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    std::fs::write(path, out).map_err(|e| IoError::file(path, e))
}
