//! Grayscale image files: binary PGM (P5), ASCII PGM (P2), 8-bit PNG.
//!
//! Reading sniffs the magic bytes rather than trusting the extension; color
//! or 16-bit inputs are rejected, never silently converted. Writing picks the
//! container from the extension (`.pgm` → binary P5, `.png` → 8-bit PNG)
//! after clamping to `[0, peak]` and rounding to 8 bits.

use std::fs;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Reads a grayscale image into a field of intensities `0..=maxval`.
pub fn read_image(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    match bytes.as_slice() {
        [b'P', b'2', ..] | [b'P', b'5', ..] => parse_pgm(&bytes),
        [0x89, b'P', b'N', b'G', ..] => parse_png(&bytes),
        _ => Err(Error::Format(format!(
            "{}: not a PGM (P2/P5) or PNG file",
            path.display()
        ))),
    }
}

/// Writes the field as an 8-bit grayscale image.
///
/// Values are clamped to `[0, peak]`, mapped onto `0..=255`, and rounded.
/// The container is chosen from the extension: `.pgm` or `.png`.
pub fn write_image(path: impl AsRef<Path>, field: &ScalarField, peak: f64) -> Result<()> {
    let path = path.as_ref();
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "peak must be positive and finite, got {peak}"
        )));
    }
    if !field.is_finite() {
        return Err(Error::NonFinite("image data"));
    }
    let bytes: Vec<u8> = field
        .as_slice()
        .iter()
        .map(|&v| (v.clamp(0.0, peak) * 255.0 / peak).round() as u8)
        .collect();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("pgm") => {
            let mut out = format!("P5\n{} {}\n255\n", field.width(), field.height()).into_bytes();
            out.extend_from_slice(&bytes);
            fs::write(path, out)?;
            Ok(())
        }
        Some("png") => {
            let img = image::GrayImage::from_raw(field.width() as u32, field.height() as u32, bytes)
                .expect("buffer length matches dimensions");
            img.save(path)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
        }
        _ => Err(Error::Format(format!(
            "{}: unsupported output extension (use .pgm or .png)",
            path.display()
        ))),
    }
}

fn parse_png(bytes: &[u8]) -> Result<ScalarField> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::Format(format!("png: {e}")))?;
    let gray = match img {
        image::DynamicImage::ImageLuma8(g) => g,
        other => {
            return Err(Error::Format(format!(
                "png: expected 8-bit grayscale, found {:?}",
                other.color()
            )))
        }
    };
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    field_from_samples(h, w, gray.into_raw().into_iter().map(f64::from))
}

/// PGM tokenizer: whitespace-separated fields, `#` comments to end of line.
struct PgmTokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmTokens<'a> {
    fn next_token(&mut self) -> Result<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= self.bytes.len() {
            return Err(Error::Format("pgm: truncated header".into()));
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn next_usize(&mut self, what: &str) -> Result<usize> {
        let tok = self.next_token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("pgm: bad {what}")))
    }
}

fn parse_pgm(bytes: &[u8]) -> Result<ScalarField> {
    let mut toks = PgmTokens { bytes, pos: 0 };
    let magic = toks.next_token()?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => return Err(Error::Format("pgm: bad magic number".into())),
    };
    let width = toks.next_usize("width")?;
    let height = toks.next_usize("height")?;
    let maxval = toks.next_usize("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!(
            "pgm: unsupported maxval {maxval} (only 8-bit images)"
        )));
    }
    let count = height
        .checked_mul(width)
        .ok_or_else(|| Error::Format("pgm: dimensions overflow".into()))?;

    if binary {
        // exactly one whitespace byte after the maxval, then raw samples
        let data_start = toks.pos + 1;
        let data = bytes
            .get(data_start..data_start + count)
            .ok_or_else(|| Error::Format("pgm: truncated pixel data".into()))?;
        field_from_samples(height, width, data.iter().map(|&b| f64::from(b)))
    } else {
        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            let v = toks.next_usize("sample")?;
            if v > maxval {
                return Err(Error::Format(format!("pgm: sample {v} exceeds maxval")));
            }
            samples.push(v as f64);
        }
        field_from_samples(height, width, samples.into_iter())
    }
}

fn field_from_samples(
    height: usize,
    width: usize,
    samples: impl Iterator<Item = f64>,
) -> Result<ScalarField> {
    if height < 2 || width < 2 {
        return Err(Error::Format(format!(
            "images must be at least 2x2, got {height}x{width}"
        )));
    }
    ScalarField::from_vec(height, width, samples.collect())
}
