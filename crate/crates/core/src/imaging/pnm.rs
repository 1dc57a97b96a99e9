//! Netpbm gray/color decoding (P2, P3, P5, P6) and binary PPM encoding.

use thiserror::Error;

use super::{luminance, GrayImage, RgbImage, MAX_DIMENSION};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PnmError {
    #[error("not a P2/P3/P5/P6 file (byte 0)")]
    BadMagic,
    #[error("malformed header at byte {offset}: {reason}")]
    Header { offset: usize, reason: &'static str },
    #[error("maxval {maxval} at byte {offset} exceeds 255")]
    MaxvalTooLarge { offset: usize, maxval: u32 },
    #[error("payload truncated at byte {offset}")]
    Truncated { offset: usize },
    #[error("sample {value} at byte {offset} exceeds maxval {maxval}")]
    SampleOutOfRange { offset: usize, value: u32, maxval: u32 },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Ascii,
    Binary,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Reads a decimal token; returns its value and starting offset.
    fn number(&mut self, what: &'static str) -> Result<(u32, usize), PnmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value * 10 + (b - b'0') as u64;
            if value > u32::MAX as u64 {
                return Err(PnmError::Header {
                    offset: start,
                    reason: "number too large",
                });
            }
            self.pos += 1;
        }
        if self.pos == start {
            if self.pos >= self.bytes.len() {
                return Err(PnmError::Truncated { offset: start });
            }
            return Err(PnmError::Header {
                offset: start,
                reason: what,
            });
        }
        Ok((value as u32, start))
    }
}

/// Decodes a PGM or PPM file into a luminance raster.
///
/// Color input is reduced with integer BT.601 weights (round half up). Samples
/// are rescaled to 0..=255 when maxval is below 255.
pub fn decode_pnm(bytes: &[u8]) -> Result<GrayImage, PnmError> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(PnmError::BadMagic);
    }
    let (encoding, channels) = match bytes[1] {
        b'2' => (Encoding::Ascii, 1),
        b'3' => (Encoding::Ascii, 3),
        b'5' => (Encoding::Binary, 1),
        b'6' => (Encoding::Binary, 3),
        _ => return Err(PnmError::BadMagic),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if let Some(&b) = bytes.get(2) {
        if !b.is_ascii_whitespace() && b != b'#' {
            return Err(PnmError::Header {
                offset: 2,
                reason: "expected whitespace after magic",
            });
        }
    }
    let (width, w_off) = cur.number("expected width")?;
    let (height, h_off) = cur.number("expected height")?;
    if width == 0 || width > MAX_DIMENSION {
        return Err(PnmError::Header {
            offset: w_off,
            reason: "width out of range",
        });
    }
    if height == 0 || height > MAX_DIMENSION {
        return Err(PnmError::Header {
            offset: h_off,
            reason: "height out of range",
        });
    }
    let (maxval, m_off) = cur.number("expected maxval")?;
    if maxval == 0 {
        return Err(PnmError::Header {
            offset: m_off,
            reason: "maxval must be positive",
        });
    }
    if maxval > 255 {
        return Err(PnmError::MaxvalTooLarge {
            offset: m_off,
            maxval,
        });
    }

    let count = width as usize * height as usize * channels;
    let mut samples = Vec::with_capacity(count);
    match encoding {
        Encoding::Binary => {
            // Exactly one whitespace byte separates the header from the raster.
            match bytes.get(cur.pos) {
                Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
                Some(_) => {
                    return Err(PnmError::Header {
                        offset: cur.pos,
                        reason: "expected whitespace after maxval",
                    })
                }
                None => return Err(PnmError::Truncated { offset: cur.pos }),
            }
            let raster = &bytes[cur.pos..];
            if raster.len() < count {
                return Err(PnmError::Truncated {
                    offset: bytes.len(),
                });
            }
            for (i, &v) in raster[..count].iter().enumerate() {
                if v as u32 > maxval {
                    return Err(PnmError::SampleOutOfRange {
                        offset: cur.pos + i,
                        value: v as u32,
                        maxval,
                    });
                }
                samples.push(v);
            }
        }
        Encoding::Ascii => {
            for _ in 0..count {
                let (v, off) = cur.number("expected sample")?;
                if v > maxval {
                    return Err(PnmError::SampleOutOfRange {
                        offset: off,
                        value: v,
                        maxval,
                    });
                }
                samples.push(v as u8);
            }
        }
    }

    if maxval != 255 {
        for s in samples.iter_mut() {
            *s = ((*s as u32 * 255 + maxval / 2) / maxval) as u8;
        }
    }

    let data = if channels == 3 {
        samples
            .chunks_exact(3)
            .map(|p| luminance(p[0], p[1], p[2]))
            .collect()
    } else {
        samples
    };
    Ok(GrayImage::new(width, height, data).expect("dimensions validated above"))
}

/// Encodes as binary PPM (P6, maxval 255).
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.reserve(img.pixels().len() * 3);
    for px in img.pixels() {
        out.extend_from_slice(px);
    }
    out
}
