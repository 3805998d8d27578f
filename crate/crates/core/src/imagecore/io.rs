//! Netpbm (PGM, plus PPM reduced to luma) and MSRF raw-float raster I/O.
//!
//! MSRF layout: `b"MSRF"`, `u32` LE width, `u32` LE height, then
//! `width * height` little-endian `f32` samples, row-major.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::Image;
use crate::error::{Error, Result};

/// BT.601 luma weights applied when a colour (P3/P6) file is read.
const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

const MSRF_MAGIC: &[u8; 4] = b"MSRF";

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(Error::io(path))?;
    read_pgm(&bytes).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// Parses P2/P5 (and P3/P6, converted to luma) from memory. Samples map to
/// `value / maxval`.
pub fn read_pgm(bytes: &[u8]) -> Result<Image> {
    let mut cur = HeaderCursor { bytes, pos: 0 };
    let magic = cur.token()?;
    let (binary, channels) = match magic.as_str() {
        "P2" => (false, 1),
        "P5" => (true, 1),
        "P3" => (false, 3),
        "P6" => (true, 3),
        other => return Err(Error::Format(format!("unsupported magic {other:?}"))),
    };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Format(format!("empty raster {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::Format("raster dimensions overflow".into()))?;

    let samples: Vec<u32> = if binary {
        // exactly one whitespace byte separates maxval from the payload
        let start = cur.pos + 1;
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        let payload = bytes.get(start..).unwrap_or(&[]);
        if payload.len() < need {
            return Err(truncated(format!(
                "payload has {} bytes, expected {need}",
                payload.len()
            )));
        }
        if wide {
            payload[..need]
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
                .collect()
        } else {
            payload[..need].iter().map(|&b| b as u32).collect()
        }
    } else {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            match cur.try_token()? {
                Some(tok) => out.push(tok.parse::<u32>().map_err(|_| {
                    Error::Format(format!("bad ASCII sample {tok:?}"))
                })?),
                None => {
                    return Err(truncated(format!(
                        "ASCII payload has {} samples, expected {count}",
                        out.len()
                    )))
                }
            }
        }
        out
    };

    if let Some(s) = samples.iter().find(|&&s| s > maxval as u32) {
        return Err(Error::Format(format!("sample {s} exceeds maxval {maxval}")));
    }
    let scale = 1.0 / maxval as f64;
    let data = if channels == 1 {
        samples.iter().map(|&s| (s as f64 * scale) as f32).collect()
    } else {
        samples
            .chunks_exact(3)
            .map(|px| {
                let y: f64 = px
                    .iter()
                    .zip(LUMA_WEIGHTS)
                    .map(|(&c, w)| c as f64 * w)
                    .sum();
                (y * scale) as f32
            })
            .collect()
    };
    Image::new(width, height, data)
}

/// Writes binary P5 at maxval 255; samples are clamped to `[0, 1]` and rounded
/// half-up.
pub fn save_pgm(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_pgm(img)).map_err(Error::io(path))
}

pub fn write_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&v| quantize_u8(v)));
    out
}

#[inline]
pub(crate) fn quantize_u8(v: f32) -> u8 {
    ((v.clamp(0.0, 1.0) as f64) * 255.0 + 0.5).floor() as u8
}

pub fn save_msrf(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::with_capacity(12 + 4 * img.len());
    buf.extend_from_slice(MSRF_MAGIC);
    buf.extend_from_slice(&(img.width() as u32).to_le_bytes());
    buf.extend_from_slice(&(img.height() as u32).to_le_bytes());
    for v in img.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = fs::File::create(path).map_err(Error::io(path))?;
    f.write_all(&buf).map_err(Error::io(path))
}

pub fn load_msrf(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(Error::io(path))?;
    if bytes.len() < 12 || &bytes[..4] != MSRF_MAGIC {
        return Err(Error::Format(format!("{}: not an MSRF raster", path.display())));
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let need = width * height * 4;
    if bytes.len() - 12 != need {
        return Err(Error::Io {
            path: path.to_path_buf(),
            source: io::Error::new(
                io::ErrorKind::UnexpectedEof,
                format!("payload has {} bytes, expected {need}", bytes.len() - 12),
            ),
        });
    }
    let data = bytes[12..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Image::new(width, height, data)
}

fn truncated(msg: String) -> Error {
    Error::Io {
        path: "<memory>".into(),
        source: io::Error::new(io::ErrorKind::UnexpectedEof, msg),
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn try_token(&mut self) -> Result<Option<String>> {
        self.skip_space_and_comments();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map(|s| Some(s.to_owned()))
            .map_err(|_| Error::Format("non-ASCII header token".into()))
    }

    fn token(&mut self) -> Result<String> {
        self.try_token()?
            .ok_or_else(|| Error::Format("header ended early".into()))
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| Error::Format(format!("bad {what} {tok:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p5(w: usize, h: usize, maxval: u32, payload: &[u8]) -> Vec<u8> {
        let mut v = format!("P5\n{w} {h}\n{maxval}\n").into_bytes();
        v.extend_from_slice(payload);
        v
    }

    #[test]
    fn p5_scales_by_maxval() {
        let img = read_pgm(&p5(2, 2, 255, &[0, 255, 128, 64])).unwrap();
        assert_eq!(img.dims(), (2, 2));
        assert_eq!(img.data(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
        let one = read_pgm(&p5(1, 1, 255, &[255])).unwrap();
        assert_eq!(one.data(), &[1.0]);
    }

    #[test]
    fn p2_sixteen_bit_with_comments() {
        let img = read_pgm(b"P2\n# a comment\n2 1 # trailing\n65535\n65535 0\n").unwrap();
        assert_eq!(img.data(), &[1.0, 0.0]);
    }

    #[test]
    fn p5_sixteen_bit_is_big_endian() {
        let img = read_pgm(&p5(1, 1, 65535, &[0x80, 0x00])).unwrap();
        assert!((img.get(0, 0) - 32768.0 / 65535.0).abs() < 1e-7);
    }

    #[test]
    fn colour_input_reduces_to_bt601_luma() {
        let mut bytes = b"P6\n1 1\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0]);
        let img = read_pgm(&bytes).unwrap();
        assert!((img.get(0, 0) - 0.299).abs() < 1e-6);
    }

    #[test]
    fn malformed_and_truncated_inputs() {
        assert!(matches!(read_pgm(b"P7\n1 1\n255\n\0"), Err(Error::Format(_))));
        assert!(matches!(read_pgm(b"P5\n1 x\n255\n\0"), Err(Error::Format(_))));
        assert!(matches!(read_pgm(b"P5\n1 1\n70000\n\0"), Err(Error::Format(_))));
        assert!(matches!(read_pgm(&p5(2, 2, 255, &[1, 2, 3])), Err(Error::Io { .. })));
        assert!(matches!(read_pgm(b"P2\n2 1\n255\n7"), Err(Error::Io { .. })));
        assert!(matches!(read_pgm(b"P2\n1 1\n10\n11"), Err(Error::Format(_))));
    }

    #[test]
    fn save_rounds_half_up_and_clamps() {
        let bytes = write_pgm(&Image::new(3, 1, vec![0.5, 1.2, -0.1]).unwrap());
        assert_eq!(&bytes[bytes.len() - 3..], &[128, 255, 0]);
    }

    #[test]
    fn stored_pgm_round_trips_bytewise() {
        let payload: Vec<u8> = (0..=255u8).collect();
        let original = p5(16, 16, 255, &payload);
        let img = read_pgm(&original).unwrap();
        assert_eq!(write_pgm(&img), original);
    }

    #[test]
    fn msrf_round_trip_and_rejection() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.msrf");
        let img = Image::new(3, 2, vec![0.1, -0.5, 2.0, 0.0, 1e-8, 0.75]).unwrap();
        save_msrf(&img, &path).unwrap();
        assert_eq!(load_msrf(&path).unwrap(), img);

        let mut bytes = fs::read(&path).unwrap();
        bytes.pop();
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_msrf(&path), Err(Error::Io { .. })));
        bytes[0] = b'X';
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_msrf(&path), Err(Error::Format(_))));
    }
}
