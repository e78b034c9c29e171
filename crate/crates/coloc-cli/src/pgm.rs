//! Portable graymap (PGM) reading and writing.
//!
//! Supports the plain (P2, ASCII) and raw (P5, binary) variants with maxval
//! up to 65535. Raw samples are one byte when maxval < 256 and two
//! big-endian bytes otherwise. Header comments (`#` to end of line) are
//! accepted anywhere whitespace is.

use std::fs;
use std::path::Path;

use serde::Serialize;

use coloc::Channel;

use crate::error::{CliError, CliResult};

/// How a channel was affinely rescaled into PGM samples:
/// `intensity = offset + sample * scale`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PgmScale {
    pub offset: f64,
    pub scale: f64,
    pub maxval: u16,
}

pub fn read_pgm(path: &Path) -> CliResult<Channel> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    parse(&bytes).map_err(|m| CliError::Data(format!("{}: {m}", path.display())))
}

pub fn parse(bytes: &[u8]) -> Result<Channel, String> {
    let mut cursor = Cursor { bytes, pos: 0 };
    let magic = cursor.token().ok_or("missing magic number")?;
    let binary = match magic {
        b"P2" => false,
        b"P5" => true,
        other => {
            return Err(format!(
                "unsupported magic number {:?}, expected P2 or P5",
                String::from_utf8_lossy(other)
            ))
        }
    };
    let width = cursor.header_number("width")?;
    let height = cursor.header_number("height")?;
    let maxval = cursor.header_number("maxval")?;
    if maxval == 0 || maxval > 65_535 {
        return Err(format!("maxval {maxval} out of range [1, 65535]"));
    }
    if width == 0 || height == 0 {
        return Err(format!("degenerate dimensions {width}x{height}"));
    }
    let count = width * height;

    let pixels = if binary {
        // Exactly one whitespace byte separates the header from the raster.
        cursor.expect_single_whitespace()?;
        let wide = maxval > 255;
        let bytes_per = if wide { 2 } else { 1 };
        let raster = cursor.rest();
        if raster.len() < count * bytes_per {
            return Err(format!(
                "truncated pixel data: expected {} bytes, got {}",
                count * bytes_per,
                raster.len()
            ));
        }
        let mut pixels = Vec::with_capacity(count);
        for i in 0..count {
            let v = if wide {
                u16::from_be_bytes([raster[2 * i], raster[2 * i + 1]]) as usize
            } else {
                raster[i] as usize
            };
            if v > maxval {
                return Err(format!("sample {v} exceeds maxval {maxval}"));
            }
            pixels.push(v as f64);
        }
        pixels
    } else {
        let mut pixels = Vec::with_capacity(count);
        for i in 0..count {
            let tok = cursor
                .token()
                .ok_or_else(|| format!("truncated pixel data: expected {count} samples, got {i}"))?;
            let v: usize = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| {
                    format!("malformed sample {:?}", String::from_utf8_lossy(tok))
                })?;
            if v > maxval {
                return Err(format!("sample {v} exceeds maxval {maxval}"));
            }
            pixels.push(v as f64);
        }
        pixels
    };

    Channel::new(width, height, pixels).map_err(|e| e.to_string())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_whitespace_and_comments();
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        Some(&self.bytes[start..self.pos])
    }

    fn header_number(&mut self, what: &str) -> Result<usize, String> {
        let tok = self.token().ok_or(format!("malformed header: missing {what}"))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                format!(
                    "malformed header: bad {what} {:?}",
                    String::from_utf8_lossy(tok)
                )
            })
    }

    fn expect_single_whitespace(&mut self) -> Result<(), String> {
        if self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
            Ok(())
        } else {
            Err("malformed header: expected whitespace before raster".into())
        }
    }

    fn rest(&self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }
}

/// Writes a channel as binary 16-bit PGM, affinely rescaled to maxval 65535.
/// Returns the scale so intensities can be recovered downstream.
pub fn write_pgm(path: &Path, ch: &Channel) -> CliResult<PgmScale> {
    const MAXVAL: u16 = 65_535;
    let min = ch.pixels().iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ch.pixels().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = if max > min {
        (max - min) / MAXVAL as f64
    } else {
        0.0
    };
    let mut out = Vec::with_capacity(32 + ch.len() * 2);
    out.extend_from_slice(format!("P5\n{} {}\n{}\n", ch.width(), ch.height(), MAXVAL).as_bytes());
    for &v in ch.pixels() {
        let q = if scale > 0.0 {
            ((v - min) / scale).round().clamp(0.0, MAXVAL as f64) as u16
        } else {
            0
        };
        out.extend_from_slice(&q.to_be_bytes());
    }
    fs::write(path, out)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
    Ok(PgmScale {
        offset: min,
        scale,
        maxval: MAXVAL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_p2() {
        let ch = parse(b"P2\n2 2\n255\n0 1 2 3\n").unwrap();
        assert_eq!((ch.width(), ch.height()), (2, 2));
        assert_eq!(ch.pixels(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn parses_comments_in_header() {
        let ch = parse(b"P2 # magic\n# a comment line\n2 1 # dims\n10\n5 10\n").unwrap();
        assert_eq!(ch.pixels(), &[5.0, 10.0]);
    }

    #[test]
    fn parses_raw_p5_narrow_and_wide() {
        let narrow = parse(b"P5\n2 1\n255\n\x07\xff").unwrap();
        assert_eq!(narrow.pixels(), &[7.0, 255.0]);
        // 16-bit big-endian: 0x0102 = 258, 0xfffe = 65534.
        let wide = parse(b"P5\n2 1\n65535\n\x01\x02\xff\xfe").unwrap();
        assert_eq!(wide.pixels(), &[258.0, 65534.0]);
    }

    #[test]
    fn distinct_errors() {
        assert!(parse(b"P6\n1 1\n255\n\x00")
            .unwrap_err()
            .contains("unsupported magic"));
        assert!(parse(b"P2\n2\n")
            .unwrap_err()
            .contains("malformed header"));
        assert!(parse(b"P2\n1 1\n70000\n0\n")
            .unwrap_err()
            .contains("out of range"));
        assert!(parse(b"P5\n2 2\n255\n\x00\x01")
            .unwrap_err()
            .contains("truncated"));
        assert!(parse(b"P2\n2 1\n10\n3 11\n")
            .unwrap_err()
            .contains("exceeds maxval"));
    }

    #[test]
    fn write_read_round_trip_hits_grid_points() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        let ch = Channel::new(2, 2, vec![0.0, 1.0, 2.0, 65535.0]).unwrap();
        let scale = write_pgm(&path, &ch).unwrap();
        let back = read_pgm(&path).unwrap();
        for (orig, raw) in ch.pixels().iter().zip(back.pixels()) {
            let recovered = scale.offset + raw * scale.scale;
            assert!((orig - recovered).abs() <= scale.scale / 2.0 + 1e-9);
        }
    }
}
