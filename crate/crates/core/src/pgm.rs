//! 8-bit grayscale images in the binary portable graymap format (P5):
//! a `width height` header followed by raw bytes, bit-exact on roundtrip.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::BadLength(format!(
                "{width}x{height} image needs {} bytes, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Config(format!("invalid pgm: {msg}"));
        let mut pos = 0usize;
        let mut token = |bytes: &[u8]| -> Result<String> {
            // Skip whitespace and '#' comment lines between header tokens.
            loop {
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated header"));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        if token(bytes)? != "P5" {
            return Err(bad("missing P5 magic"));
        }
        let width: usize = token(bytes)?.parse().map_err(|_| bad("bad width"))?;
        let height: usize = token(bytes)?.parse().map_err(|_| bad("bad height"))?;
        let maxval: usize = token(bytes)?.parse().map_err(|_| bad("bad maxval"))?;
        if maxval != 255 {
            return Err(bad("only maxval 255 is supported"));
        }
        // Exactly one whitespace byte separates the header from the raster.
        pos += 1;
        if bytes.len() < pos || bytes.len() - pos < width * height {
            return Err(bad("truncated raster"));
        }
        GrayImage::new(width, height, bytes[pos..pos + width * height].to_vec())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::decode(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.encode()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// MSB-first bit expansion of a byte payload.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    let mut bits = Vec::with_capacity(bytes.len() * 8);
    for byte in bytes {
        for b in (0..8).rev() {
            bits.push((byte >> b) & 1 == 1);
        }
    }
    bits
}

/// Inverse of [`bytes_to_bits`]; extra trailing bits are ignored.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks_exact(8)
        .map(|chunk| chunk.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let img = GrayImage::new(3, 2, vec![0, 255, 17, 42, 128, 9]).unwrap();
        let decoded = GrayImage::decode(&img.encode()).unwrap();
        assert_eq!(decoded, img);
    }

    #[test]
    fn decodes_headers_with_comments() {
        let mut bytes = b"P5\n# test image\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 4]);
        let img = GrayImage::decode(&bytes).unwrap();
        assert_eq!((img.width, img.height), (2, 2));
        assert_eq!(img.pixels, vec![1, 2, 3, 4]);
    }

    #[test]
    fn rejects_truncated_raster() {
        let bytes = b"P5\n4 4\n255\nab".to_vec();
        assert!(GrayImage::decode(&bytes).is_err());
    }

    #[test]
    fn bit_packing_roundtrips() {
        let bytes = vec![0x00, 0xff, 0xa5, 0x3c];
        assert_eq!(bits_to_bytes(&bytes_to_bits(&bytes)), bytes);
    }
}
