//! IDX (unsigned byte, rank 3) image files such as the MNIST distribution.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scene::{DigitImage, DIGIT_SIDE};

pub const IDX_UBYTE_RANK3: u32 = 0x0000_0803;

/// Parses an IDX image file held in memory. Images must be 28 x 28.
pub fn parse_idx(bytes: &[u8]) -> Result<Vec<DigitImage>> {
    let word = |at: usize| -> Result<u32> {
        bytes
            .get(at..at + 4)
            .map(|b| u32::from_be_bytes(b.try_into().expect("4-byte slice")))
            .ok_or_else(|| Error::Parse {
                offset: at,
                message: format!("header truncated: need 16 bytes, file has {}", bytes.len()),
            })
    };
    let magic = word(0)?;
    if magic != IDX_UBYTE_RANK3 {
        return Err(Error::Parse {
            offset: 0,
            message: format!("bad magic {magic:#010x}, expected {IDX_UBYTE_RANK3:#010x}"),
        });
    }
    let count = word(4)? as usize;
    let rows = word(8)? as usize;
    let cols = word(12)? as usize;
    if rows != DIGIT_SIDE || cols != DIGIT_SIDE {
        return Err(Error::Parse {
            offset: 8,
            message: format!("images are {rows} x {cols}, expected {DIGIT_SIDE} x {DIGIT_SIDE}"),
        });
    }
    let image_len = rows * cols;
    let expected = count as u64 * image_len as u64;
    let actual = (bytes.len() - 16) as u64;
    if actual != expected {
        return Err(Error::Parse {
            offset: 16 + actual.min(expected) as usize,
            message: format!("payload of {count} images needs {expected} bytes, found {actual}"),
        });
    }
    bytes[16..]
        .chunks_exact(image_len)
        .map(|px| DigitImage::new(px.iter().map(|&b| f64::from(b) / 255.0).collect()))
        .collect()
}

pub fn load_idx(path: impl AsRef<Path>) -> Result<Vec<DigitImage>> {
    parse_idx(&std::fs::read(path)?)
}

/// Encodes images as an IDX file, quantizing pixels to bytes.
pub fn encode_idx(images: &[DigitImage]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * DIGIT_SIDE * DIGIT_SIDE);
    for w in [
        IDX_UBYTE_RANK3,
        images.len() as u32,
        DIGIT_SIDE as u32,
        DIGIT_SIDE as u32,
    ] {
        out.extend_from_slice(&w.to_be_bytes());
    }
    for img in images {
        out.extend(
            img.pixels()
                .iter()
                .map(|p| (p * 255.0).round().clamp(0.0, 255.0) as u8),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(count: u32, payload: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        for w in [IDX_UBYTE_RANK3, count, 28, 28] {
            b.extend_from_slice(&w.to_be_bytes());
        }
        b.extend_from_slice(payload);
        b
    }

    #[test]
    fn two_images() {
        let mut payload = vec![0u8; 1568];
        payload[0] = 255;
        payload[784 + 5] = 51;
        let imgs = parse_idx(&file(2, &payload)).unwrap();
        assert_eq!(imgs.len(), 2);
        assert_eq!(imgs[0].pixels()[0], 1.0);
        assert!((imgs[1].pixels()[5] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn truncated_payload_names_lengths() {
        let err = parse_idx(&file(2, &[0u8; 1000])).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("1568") && msg.contains("1000"), "{msg}");
    }

    #[test]
    fn bad_magic_and_short_header() {
        let mut b = file(1, &[0u8; 784]);
        b[3] = 0x01;
        assert!(matches!(parse_idx(&b), Err(Error::Parse { offset: 0, .. })));
        let good = file(1, &[0u8; 784]);
        assert!(matches!(
            parse_idx(&good[..10]),
            Err(Error::Parse { offset: 8, .. })
        ));
    }

    #[test]
    fn encode_round_trip() {
        let payload: Vec<u8> = (0..784u32 * 3).map(|v| (v % 256) as u8).collect();
        let bytes = file(3, &payload);
        assert_eq!(encode_idx(&parse_idx(&bytes).unwrap()), bytes);
    }
}
