//! 16-bit binary PGM (`P5`, maxval 65535, big-endian samples) holding
//! depths in whole millimetres. Background and anything at or beyond
//! 65535 mm is stored as 65535.

use artipose::{DepthImage, BACKGROUND_MM};

pub const SENTINEL: u16 = u16::MAX;

pub fn encode(image: &DepthImage) -> Vec<u8> {
    let (w, h) = (image.width(), image.height());
    let mut out = format!("P5\n{w} {h}\n65535\n").into_bytes();
    out.reserve(2 * w as usize * h as usize);
    for d in image.to_full() {
        let v = if d >= SENTINEL as f64 { SENTINEL } else { d.round().max(0.0) as u16 };
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}

#[derive(Debug, PartialEq, Eq)]
pub struct PgmError(pub &'static str);

impl std::fmt::Display for PgmError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.0)
    }
}

fn token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8], PgmError> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(PgmError("truncated header"));
    }
    Ok(&bytes[start..*pos])
}

fn number(bytes: &[u8], pos: &mut usize) -> Result<u32, PgmError> {
    std::str::from_utf8(token(bytes, pos)?)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or(PgmError("bad header number"))
}

pub fn decode(bytes: &[u8]) -> Result<DepthImage, PgmError> {
    let mut pos = 0;
    if token(bytes, &mut pos)? != b"P5" {
        return Err(PgmError("not a binary PGM"));
    }
    let w = number(bytes, &mut pos)?;
    let h = number(bytes, &mut pos)?;
    if number(bytes, &mut pos)? != 65535 {
        return Err(PgmError("expected 16-bit samples"));
    }
    // exactly one whitespace byte separates the header from the samples
    pos += 1;
    let n = w as usize * h as usize;
    let body = bytes.get(pos..).ok_or(PgmError("truncated samples"))?;
    if body.len() != 2 * n {
        return Err(PgmError("sample count does not match the header"));
    }
    let data = body
        .chunks_exact(2)
        .map(|c| {
            let v = u16::from_be_bytes([c[0], c[1]]);
            if v == SENTINEL {
                BACKGROUND_MM
            } else {
                v as f64
            }
        })
        .collect();
    Ok(DepthImage::from_full(w, h, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut full = vec![BACKGROUND_MM; 8 * 4];
        full[9] = 412.0;
        full[10] = 65534.0;
        let img = DepthImage::from_full(8, 4, full);
        let back = decode(&encode(&img)).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn rejects_short_body() {
        let img = DepthImage::empty(4, 4);
        let mut b = encode(&img);
        b.pop();
        assert!(decode(&b).is_err());
    }
}
