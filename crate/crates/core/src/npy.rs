//! Minimal reader/writer for NumPy `.npy` (format 1.0) little-endian `f64`
//! arrays in C order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8] = b"\x93NUMPY";

pub fn encode_f64(shape: &[usize], data: &[f64]) -> Vec<u8> {
    assert_eq!(
        shape.iter().product::<usize>(),
        data.len(),
        "shape does not match data length"
    );
    let dims = match shape {
        [single] => format!("{single},"),
        _ => shape.iter().map(usize::to_string).collect::<Vec<_>>().join(", "),
    };
    let mut header = format!("{{'descr': '<f8', 'fortran_order': False, 'shape': ({dims}), }}");
    // magic(6) + version(2) + header_len(2) + header + '\n' must be a multiple of 64
    let unpadded = MAGIC.len() + 2 + 2 + header.len() + 1;
    header.push_str(&" ".repeat((64 - unpadded % 64) % 64));
    header.push('\n');

    let mut out = Vec::with_capacity(10 + header.len() + data.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_f64(bytes: &[u8], origin: &Path) -> Result<(Vec<usize>, Vec<f64>)> {
    let bad = |reason: &str| Error::Format {
        path: origin.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(bad("not an npy file"));
    }
    if bytes[6] != 1 {
        return Err(bad("only npy format version 1.x is supported"));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let header = std::str::from_utf8(bytes.get(10..10 + header_len).ok_or_else(|| bad("truncated header"))?)
        .map_err(|_| bad("header is not utf-8"))?;
    if !header.contains("'descr': '<f8'") {
        return Err(bad("only little-endian f64 arrays are supported"));
    }
    if !header.contains("'fortran_order': False") {
        return Err(bad("fortran-ordered arrays are not supported"));
    }
    let start = header.find("'shape': (").ok_or_else(|| bad("missing shape"))? + "'shape': (".len();
    let end = start + header[start..].find(')').ok_or_else(|| bad("unterminated shape"))?;
    let shape = header[start..end]
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| bad("bad shape entry")))
        .collect::<Result<Vec<_>>>()?;
    let payload = &bytes[10 + header_len..];
    let count: usize = shape.iter().product();
    if payload.len() != count * 8 {
        return Err(Error::PayloadSize {
            expected: count * 8,
            found: payload.len(),
        });
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((shape, data))
}

pub fn write_f64(path: impl AsRef<Path>, shape: &[usize], data: &[f64]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_f64(shape, data)).map_err(|e| Error::io(path, e))
}

pub fn read_f64(path: impl AsRef<Path>) -> Result<(Vec<usize>, Vec<f64>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_f64(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_aligned_and_parsable() {
        let bytes = encode_f64(&[2, 3, 4], &(0..24).map(f64::from).collect::<Vec<_>>());
        let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
        assert_eq!((10 + header_len) % 64, 0);
        assert_eq!(bytes[10 + header_len - 1], b'\n');
        let (shape, data) = decode_f64(&bytes, Path::new("a.npy")).unwrap();
        assert_eq!(shape, vec![2, 3, 4]);
        assert_eq!(data[23], 23.0);
    }

    #[test]
    fn one_dimensional_shape_has_trailing_comma() {
        let bytes = encode_f64(&[3], &[1.0, f64::NAN, 3.0]);
        assert!(bytes.windows(4).any(|w| w == b"(3,)"));
        let (shape, data) = decode_f64(&bytes, Path::new("a.npy")).unwrap();
        assert_eq!(shape, vec![3]);
        assert!(data[1].is_nan());
    }

    #[test]
    fn truncated_payload_rejected() {
        let mut bytes = encode_f64(&[2], &[1.0, 2.0]);
        bytes.pop();
        assert!(matches!(
            decode_f64(&bytes, Path::new("a.npy")),
            Err(Error::PayloadSize { .. })
        ));
    }
}
