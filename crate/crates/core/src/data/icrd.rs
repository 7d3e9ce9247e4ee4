//! The ICRD image container.
//!
//! ```text
//! "ICRD1"                       5 bytes
//! n, C, channels, H, W          u32 little-endian each
//! labels                        n × u8
//! pixels                        n·channels·H·W × u8, row-major, value/255
//! ```

use std::fs;
use std::path::Path;

use crate::data::Dataset;
use crate::error::{domain, Error, Result};
use crate::tensor::Tensor;

pub const ICRD_MAGIC: &[u8; 5] = b"ICRD1";
const HEADER_LEN: usize = 5 + 5 * 4;

pub fn encode_icrd(ds: &Dataset) -> Result<Vec<u8>> {
    ds.validate()?;
    if ds.class_count > 256 {
        return domain(format!(
            "ICRD stores labels as bytes; {} classes do not fit",
            ds.class_count
        ));
    }
    let shape = ds.images.shape();
    let mut out = Vec::with_capacity(HEADER_LEN + ds.len() + ds.images.len());
    out.extend_from_slice(ICRD_MAGIC);
    for v in [shape[0], ds.class_count, shape[1], shape[2], shape[3]] {
        let v = u32::try_from(v).map_err(|_| Error::Domain(format!("{v} exceeds u32")))?;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend(ds.labels.iter().map(|&l| l as u8));
    out.extend(ds.images.data().iter().map(|&v| (v * 255.0).round() as u8));
    Ok(out)
}

pub fn decode_icrd(bytes: &[u8]) -> Result<Dataset> {
    let fmt = |offset: usize, msg: String| Error::Format { offset, msg };
    if bytes.len() < ICRD_MAGIC.len() || &bytes[..ICRD_MAGIC.len()] != ICRD_MAGIC {
        return Err(fmt(0, "missing ICRD1 magic".into()));
    }
    let names = ["n", "C", "channels", "H", "W"];
    let mut header = [0usize; 5];
    for (k, name) in names.iter().enumerate() {
        let off = ICRD_MAGIC.len() + 4 * k;
        let Some(b) = bytes.get(off..off + 4) else {
            return Err(fmt(off, format!("truncated header field `{name}`")));
        };
        header[k] = u32::from_le_bytes(b.try_into().unwrap()) as usize;
    }
    let [n, c, ch, h, w] = header;
    let labels_end = HEADER_LEN + n;
    if bytes.len() < labels_end {
        return Err(fmt(bytes.len(), format!("truncated labels: expected {n}")));
    }
    let mut labels = Vec::with_capacity(n);
    for (i, &l) in bytes[HEADER_LEN..labels_end].iter().enumerate() {
        if l as usize >= c {
            return Err(fmt(HEADER_LEN + i, format!("label {l} >= class count {c}")));
        }
        labels.push(l as usize);
    }
    let count = n * ch * h * w;
    let end = labels_end + count;
    if bytes.len() < end {
        return Err(fmt(
            bytes.len(),
            format!("truncated pixels: expected {count} bytes"),
        ));
    }
    if bytes.len() > end {
        return Err(fmt(end, "trailing bytes after pixel payload".into()));
    }
    let data = bytes[labels_end..end]
        .iter()
        .map(|&p| p as f64 / 255.0)
        .collect();
    Ok(Dataset {
        images: Tensor::new(vec![n, ch, h, w], data)?,
        labels,
        class_count: c,
        class_names: None,
    })
}

pub fn save_icrd(ds: &Dataset, path: &Path) -> Result<()> {
    fs::write(path, encode_icrd(ds)?)?;
    Ok(())
}

pub fn load_icrd(path: &Path) -> Result<Dataset> {
    decode_icrd(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_dataset_is_header_only() {
        let ds = Dataset::new(Tensor::zeros(&[0, 1, 4, 4]), vec![], 3).unwrap();
        let bytes = encode_icrd(&ds).unwrap();
        assert_eq!(bytes.len(), 25);
        assert_eq!(decode_icrd(&bytes).unwrap(), ds);
    }

    #[test]
    fn full_byte_is_one() {
        let mut bytes = ICRD_MAGIC.to_vec();
        for v in [1u32, 1, 1, 1, 1] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes.extend_from_slice(&[0, 255]);
        let ds = decode_icrd(&bytes).unwrap();
        assert_eq!(ds.images.data(), &[1.0]);
    }

    #[test]
    fn errors_report_offsets() {
        assert!(matches!(decode_icrd(b"ICRX1"), Err(Error::Format { offset: 0, .. })));
        let ds = Dataset::new(Tensor::full(&[2, 1, 2, 2], 0.2), vec![0, 1], 2).unwrap();
        let mut bytes = encode_icrd(&ds).unwrap();
        assert!(matches!(
            decode_icrd(&bytes[..12]),
            Err(Error::Format { offset: 9, .. })
        ));
        assert!(matches!(
            decode_icrd(&bytes[..bytes.len() - 1]),
            Err(Error::Format { .. })
        ));
        bytes[26] = 7;
        assert!(matches!(decode_icrd(&bytes), Err(Error::Format { offset: 26, .. })));
    }
}
