//! EMB1 and PRB1 files. All integers and floats are little-endian.
//!
//! ```text
//! EMB1: "EMB1" | version u8 | n u32 | d u32 | n*d f32 row-major
//!       [ label count u32 (= n) | n u32 labels ]
//! PRB1: "PRB1" | version u8 | n u32 | C u32 | n*C f32 row-major
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::{EmbeddingSet, ProbMatrix};

const EMB_MAGIC: &[u8; 4] = b"EMB1";
const PRB_MAGIC: &[u8; 4] = b"PRB1";
const VERSION: u8 = 1;
const HEADER_LEN: usize = 13;

/// Rows of a probability file may be off by this much before loading fails.
const PROB_FILE_TOLERANCE: f64 = 1e-4;

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset: offset as u64,
        message: message.into(),
    }
}

fn encode_header(magic: &[u8; 4], rows: usize, cols: usize, out: &mut Vec<u8>) -> Result<()> {
    let to_u32 = |v: usize| {
        u32::try_from(v).map_err(|_| Error::InvalidArgument(format!("{v} does not fit in u32")))
    };
    out.extend_from_slice(magic);
    out.push(VERSION);
    out.extend_from_slice(&to_u32(rows)?.to_le_bytes());
    out.extend_from_slice(&to_u32(cols)?.to_le_bytes());
    Ok(())
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

/// Validates the header and returns `(rows, cols, payload end offset)`.
fn decode_header(bytes: &[u8], magic: &[u8; 4]) -> Result<(usize, usize, usize)> {
    let name = std::str::from_utf8(magic).unwrap();
    if bytes.len() < HEADER_LEN {
        return Err(format_err(
            bytes.len(),
            format!(
                "truncated header: expected {HEADER_LEN} bytes, found {}",
                bytes.len()
            ),
        ));
    }
    if &bytes[0..4] != magic {
        return Err(format_err(
            0,
            format!("bad magic {:?}, expected {name:?}", &bytes[0..4]),
        ));
    }
    if bytes[4] != VERSION {
        return Err(format_err(
            4,
            format!("unsupported {name} version {}", bytes[4]),
        ));
    }
    let (rows, cols) = (u32_at(bytes, 5) as u64, u32_at(bytes, 9) as u64);
    let payload = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(4))
        .filter(|len| *len <= (usize::MAX - HEADER_LEN) as u64)
        .ok_or_else(|| format_err(5, format!("payload size {rows} x {cols} overflows")))?;
    let end = HEADER_LEN + payload as usize;
    if bytes.len() < end {
        return Err(format_err(
            bytes.len(),
            format!(
                "truncated payload: expected {payload} bytes, found {}",
                bytes.len() - HEADER_LEN
            ),
        ));
    }
    Ok((rows as usize, cols as usize, end))
}

fn f32_payload(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect()
}

pub fn encode_embeddings(set: &EmbeddingSet) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(HEADER_LEN + set.data().len() * 4);
    encode_header(EMB_MAGIC, set.n(), set.d(), &mut out)?;
    for v in set.data() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    if let Some(labels) = set.labels() {
        out.extend_from_slice(&(labels.len() as u32).to_le_bytes());
        for l in labels {
            out.extend_from_slice(&l.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_embeddings(bytes: &[u8]) -> Result<EmbeddingSet> {
    let (n, d, end) = decode_header(bytes, EMB_MAGIC)?;
    if n == 0 || d == 0 {
        return Err(format_err(5, format!("empty embedding set ({n} x {d})")));
    }
    let set = EmbeddingSet::new(n, d, f32_payload(&bytes[HEADER_LEN..end]))?;
    let rest = &bytes[end..];
    if rest.is_empty() {
        return Ok(set);
    }
    if rest.len() < 4 {
        return Err(format_err(bytes.len(), "truncated label count"));
    }
    let count = u32_at(rest, 0) as usize;
    if count != n {
        return Err(format_err(
            end,
            format!("label count {count} does not match n = {n}"),
        ));
    }
    let expected = 4 + 4 * n;
    if rest.len() != expected {
        return Err(format_err(
            end + rest.len().min(expected),
            format!(
                "label block: expected {expected} bytes, found {}",
                rest.len()
            ),
        ));
    }
    let labels = rest[4..]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()));
    set.with_labels(labels.collect())
}

pub fn encode_probs(m: &ProbMatrix) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(HEADER_LEN + m.data().len() * 4);
    encode_header(PRB_MAGIC, m.n(), m.classes(), &mut out)?;
    for v in m.data() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    Ok(out)
}

/// Rows must sum to 1 within 1e-4. Rows further than the in-memory tolerance
/// from 1 are rescaled; all others are kept exactly as stored.
pub fn decode_probs(bytes: &[u8]) -> Result<ProbMatrix> {
    let (n, c, end) = decode_header(bytes, PRB_MAGIC)?;
    if n == 0 {
        return Err(format_err(5, "probability file has no rows"));
    }
    if c < 2 {
        return Err(format_err(9, format!("need at least 2 classes, got {c}")));
    }
    if bytes.len() != end {
        return Err(format_err(
            end,
            format!("{} trailing bytes after payload", bytes.len() - end),
        ));
    }
    let mut data = f32_payload(&bytes[HEADER_LEN..end]);
    for (i, row) in data.chunks_exact_mut(c).enumerate() {
        let offset = HEADER_LEN + i * c * 4;
        if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(format_err(
                offset,
                format!("row {i} has a negative or non-finite entry"),
            ));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > PROB_FILE_TOLERANCE {
            return Err(format_err(
                offset,
                format!("row {i} sums to {sum}, expected 1"),
            ));
        }
        if (sum - 1.0).abs() > ProbMatrix::ROW_SUM_TOLERANCE {
            row.iter_mut().for_each(|p| *p /= sum);
        }
    }
    ProbMatrix::new(n, c, data)
}

pub fn write_embeddings(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_embeddings(set)?)?)
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    decode_embeddings(&fs::read(path)?)
}

pub fn write_probs(m: &ProbMatrix, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_probs(m)?)?)
}

pub fn read_probs(path: impl AsRef<Path>) -> Result<ProbMatrix> {
    decode_probs(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set() -> EmbeddingSet {
        let data = (0..12)
            .map(|i| (i as f64 * 0.37).sin() as f32 as f64)
            .collect();
        EmbeddingSet::new(3, 4, data).unwrap()
    }

    #[test]
    fn embedding_layout() {
        let bytes = encode_embeddings(&set()).unwrap();
        assert_eq!(&bytes[..5], b"EMB1\x01");
        assert_eq!(&bytes[5..13], &[3, 0, 0, 0, 4, 0, 0, 0]);
        assert_eq!(bytes.len(), 13 + 48);
        assert_eq!(decode_embeddings(&bytes).unwrap(), set());
    }

    #[test]
    fn labels_round_trip() {
        let s = set().with_labels(vec![7, 8, 9]).unwrap();
        let bytes = encode_embeddings(&s).unwrap();
        assert_eq!(bytes.len(), 13 + 48 + 4 + 12);
        let back = decode_embeddings(&bytes).unwrap();
        assert_eq!(back.labels(), Some(&[7, 8, 9][..]));
        assert_eq!(encode_embeddings(&back).unwrap(), bytes);

        let mut bad = bytes.clone();
        bad[61] = 2;
        assert!(matches!(
            decode_embeddings(&bad),
            Err(Error::Format { offset: 61, .. })
        ));
        assert!(decode_embeddings(&bytes[..bytes.len() - 2]).is_err());
    }

    #[test]
    fn embedding_errors() {
        let bytes = encode_embeddings(&set()).unwrap();
        match decode_embeddings(&bytes[..40]) {
            Err(Error::Format { offset, message }) => {
                assert_eq!(offset, 40);
                assert!(message.contains("expected 48 bytes, found 27"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let mut bad = bytes.clone();
        bad[3] = b'2';
        assert!(matches!(
            decode_embeddings(&bad),
            Err(Error::Format { offset: 0, .. })
        ));
        let mut bad = bytes.clone();
        bad[5..13].copy_from_slice(&[255, 255, 255, 255, 255, 255, 255, 255]);
        assert!(matches!(decode_embeddings(&bad), Err(Error::Format { .. })));
        let empty = [b"EMB1".as_slice(), &[1], &[0; 4], &[4, 0, 0, 0]].concat();
        assert!(matches!(
            decode_embeddings(&empty),
            Err(Error::Format { offset: 5, .. })
        ));
        assert!(decode_embeddings(&bytes[..7]).is_err());
    }

    #[test]
    fn probs_round_trip_and_validation() {
        let m = ProbMatrix::from_rows(&[vec![0.5, 0.25, 0.25], vec![0.0, 1.0, 0.0]]).unwrap();
        let bytes = encode_probs(&m).unwrap();
        assert_eq!(&bytes[..5], b"PRB1\x01");
        assert_eq!(decode_probs(&bytes).unwrap(), m);

        let mut half = bytes.clone();
        half[13..17].copy_from_slice(&0.0f32.to_le_bytes());
        assert!(matches!(
            decode_probs(&half),
            Err(Error::Format { offset: 13, .. })
        ));

        let one_class = [
            b"PRB1".as_slice(),
            &[1],
            &[1, 0, 0, 0],
            &[1, 0, 0, 0],
            &1f32.to_le_bytes(),
        ]
        .concat();
        assert!(matches!(
            decode_probs(&one_class),
            Err(Error::Format { offset: 9, .. })
        ));
    }

    #[test]
    fn slightly_off_rows_are_rescaled() {
        let raw = [b"PRB1".as_slice(), &[1], &[1, 0, 0, 0], &[2, 0, 0, 0]]
            .concat()
            .into_iter()
            .chain(0.50002f32.to_le_bytes())
            .chain(0.5f32.to_le_bytes())
            .collect::<Vec<u8>>();
        let m = decode_probs(&raw).unwrap();
        assert!((m.row(0).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
