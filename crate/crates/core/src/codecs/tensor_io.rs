//! RTEN tensor files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "RTEN"
//! 4       1     format version (1)
//! 5       1     representation code (0..=6, table order)
//! 6       4     channels (u32)
//! 10      4     bins (u32)
//! 14      4     frames (u32)
//! 18      4*N   f32 values, channel-major, bin-major, frame-minor
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{RepTensor, Representation};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RTEN";
const VERSION: u8 = 1;
const HEADER_LEN: u64 = 18;

pub fn write_tensor<W: Write>(tensor: &RepTensor, mut out: W) -> Result<()> {
    let (c, b, f) = tensor.shape();
    out.write_all(MAGIC)?;
    out.write_all(&[VERSION, tensor.repr().code()])?;
    for dim in [c, b, f] {
        out.write_all(&(dim as u32).to_le_bytes())?;
    }
    for v in tensor.data() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn format_err(offset: u64, message: impl Into<String>) -> Error {
    Error::Format {
        offset,
        message: message.into(),
    }
}

fn read_exact_at<R: Read>(input: &mut R, buf: &mut [u8], offset: u64, what: &str) -> Result<()> {
    let mut filled = 0;
    while filled < buf.len() {
        match input.read(&mut buf[filled..]) {
            Ok(0) => {
                return Err(format_err(
                    offset + filled as u64,
                    format!(
                        "truncated {what}: expected {} bytes, found {filled}",
                        buf.len()
                    ),
                ))
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

pub fn read_tensor<R: Read>(mut input: R) -> Result<RepTensor> {
    let mut header = [0u8; HEADER_LEN as usize];
    read_exact_at(&mut input, &mut header, 0, "header")?;
    if &header[0..4] != MAGIC {
        return Err(format_err(
            0,
            format!("bad magic {:?}, expected \"RTEN\"", &header[0..4]),
        ));
    }
    if header[4] != VERSION {
        return Err(format_err(4, format!("unsupported version {}", header[4])));
    }
    let repr = Representation::from_code(header[5])
        .ok_or_else(|| format_err(5, format!("unknown representation code {}", header[5])))?;
    let dim = |at: usize| u32::from_le_bytes(header[at..at + 4].try_into().unwrap()) as usize;
    let (c, b, f) = (dim(6), dim(10), dim(14));
    if (c, b, f) != repr.shape() {
        return Err(format_err(
            6,
            format!(
                "shape {:?} does not match {repr} {:?}",
                (c, b, f),
                repr.shape()
            ),
        ));
    }
    let count = c * b * f;
    let mut payload = vec![0u8; count * 4];
    read_exact_at(&mut input, &mut payload, HEADER_LEN, "payload")?;
    let mut extra = [0u8; 1];
    if input.read(&mut extra)? != 0 {
        return Err(format_err(
            HEADER_LEN + payload.len() as u64,
            "trailing bytes after payload",
        ));
    }
    let data = payload
        .chunks_exact(4)
        .map(|ch| f32::from_le_bytes(ch.try_into().unwrap()))
        .collect();
    RepTensor::new(repr, data)
}

pub fn write_tensor_file(tensor: &RepTensor, path: impl AsRef<Path>) -> Result<()> {
    write_tensor(tensor, BufWriter::new(File::create(path)?))
}

pub fn read_tensor_file(path: impl AsRef<Path>) -> Result<RepTensor> {
    read_tensor(BufReader::new(File::open(path)?))
}
