//! Binary tensor files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//!   magic   4 bytes  "SSTN"
//!   version u16      currently 1
//!   order   u8       3 or 4
//!   dims    u32 * order
//!   payload f64 * product(dims), slice-major
//! ```
//!
//! Order-3 payloads must form symmetric frontal slices; the load path runs
//! them through the semi-symmetric construction policy (small violations
//! are averaged, anything past 1e-6 is rejected).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use tnpca_core::{SemiSymmetricTensor, Tensor4};

use crate::error::{CliError, CliResult};

pub const MAGIC: [u8; 4] = *b"SSTN";
pub const VERSION: u16 = 1;

pub enum TensorFile {
    Order3(SemiSymmetricTensor<f64>),
    Order4(Tensor4<f64>),
}

pub fn write_order3(path: &Path, x: &SemiSymmetricTensor<f64>) -> CliResult<()> {
    let p = x.node_count() as u32;
    let n = x.slice_count() as u32;
    write_raw(path, &[p, p, n], x.data())
}

fn write_raw(path: &Path, dims: &[u32], payload: &[f64]) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[dims.len() as u8])?;
    for &d in dims {
        w.write_all(&d.to_le_bytes())?;
    }
    for &v in payload {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read(path: &Path) -> CliResult<TensorFile> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, path, "magic")?;
    if magic != MAGIC {
        return Err(CliError::Format(format!(
            "{}: bad magic {magic:?}, expected \"SSTN\"",
            path.display()
        )));
    }
    let mut buf2 = [0u8; 2];
    read_exact(&mut r, &mut buf2, path, "version")?;
    let version = u16::from_le_bytes(buf2);
    if version != VERSION {
        return Err(CliError::Format(format!(
            "{}: unsupported version {version}",
            path.display()
        )));
    }
    let mut buf1 = [0u8; 1];
    read_exact(&mut r, &mut buf1, path, "order")?;
    let order = buf1[0];
    if order != 3 && order != 4 {
        return Err(CliError::Format(format!(
            "{}: order {order} not in {{3, 4}}",
            path.display()
        )));
    }
    let mut dims = Vec::with_capacity(order as usize);
    for _ in 0..order {
        let mut buf4 = [0u8; 4];
        read_exact(&mut r, &mut buf4, path, "dims")?;
        dims.push(u32::from_le_bytes(buf4) as usize);
    }
    let expected: usize = dims.iter().product();
    let mut payload = Vec::with_capacity(expected);
    let mut buf8 = [0u8; 8];
    for _ in 0..expected {
        read_exact(&mut r, &mut buf8, path, "payload")?;
        payload.push(f64::from_le_bytes(buf8));
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(CliError::Format(format!(
            "{}: trailing bytes after {expected} payload values",
            path.display()
        )));
    }

    match order {
        3 => {
            if dims[0] != dims[1] {
                return Err(CliError::Format(format!(
                    "{}: order-3 dims {dims:?} are not square in the first two modes",
                    path.display()
                )));
            }
            let t = SemiSymmetricTensor::from_values(dims[0], dims[2], payload)
                .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
            Ok(TensorFile::Order3(t))
        }
        _ => {
            if dims[0] != dims[1] {
                return Err(CliError::Format(format!(
                    "{}: order-4 dims {dims:?} are not square in the first two modes",
                    path.display()
                )));
            }
            let t = Tensor4::from_values(dims[0], dims[2], dims[3], payload)
                .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
            Ok(TensorFile::Order4(t))
        }
    }
}

pub fn read_order3(path: &Path) -> CliResult<SemiSymmetricTensor<f64>> {
    match read(path)? {
        TensorFile::Order3(t) => Ok(t),
        TensorFile::Order4(_) => Err(CliError::Format(format!(
            "{}: expected an order-3 tensor, found order 4",
            path.display()
        ))),
    }
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], path: &Path, what: &str) -> CliResult<()> {
    r.read_exact(buf).map_err(|_| {
        CliError::Format(format!("{}: truncated while reading {what}", path.display()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tnpca_core::Tensor3;

    fn sample_tensor() -> SemiSymmetricTensor<f64> {
        let t = Tensor3::from_fn(3, 3, 2, |i, j, n| ((i + j) * (n + 1)) as f64);
        SemiSymmetricTensor::from_tensor(t).unwrap()
    }

    #[test]
    fn round_trip_preserves_values_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.sstn");
        let x = sample_tensor();
        write_order3(&path, &x).unwrap();
        let back = read_order3(&path).unwrap();
        assert_eq!(back.data(), x.data());
        assert_eq!(back.node_count(), 3);
        assert_eq!(back.slice_count(), 2);
    }

    #[test]
    fn bad_magic_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.sstn");
        std::fs::write(&path, b"NOPE rest of junk").unwrap();
        match read(&path) {
            Err(CliError::Format(msg)) => assert!(msg.contains("magic")),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.sstn");
        write_order3(&path, &sample_tensor()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        match read(&path) {
            Err(CliError::Format(msg)) => assert!(msg.contains("truncated"), "{msg}"),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.sstn");
        write_order3(&path, &sample_tensor()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.push(0);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read(&path), Err(CliError::Format(_))));
    }
}
