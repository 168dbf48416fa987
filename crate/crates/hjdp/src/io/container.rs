//! Binary field container: a fixed little-endian layout carrying the grid
//! metadata and the row-major payload, streamed in both directions so no
//! second copy of the payload is ever materialized.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic    8 bytes   "HJDPFLD\0"
//! version  u32       1
//! dims     u32
//! counts   u64  x dims
//! mins     f64  x dims
//! maxs     f64  x dims
//! periodic u8   x dims   (0 or 1)
//! time     f64
//! elem     u8            (1 = IEEE 754 binary64)
//! payload  f64  x product(counts), row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::ValueField;
use crate::grid::{GridSpec, MAX_DIMS};

pub const MAGIC: [u8; 8] = *b"HJDPFLD\0";
pub const VERSION: u32 = 1;
const ELEM_F64: u8 = 1;

/// Values per streaming chunk (64 KiB of payload).
const CHUNK: usize = 8192;

/// Writes a field and its grid metadata to `w`.
pub fn write_field<W: Write>(w: &mut W, spec: &GridSpec, field: &ValueField) -> Result<()> {
    if field.shape() != spec.counts.as_slice() {
        return Err(Error::ShapeMismatch(format!(
            "field shape {:?} does not match grid counts {:?}",
            field.shape(),
            spec.counts
        )));
    }
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(spec.dims as u32).to_le_bytes())?;
    for &c in &spec.counts {
        w.write_all(&(c as u64).to_le_bytes())?;
    }
    for &m in &spec.mins {
        w.write_all(&m.to_le_bytes())?;
    }
    for &m in &spec.maxs {
        w.write_all(&m.to_le_bytes())?;
    }
    for &p in &spec.periodic {
        w.write_all(&[p as u8])?;
    }
    w.write_all(&field.time().to_le_bytes())?;
    w.write_all(&[ELEM_F64])?;

    let mut buf = [0u8; CHUNK * 8];
    for chunk in field.data().chunks(CHUNK) {
        for (v, out) in chunk.iter().zip(buf.chunks_exact_mut(8)) {
            out.copy_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf[..chunk.len() * 8])?;
    }
    Ok(())
}

fn read_exact_or(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Container(format!("truncated {what}")))
}

fn read_u32(r: &mut impl Read, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact_or(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read, what: &str) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact_or(r, &mut b, what)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read, what: &str) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact_or(r, &mut b, what)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads a field written by [`write_field`], streaming the payload directly
/// into its final allocation.
pub fn read_field<R: Read>(r: &mut R) -> Result<(GridSpec, ValueField)> {
    let mut magic = [0u8; 8];
    read_exact_or(r, &mut magic, "header")?;
    if magic != MAGIC {
        return Err(Error::Container("bad magic; not a field container".into()));
    }
    let version = read_u32(r, "header")?;
    if version != VERSION {
        return Err(Error::Container(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let dims = read_u32(r, "header")? as usize;
    if !(1..=MAX_DIMS).contains(&dims) {
        return Err(Error::Container(format!(
            "dims {dims} out of range 1..={MAX_DIMS}"
        )));
    }
    let mut counts = Vec::with_capacity(dims);
    for _ in 0..dims {
        counts.push(read_u64(r, "counts")? as usize);
    }
    let mut mins = Vec::with_capacity(dims);
    for _ in 0..dims {
        mins.push(read_f64(r, "mins")?);
    }
    let mut maxs = Vec::with_capacity(dims);
    for _ in 0..dims {
        maxs.push(read_f64(r, "maxs")?);
    }
    let mut periodic = Vec::with_capacity(dims);
    for _ in 0..dims {
        let mut b = [0u8];
        read_exact_or(r, &mut b, "periodic flags")?;
        periodic.push(b[0] != 0);
    }
    let time = read_f64(r, "time stamp")?;
    let mut elem = [0u8];
    read_exact_or(r, &mut elem, "element kind")?;
    if elem[0] != ELEM_F64 {
        return Err(Error::Container(format!(
            "unsupported element kind {}",
            elem[0]
        )));
    }

    let total: usize = counts.iter().product();
    let mut data = Vec::with_capacity(total);
    let mut buf = [0u8; CHUNK * 8];
    let mut remaining = total;
    while remaining > 0 {
        let n = remaining.min(CHUNK);
        read_exact_or(r, &mut buf[..n * 8], "payload")?;
        for bytes in buf[..n * 8].chunks_exact(8) {
            data.push(f64::from_le_bytes(bytes.try_into().unwrap()));
        }
        remaining -= n;
    }
    let spec = GridSpec::new(mins, maxs, counts.clone(), periodic);
    let field = ValueField::from_parts(data, counts, time)?;
    Ok((spec, field))
}

pub fn write_field_file(path: &Path, spec: &GridSpec, field: &ValueField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, spec, field)?;
    w.flush()?;
    Ok(())
}

pub fn read_field_file(path: &Path) -> Result<(GridSpec, ValueField)> {
    let mut r = BufReader::new(File::open(path)?);
    read_field(&mut r)
}
