//! Little-endian primitives shared by the binary cache and checkpoint formats.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub(crate) fn write_header<W: Write>(w: &mut W, magic: &[u8; 4], version: u32) -> Result<()> {
    w.write_all(magic)?;
    write_u32(w, version)
}

pub(crate) fn read_header<R: Read>(r: &mut R, magic: &[u8; 4], version: u32) -> Result<()> {
    let mut found = [0u8; 4];
    r.read_exact(&mut found)?;
    if &found != magic {
        return Err(Error::Format(format!(
            "expected magic {:?}, found {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&found)
        )));
    }
    let v = read_u32(r)?;
    if v != version {
        return Err(Error::Format(format!(
            "unsupported version {v} (expected {version})"
        )));
    }
    Ok(())
}

pub(crate) fn write_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn write_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn write_len<W: Write>(w: &mut W, v: usize) -> Result<()> {
    write_u64(w, v as u64)
}

pub(crate) fn write_f64s<W: Write>(w: &mut W, vals: impl IntoIterator<Item = f64>) -> Result<()> {
    for v in vals {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    write_len(w, s.len())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub(crate) fn write_strs<W: Write>(w: &mut W, items: &[String]) -> Result<()> {
    write_len(w, items.len())?;
    items.iter().try_for_each(|s| write_str(w, s))
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Reads a length and rejects values that cannot be a real size.
pub(crate) fn read_len<R: Read>(r: &mut R) -> Result<usize> {
    let v = read_u64(r)?;
    if v > (1 << 40) {
        return Err(Error::Format(format!("implausible length {v}")));
    }
    Ok(v as usize)
}

pub(crate) fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub(crate) fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let n = read_len(r)?;
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

pub(crate) fn read_strs<R: Read>(r: &mut R) -> Result<Vec<String>> {
    let n = read_len(r)?;
    (0..n).map(|_| read_str(r)).collect()
}
