//! Parameter checkpoints.
//!
//! Binary layout (little endian): magic `DNCK`, version `u32`, a metadata
//! string, a `u64` block count, then per block its name, `u64` rows, `u64`
//! cols and the row-major `f64` values.

use std::io::{Read, Write};

use ndarray::Array2;

use crate::bin::*;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DNCK";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    /// Free-form `key=value` lines (model variant, embedding kind, provenance).
    pub metadata: String,
    pub blocks: Vec<(String, Array2<f64>)>,
}

pub fn write_checkpoint<W: Write>(ck: &Checkpoint, mut w: W) -> Result<()> {
    write_header(&mut w, MAGIC, VERSION)?;
    write_str(&mut w, &ck.metadata)?;
    write_len(&mut w, ck.blocks.len())?;
    for (name, m) in &ck.blocks {
        write_str(&mut w, name)?;
        write_len(&mut w, m.nrows())?;
        write_len(&mut w, m.ncols())?;
        write_f64s(&mut w, m.iter().copied())?;
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint> {
    read_header(&mut r, MAGIC, VERSION)?;
    let metadata = read_str(&mut r)?;
    let n = read_len(&mut r)?;
    let mut blocks = Vec::with_capacity(n.min(1024));
    for _ in 0..n {
        let name = read_str(&mut r)?;
        let rows = read_len(&mut r)?;
        let cols = read_len(&mut r)?;
        let vals = read_f64s(&mut r, rows * cols)?;
        let m =
            Array2::from_shape_vec((rows, cols), vals).map_err(|e| Error::Format(e.to_string()))?;
        blocks.push((name, m));
    }
    Ok(Checkpoint { metadata, blocks })
}

/// `block,row,col,value` dump for eyeballing.
pub fn write_checkpoint_csv<W: Write>(ck: &Checkpoint, mut w: W) -> Result<()> {
    writeln!(w, "block,row,col,value")?;
    for (name, m) in &ck.blocks {
        for ((i, j), v) in m.indexed_iter() {
            writeln!(w, "{name},{i},{j},{v:e}")?;
        }
    }
    Ok(())
}
