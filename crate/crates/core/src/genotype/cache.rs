//! Binary genotype cache and CSV export.
//!
//! Layout (little endian): magic `DNGT`, version `u32`, sample ids, SNP ids
//! (each a `u64` count of length-prefixed UTF-8 strings), a `u32` label
//! flag followed when set by class names, region names, per-class region
//! indices and per-sample labels (`u32` each), then `u64` rows, `u64` cols
//! and the row-major genotype bytes.

use std::io::{Read, Write};

use ndarray::Array2;

use super::{GenotypeDataset, Labels, MISSING};
use crate::bin::*;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DNGT";
const VERSION: u32 = 1;

pub fn write_cache<W: Write>(ds: &GenotypeDataset, mut w: W) -> Result<()> {
    write_header(&mut w, MAGIC, VERSION)?;
    write_strs(&mut w, &ds.sample_ids)?;
    write_strs(&mut w, &ds.snp_ids)?;
    match &ds.labels {
        None => write_u32(&mut w, 0)?,
        Some(l) => {
            write_u32(&mut w, 1)?;
            write_strs(&mut w, &l.classes)?;
            write_strs(&mut w, &l.regions)?;
            for &r in &l.region_of {
                write_u32(&mut w, r as u32)?;
            }
            for &c in &l.labels {
                write_u32(&mut w, c as u32)?;
            }
        }
    }
    write_len(&mut w, ds.n_samples())?;
    write_len(&mut w, ds.n_snps())?;
    for row in ds.genotypes.outer_iter() {
        let bytes: Vec<u8> = row.to_vec();
        w.write_all(&bytes)?;
    }
    Ok(())
}

pub fn read_cache<R: Read>(mut r: R) -> Result<GenotypeDataset> {
    read_header(&mut r, MAGIC, VERSION)?;
    let sample_ids = read_strs(&mut r)?;
    let snp_ids = read_strs(&mut r)?;
    let labels = match read_u32(&mut r)? {
        0 => None,
        1 => {
            let classes = read_strs(&mut r)?;
            let regions = read_strs(&mut r)?;
            let region_of = (0..classes.len())
                .map(|_| read_u32(&mut r).map(|v| v as usize))
                .collect::<Result<Vec<_>>>()?;
            let labels = (0..sample_ids.len())
                .map(|_| read_u32(&mut r).map(|v| v as usize))
                .collect::<Result<Vec<_>>>()?;
            Some(Labels {
                labels,
                classes,
                regions,
                region_of,
            })
        }
        other => return Err(Error::Format(format!("bad label flag {other}"))),
    };
    let n = read_len(&mut r)?;
    let d = read_len(&mut r)?;
    let mut bytes = vec![0u8; n * d];
    r.read_exact(&mut bytes)?;
    let genotypes =
        Array2::from_shape_vec((n, d), bytes).map_err(|e| Error::Format(e.to_string()))?;
    GenotypeDataset::new(genotypes, sample_ids, snp_ids, labels)
}

/// `sample_id[,population],snp…` with `NA` for missing calls.
pub fn write_csv<W: Write>(ds: &GenotypeDataset, mut w: W) -> Result<()> {
    write!(w, "sample_id")?;
    if ds.labels.is_some() {
        write!(w, ",population")?;
    }
    for id in &ds.snp_ids {
        write!(w, ",{id}")?;
    }
    writeln!(w)?;
    for (i, row) in ds.genotypes.outer_iter().enumerate() {
        write!(w, "{}", ds.sample_ids[i])?;
        if let Some(l) = &ds.labels {
            write!(w, ",{}", l.classes[l.labels[i]])?;
        }
        for &g in row {
            if g == MISSING {
                write!(w, ",NA")?;
            } else {
                write!(w, ",{g}")?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}
