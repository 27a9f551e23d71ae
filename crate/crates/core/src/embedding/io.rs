//! Embedding files: CSV (`snp_id,e0,…`) and a binary cache.
//!
//! Binary layout: magic `DNEM`, version `u32`, kind name, fingerprint,
//! `u64` seed, hyperparameter string, SNP ids, `u64` rows, `u64` cols, then
//! row-major `f64` values.

use std::io::{Read, Write};

use ndarray::Array2;

use super::{EmbeddingKind, FeatureEmbedding, Provenance};
use crate::bin::*;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DNEM";
const VERSION: u32 = 1;

pub fn write_embedding_csv<W: Write>(
    emb: &FeatureEmbedding,
    snp_ids: &[String],
    mut w: W,
) -> Result<()> {
    if snp_ids.len() != emb.n_snps() {
        return Err(Error::shape("one SNP id per embedding row".to_string()));
    }
    write!(w, "snp_id")?;
    for k in 0..emb.dim() {
        write!(w, ",e{k}")?;
    }
    writeln!(w)?;
    for (id, row) in snp_ids.iter().zip(emb.matrix.outer_iter()) {
        write!(w, "{id}")?;
        for v in row {
            write!(w, ",{v:e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_embedding<W: Write>(
    emb: &FeatureEmbedding,
    snp_ids: &[String],
    mut w: W,
) -> Result<()> {
    write_header(&mut w, MAGIC, VERSION)?;
    write_str(&mut w, emb.kind.name())?;
    write_str(&mut w, &emb.provenance.fingerprint)?;
    write_u64(&mut w, emb.provenance.seed)?;
    write_str(&mut w, &emb.provenance.params)?;
    write_strs(&mut w, snp_ids)?;
    write_len(&mut w, emb.matrix.nrows())?;
    write_len(&mut w, emb.matrix.ncols())?;
    write_f64s(&mut w, emb.matrix.iter().copied())
}

pub fn read_embedding<R: Read>(mut r: R) -> Result<(FeatureEmbedding, Vec<String>)> {
    read_header(&mut r, MAGIC, VERSION)?;
    let kind_name = read_str(&mut r)?;
    let kind = EmbeddingKind::from_name(&kind_name)
        .ok_or_else(|| Error::Format(format!("unknown embedding kind `{kind_name}`")))?;
    let fingerprint = read_str(&mut r)?;
    let seed = read_u64(&mut r)?;
    let params = read_str(&mut r)?;
    let ids = read_strs(&mut r)?;
    let rows = read_len(&mut r)?;
    let cols = read_len(&mut r)?;
    let vals = read_f64s(&mut r, rows * cols)?;
    let matrix =
        Array2::from_shape_vec((rows, cols), vals).map_err(|e| Error::Format(e.to_string()))?;
    let emb = FeatureEmbedding::new(
        matrix,
        kind,
        Provenance {
            fingerprint,
            seed,
            params,
        },
    )?;
    Ok((emb, ids))
}
