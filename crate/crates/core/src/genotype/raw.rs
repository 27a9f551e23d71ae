//! PLINK `--recode A` text format.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use ndarray::Array2;

use super::{GenotypeDataset, MISSING};
use crate::error::{Error, Result};

const FIXED_COLUMNS: [&str; 6] = ["FID", "IID", "PAT", "MAT", "SEX", "PHENOTYPE"];

/// Parses an additive-coded `.raw` file. Sample ids become `FID_IID`.
pub fn parse_raw<R: BufRead>(reader: R) -> Result<GenotypeDataset> {
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, 1, "empty input"))?;
    let header = header?;
    let cols: Vec<&str> = header.split_whitespace().collect();
    if cols.len() < FIXED_COLUMNS.len() {
        return Err(Error::parse(
            1,
            cols.len() + 1,
            "header is missing fixed columns",
        ));
    }
    for (k, (&got, want)) in cols.iter().zip(FIXED_COLUMNS).enumerate() {
        if got != want {
            return Err(Error::parse(
                1,
                k + 1,
                format!("expected `{want}`, found `{got}`"),
            ));
        }
    }
    let snp_ids: Vec<String> = cols[6..].iter().map(|s| s.to_string()).collect();
    let mut seen = HashSet::new();
    for (k, id) in snp_ids.iter().enumerate() {
        if !seen.insert(id.as_str()) {
            return Err(Error::parse(1, k + 7, format!("duplicate SNP id `{id}`")));
        }
    }
    let n_cols = cols.len();
    let n_snps = snp_ids.len();

    let mut sample_ids = Vec::new();
    let mut seen_samples = HashSet::new();
    let mut values: Vec<u8> = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != n_cols {
            return Err(Error::parse(
                lineno,
                toks.len().min(n_cols) + 1,
                format!("row has {} columns, header has {n_cols}", toks.len()),
            ));
        }
        let id = format!("{}_{}", toks[0], toks[1]);
        if !seen_samples.insert(id.clone()) {
            return Err(Error::parse(
                lineno,
                1,
                format!("duplicate sample id `{id}`"),
            ));
        }
        sample_ids.push(id);
        for (k, tok) in toks[6..].iter().enumerate() {
            let g = match *tok {
                "0" => 0,
                "1" => 1,
                "2" => 2,
                "NA" => MISSING,
                other => {
                    return Err(Error::parse(
                        lineno,
                        k + 7,
                        format!("genotype `{other}` not in {{0,1,2,NA}}"),
                    ))
                }
            };
            values.push(g);
        }
    }

    let genotypes = Array2::from_shape_vec((sample_ids.len(), n_snps), values)
        .map_err(|e| Error::shape(e.to_string()))?;
    Ok(GenotypeDataset {
        genotypes,
        sample_ids,
        snp_ids,
        labels: None,
    })
}

/// Writes the dataset in `.raw` form. Sample ids are split at their first
/// `_` into FID and IID; parental, sex and phenotype columns are written as
/// unknown.
pub fn write_raw<W: Write>(ds: &GenotypeDataset, mut w: W) -> Result<()> {
    write!(w, "{}", FIXED_COLUMNS.join(" "))?;
    for id in &ds.snp_ids {
        write!(w, " {id}")?;
    }
    writeln!(w)?;
    for (row, id) in ds.genotypes.outer_iter().zip(&ds.sample_ids) {
        let (fid, iid) = id
            .split_once('_')
            .ok_or_else(|| Error::arg(format!("sample id `{id}` is not of the form FID_IID")))?;
        write!(w, "{fid} {iid} 0 0 0 -9")?;
        for &g in row {
            match g {
                MISSING => write!(w, " NA")?,
                g => write!(w, " {g}")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}
