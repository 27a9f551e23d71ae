//! Genotype matrices: parsing, labelling, quality filters, synthesis and
//! cross-validation splits.

mod cache;
mod filter;
mod folds;
mod panel;
mod raw;
mod synth;

pub use cache::{read_cache, write_cache, write_csv};
pub use filter::{filter_maf, minor_allele_frequency, prune_ld, r_squared, LdReport, MafReport};
pub use folds::{assign_folds, make_folds, FoldSplit};
pub use panel::{builtin_region, parse_panel, write_panel, BUILTIN_REGIONS};
pub use raw::{parse_raw, write_raw};
pub use synth::{
    add_overlap, balding_nichols_frequencies, block_frequencies, synthesize, PopulationSpec,
};

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// Sentinel stored in the genotype matrix for an unobserved call.
pub const MISSING: u8 = u8::MAX;

/// Class labels and the class → region coarsening used for region-level
/// confusion matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    /// Class index per sample.
    pub labels: Vec<usize>,
    /// Ordered class vocabulary (population codes).
    pub classes: Vec<String>,
    /// Ordered region vocabulary.
    pub regions: Vec<String>,
    /// Region index of each class.
    pub region_of: Vec<usize>,
}

impl Labels {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn n_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Samples × SNPs genotype matrix with identifiers and optional labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenotypeDataset {
    /// Rows are samples, columns SNPs; entries in {0, 1, 2} or [`MISSING`].
    pub genotypes: Array2<u8>,
    pub sample_ids: Vec<String>,
    pub snp_ids: Vec<String>,
    pub labels: Option<Labels>,
}

impl GenotypeDataset {
    /// Builds a dataset and checks every structural invariant.
    pub fn new(
        genotypes: Array2<u8>,
        sample_ids: Vec<String>,
        snp_ids: Vec<String>,
        labels: Option<Labels>,
    ) -> Result<Self> {
        let ds = GenotypeDataset {
            genotypes,
            sample_ids,
            snp_ids,
            labels,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn n_samples(&self) -> usize {
        self.genotypes.nrows()
    }

    pub fn n_snps(&self) -> usize {
        self.genotypes.ncols()
    }

    pub fn snp(&self, j: usize) -> ArrayView1<'_, u8> {
        self.genotypes.column(j)
    }

    pub fn labels(&self) -> Result<&Labels> {
        self.labels
            .as_ref()
            .ok_or_else(|| Error::arg("dataset has no population labels"))
    }

    pub fn validate(&self) -> Result<()> {
        let (n, d) = self.genotypes.dim();
        if self.sample_ids.len() != n {
            return Err(Error::shape(format!(
                "{} sample ids for {n} rows",
                self.sample_ids.len()
            )));
        }
        if self.snp_ids.len() != d {
            return Err(Error::shape(format!(
                "{} SNP ids for {d} columns",
                self.snp_ids.len()
            )));
        }
        if let Some(bad) = self.genotypes.iter().find(|&&g| g > 2 && g != MISSING) {
            return Err(Error::arg(format!(
                "genotype value {bad} outside {{0,1,2}}"
            )));
        }
        check_unique(&self.sample_ids, "sample")?;
        check_unique(&self.snp_ids, "SNP")?;
        if let Some(l) = &self.labels {
            if l.labels.len() != n {
                return Err(Error::shape(format!(
                    "{} labels for {n} samples",
                    l.labels.len()
                )));
            }
            if l.region_of.len() != l.classes.len() {
                return Err(Error::shape(
                    "region map must cover every class".to_string(),
                ));
            }
            if l.labels.iter().any(|&c| c >= l.classes.len()) {
                return Err(Error::arg("label outside class vocabulary"));
            }
            if l.region_of.iter().any(|&r| r >= l.regions.len()) {
                return Err(Error::arg("region index outside region vocabulary"));
            }
        }
        Ok(())
    }

    /// Keeps the listed SNP columns in the given order.
    pub fn select_snps(&self, keep: &[usize]) -> GenotypeDataset {
        GenotypeDataset {
            genotypes: self.genotypes.select(Axis(1), keep),
            sample_ids: self.sample_ids.clone(),
            snp_ids: keep.iter().map(|&j| self.snp_ids[j].clone()).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Keeps the listed samples in the given order.
    pub fn select_samples(&self, rows: &[usize]) -> GenotypeDataset {
        GenotypeDataset {
            genotypes: self.genotypes.select(Axis(0), rows),
            sample_ids: rows.iter().map(|&i| self.sample_ids[i].clone()).collect(),
            snp_ids: self.snp_ids.clone(),
            labels: self.labels.as_ref().map(|l| Labels {
                labels: rows.iter().map(|&i| l.labels[i]).collect(),
                ..l.clone()
            }),
        }
    }
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = std::collections::HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::arg(format!("duplicate {what} id `{id}`")));
        }
    }
    Ok(())
}
