//! Seeded synthetic cohorts drawn from per-population allele frequencies.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use super::{GenotypeDataset, Labels};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    pub name: String,
    pub region: String,
    pub samples: usize,
    /// Frequency of the counted allele at every SNP.
    pub frequencies: Vec<f64>,
}

/// Draws `g ~ Binomial(2, f)` for every sample and SNP.
///
/// Sample `i` uses its own ChaCha stream, so output is identical whether or
/// not rows are generated in parallel. Labels follow population order; the
/// class vocabulary is the population names as given.
pub fn synthesize(populations: &[PopulationSpec], seed: u64) -> Result<GenotypeDataset> {
    let first = populations
        .first()
        .ok_or_else(|| Error::arg("no populations to sample from"))?;
    let n_snps = first.frequencies.len();
    for p in populations {
        if p.frequencies.len() != n_snps {
            return Err(Error::shape(format!(
                "population `{}` has {} frequencies, expected {n_snps}",
                p.name,
                p.frequencies.len()
            )));
        }
        if let Some(f) = p.frequencies.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(Error::arg(format!("frequency {f} outside [0, 1]")));
        }
    }

    let mut pop_of = Vec::new();
    let mut sample_ids = Vec::new();
    for (k, p) in populations.iter().enumerate() {
        for i in 0..p.samples {
            pop_of.push(k);
            sample_ids.push(format!("{}_{}{:04}", p.name, p.name, i));
        }
    }
    let n = pop_of.len();

    let mut genotypes = Array2::<u8>::zeros((n, n_snps));
    if n_snps > 0 {
        let slice = genotypes.as_slice_mut().expect("standard layout");
        par::for_each_chunk_mut(slice, n_snps, |i, row| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let freqs = &populations[pop_of[i]].frequencies;
            for (g, &f) in row.iter_mut().zip(freqs) {
                *g = rng.gen_bool(f) as u8 + rng.gen_bool(f) as u8;
            }
        });
    }

    let classes: Vec<String> = populations.iter().map(|p| p.name.clone()).collect();
    let mut regions: Vec<String> = populations.iter().map(|p| p.region.clone()).collect();
    regions.sort();
    regions.dedup();
    let region_of = populations
        .iter()
        .map(|p| regions.binary_search(&p.region).unwrap())
        .collect();

    GenotypeDataset::new(
        genotypes,
        sample_ids,
        (0..n_snps).map(|j| format!("snp{j:06}")).collect(),
        Some(Labels {
            labels: pop_of,
            classes,
            regions,
            region_of,
        }),
    )
}

/// Frequencies with one high-frequency block per population: population
/// `k` has `high` on SNPs `j` with `j % n_pops == k` and `low` elsewhere.
pub fn block_frequencies(n_pops: usize, n_snps: usize, high: f64, low: f64) -> Vec<Vec<f64>> {
    (0..n_pops)
        .map(|k| {
            (0..n_snps)
                .map(|j| if j % n_pops == k { high } else { low })
                .collect()
        })
        .collect()
}

/// Pulls every frequency towards 0.5: `p ↦ (1 − overlap)·p + overlap/2`.
/// `overlap = 1` makes all populations identical.
pub fn add_overlap(frequencies: &mut [Vec<f64>], overlap: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::arg(format!("overlap {overlap} outside [0, 1]")));
    }
    for p in frequencies.iter_mut().flatten() {
        *p = (1.0 - overlap) * *p + overlap * 0.5;
    }
    Ok(())
}

/// Balding–Nichols drift: ancestral frequencies `p ~ U(0.05, 0.5)` and
/// per-population frequencies `Beta(p(1−F)/F, (1−p)(1−F)/F)` with
/// differentiation `fst`. Small `fst` gives heavily overlapping classes.
pub fn balding_nichols_frequencies(
    n_pops: usize,
    n_snps: usize,
    fst: f64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if !(fst > 0.0 && fst < 1.0) {
        return Err(Error::arg(format!("fst {fst} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ancestral: Vec<f64> = (0..n_snps).map(|_| rng.gen_range(0.05..0.5)).collect();
    let scale = (1.0 - fst) / fst;
    let mut out = vec![Vec::with_capacity(n_snps); n_pops];
    for &p in &ancestral {
        let beta =
            Beta::new(p * scale, (1.0 - p) * scale).map_err(|e| Error::arg(e.to_string()))?;
        for pop in out.iter_mut() {
            pop.push(beta.sample(&mut rng));
        }
    }
    Ok(out)
}
