//! Minor-allele-frequency filtering and windowed LD pruning.

use ndarray::ArrayView1;

use super::{GenotypeDataset, MISSING};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MafReport {
    pub kept: usize,
    pub dropped: usize,
    /// Columns with no observed call; excluded.
    pub all_missing: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LdReport {
    pub kept: usize,
    pub removed: usize,
    /// Number of sweeps until nothing more was removed.
    pub sweeps: usize,
    /// Pairs where at least one SNP had no variance; scored as r² = 0.
    pub zero_variance_pairs: usize,
}

/// Minor allele frequency of one SNP column, or `None` if all calls are
/// missing.
pub fn minor_allele_frequency(col: ArrayView1<'_, u8>) -> Option<f64> {
    let (sum, n) = col
        .iter()
        .filter(|&&g| g != MISSING)
        .fold((0u64, 0u64), |(s, n), &g| (s + g as u64, n + 1));
    if n == 0 {
        return None;
    }
    let p = sum as f64 / (2.0 * n as f64);
    Some(p.min(1.0 - p))
}

/// Keeps SNPs whose minor allele frequency is at least `threshold`.
pub fn filter_maf(ds: &GenotypeDataset, threshold: f64) -> Result<(GenotypeDataset, MafReport)> {
    if !(0.0..=0.5).contains(&threshold) {
        return Err(Error::arg(format!(
            "MAF threshold {threshold} outside [0, 0.5]"
        )));
    }
    let mafs = par::map_indices(ds.n_snps(), |j| minor_allele_frequency(ds.snp(j)));
    let mut report = MafReport::default();
    let mut keep = Vec::new();
    for (j, maf) in mafs.into_iter().enumerate() {
        match maf {
            None => report.all_missing += 1,
            Some(m) if m >= threshold => keep.push(j),
            Some(_) => report.dropped += 1,
        }
    }
    if report.all_missing > 0 {
        log::warn!(
            "{} SNPs had no observed genotype and were excluded",
            report.all_missing
        );
    }
    report.kept = keep.len();
    Ok((ds.select_snps(&keep), report))
}

/// Squared Pearson correlation over samples observed at both SNPs.
/// Returns `None` when either column has zero variance on those samples.
pub fn r_squared(a: ArrayView1<'_, u8>, b: ArrayView1<'_, u8>) -> Option<f64> {
    let (mut n, mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b.iter()) {
        if x == MISSING || y == MISSING {
            continue;
        }
        let (x, y) = (x as f64, y as f64);
        n += 1.0;
        sa += x;
        sb += y;
        saa += x * x;
        sbb += y * y;
        sab += x * y;
    }
    if n < 2.0 {
        return None;
    }
    let va = saa - sa * sa / n;
    let vb = sbb - sb * sb / n;
    if va <= 1e-12 || vb <= 1e-12 {
        return None;
    }
    let cov = sab - sa * sb / n;
    Some((cov * cov / (va * vb)).min(1.0))
}

/// Window start positions: `0, step, 2·step, …` until a window reaches the
/// last column.
pub(crate) fn window_starts(n: usize, window: usize, step: usize) -> Vec<usize> {
    let mut starts = vec![0];
    let mut s = 0;
    while s + window < n {
        s += step;
        starts.push(s);
    }
    starts
}

fn validate_ld(window: usize, step: usize, r2_max: f64) -> Result<()> {
    if window < 2 {
        return Err(Error::arg("LD window must cover at least 2 SNPs"));
    }
    if step < 1 || step > window {
        return Err(Error::arg(format!(
            "LD step {step} must be in [1, {window}]"
        )));
    }
    if !(r2_max > 0.0 && r2_max <= 1.0) {
        return Err(Error::arg(format!("r² threshold {r2_max} outside (0, 1]")));
    }
    Ok(())
}

/// Greedy windowed pruning.
///
/// Windows of `window` consecutive surviving SNPs advance by `step`. Inside
/// a window every surviving pair with r² > `r2_max` loses its later column.
/// Sweeps repeat over the survivors until one removes nothing, so the
/// result is a fixed point and applying the pruning again changes nothing.
pub fn prune_ld(
    ds: &GenotypeDataset,
    window: usize,
    step: usize,
    r2_max: f64,
) -> Result<(GenotypeDataset, LdReport)> {
    validate_ld(window, step, r2_max)?;
    let mut alive: Vec<usize> = (0..ds.n_snps()).collect();
    let mut report = LdReport::default();
    loop {
        report.sweeps += 1;
        let (next, zero_var) = sweep(ds, &alive, window, step, r2_max);
        report.zero_variance_pairs += zero_var;
        let changed = next.len() != alive.len();
        alive = next;
        if !changed {
            break;
        }
    }
    if report.zero_variance_pairs > 0 {
        log::warn!(
            "{} SNP pairs involved a zero-variance column and were scored r² = 0",
            report.zero_variance_pairs
        );
    }
    report.kept = alive.len();
    report.removed = ds.n_snps() - alive.len();
    Ok((ds.select_snps(&alive), report))
}

/// One pass over the windows of `cols`; returns the survivors.
fn sweep(
    ds: &GenotypeDataset,
    cols: &[usize],
    window: usize,
    step: usize,
    r2_max: f64,
) -> (Vec<usize>, usize) {
    let mut removed = vec![false; cols.len()];
    let mut zero_var = 0;
    for start in window_starts(cols.len(), window, step) {
        let end = (start + window).min(cols.len());
        let members: Vec<usize> = (start..end).filter(|&k| !removed[k]).collect();
        let m = members.len();
        // r² for every pair (a < b) of the window's current survivors
        let pairs: Vec<(usize, usize)> = (0..m)
            .flat_map(|a| ((a + 1)..m).map(move |b| (a, b)))
            .collect();
        let scores = par::map_slice(&pairs, |&(a, b)| {
            r_squared(ds.snp(cols[members[a]]), ds.snp(cols[members[b]]))
        });
        let mut r2 = vec![0.0; m * m];
        for (&(a, b), s) in pairs.iter().zip(&scores) {
            match s {
                Some(v) => r2[a * m + b] = *v,
                None => zero_var += 1,
            }
        }
        for a in 0..m {
            if removed[members[a]] {
                continue;
            }
            for b in (a + 1)..m {
                if !removed[members[b]] && r2[a * m + b] > r2_max {
                    removed[members[b]] = true;
                }
            }
        }
    }
    let survivors = cols
        .iter()
        .zip(&removed)
        .filter(|(_, &r)| !r)
        .map(|(&c, _)| c)
        .collect();
    (survivors, zero_var)
}
