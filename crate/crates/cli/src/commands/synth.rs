use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use dietnet::genotype::{
    add_overlap, balding_nichols_frequencies, block_frequencies, builtin_region, synthesize,
    write_cache, write_csv, write_panel, write_raw, PopulationSpec,
};
use serde::Serialize;

use super::write_file;
use crate::config::{FrequencyModel, SynthSpec};
use crate::manifest::Manifest;

#[derive(clap::Args, Serialize)]
pub struct Args {
    /// TOML description of the populations.
    #[arg(long)]
    spec: PathBuf,
    /// Also write `dataset.raw` and `panel.txt`.
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

pub fn build(spec: &SynthSpec) -> Result<dietnet::genotype::GenotypeDataset> {
    let k = spec.populations.len();
    if k == 0 {
        bail!("the spec lists no population");
    }
    let mut freqs = match spec.frequencies {
        FrequencyModel::Blocks { high, low, overlap } => {
            let mut f = block_frequencies(k, spec.snps, high, low);
            add_overlap(&mut f, overlap)?;
            f
        }
        FrequencyModel::BaldingNichols { fst, overlap } => {
            let mut f = balding_nichols_frequencies(k, spec.snps, fst, spec.seed)?;
            add_overlap(&mut f, overlap)?;
            f
        }
    };
    let pops: Vec<PopulationSpec> = spec
        .populations
        .iter()
        .zip(freqs.drain(..))
        .map(|(p, frequencies)| PopulationSpec {
            name: p.name.clone(),
            region: p
                .region
                .clone()
                .or_else(|| builtin_region(&p.name).map(str::to_owned))
                .unwrap_or_else(|| p.name.clone()),
            samples: p.samples,
            frequencies,
        })
        .collect();
    Ok(synthesize(&pops, spec.seed)?)
}

pub fn main(args: Args) -> Result<ExitCode> {
    let out = crate::output_dir(args.out.clone(), "synth");
    let spec = SynthSpec::load(&args.spec)?;
    let ds = build(&spec)?;
    let labels = ds.labels()?;

    write_file(&out.join("dataset.dngt"), |w| write_cache(&ds, w))?;
    write_file(&out.join("dataset.csv"), |w| write_csv(&ds, w))?;
    write_file(&out.join("classes.csv"), |w| {
        writeln!(w, "population,region,samples")?;
        for (c, n) in labels.class_counts().iter().enumerate() {
            writeln!(
                w,
                "{},{},{n}",
                labels.classes[c], labels.regions[labels.region_of[c]]
            )?;
        }
        Ok(())
    })?;
    if args.raw {
        write_file(&out.join("dataset.raw"), |w| write_raw(&ds, w))?;
        write_file(&out.join("panel.txt"), |w| write_panel(&ds, w))?;
    }
    let mut manifest = Manifest::new("synth", &args)?;
    manifest.input(&args.spec)?;
    manifest.write(&out)?;

    println!(
        "{} samples × {} SNPs, {} classes in {} regions",
        ds.n_samples(),
        ds.n_snps(),
        labels.n_classes(),
        labels.n_regions()
    );
    for (c, n) in labels.class_counts().iter().enumerate() {
        println!("  {:<8} {n}", labels.classes[c]);
    }
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}
