use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use dietnet::genotype::{filter_maf, parse_panel, parse_raw, prune_ld, write_cache};
use serde::Serialize;

use super::write_file;
use crate::manifest::Manifest;

#[derive(clap::Args, Serialize)]
pub struct Args {
    /// PLINK `--recodeA` output.
    #[arg(long)]
    raw: PathBuf,
    /// Sample panel: `sample population [region]` per line.
    #[arg(long)]
    panel: PathBuf,
    /// Optional `population region` table overriding the panel and the
    /// built-in table.
    #[arg(long)]
    regions: Option<PathBuf>,
    /// Minimum minor allele frequency (0 disables the filter).
    #[arg(long, default_value_t = 0.05)]
    maf: f64,
    #[arg(long, default_value_t = 50)]
    ld_window: usize,
    #[arg(long, default_value_t = 5)]
    ld_step: usize,
    /// Maximum within-window r² (1 disables pruning).
    #[arg(long, default_value_t = 0.5)]
    r2: f64,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

fn read_regions(path: &PathBuf) -> Result<BTreeMap<String, String>> {
    let reader =
        BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut map = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.first().is_none_or(|t| t.starts_with('#')) {
            continue;
        }
        match toks.as_slice() {
            [p, r] => {
                map.insert(p.to_string(), r.to_string());
            }
            _ => bail!("{}:{}: expected `population region`", path.display(), i + 1),
        }
    }
    Ok(map)
}

pub fn main(args: Args) -> Result<ExitCode> {
    let out = crate::output_dir(args.out.clone(), "preprocess");
    let raw = parse_raw(BufReader::new(
        File::open(&args.raw).with_context(|| format!("opening {}", args.raw.display()))?,
    ))
    .with_context(|| format!("parsing {}", args.raw.display()))?;
    let regions = args.regions.as_ref().map(read_regions).transpose()?;
    let panel = BufReader::new(
        File::open(&args.panel).with_context(|| format!("opening {}", args.panel.display()))?,
    );
    let ds = parse_panel(panel, &raw, regions.as_ref())
        .with_context(|| format!("parsing {}", args.panel.display()))?;
    let n_in = ds.n_snps();

    let (ds, maf_line) = if args.maf > 0.0 {
        let (ds, r) = filter_maf(&ds, args.maf)?;
        let line = format!(
            "{} after MAF > {} ({} dropped, {} without calls)",
            r.kept, args.maf, r.dropped, r.all_missing
        );
        (ds, line)
    } else {
        (ds, "MAF filter disabled".to_string())
    };
    let n_maf = ds.n_snps();
    let (ds, ld) = prune_ld(&ds, args.ld_window, args.ld_step, args.r2)?;
    let n_ld = ds.n_snps();

    println!("samples: {}", ds.n_samples());
    println!("SNPs: {n_in} before filtering");
    println!("SNPs: {maf_line}");
    println!(
        "SNPs: {n_ld} after LD pruning (window {}, step {}, r² ≤ {}; {} removed in {} sweeps)",
        args.ld_window, args.ld_step, args.r2, ld.removed, ld.sweeps
    );

    write_file(&out.join("dataset.dngt"), |w| write_cache(&ds, w))?;
    write_file(&out.join("preprocess.csv"), |w| {
        writeln!(w, "stage,snps")?;
        writeln!(w, "input,{n_in}")?;
        writeln!(w, "maf,{n_maf}")?;
        writeln!(w, "ld,{n_ld}")?;
        Ok(())
    })?;
    let mut manifest = Manifest::new("preprocess", &args)?;
    manifest.input(&args.raw)?;
    manifest.input(&args.panel)?;
    if let Some(r) = &args.regions {
        manifest.input(r)?;
    }
    manifest.write(&out)?;
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}
