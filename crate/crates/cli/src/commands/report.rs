use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use super::run::{table, write_summary, Row};
use crate::manifest::Manifest;

#[derive(clap::Args, Serialize)]
pub struct Args {
    /// Output directories of `run`.
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

fn parse_summary(path: &PathBuf) -> Result<Vec<Row>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    if lines.next() != Some("model,mean_error,std_error,region_error,fat_params") {
        bail!("{} is not a run summary", path.display());
    }
    let opt =
        |s: &str| -> Result<Option<f64>> { Ok(if s.is_empty() { None } else { Some(s.parse()?) }) };
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        // model names contain no commas except inside `mlp(…)`, so split from the right
        let f: Vec<&str> = line.rsplitn(5, ',').collect();
        if f.len() != 5 {
            bail!("{}:{}: expected 5 fields", path.display(), i + 2);
        }
        rows.push(Row {
            model: f[4].to_string(),
            mean: opt(f[3])?,
            std: opt(f[2])?,
            region: opt(f[1])?,
            params: if f[0].is_empty() {
                None
            } else {
                Some(f[0].parse()?)
            },
        });
    }
    Ok(rows)
}

pub fn main(args: Args) -> Result<ExitCode> {
    let mut rows = Vec::new();
    let mut inputs = Vec::new();
    for dir in &args.runs {
        let p = dir.join("summary.csv");
        rows.extend(parse_summary(&p)?);
        inputs.push(p);
    }
    let text = table(&rows);
    print!("{text}");
    let out = crate::output_dir(args.out.clone(), "report");
    write_summary(&out.join("summary.csv"), &rows)?;
    std::fs::write(out.join("summary.txt"), &text)?;
    let mut m = Manifest::new("report", &args)?;
    for p in &inputs {
        m.input(p)?;
    }
    m.write(&out)?;
    Ok(ExitCode::SUCCESS)
}
