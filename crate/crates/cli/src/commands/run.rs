use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use dietnet::diet::TrainConfig;
use dietnet::embedding::EmbeddingKind;
use dietnet::evaluation::{
    confusion_svg, confusion_table, count_free_params, row_normalize, run_cv, write_confusion_csv,
    write_predictions_csv, write_summary_csv, CvConfig, CvReport, CvRun, ModelSpec, ParamSpec,
};
use dietnet::genotype::{make_folds, GenotypeDataset};
use dietnet::nn::write_checkpoint;
use ndarray::Array2;

use super::{read_dataset, write_file};
use crate::config::RunConfig;
use crate::manifest::Manifest;

#[derive(clap::Args)]
pub struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Folds trained concurrently (0: one per core).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    /// Validate the config and print parameter counts without training.
    #[arg(long)]
    dry_run: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// One line of the summary table.
pub struct Row {
    pub model: String,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub region: Option<f64>,
    pub params: Option<u64>,
}

/// `31.5M`, `217.2k`, `950`.
pub fn human(n: u64) -> String {
    if n >= 1_000_000 {
        format!("{:.1}M", n as f64 / 1e6)
    } else if n >= 1_000 {
        format!("{:.1}k", n as f64 / 1e3)
    } else {
        n.to_string()
    }
}

pub fn table(rows: &[Row]) -> String {
    let width = rows.iter().map(|r| r.model.len()).max().unwrap_or(5).max(5);
    let mut s = format!(
        "{:<width$}  {:>22}  {:>14}  {:>18}\n",
        "Model", "Misclassif. error (%)", "Region err (%)", "# free params"
    );
    for r in rows {
        let err = match (r.mean, r.std) {
            (Some(m), Some(sd)) => format!("{:.2} ± {:.2}", 100.0 * m, 100.0 * sd),
            _ => "-".into(),
        };
        let region = r.region.map_or("-".into(), |e| format!("{:.2}", 100.0 * e));
        let params = r
            .params
            .map_or("-".into(), |p| format!("{p} ({})", human(p)));
        s += &format!(
            "{:<width$}  {err:>22}  {region:>14}  {params:>18}\n",
            r.model
        );
    }
    s
}

/// Directory name for a model descriptor.
fn slug(model: &str) -> String {
    let mut s = String::new();
    for c in model.chars() {
        if c.is_ascii_alphanumeric() || c == '_' {
            s.push(c);
        } else if !s.ends_with('-') {
            s.push('-');
        }
    }
    s.trim_matches('-').to_string()
}

/// Fat-layer parameter count predicted from the configuration alone (none
/// for PCA and for deeper auxiliary networks).
fn predicted_params(
    spec: &ModelSpec,
    ds: &GenotypeDataset,
    n_train: usize,
    train: &TrainConfig,
) -> Result<Option<u64>> {
    let n_d = ds.n_snps() as u64;
    let n_classes = ds.labels()?.n_classes() as u64;
    let mut widths = vec![train.hidden[0] as u64];
    if train.reconstruction() {
        widths.push(train.last_hidden() as u64);
    }
    let heads = |p: ParamSpec, n_f: u64| -> u64 {
        widths
            .iter()
            .map(|&h| count_free_params(p, n_d, 0, n_f, h, false))
            .sum()
    };
    let fixed = ParamSpec::FixedEmbedding {
        aux_bias: train.aux_bias,
    };
    Ok(match spec {
        ModelSpec::Basic => Some(heads(ParamSpec::Basic, 0)),
        ModelSpec::Diet(e) if train.aux_layers.is_empty() => Some(match e.kind {
            EmbeddingKind::RandomProjection => heads(fixed, e.n_f as u64),
            EmbeddingKind::ClassHistogram => heads(fixed, 3 * n_classes),
            EmbeddingKind::Snp2Vec => heads(fixed, e.dae.hidden_dim as u64),
            EmbeddingKind::OneHot => heads(fixed, n_d),
            EmbeddingKind::Learnt => {
                let w = train.aux_hidden as u64;
                (n_train as u64 * w + w) + heads(fixed, w)
            }
        }),
        _ => None,
    })
}

fn write_report(dir: &Path, run: &CvRun, ds: &GenotypeDataset) -> Result<()> {
    let r = &run.report;
    write_file(&dir.join("summary.csv"), |w| write_summary_csv(r, w))?;
    write_file(&dir.join("predictions.csv"), |w| {
        write_predictions_csv(r, &ds.sample_ids, w)
    })?;
    let fmt = |m: &Array2<f64>| m.mapv(|v| format!("{v:.6}"));
    for (name, m, names) in [
        ("class", &r.class_confusion, &r.class_names),
        ("region", &r.region_confusion, &r.region_names),
    ] {
        write_file(&dir.join(format!("confusion_{name}.csv")), |w| {
            write_confusion_csv(m, names, w)
        })?;
        let norm = row_normalize(m);
        write_file(&dir.join(format!("confusion_{name}_normalized.csv")), |w| {
            write_confusion_csv(&fmt(&norm), names, w)
        })?;
        let title = format!("{} ({name}, row-normalised)", r.model);
        std::fs::write(
            dir.join(format!("confusion_{name}.svg")),
            confusion_svg(&norm, names, &title),
        )?;
    }
    let text = format!(
        "{}\n\nclass confusion (rows: true, columns: predicted)\n{}\nregion confusion\n{}",
        r.model,
        confusion_table(&r.class_confusion, &r.class_names),
        confusion_table(&r.region_confusion, &r.region_names)
    );
    std::fs::write(dir.join("confusion.txt"), text)?;
    for (t, (h, ck)) in run.histories.iter().zip(&run.checkpoints).enumerate() {
        let fold = dir.join(format!("fold{t}"));
        if let Some(h) = h {
            write_file(&fold.join("history.csv"), |w| h.write_csv(w))?;
        }
        if let Some(ck) = ck {
            write_file(&fold.join("model.dnck"), |w| write_checkpoint(ck, w))?;
        }
    }
    Ok(())
}

fn row(r: &CvReport) -> Row {
    Row {
        model: r.model.clone(),
        mean: Some(r.mean_error),
        std: Some(r.std_error),
        region: Some(r.region_error()),
        params: r.fat_params.map(|p| p as u64),
    }
}

pub fn write_summary(path: &Path, rows: &[Row]) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "model,mean_error,std_error,region_error,fat_params")?;
        let f = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.6}"));
        for r in rows {
            let p = r.params.map_or(String::new(), |p| p.to_string());
            writeln!(
                w,
                "{},{},{},{},{p}",
                r.model,
                f(r.mean),
                f(r.std),
                f(r.region)
            )?;
        }
        Ok(())
    })
}

pub fn main(args: Args) -> Result<ExitCode> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(j) = args.jobs {
        cfg.jobs = j;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(e) = args.max_epochs {
        cfg.train.max_epochs = Some(e);
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    cfg.validate()?;
    let train = cfg.train.to_config(cfg.seed)?;
    let specs = cfg.specs()?;
    let ds = read_dataset(&cfg.dataset)?;
    let labels = ds
        .labels()
        .context("the dataset has no population labels")?;
    let split = make_folds(&ds, cfg.folds, cfg.seed)?;
    let n_train = split.train(0).len();
    println!(
        "{} samples × {} SNPs, {} classes, {} folds (fold 0 trains on {n_train})",
        ds.n_samples(),
        ds.n_snps(),
        labels.n_classes(),
        cfg.folds
    );

    if args.dry_run {
        let mut rows = Vec::new();
        for spec in &specs {
            rows.push(Row {
                model: spec.describe(&train),
                mean: None,
                std: None,
                region: None,
                params: predicted_params(spec, &ds, n_train, &train)?,
            });
        }
        print!("{}", table(&rows));
        return Ok(ExitCode::SUCCESS);
    }

    let out = crate::output_dir(cfg.out.clone(), "run");
    let cv = CvConfig {
        folds: cfg.folds,
        seed: cfg.seed,
        train: train.clone(),
        jobs: cfg.jobs,
    };
    let mut rows = Vec::new();
    for spec in &specs {
        let name = spec.describe(&train);
        log::info!("running {name}");
        let run = run_cv(&ds, spec, &cv).with_context(|| format!("model {name}"))?;
        write_report(&out.join(slug(&name)), &run, &ds)?;
        rows.push(row(&run.report));
    }
    let text = table(&rows);
    print!("{text}");
    write_summary(&out.join("summary.csv"), &rows)?;
    std::fs::write(out.join("summary.txt"), &text)?;

    let mut manifest = Manifest::new("run", &cfg)?;
    manifest.input(&args.config)?;
    manifest.input(&cfg.dataset)?;
    manifest.write(&out)?;
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn human_rounding() {
        assert_eq!(human(31_534_500), "31.5M");
        assert_eq!(human(217_200), "217.2k");
        assert_eq!(human(7_900), "7.9k");
        assert_eq!(human(950), "950");
    }

    #[test]
    fn slugs() {
        assert_eq!(
            slug("diet[class_histogram] + recon"),
            "diet-class_histogram-recon"
        );
        assert_eq!(slug("pca(100) + mlp(100,100)"), "pca-100-mlp-100-100");
    }
}
