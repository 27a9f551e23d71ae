use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use dietnet::diet::{input_scale, DietNetwork, EmbeddingSource, TrainConfig};
use dietnet::embedding::{
    embed_class_histogram, embed_one_hot, embed_random_projection, embed_snp2vec, train_dae,
    DaeConfig,
};
use dietnet::genotype::{block_frequencies, synthesize, PopulationSpec};
use dietnet::nn::{perturb_params, Activation, GradCheckReport};
use serde::Serialize;

use super::write_file;
use crate::config::activation;
use crate::manifest::Manifest;

#[derive(clap::Args, Serialize)]
pub struct Args {
    #[arg(long, default_value_t = 9)]
    samples: usize,
    #[arg(long, default_value_t = 12)]
    snps: usize,
    #[arg(long, default_value_t = 3)]
    classes: usize,
    /// Width of both classifier hidden layers.
    #[arg(long, default_value_t = 5)]
    hidden: usize,
    /// Embedding width (random projection, SNP2Vec, learnt).
    #[arg(long, default_value_t = 4)]
    n_f: usize,
    #[arg(long, default_value = "relu")]
    activation: String,
    #[arg(long, default_value_t = 0.3)]
    dropout: f64,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    /// Parameters are moved by up to this much before checking.
    #[arg(long, default_value_t = 0.05)]
    jitter: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

pub fn main(args: Args) -> Result<ExitCode> {
    if args.samples < args.classes
        || args.classes == 0
        || args.snps == 0
        || args.hidden == 0
        || args.n_f == 0
    {
        bail!("need at least one sample per class and positive dimensions");
    }
    let act = activation(&args.activation)?;
    let per = args.samples.div_ceil(args.classes);
    let pops: Vec<PopulationSpec> = block_frequencies(args.classes, args.snps, 0.8, 0.2)
        .into_iter()
        .enumerate()
        .map(|(k, frequencies)| PopulationSpec {
            name: format!("C{k}"),
            region: "R".into(),
            samples: per,
            frequencies,
        })
        .collect();
    let ds = synthesize(&pops, args.seed)?;
    let rows: Vec<usize> = (0..ds.n_samples()).collect();
    let (x, _) = input_scale(ds.genotypes.view(), &rows);
    let y = ds.labels()?.labels.clone();
    let c = args.classes;

    let dae_cfg = DaeConfig {
        hidden_dim: args.n_f,
        epochs: 3,
        activation: act,
        seed: args.seed,
        ..DaeConfig::default()
    };
    let (dae, _) = train_dae(x.view(), &dae_cfg)?;
    let sources: Vec<(&str, Option<EmbeddingSource>)> = vec![
        ("basic", None),
        (
            "random_projection",
            Some(EmbeddingSource::Fixed(embed_random_projection(
                x.view(),
                args.n_f,
                args.seed,
                Activation::Identity,
            )?)),
        ),
        (
            "class_histogram",
            Some(EmbeddingSource::Fixed(embed_class_histogram(
                ds.genotypes.view(),
                &y,
                c,
            )?)),
        ),
        (
            "snp2vec",
            Some(EmbeddingSource::Fixed(embed_snp2vec(&dae, args.snps, 1.0)?)),
        ),
        (
            "one_hot",
            Some(EmbeddingSource::Fixed(embed_one_hot(args.snps))),
        ),
        (
            "learnt",
            Some(EmbeddingSource::learnt(
                x.view(),
                args.n_f,
                act,
                args.seed,
                "",
            )),
        ),
    ];

    println!(
        "dims: samples={} snps={} classes={c} hidden={}x2 n_f={} activation={} dropout={} eps={:e} tolerance={:e}",
        ds.n_samples(),
        args.snps,
        args.hidden,
        args.n_f,
        act.name(),
        args.dropout,
        args.eps,
        args.tolerance
    );
    let mut results: Vec<(String, f64, GradCheckReport)> = Vec::new();
    for (name, source) in &sources {
        for gamma in [0.0, 10.0] {
            let cfg = TrainConfig {
                hidden: vec![args.hidden, args.hidden],
                aux_hidden: args.n_f,
                activation: act,
                gamma,
                dropout: args.dropout,
                seed: args.seed,
                ..TrainConfig::default()
            };
            let mut net = match source {
                None => DietNetwork::basic(args.snps, c, &cfg)?,
                Some(s) => DietNetwork::diet(s.clone(), c, &cfg)?,
            };
            perturb_params(&mut net, args.jitter, args.seed.wrapping_add(1));
            let report = net.check_gradients(
                x.view(),
                &y,
                gamma,
                args.eps,
                args.tolerance,
                args.seed.wrapping_add(2),
            );
            println!(
                "{:<18} gamma={:<4} max rel error {:.3e}  {}",
                name,
                gamma,
                report.max_rel_error,
                if report.passed { "PASS" } else { "FAIL" }
            );
            results.push((name.to_string(), gamma, report));
        }
    }
    let passed = results.iter().all(|r| r.2.passed);

    let out = crate::output_dir(args.out.clone(), "gradcheck");
    write_file(&out.join("gradcheck.csv"), |w| {
        writeln!(w, "model,gamma,block,n,rel_error,max_abs_error,passed")?;
        for (name, gamma, r) in &results {
            for b in &r.blocks {
                writeln!(
                    w,
                    "{name},{gamma},{},{},{:.6e},{:.6e},{}",
                    b.name,
                    b.n,
                    b.rel_error,
                    b.max_abs_error,
                    b.rel_error < r.tolerance
                )?;
            }
        }
        Ok(())
    })?;
    Manifest::new("gradcheck", &args)?.write(&out)?;
    println!(
        "{}",
        if passed {
            "all checks passed"
        } else {
            "some checks FAILED"
        }
    );
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
