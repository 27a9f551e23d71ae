//! Results must not depend on the size of the worker pool.

use dietnet::diet::TrainConfig;
use dietnet::embedding::{embed_class_histogram, embed_random_projection, EmbeddingKind};
use dietnet::evaluation::{run_cv, CvConfig, EmbeddingSpec, ModelSpec};
use dietnet::genotype::{balding_nichols_frequencies, prune_ld, synthesize, PopulationSpec};
use dietnet::nn::{linalg::matmul, Activation};
use dietnet::par::with_threads;
use ndarray::Array2;

fn cohort() -> dietnet::genotype::GenotypeDataset {
    let pops: Vec<PopulationSpec> = balding_nichols_frequencies(4, 150, 0.1, 8)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(k, frequencies)| PopulationSpec {
            name: format!("P{k}"),
            region: format!("R{}", k % 2),
            samples: 10,
            frequencies,
        })
        .collect();
    synthesize(&pops, 3).unwrap()
}

#[test]
fn kernels_agree_across_pool_sizes() {
    let ds = cohort();
    let x = ds.genotypes.mapv(|g| g as f64 / 2.0);
    let w = Array2::from_shape_fn((150, 33), |(i, j)| {
        ((i * 31 + j * 7) % 13) as f64 / 13.0 - 0.5
    });
    let labels = ds.labels().unwrap().labels.clone();
    let run = || {
        (
            matmul(x.view(), w.view()),
            embed_class_histogram(ds.genotypes.view(), &labels, 4)
                .unwrap()
                .matrix,
            embed_random_projection(x.view(), 9, 1, Activation::Relu)
                .unwrap()
                .matrix,
            prune_ld(&ds, 30, 4, 0.2).unwrap().0,
            synthesize(
                &[PopulationSpec {
                    name: "A".into(),
                    region: "R".into(),
                    samples: 20,
                    frequencies: vec![0.3; 50],
                }],
                6,
            )
            .unwrap(),
        )
    };
    let one = with_threads(1, run);
    let four = with_threads(4, run);
    assert_eq!(one, four);
}

#[test]
fn cross_validation_agrees_across_pool_sizes() {
    let ds = cohort();
    let cfg = CvConfig {
        folds: 4,
        seed: 1,
        train: TrainConfig {
            hidden: vec![8, 8],
            aux_hidden: 4,
            gamma: 1.0,
            max_epochs: 6,
            ..TrainConfig::default()
        },
        jobs: 0,
    };
    let spec = ModelSpec::Diet(EmbeddingSpec::new(EmbeddingKind::Learnt));
    let one = with_threads(1, || run_cv(&ds, &spec, &cfg).unwrap());
    let three = with_threads(3, || run_cv(&ds, &spec, &cfg).unwrap());
    assert_eq!(one.report, three.report);
    assert_eq!(one.checkpoints, three.checkpoints);
}
