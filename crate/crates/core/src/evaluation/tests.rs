use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::baselines::Head;
use crate::diet::{DietNetwork, EmbeddingSource, TrainConfig};
use crate::embedding::{embed_one_hot, EmbeddingKind, FeatureEmbedding};
use crate::genotype::{
    assign_folds, block_frequencies, synthesize, GenotypeDataset, PopulationSpec,
};

#[test]
fn table_one_parameter_counts() {
    let (n_d, n_train, n_h) = (315_345, 2_070, 100);
    assert_eq!(
        count_free_params(ParamSpec::Basic, n_d, n_train, 0, n_h, false),
        31_534_500
    );
    assert_eq!(
        count_free_params(ParamSpec::Basic, n_d, n_train, 0, n_h, true),
        63_069_000
    );
    let fixed = ParamSpec::FixedEmbedding { aux_bias: true };
    assert_eq!(
        count_free_params(fixed, n_d, n_train, 100, n_h, false),
        10_100
    );
    assert_eq!(
        count_free_params(fixed, n_d, n_train, 100, n_h, true),
        20_200
    );
    assert_eq!(
        count_free_params(fixed, n_d, n_train, 78, n_h, false),
        7_900
    );
    assert_eq!(
        count_free_params(fixed, n_d, n_train, 78, n_h, true),
        15_800
    );
    assert_eq!(
        count_free_params(ParamSpec::RawEnd2End, n_d, n_train, 100, n_h, false),
        217_200
    );
    assert_eq!(
        count_free_params(ParamSpec::RawEnd2End, n_d, n_train, 100, n_h, true),
        227_300
    );
}

#[test]
fn worked_reduction_example() {
    let basic = count_free_params(ParamSpec::Basic, 300_000, 0, 0, 100, false);
    let diet = count_free_params(
        ParamSpec::FixedEmbedding { aux_bias: false },
        300_000,
        0,
        500,
        100,
        false,
    );
    assert_eq!((basic, diet), (30_000_000, 50_000));
    assert_eq!(basic / diet, 600);
    assert_eq!(basic % diet, 0);
}

/// The closed-form count agrees with the parameters the models allocate.
#[test]
fn counts_match_constructed_models() {
    let (n_d, n_train, n_f, n_h) = (37usize, 11usize, 6usize, 9usize);
    for recon in [false, true] {
        let cfg = TrainConfig {
            hidden: vec![n_h, n_h],
            aux_hidden: n_f,
            reconstruction: Some(recon),
            ..TrainConfig::default()
        };
        let basic = DietNetwork::basic(n_d, 4, &cfg).unwrap();
        assert_eq!(
            basic.fat_free_params() as u64,
            count_free_params(ParamSpec::Basic, n_d as u64, 0, 0, n_h as u64, recon)
        );
        for aux_bias in [false, true] {
            let emb = FeatureEmbedding::new(
                Array2::ones((n_d, n_f)),
                EmbeddingKind::RandomProjection,
                Default::default(),
            )
            .unwrap();
            let net = DietNetwork::diet(
                EmbeddingSource::Fixed(emb),
                4,
                &TrainConfig {
                    aux_bias,
                    ..cfg.clone()
                },
            )
            .unwrap();
            assert_eq!(
                net.fat_free_params() as u64,
                count_free_params(
                    ParamSpec::FixedEmbedding { aux_bias },
                    n_d as u64,
                    0,
                    n_f as u64,
                    n_h as u64,
                    recon
                )
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let source = EmbeddingSource::Learnt {
            features: Array2::from_shape_fn((n_d, n_train), |_| rng.gen_range(0.0..1.0)),
            shared: crate::nn::DenseLayer::glorot(
                n_train,
                n_f,
                crate::nn::Activation::Relu,
                &mut rng,
            ),
            fingerprint: String::new(),
        };
        let net = DietNetwork::diet(source, 4, &cfg).unwrap();
        assert_eq!(
            net.fat_free_params() as u64,
            count_free_params(
                ParamSpec::RawEnd2End,
                n_d as u64,
                n_train as u64,
                n_f as u64,
                n_h as u64,
                recon
            )
        );
    }
}

#[test]
fn confusion_examples() {
    let m = confusion(&[0, 1, 2, 3], &[0, 1, 2, 3], 4).unwrap();
    assert_eq!(m, Array2::from_diag(&array![1, 1, 1, 1]));
    let m = confusion(&[3], &[2], 4).unwrap();
    assert_eq!(m[[2, 3]], 1);
    assert_eq!(m.sum(), 1);
    assert!(confusion(&[4], &[0], 4).is_err());
    assert!(confusion(&[0, 1], &[0], 4).is_err());
}

#[test]
fn region_confusion_equals_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let region_of = [0, 0, 1, 2, 1, 2, 0];
    let truth: Vec<usize> = (0..200).map(|_| rng.gen_range(0..7)).collect();
    let pred: Vec<usize> = (0..200).map(|_| rng.gen_range(0..7)).collect();
    let class = confusion(&pred, &truth, 7).unwrap();
    let region = region_confusion(&class, &region_of, 3);
    let mut recount = Array2::<u64>::zeros((3, 3));
    for (&t, &p) in truth.iter().zip(&pred) {
        recount[[region_of[t], region_of[p]]] += 1;
    }
    assert_eq!(region, recount);
    assert!(confusion_error(&region) <= confusion_error(&class));
    let norm = row_normalize(&class);
    for (i, row) in norm.outer_iter().enumerate() {
        if class.row(i).sum() > 0 {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn mean_and_sample_std() {
    let v = [0.1, 0.2, 0.4, 0.3, 0.5];
    let (m, s) = mean_std(&v);
    assert!((m - 0.3).abs() < 1e-15);
    let direct = ((0.04 + 0.01 + 0.01 + 0.0 + 0.04) / 4.0f64).sqrt();
    assert!((s - direct).abs() < 1e-15);
    assert_eq!(mean_std(&[0.5]), (0.5, 0.0));
}

fn two_class_dataset(n: usize, d: usize) -> GenotypeDataset {
    let f = block_frequencies(2, d, 0.9, 0.1);
    let pops: Vec<PopulationSpec> = f
        .into_iter()
        .enumerate()
        .map(|(k, frequencies)| PopulationSpec {
            name: format!("P{k}"),
            region: format!("R{k}"),
            samples: n / 2,
            frequencies,
        })
        .collect();
    synthesize(&pops, 5).unwrap()
}

#[test]
fn constant_classifier_has_half_error_on_balanced_folds() {
    let ds = two_class_dataset(40, 10);
    let labels = ds.labels.as_ref().unwrap().labels.clone();
    let split = assign_folds(Some(&labels), 40, 5, 1).unwrap();
    let cfg = CvConfig::default();
    let run = cross_validate(&ds, &split, "zero", &cfg, |ctx| {
        Ok(FoldOutcome {
            predictions: vec![0; ctx.test_rows.len()],
            ..FoldOutcome::default()
        })
    })
    .unwrap();
    assert_eq!(run.report.mean_error, 0.5);
    assert_eq!(run.report.std_error, 0.0);
    assert_eq!(run.report.class_confusion, array![[20, 0], [20, 0]]);
}

#[test]
fn oracle_classifier_is_perfect() {
    let ds = two_class_dataset(30, 10);
    let labels = ds.labels.as_ref().unwrap().labels.clone();
    let split = assign_folds(Some(&labels), 30, 3, 1).unwrap();
    let run = cross_validate(&ds, &split, "oracle", &CvConfig::default(), |ctx| {
        Ok(FoldOutcome {
            predictions: ctx.y_test.clone(),
            ..FoldOutcome::default()
        })
    })
    .unwrap();
    let r = &run.report;
    assert_eq!(r.mean_error, 0.0);
    assert_eq!(r.class_confusion, Array2::from_diag(&array![15, 15]));
    assert_eq!(r.n_test(), 30);
    assert_eq!(r.class_confusion.sum(), 30);
}

#[test]
fn fold_contexts_do_not_leak() {
    let ds = two_class_dataset(30, 10);
    let labels = ds.labels.as_ref().unwrap().labels.clone();
    let split = assign_folds(Some(&labels), 30, 5, 1).unwrap();
    cross_validate(&ds, &split, "check", &CvConfig::default(), |ctx| {
        for r in &ctx.test_rows {
            assert!(!ctx.train_rows.contains(r) && !ctx.valid_rows.contains(r));
        }
        assert_eq!(
            ctx.train_rows.len() + ctx.valid_rows.len() + ctx.test_rows.len(),
            30
        );
        assert_eq!(
            ctx.fingerprint,
            crate::embedding::split_fingerprint(&ds.sample_ids, &ctx.train_rows)
        );
        Ok(FoldOutcome {
            predictions: ctx.y_test.clone(),
            ..FoldOutcome::default()
        })
    })
    .unwrap();
}

#[test]
fn failing_fold_reports_partial_results() {
    let ds = two_class_dataset(30, 10);
    let labels = ds.labels.as_ref().unwrap().labels.clone();
    let split = assign_folds(Some(&labels), 30, 5, 1).unwrap();
    let err = cross_validate(&ds, &split, "flaky", &CvConfig::default(), |ctx| {
        if ctx.fold == 2 {
            return Err(crate::Error::arg("boom"));
        }
        Ok(FoldOutcome {
            predictions: ctx.y_test.clone(),
            ..FoldOutcome::default()
        })
    })
    .unwrap_err();
    match err {
        crate::Error::FoldFailed {
            fold, completed, ..
        } => {
            assert_eq!(fold, 2);
            assert_eq!(
                completed.iter().map(|f| f.fold).collect::<Vec<_>>(),
                vec![0, 1, 3, 4]
            );
        }
        e => panic!("{e}"),
    }
}

fn quick_cfg() -> CvConfig {
    CvConfig {
        folds: 5,
        seed: 3,
        train: TrainConfig {
            hidden: vec![16, 16],
            aux_hidden: 8,
            max_epochs: 15,
            lr: 3e-3,
            ..TrainConfig::default()
        },
        jobs: 0,
    }
}

#[test]
fn provenance_guard_refuses_foreign_embedding() {
    let ds = two_class_dataset(30, 12);
    let spec = ModelSpec::Diet(EmbeddingSpec::new(EmbeddingKind::OneHot));
    let stale = |_: &FoldContext<'_>, _: &EmbeddingSpec, _: &TrainConfig| {
        Ok(EmbeddingSource::Fixed(
            embed_one_hot(12).with_fingerprint("computed-on-another-split"),
        ))
    };
    match run_cv_with(&ds, &spec, &quick_cfg(), &stale) {
        Err(crate::Error::FoldFailed { cause, .. }) => {
            assert!(matches!(*cause, crate::Error::Provenance { .. }))
        }
        other => panic!(
            "expected a provenance failure, got {:?}",
            other.map(|r| r.report.model)
        ),
    }
}

fn five_population_dataset() -> GenotypeDataset {
    let f = block_frequencies(5, 100, 0.9, 0.1);
    let regions = ["A", "A", "B", "B", "C"];
    let pops: Vec<PopulationSpec> = f
        .into_iter()
        .enumerate()
        .map(|(k, frequencies)| PopulationSpec {
            name: format!("P{k}"),
            region: regions[k].into(),
            samples: 12,
            frequencies,
        })
        .collect();
    synthesize(&pops, 9).unwrap()
}

#[test]
fn every_model_runs_and_is_deterministic() {
    let ds = five_population_dataset();
    let mut cfg = quick_cfg();
    cfg.train.gamma = 10.0;
    let mut specs: Vec<ModelSpec> = EmbeddingKind::ALL
        .into_iter()
        .map(|k| {
            let mut e = EmbeddingSpec::new(k);
            e.n_f = 8;
            e.dae.hidden_dim = 8;
            e.dae.epochs = 3;
            ModelSpec::Diet(e)
        })
        .collect();
    specs.push(ModelSpec::Basic);
    specs.push(ModelSpec::Pca {
        k: 5,
        head: Head::Linear,
    });
    for spec in &specs {
        let a = run_cv(&ds, spec, &cfg).unwrap();
        let r = &a.report;
        assert_eq!(r.folds.len(), 5);
        assert_eq!(r.class_confusion.sum() as usize, 60);
        let truth = ds.labels.as_ref().unwrap().class_counts();
        for (i, row) in r.class_confusion.outer_iter().enumerate() {
            assert_eq!(row.sum() as usize, truth[i]);
        }
        assert!(r.folds.iter().all(|f| (0.0..=1.0).contains(&f.error)));
        assert!(r.region_error() <= r.class_error());
        let b = run_cv(
            &ds,
            spec,
            &CvConfig {
                jobs: 1,
                ..cfg.clone()
            },
        )
        .unwrap();
        assert_eq!(a.report, b.report, "{}", r.model);
        assert_eq!(a.histories, b.histories);
    }
}

#[test]
fn separated_populations_are_classified() {
    let ds = five_population_dataset();
    let mut cfg = quick_cfg();
    cfg.train.hidden = vec![32, 32];
    cfg.train.dropout = 0.0;
    cfg.train.max_epochs = 100;
    cfg.train.gamma = 10.0;
    let run = run_cv(
        &ds,
        &ModelSpec::Diet(EmbeddingSpec::new(EmbeddingKind::ClassHistogram)),
        &cfg,
    )
    .unwrap();
    let r = &run.report;
    assert!(r.mean_error <= 0.1, "{}", r.mean_error);
    assert!(r.region_error() <= r.class_error());
    assert_eq!(r.fat_params, Some(2 * (15 * 32 + 32)));
    let mut csv = Vec::new();
    write_summary_csv(r, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text
        .lines()
        .last()
        .unwrap()
        .starts_with("diet[class_histogram] + recon,mean,60,"));
    let table = confusion_table(&r.class_confusion, &r.class_names);
    assert_eq!(table.lines().count(), 6);
    let svg = confusion_svg(
        &row_normalize(&r.region_confusion),
        &r.region_names,
        "regions",
    );
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<rect").count(), 9);
    let mut pred = Vec::new();
    write_predictions_csv(r, &ds.sample_ids, &mut pred).unwrap();
    assert_eq!(String::from_utf8(pred).unwrap().lines().count(), 61);
}
