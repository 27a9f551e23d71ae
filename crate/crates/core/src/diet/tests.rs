use ndarray::{array, Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::embedding::{
    embed_class_histogram, embed_one_hot, embed_random_projection, embed_snp2vec, train_dae,
    DaeConfig, FeatureEmbedding,
};
use crate::genotype::{block_frequencies, synthesize, PopulationSpec};
use crate::nn::{
    gradient_check, mse, softmax_xent, Activation, DenseLayer, Mlp, Mode, Parametrized,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_genotypes(n: usize, d: usize, seed: u64) -> Array2<u8> {
    let mut r = rng(seed);
    Array2::from_shape_fn((n, d), |_| r.gen_range(0..3u8))
}

fn tiny_cfg(gamma: f64) -> TrainConfig {
    TrainConfig {
        hidden: vec![5, 5],
        aux_hidden: 4,
        gamma,
        dropout: 0.0,
        seed: 3,
        ..TrainConfig::default()
    }
}

fn fixed(e: FeatureEmbedding) -> EmbeddingSource {
    EmbeddingSource::Fixed(e)
}

fn learnt(x_train: &Array2<f64>, width: usize, seed: u64) -> EmbeddingSource {
    EmbeddingSource::Learnt {
        features: x_train.t().to_owned(),
        shared: DenseLayer::glorot(x_train.nrows(), width, Activation::Relu, &mut rng(seed)),
        fingerprint: String::new(),
    }
}

#[test]
fn one_hot_linear_aux_reproduces_its_weights() {
    let cfg = TrainConfig {
        aux_bias: false,
        ..tiny_cfg(0.0)
    };
    let net = DietNetwork::diet(fixed(embed_one_hot(7)), 3, &cfg).unwrap();
    let w = net.predict_fat_weights().unwrap().w_enc;
    match &net.fat {
        FatLayers::Predicted { aux_enc, .. } => assert_eq!(w, aux_enc.layers[0].weights),
        _ => unreachable!(),
    }
}

#[test]
fn zero_aux_weights_give_identical_rows() {
    let cfg = TrainConfig {
        aux_output: Activation::Tanh,
        ..tiny_cfg(0.0)
    };
    let e = embed_random_projection(
        random_genotypes(6, 9, 1).mapv(|g| g as f64 / 2.0).view(),
        4,
        2,
        Activation::Relu,
    )
    .unwrap();
    let mut net = DietNetwork::diet(fixed(e), 2, &cfg).unwrap();
    let beta = array![0.3, -0.2, 0.1, 0.0, 0.5];
    if let FatLayers::Predicted { aux_enc, .. } = &mut net.fat {
        aux_enc.layers[0].weights.fill(0.0);
        aux_enc.layers[0].bias = beta.clone();
    }
    let w = net.predict_fat_weights().unwrap().w_enc;
    for row in w.outer_iter() {
        assert_eq!(row.to_owned(), beta.mapv(f64::tanh));
    }
}

#[test]
fn fat_rows_match_standalone_aux_evaluation() {
    let cfg = TrainConfig {
        aux_layers: vec![6],
        aux_output: Activation::Tanh,
        ..tiny_cfg(10.0)
    };
    let mut r = rng(4);
    let e = Array2::from_shape_fn((11, 4), |_| r.gen_range(-1.0..1.0));
    let emb = FeatureEmbedding::new(
        e.clone(),
        crate::embedding::EmbeddingKind::RandomProjection,
        Default::default(),
    )
    .unwrap();
    let net = DietNetwork::diet(fixed(emb), 3, &cfg).unwrap();
    let fw = net.predict_fat_weights().unwrap();
    let (aux_enc, aux_dec) = match &net.fat {
        FatLayers::Predicted {
            aux_enc, aux_dec, ..
        } => (aux_enc, aux_dec.as_ref().unwrap()),
        _ => unreachable!(),
    };
    for j in 0..11 {
        let row = e.row(j).insert_axis(Axis(0));
        let want = aux_enc.predict(row).unwrap();
        let got = fw.w_enc.row(j);
        assert!(want
            .iter()
            .zip(got.iter())
            .all(|(a, b)| (a - b).abs() < 1e-12));
        let want = aux_dec.predict(row).unwrap();
        let got = fw.w_dec.as_ref().unwrap().row(j);
        assert!(want
            .iter()
            .zip(got.iter())
            .all(|(a, b)| (a - b).abs() < 1e-12));
    }
}

#[test]
fn output_shapes() {
    let x = random_genotypes(6, 10, 5).mapv(|g| g as f64 / 2.0);
    let hist =
        embed_class_histogram(random_genotypes(6, 10, 5).view(), &[0, 1, 2, 0, 1, 2], 3).unwrap();
    let net = DietNetwork::diet(fixed(hist.clone()), 3, &tiny_cfg(0.0)).unwrap();
    let p = net.predict(x.view()).unwrap();
    assert_eq!(p.dim(), (6, 3));
    assert!(p.outer_iter().all(|r| (r.sum() - 1.0).abs() < 1e-12));
    let out = net.forward(x.view(), Mode::Eval, &mut rng(0)).unwrap();
    assert!(out.reconstruction.is_none());

    let net = DietNetwork::diet(fixed(hist), 3, &tiny_cfg(10.0)).unwrap();
    let out = net.forward(x.view(), Mode::Eval, &mut rng(0)).unwrap();
    assert_eq!(out.reconstruction.unwrap().dim(), (6, 10));
    assert!(net
        .forward(x.slice(ndarray::s![.., ..9]), Mode::Eval, &mut rng(0))
        .is_err());
}

#[test]
fn loss_composition() {
    let mut r = rng(6);
    let logits = Array2::from_shape_fn((4, 3), |_| r.gen_range(-2.0..2.0));
    let x = Array2::from_shape_fn((4, 5), |_| r.gen_range(0.0..1.0));
    let xh = Array2::from_shape_fn((4, 5), |_| r.gen_range(0.0..1.0));
    let y = [0, 2, 1, 1];
    let ce = softmax_xent(logits.view(), &y).0;
    let l0 = loss_diet(logits.view(), &y, Some(xh.view()), x.view(), 0.0);
    assert_eq!(l0.total, ce);
    assert!(l0.drecon.is_none());
    let l10 = loss_diet(logits.view(), &y, Some(xh.view()), x.view(), 10.0);
    assert!((l10.total - (ce + 10.0 * mse(xh.view(), x.view()).0)).abs() < 1e-12);

    let perfect = array![[1000.0, 0.0], [0.0, 1000.0]];
    let xs = array![[0.5, 1.0], [0.0, 0.5]];
    let l = loss_diet(perfect.view(), &[0, 1], Some(xs.view()), xs.view(), 10.0);
    assert_eq!(l.total, 0.0);
}

#[test]
fn input_scaling() {
    let g = array![
        [0u8, 2],
        [2, crate::genotype::MISSING],
        [crate::genotype::MISSING, 1]
    ];
    let (x, means) = input_scale(g.view(), &[0, 1, 2]);
    assert_eq!(x[[0, 0]], 0.0);
    assert_eq!(x[[1, 0]], 1.0);
    // column 0: scaled non-missing values 0 and 1 → mean 0.5
    assert_eq!(x[[2, 0]], 0.5);
    assert_eq!(means[1], 0.75);
    assert_eq!(x[[1, 1]], 0.75);
    let (_, train_only) = input_scale(g.view(), &[0]);
    assert_eq!(train_only.to_vec(), vec![0.0, 1.0]);
}

struct Case {
    x: Array2<f64>,
    y: Vec<usize>,
    sources: Vec<(&'static str, EmbeddingSource)>,
}

/// N = 8, N_d = 12, N_f = 4 with every embedding mode.
fn tiny_case() -> Case {
    let g = random_genotypes(8, 12, 21);
    let y = vec![0, 1, 2, 0, 1, 2, 0, 1];
    let x = g.mapv(|v| v as f64 / 2.0);
    let rp = embed_random_projection(x.view(), 4, 5, Activation::Relu).unwrap();
    let hist = embed_class_histogram(g.view(), &y, 3).unwrap();
    let dae_cfg = DaeConfig {
        hidden_dim: 4,
        epochs: 3,
        seed: 2,
        activation: Activation::Tanh,
        ..DaeConfig::default()
    };
    let (dae, _) = train_dae(x.view(), &dae_cfg).unwrap();
    let s2v = embed_snp2vec(&dae, 12, 1.0).unwrap();
    Case {
        sources: vec![
            ("random_projection", fixed(rp)),
            ("class_histogram", fixed(hist)),
            ("snp2vec", fixed(s2v)),
            ("one_hot", fixed(embed_one_hot(12))),
            ("learnt", learnt(&x, 4, 8)),
        ],
        x,
        y,
    }
}

fn check_model(
    net: &DietNetwork,
    x: &Array2<f64>,
    y: &[usize],
    gamma: f64,
    eps: f64,
    tol: f64,
) -> crate::nn::GradCheckReport {
    // evaluate away from exact zeros (zero-initialised biases sit on relu kinks)
    let mut probe = net.clone();
    let names = probe.param_names();
    let mut r = rng(1234);
    let params: Vec<Array2<f64>> = probe
        .param_values()
        .into_iter()
        .map(|p| p.mapv(|v| v + r.gen_range(-0.05..0.05)))
        .collect();
    gradient_check(
        |p| {
            let mut m = net.clone();
            m.set_param_values(p).unwrap();
            let (l, g) = m
                .loss_and_grads(x.view(), y, gamma, Mode::Train, &mut rng(99))
                .unwrap();
            (l.total, g)
        },
        &names,
        &params,
        eps,
        tol,
    )
}

#[test]
fn gradients_match_finite_differences_all_modes() {
    let case = tiny_case();
    for (name, source) in &case.sources {
        for gamma in [0.0, 10.0] {
            let cfg = TrainConfig {
                dropout: 0.3,
                reconstruction: Some(true),
                ..tiny_cfg(gamma)
            };
            let net = DietNetwork::diet(source.clone(), 3, &cfg).unwrap();
            let report = check_model(&net, &case.x, &case.y, gamma, 1e-6, 1e-4);
            assert!(report.passed, "{name} gamma={gamma}: {report:?}");
        }
    }
}

#[test]
fn smooth_path_gradients_are_tight() {
    let case = tiny_case();
    for (name, source) in &case.sources {
        let source = match source {
            EmbeddingSource::Learnt { features, .. } => EmbeddingSource::Learnt {
                features: features.clone(),
                shared: DenseLayer::glorot(features.ncols(), 4, Activation::Tanh, &mut rng(8)),
                fingerprint: String::new(),
            },
            s => s.clone(),
        };
        for gamma in [0.0, 10.0] {
            let cfg = TrainConfig {
                activation: Activation::Tanh,
                ..tiny_cfg(gamma)
            };
            let net = DietNetwork::diet(source.clone(), 3, &cfg).unwrap();
            let report = check_model(&net, &case.x, &case.y, gamma, 1e-5, 1e-7);
            assert!(report.passed, "{name} gamma={gamma}: {report:?}");
        }
    }
}

/// Basic net whose fat and trunk parameters are copied from `diet`.
fn matching_basic(diet: &DietNetwork, cfg: &TrainConfig) -> DietNetwork {
    let mut basic = DietNetwork::basic(diet.n_snps(), diet.n_classes(), cfg).unwrap();
    let fw = diet.predict_fat_weights().unwrap();
    basic.fat = FatLayers::Free {
        w_enc: fw.w_enc,
        w_dec: fw.w_dec,
    };
    basic.fat_bias = diet.fat_bias.clone();
    basic.hidden = diet.hidden.clone();
    basic.head = diet.head.clone();
    basic.recon_bias = diet.recon_bias.clone();
    basic
}

#[test]
fn one_hot_diet_is_the_basic_network() {
    for gamma in [0.0, 10.0] {
        let cfg = TrainConfig {
            aux_bias: false,
            dropout: 0.5,
            ..tiny_cfg(gamma)
        };
        let x = random_genotypes(10, 9, 30).mapv(|g| g as f64 / 2.0);
        let y: Vec<usize> = (0..10).map(|i| i % 3).collect();
        let mut diet = DietNetwork::diet(fixed(embed_one_hot(9)), 3, &cfg).unwrap();
        let mut basic = matching_basic(&diet, &cfg);

        let pd = diet.predict(x.view()).unwrap();
        let pb = basic.predict(x.view()).unwrap();
        assert!(pd
            .iter()
            .zip(pb.iter())
            .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1e-300)));

        let reg = cfg.regularizer();
        let mut od = crate::nn::RmsProp::new(1e-2, 0.9, 1e-8);
        let mut ob = crate::nn::RmsProp::new(1e-2, 0.9, 1e-8);
        for step in 0..10 {
            let (_, gd) = diet
                .loss_and_grads(x.view(), &y, gamma, Mode::Train, &mut rng(step))
                .unwrap();
            let (_, gb) = basic
                .loss_and_grads(x.view(), &y, gamma, Mode::Train, &mut rng(step))
                .unwrap();
            od.step(&mut diet, &gd, &reg).unwrap();
            ob.step(&mut basic, &gb, &reg).unwrap();
            for (a, b) in diet.param_values().iter().zip(basic.param_values().iter()) {
                assert!((a - b).iter().all(|d| d.abs() <= 1e-12), "step {step}");
            }
        }
    }
}

#[test]
fn frozen_aux_reduces_to_basic_trunk_gradients() {
    let case = tiny_case();
    let cfg = TrainConfig {
        dropout: 0.4,
        ..tiny_cfg(10.0)
    };
    let (_, source) = &case.sources[1];
    let diet = DietNetwork::diet(source.clone(), 3, &cfg).unwrap();
    let basic = matching_basic(&diet, &cfg);
    let (_, gd) = diet
        .loss_and_grads(case.x.view(), &case.y, 10.0, Mode::Train, &mut rng(5))
        .unwrap();
    let (_, gb) = basic
        .loss_and_grads(case.x.view(), &case.y, 10.0, Mode::Train, &mut rng(5))
        .unwrap();
    let aux_blocks = diet
        .clone()
        .params_mut()
        .iter()
        .filter(|p| p.name.starts_with("aux"))
        .count();
    // skip fat blocks: 2 aux weight+bias pairs vs 2 free matrices
    for (a, b) in gd[aux_blocks..].iter().zip(&gb[2..]) {
        assert!((a - b).iter().all(|d| d.abs() < 1e-12));
    }
}

#[test]
fn zero_output_gradient_gives_zero_parameter_gradients() {
    let case = tiny_case();
    for (_, source) in &case.sources {
        let net = DietNetwork::diet(source.clone(), 3, &tiny_cfg(10.0)).unwrap();
        let out = net.forward(case.x.view(), Mode::Eval, &mut rng(0)).unwrap();
        let grads = net.backward(&out.trace, &Array2::zeros((8, 3)), None);
        assert!(grads.iter().all(|g| g.iter().all(|&v| v == 0.0)));
    }
}

#[test]
fn gamma_zero_ignores_reconstruction_path() {
    let case = tiny_case();
    let cfg = TrainConfig {
        reconstruction: Some(true),
        ..tiny_cfg(0.0)
    };
    let with = DietNetwork::diet(case.sources[0].1.clone(), 3, &cfg).unwrap();
    let mut without = with.clone();
    without.recon_bias = None;
    if let FatLayers::Predicted { aux_dec, .. } = &mut without.fat {
        *aux_dec = None;
    }
    let (_, gw) = with
        .loss_and_grads(case.x.view(), &case.y, 0.0, Mode::Eval, &mut rng(0))
        .unwrap();
    let (_, go) = without
        .loss_and_grads(case.x.view(), &case.y, 0.0, Mode::Eval, &mut rng(0))
        .unwrap();
    let names = with.clone().param_names();
    let mut k = 0;
    for (name, g) in names.iter().zip(&gw) {
        if name.starts_with("aux_dec") || name == "recon.b" {
            assert!(g.iter().all(|&v| v == 0.0));
        } else {
            assert_eq!(g, &go[k]);
            k += 1;
        }
    }
    assert_eq!(k, go.len());
}

#[test]
fn permuting_snps_permutes_fat_rows() {
    let g = random_genotypes(9, 10, 40);
    let y: Vec<usize> = (0..9).map(|i| i % 3).collect();
    let x = g.mapv(|v| v as f64 / 2.0);
    let hist = embed_class_histogram(g.view(), &y, 3).unwrap();
    let net = DietNetwork::diet(fixed(hist.clone()), 3, &tiny_cfg(0.0)).unwrap();

    let perm: Vec<usize> = vec![3, 7, 0, 9, 1, 5, 2, 8, 6, 4];
    let mut permuted = net.clone();
    if let FatLayers::Predicted {
        source: EmbeddingSource::Fixed(e),
        ..
    } = &mut permuted.fat
    {
        e.matrix = hist.matrix.select(Axis(0), &perm);
    }
    let w = net.predict_fat_weights().unwrap().w_enc;
    let wp = permuted.predict_fat_weights().unwrap().w_enc;
    assert_eq!(wp, w.select(Axis(0), &perm));
    let p = net.predict(x.view()).unwrap();
    let pp = permuted.predict(x.select(Axis(1), &perm).view()).unwrap();
    assert!(p.iter().zip(pp.iter()).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn fat_parameter_counts() {
    let hist = FeatureEmbedding::new(
        Array2::zeros((50, 78)),
        crate::embedding::EmbeddingKind::ClassHistogram,
        Default::default(),
    )
    .unwrap();
    let cfg = TrainConfig::default();
    let net = DietNetwork::diet(fixed(hist.clone()), 26, &cfg).unwrap();
    assert_eq!(net.fat_free_params(), 7_900);
    let net = DietNetwork::diet(
        fixed(hist),
        26,
        &TrainConfig {
            gamma: 10.0,
            ..cfg.clone()
        },
    )
    .unwrap();
    assert_eq!(net.fat_free_params(), 15_800);
    let basic = DietNetwork::basic(50, 26, &cfg).unwrap();
    assert_eq!(basic.fat_free_params(), 5_000);
    let x = Array2::<f64>::zeros((30, 50));
    let net = DietNetwork::diet(learnt(&x, 100, 1), 26, &cfg).unwrap();
    assert_eq!(net.fat_free_params(), 30 * 100 + 100 + 10_100);
}

fn two_population_fold(seed: u64) -> FoldData {
    let f = block_frequencies(2, 200, 0.9, 0.1);
    let pops: Vec<PopulationSpec> = f
        .into_iter()
        .enumerate()
        .map(|(k, frequencies)| PopulationSpec {
            name: format!("P{k}"),
            region: "R".into(),
            samples: 50,
            frequencies,
        })
        .collect();
    let ds = synthesize(&pops, seed).unwrap();
    let labels = &ds.labels.as_ref().unwrap().labels;
    let valid: Vec<usize> = (0..100).filter(|i| i % 5 == 0).collect();
    let train: Vec<usize> = (0..100).filter(|i| i % 5 != 0).collect();
    let (x, _) = input_scale(ds.genotypes.view(), &train);
    FoldData {
        x_train: x.select(Axis(0), &train),
        y_train: train.iter().map(|&i| labels[i]).collect(),
        x_valid: x.select(Axis(0), &valid),
        y_valid: valid.iter().map(|&i| labels[i]).collect(),
    }
}

fn histogram_source(data: &FoldData) -> EmbeddingSource {
    let g = data.x_train.mapv(|v| (v * 2.0).round() as u8);
    fixed(embed_class_histogram(g.view(), &data.y_train, 2).unwrap())
}

#[test]
fn trains_two_population_histogram_model() {
    let data = two_population_fold(1);
    let cfg = TrainConfig {
        max_epochs: 100,
        seed: 5,
        ..TrainConfig::default()
    };
    let net = DietNetwork::diet(histogram_source(&data), 2, &cfg).unwrap();
    let (trained, history) = train(net, &data, &cfg).unwrap();
    let (_, err) = evaluate(&trained, data.x_valid.view(), &data.y_valid, 0.0).unwrap();
    assert!(err <= 0.05, "validation error {err}");
    assert!(history.epochs.len() <= 100);
}

#[test]
fn zero_learning_rate_changes_nothing() {
    let data = two_population_fold(2);
    let cfg = TrainConfig {
        lr: 0.0,
        max_epochs: 5,
        gamma: 10.0,
        ..TrainConfig::default()
    };
    let net = DietNetwork::diet(histogram_source(&data), 2, &cfg).unwrap();
    let (trained, history) = train(net.clone(), &data, &cfg).unwrap();
    assert_eq!(trained, net);
    let first = history.epochs[0];
    assert!(history
        .epochs
        .iter()
        .all(|r| r.train_loss == first.train_loss && r.valid_err == first.valid_err));
}

#[test]
fn training_is_deterministic() {
    let data = two_population_fold(3);
    let cfg = TrainConfig {
        max_epochs: 4,
        gamma: 10.0,
        seed: 11,
        ..TrainConfig::default()
    };
    let run = || {
        let net = DietNetwork::diet(histogram_source(&data), 2, &cfg).unwrap();
        train(net, &data, &cfg).unwrap()
    };
    let (a, ha) = run();
    let (b, hb) = run();
    assert_eq!(ha, hb);
    assert_eq!(a, b);
    let mut csv = Vec::new();
    ha.write_csv(&mut csv).unwrap();
    assert!(String::from_utf8(csv)
        .unwrap()
        .starts_with("epoch,train_loss,train_err,valid_err\n1,"));
}

#[test]
fn divergence_is_reported_with_history() {
    let data = two_population_fold(4);
    let cfg = TrainConfig {
        lr: 1e300,
        max_norm: None,
        max_epochs: 5,
        ..TrainConfig::default()
    };
    let net = DietNetwork::basic(200, 2, &cfg).unwrap();
    match train(net, &data, &cfg) {
        Err(crate::Error::Diverged { epoch, history }) => {
            assert!(epoch >= 1);
            assert_eq!(history.epochs.len(), epoch - 1);
        }
        other => panic!("expected divergence, got {:?}", other.map(|(_, h)| h)),
    }
}

#[test]
fn config_validation() {
    assert!(TrainConfig {
        hidden: vec![],
        ..TrainConfig::default()
    }
    .validate()
    .is_err());
    assert!(TrainConfig {
        gamma: -1.0,
        ..TrainConfig::default()
    }
    .validate()
    .is_err());
    assert!(TrainConfig {
        dropout: 1.0,
        ..TrainConfig::default()
    }
    .validate()
    .is_err());
    assert!(TrainConfig::default().validate().is_ok());
    let _ = Array1::<f64>::zeros(1);
    let _ = Mlp { layers: vec![] };
}

#[test]
fn checkpoint_round_trip_and_provenance() {
    let case = tiny_case();
    let (_, source) = &case.sources[1];
    let source = match source.clone() {
        EmbeddingSource::Fixed(e) => EmbeddingSource::Fixed(e.with_fingerprint("abc")),
        s => s,
    };
    let cfg = tiny_cfg(10.0);
    let net = DietNetwork::diet(source.clone(), 3, &cfg).unwrap();
    let ck = net.checkpoint();
    assert!(ck.metadata.contains("embedding=class_histogram"));
    assert!(ck.metadata.contains("fingerprint=abc"));
    let mut bytes = Vec::new();
    crate::nn::write_checkpoint(&ck, &mut bytes).unwrap();
    let back = crate::nn::read_checkpoint(bytes.as_slice()).unwrap();

    let mut fresh = DietNetwork::diet(
        source.clone(),
        3,
        &TrainConfig {
            seed: 77,
            ..cfg.clone()
        },
    )
    .unwrap();
    assert_ne!(fresh, net);
    fresh.load_checkpoint(&back).unwrap();
    assert_eq!(fresh, net);

    let other = match source {
        EmbeddingSource::Fixed(e) => EmbeddingSource::Fixed(e.with_fingerprint("xyz")),
        s => s,
    };
    let mut wrong = DietNetwork::diet(other, 3, &cfg).unwrap();
    assert!(matches!(
        wrong.load_checkpoint(&back),
        Err(crate::Error::Provenance { .. })
    ));
}
