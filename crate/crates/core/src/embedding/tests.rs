use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::nn::mse;

fn random_genotypes(n: usize, d: usize, seed: u64) -> Array2<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, d), |_| rng.gen_range(0..3u8))
}

#[test]
fn projection_of_zero_matrix_is_activation_at_zero() {
    let x = Array2::<f64>::zeros((8, 5));
    let e = embed_random_projection(x.view(), 4, 1, Activation::Tanh).unwrap();
    assert!(e.matrix.iter().all(|&v| v == 0.0));
    let e = embed_random_projection(x.view(), 4, 1, Activation::Relu).unwrap();
    assert!(e.matrix.iter().all(|&v| v == 0.0));
}

#[test]
fn projection_is_a_function_of_the_column() {
    let mut x = random_genotypes(12, 6, 2).mapv(|g| g as f64 / 2.0);
    let c = x.column(1).to_owned();
    x.column_mut(4).assign(&c);
    let e = embed_random_projection(x.view(), 100, 7, Activation::Relu).unwrap();
    assert_eq!(e.matrix.dim(), (6, 100));
    assert_eq!(e.matrix.row(1), e.matrix.row(4));
    let again = embed_random_projection(x.view(), 100, 7, Activation::Relu).unwrap();
    assert_eq!(e, again);
    assert!(embed_random_projection(x.view(), 0, 7, Activation::Relu).is_err());
}

#[test]
fn histogram_width_is_three_per_class() {
    let g = random_genotypes(52, 4, 3);
    let labels: Vec<usize> = (0..52).map(|i| i % 26).collect();
    let e = embed_class_histogram(g.view(), &labels, 26).unwrap();
    assert_eq!(e.dim(), 78);
}

#[test]
fn histogram_pure_class() {
    let g = array![[0u8, 1], [0, 2], [2, 2]];
    let e = embed_class_histogram(g.view(), &[0, 0, 1], 2).unwrap();
    assert_eq!(e.matrix.row(0).to_vec(), vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    assert_eq!(e.matrix.row(1).to_vec(), vec![0.0, 0.5, 0.5, 0.0, 0.0, 1.0]);
}

#[test]
fn histogram_handcrafted_three_classes() {
    // 6 samples, classes [0,0,1,1,2,2], 2 SNPs, counted by hand
    let g = array![[0u8, 2], [1, 2], [1, 0], [1, 1], [2, 0], [0, 0]];
    let e = embed_class_histogram(g.view(), &[0, 0, 1, 1, 2, 2], 3).unwrap();
    let want = array![
        [0.5, 0.5, 0.0, 0.0, 1.0, 0.0, 0.5, 0.0, 0.5],
        [0.0, 0.0, 1.0, 0.5, 0.5, 0.0, 1.0, 0.0, 0.0]
    ];
    assert_eq!(e.matrix, want);
}

#[test]
fn histogram_empty_class_uniform_and_missing_imputed() {
    let g = array![[MISSING, 0], [2, 0], [2, 0]];
    let e = embed_class_histogram(g.view(), &[0, 0, 0], 2).unwrap();
    // mean of observed calls is 2, so the missing call counts as 2
    assert_eq!(e.matrix.row(0).to_vec()[..3], [0.0, 0.0, 1.0]);
    assert_eq!(e.matrix.row(0).to_vec()[3..], [1.0 / 3.0; 3]);
    assert!(embed_class_histogram(g.view(), &[0, 0, 5], 2).is_err());
    assert!(embed_class_histogram(g.view(), &[0, 0], 2).is_err());
}

#[test]
fn dae_fits_rank_one_data() {
    let u = array![0.1, 0.3, 0.5, 0.7, 0.9, 0.2, 0.4, 0.6, 0.8, 1.0];
    let v = array![1.0, 0.5, 0.25, 0.75, 0.6];
    let x = Array2::from_shape_fn((10, 5), |(i, j)| u[i] * v[j]);
    let cfg = DaeConfig {
        hidden_dim: 3,
        corruption_rate: 0.0,
        epochs: 2000,
        batch_size: 10,
        lr: 1e-2,
        seed: 4,
        ..DaeConfig::default()
    };
    let (dae, losses) = train_dae(x.view(), &cfg).unwrap();
    let recon = dae.reconstruct(x.view()).unwrap();
    let (final_mse, _) = mse(recon.view(), x.view());
    assert!(final_mse < 1e-2, "final reconstruction error {final_mse}");
    assert!(losses.last().unwrap() <= &losses[0]);
}

#[test]
fn dae_zero_epochs_returns_initialisation() {
    let x = random_genotypes(6, 4, 5).mapv(|g| g as f64 / 2.0);
    let cfg = DaeConfig {
        hidden_dim: 3,
        epochs: 0,
        seed: 9,
        ..DaeConfig::default()
    };
    let (dae, losses) = train_dae(x.view(), &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    assert_eq!(dae, Dae::new(4, 3, Activation::Relu, &mut rng));
    assert!(losses.is_empty());
    assert!(train_dae(
        x.view(),
        &DaeConfig {
            hidden_dim: 0,
            ..cfg.clone()
        }
    )
    .is_err());
    assert!(train_dae(
        x.view(),
        &DaeConfig {
            corruption_rate: 1.0,
            ..cfg
        }
    )
    .is_err());
}

#[test]
fn dae_loss_decreases_on_genotypes() {
    let x = random_genotypes(40, 30, 6).mapv(|g| g as f64 / 2.0);
    let cfg = DaeConfig {
        hidden_dim: 10,
        epochs: 20,
        seed: 1,
        lr: 3e-3,
        ..DaeConfig::default()
    };
    let (_, losses) = train_dae(x.view(), &cfg).unwrap();
    assert!(losses.last().unwrap() <= &losses[0]);
}

#[test]
fn masking_noise_rate() {
    let x = Array2::<f64>::ones((400, 250));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noisy = corrupt(x.view(), 0.25, &mut rng);
    let zeros = noisy.iter().filter(|&&v| v == 0.0).count() as f64 / x.len() as f64;
    // 100k draws: sd ≈ 0.0014
    assert!((zeros - 0.25).abs() < 0.01, "{zeros}");
}

#[test]
fn snp2vec_zero_encoder_gives_bias_code() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut dae = Dae::new(5, 3, Activation::Tanh, &mut rng);
    dae.encoder.weights.fill(0.0);
    dae.encoder.bias = array![0.5, -1.0, 2.0];
    let e = embed_snp2vec(&dae, 5, 1.0).unwrap();
    for row in e.matrix.outer_iter() {
        assert_eq!(
            row.to_vec(),
            vec![0.5f64.tanh(), (-1.0f64).tanh(), 2.0f64.tanh()]
        );
    }
    assert!(embed_snp2vec(&dae, 6, 1.0).is_err());
}

#[test]
fn snp2vec_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut dae = Dae::new(7, 4, Activation::Relu, &mut rng);
    dae.encoder.bias = array![0.1, -0.2, 0.3, 0.0];
    let w = dae.encoder.weights.row(5).to_owned();
    dae.encoder.weights.row_mut(2).assign(&w);
    let e = embed_snp2vec(&dae, 7, 1.0).unwrap();
    assert_eq!(e.matrix.row(2), e.matrix.row(5));
    // direct evaluation of the encoder on a one-hot input
    for j in 0..7 {
        let mut x = Array2::<f64>::zeros((1, 7));
        x[[0, j]] = 1.0;
        let mut h = x.dot(&dae.encoder.weights) + &dae.encoder.bias;
        dae.encoder.activation.apply(&mut h);
        for (a, b) in e.matrix.row(j).iter().zip(h.row(0)) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn one_hot_is_identity() {
    let e = embed_one_hot(6);
    assert_eq!(e.matrix.row(0).to_vec(), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert!(e.matrix.outer_iter().all(|r| r.sum() == 1.0));
    assert_eq!(e.matrix, Array2::<f64>::eye(6));
}

#[test]
fn binary_and_csv_io() {
    let g = random_genotypes(9, 3, 8);
    let e = embed_class_histogram(g.view(), &[0, 1, 2, 0, 1, 2, 0, 1, 2], 3)
        .unwrap()
        .with_fingerprint("abc");
    let ids: Vec<String> = (0..3).map(|j| format!("rs{j}")).collect();
    let mut buf = Vec::new();
    write_embedding(&e, &ids, &mut buf).unwrap();
    let (back, back_ids) = read_embedding(buf.as_slice()).unwrap();
    assert_eq!(back, e);
    assert_eq!(back_ids, ids);
    let mut csv = Vec::new();
    write_embedding_csv(&e, &ids, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("snp_id,e0,e1"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn fingerprint_ignores_order() {
    let ids: Vec<String> = (0..5).map(|i| format!("s{i}")).collect();
    assert_eq!(
        split_fingerprint(&ids, &[0, 3, 1]),
        split_fingerprint(&ids, &[3, 1, 0])
    );
    assert_ne!(
        split_fingerprint(&ids, &[0, 3, 1]),
        split_fingerprint(&ids, &[0, 3, 2])
    );
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn histogram_triplets_sum_to_one_and_ignore_order(seed in 0u64..500, n in 4usize..30) {
            let g = random_genotypes(n, 5, seed);
            let labels: Vec<usize> = (0..n).map(|i| (i * 3 + seed as usize) % 4).collect();
            let e = embed_class_histogram(g.view(), &labels, 4).unwrap();
            for row in e.matrix.outer_iter() {
                for t in row.to_vec().chunks(3) {
                    prop_assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                }
            }
            let perm: Vec<usize> = (0..n).rev().collect();
            let gp = g.select(ndarray::Axis(0), &perm);
            let lp: Vec<usize> = perm.iter().map(|&i| labels[i]).collect();
            prop_assert_eq!(embed_class_histogram(gp.view(), &lp, 4).unwrap().matrix, e.matrix);
        }
    }
}
