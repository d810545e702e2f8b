use sforge::color::{render_rgb, ColorTables};
use sforge::recon::{reconstruct, train, AdamConfig, NetworkConfig, TrainConfig, TrainingPair};
use sforge::synth::{generate_synthetic_scene, SyntheticSceneSpec};

fn desk_pairs() -> (Vec<TrainingPair>, Vec<f64>, Vec<sforge::color::RgbImage>) {
    let spec = SyntheticSceneSpec {
        n_samples: 20,
        replicates: 1,
        noise_sd: 0.01,
        seed: 5,
        ..Default::default()
    };
    let ds = generate_synthetic_scene(&spec).unwrap();
    let bands = [5, 17, 29, 41, 53];
    let tables = ColorTables::default();
    let mut pairs = Vec::new();
    let mut rgbs = Vec::new();
    let mut wl = Vec::new();
    for s in &ds.scenes {
        let rgb = render_rgb(&s.true_reflectance, &tables).unwrap();
        let sel = s.true_reflectance.select_bands(&bands).unwrap();
        wl = sel.wavelengths_nm().to_vec();
        pairs.push(TrainingPair::new(&rgb, &sel).unwrap());
        rgbs.push(rgb);
    }
    (pairs, wl, rgbs)
}

fn desk_train_config(lr: f64) -> TrainConfig {
    TrainConfig {
        epochs: 10,
        iters_per_epoch: 30,
        batch: 4,
        patch: 16,
        stride: 4,
        seed: 3,
        adam: AdamConfig { lr, ..Default::default() },
        ..Default::default()
    }
}

#[test]
fn desk_training_halves_mrae() {
    let (pairs, _, _) = desk_pairs();
    let net = NetworkConfig { dense_layers: 3, growth: 8, out_bands: 5 };
    let out = train(&pairs, net, &desk_train_config(2e-4)).unwrap();
    let first = out.trace[0].mean_mrae;
    let last = out.trace.last().unwrap().mean_mrae;
    assert!(last <= 0.5 * first, "{first} -> {last}");
    let argmin = out
        .trace
        .iter()
        .min_by(|a, b| a.mean_mrae.partial_cmp(&b.mean_mrae).unwrap())
        .unwrap()
        .epoch;
    assert_eq!(out.best_epoch, argmin);
    assert!((out.trace[1].lr - 2e-4 * 0.98).abs() < 1e-18);
}

#[test]
fn training_is_deterministic() {
    let (pairs, _, _) = desk_pairs();
    let net = NetworkConfig { dense_layers: 2, growth: 4, out_bands: 5 };
    let cfg = TrainConfig { epochs: 2, iters_per_epoch: 5, ..desk_train_config(1e-3) };
    let a = train(&pairs, net, &cfg).unwrap();
    let b = train(&pairs, net, &cfg).unwrap();
    assert_eq!(a.best.params(), b.best.params());
    assert_eq!(a.trace, b.trace);
}

#[test]
fn zero_learning_rate_leaves_parameters() {
    let (pairs, _, _) = desk_pairs();
    let net = NetworkConfig { dense_layers: 1, growth: 2, out_bands: 5 };
    let init = sforge::recon::Network::he_init(net, 3).unwrap();
    let mut cfg = TrainConfig { epochs: 2, iters_per_epoch: 3, ..desk_train_config(0.0) };
    cfg.adam.weight_decay = 0.0;
    let out = train(&pairs, net, &cfg).unwrap();
    assert_eq!(out.last.params(), init.params());
}

#[test]
fn reconstruct_shapes_and_clipping() {
    let (pairs, wl, rgbs) = desk_pairs();
    let net = NetworkConfig { dense_layers: 1, growth: 2, out_bands: 5 };
    let cfg = TrainConfig { epochs: 1, iters_per_epoch: 2, ..desk_train_config(1e-3) };
    let out = train(&pairs[..2], net, &cfg).unwrap();
    let cube = reconstruct(&out.best, &rgbs[0], &wl).unwrap();
    assert_eq!(cube.shape(), (32, 32, 5));
    assert!(cube.data().iter().all(|&v| (0.0..=2.0).contains(&v)));
    assert!(reconstruct(&out.best, &rgbs[0], &wl[..4]).is_err());
}
