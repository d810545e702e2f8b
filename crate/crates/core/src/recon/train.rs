//! Patch sampling, the training loop and full-image reconstruction.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::metrics::{mrae_loss_grad, DEFAULT_MRAE_FLOOR};
use super::network::{Network, NetworkConfig, INPUT_CHANNELS};
use super::tensor::Tensor;
use crate::color::RgbImage;
use crate::cube::{CubeKind, Hypercube, DEFAULT_R_MAX};
use crate::error::{Error, Result};

/// Aligned network input (RGB in [0, 1]) and target bands.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub rgb: Tensor,
    pub target: Tensor,
}

impl TrainingPair {
    pub fn new(rgb: &RgbImage, cube: &Hypercube) -> Result<Self> {
        if rgb.height != cube.height() || rgb.width != cube.width() {
            return Err(Error::ShapeMismatch(format!(
                "RGB {}x{} vs cube {}x{}",
                rgb.height,
                rgb.width,
                cube.height(),
                cube.width()
            )));
        }
        Ok(Self {
            rgb: Tensor::from_interleaved(rgb.height, rgb.width, INPUT_CHANNELS, &rgb.to_unit())?,
            target: Tensor::from_interleaved(cube.height(), cube.width(), cube.bands(), cube.data())?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub iters_per_epoch: usize,
    pub batch: usize,
    pub patch: usize,
    pub stride: usize,
    pub seed: u64,
    pub mrae_floor: f64,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            iters_per_epoch: 1000,
            batch: 8,
            patch: 128,
            stride: 8,
            seed: 1,
            mrae_floor: DEFAULT_MRAE_FLOOR,
            adam: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.iters_per_epoch == 0 || self.batch == 0 {
            return Err(Error::Config("epochs, iters_per_epoch and batch must be >= 1".into()));
        }
        if self.patch == 0 || self.stride == 0 {
            return Err(Error::Config("patch and stride must be >= 1".into()));
        }
        if !(self.mrae_floor > 0.0) {
            return Err(Error::Config("mrae_floor must be > 0".into()));
        }
        Ok(())
    }
}

/// Top-left corners of every `patch` window on a `stride` grid.
pub fn candidate_positions(height: usize, width: usize, patch: usize, stride: usize) -> Result<Vec<(usize, usize)>> {
    if patch > height || patch > width || patch == 0 || stride == 0 {
        return Err(Error::BadPatch { patch, height, width });
    }
    let ys = (height - patch) / stride + 1;
    let xs = (width - patch) / stride + 1;
    Ok((0..ys)
        .flat_map(|i| (0..xs).map(move |j| (i * stride, j * stride)))
        .collect())
}

/// `batch` aligned patch pairs drawn uniformly over all (image, position)
/// candidates.
pub fn sample_patches(
    pairs: &[TrainingPair],
    patch: usize,
    stride: usize,
    batch: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<TrainingPair>> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no training pairs".into()));
    }
    let grids: Vec<Vec<(usize, usize)>> = pairs
        .iter()
        .map(|p| candidate_positions(p.rgb.height, p.rgb.width, patch, stride))
        .collect::<Result<_>>()?;
    let total: usize = grids.iter().map(Vec::len).sum();
    Ok((0..batch)
        .map(|_| {
            let mut r = rng.gen_range(0..total);
            let mut i = 0;
            while r >= grids[i].len() {
                r -= grids[i].len();
                i += 1;
            }
            let (y, x) = grids[i][r];
            TrainingPair {
                rgb: pairs[i].rgb.crop(y, x, patch),
                target: pairs[i].target.crop(y, x, patch),
            }
        })
        .collect())
}

pub fn sample_patches_seeded(
    pairs: &[TrainingPair],
    patch: usize,
    stride: usize,
    batch: usize,
    seed: u64,
) -> Result<Vec<TrainingPair>> {
    sample_patches(pairs, patch, stride, batch, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Batch MRAE over every element of every item and its parameter
/// gradient. Items run in parallel; gradients are summed in item order.
pub fn batch_loss_grad(net: &Network, batch: &[TrainingPair], floor: f64) -> Result<(f64, Vec<f64>)> {
    let n_total: usize = batch.iter().map(|p| p.target.data.len()).sum();
    let per_item: Vec<Result<(f64, Vec<f64>)>> = batch
        .par_iter()
        .map(|item| {
            let trace = net.forward_traced(&item.rgb)?;
            let (loss, mut d_out) = mrae_loss_grad(&trace.output.data, &item.target.data, floor)?;
            // Rescale the per-item mean to the batch-wide mean.
            let scale = item.target.data.len() as f64 / n_total as f64;
            d_out.iter_mut().for_each(|g| *g *= scale);
            let d_out = Tensor::from_vec(trace.output.channels, trace.output.height, trace.output.width, d_out)?;
            let mut grad = vec![0.0; net.n_params()];
            net.backward(&trace, &d_out, &mut grad);
            Ok((loss * scale, grad))
        })
        .collect();
    let mut loss = 0.0;
    let mut grad = vec![0.0; net.n_params()];
    for item in per_item {
        let (l, g) = item?;
        loss += l;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    Ok((loss, grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_mrae: f64,
    pub lr: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters at the end of the epoch with the lowest mean training
    /// MRAE.
    pub best: Network,
    pub trace: Vec<EpochRecord>,
    /// 1-based.
    pub best_epoch: usize,
    pub last: Network,
}

/// Trains from a seeded He initialisation.
pub fn train(pairs: &[TrainingPair], net_config: NetworkConfig, config: &TrainConfig) -> Result<TrainOutcome> {
    let net = Network::he_init(net_config, config.seed)?;
    train_from(net, pairs, config)
}

pub fn train_from(mut net: Network, pairs: &[TrainingPair], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let bands = net.config().out_bands;
    if let Some(p) = pairs.iter().find(|p| p.target.channels != bands || p.rgb.channels != INPUT_CHANNELS) {
        return Err(Error::ShapeMismatch(format!(
            "training pair has {} input / {} target channels, network wants {INPUT_CHANNELS} / {bands}",
            p.rgb.channels, p.target.channels
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut adam = AdamState::new(config.adam, net.n_params());
    let mut trace = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, Network)> = None;

    for epoch in 1..=config.epochs {
        let lr = adam.lr;
        let mut sum = 0.0;
        for iter in 1..=config.iters_per_epoch {
            let batch = sample_patches(pairs, config.patch, config.stride, config.batch, &mut rng)?;
            let (loss, grad) = batch_loss_grad(&net, &batch, config.mrae_floor)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence { epoch, iter, loss });
            }
            sum += loss;
            adam.step(net.params_mut(), &grad);
        }
        let mean_mrae = sum / config.iters_per_epoch as f64;
        trace.push(EpochRecord { epoch, mean_mrae, lr });
        if best.as_ref().map_or(true, |(b, ..)| mean_mrae < *b) {
            best = Some((mean_mrae, epoch, net.clone()));
        }
        adam.end_epoch();
    }
    let (_, best_epoch, best) = best.expect("at least one epoch");
    Ok(TrainOutcome {
        best,
        trace,
        best_epoch,
        last: net,
    })
}

/// Full-image forward pass; negative outputs clip to 0 and values above the
/// reflectance ceiling to the ceiling.
pub fn reconstruct(net: &Network, rgb: &RgbImage, wavelengths_nm: &[f64]) -> Result<Hypercube> {
    if wavelengths_nm.len() != net.config().out_bands {
        return Err(Error::ShapeMismatch(format!(
            "{} wavelengths for a {}-band network",
            wavelengths_nm.len(),
            net.config().out_bands
        )));
    }
    let input = Tensor::from_interleaved(rgb.height, rgb.width, INPUT_CHANNELS, &rgb.to_unit())?;
    let out = net.forward(&input)?;
    let data = out.to_interleaved().into_iter().map(|v| v.clamp(0.0, DEFAULT_R_MAX)).collect();
    Hypercube::new(rgb.height, rgb.width, wavelengths_nm.to_vec(), data, CubeKind::Reflectance)
}
