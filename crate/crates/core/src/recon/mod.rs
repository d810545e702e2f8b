//! RGB-to-spectral reconstruction network: tensors, the dense network,
//! training and checkpoints.

pub mod adam;
pub mod checkpoint;
pub mod metrics;
pub mod network;
pub mod tensor;
pub mod train;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::Checkpoint;
pub use metrics::{mrae, mrae_loss_grad, psnr, rmse_metric, Psnr, DEFAULT_MRAE_FLOOR};
pub use network::{ForwardTrace, LayerRole, Network, NetworkConfig};
pub use tensor::{conv_backward, conv_forward, ConvShape, Tensor};
pub use train::{
    batch_loss_grad, candidate_positions, reconstruct, sample_patches, sample_patches_seeded, train, train_from,
    EpochRecord, TrainConfig, TrainOutcome, TrainingPair,
};
