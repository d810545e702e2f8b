//! Hyperspectral calibration, segmentation, chemometric modelling, band
//! selection and RGB-to-spectral reconstruction on a single desk machine.

pub mod calibration;
pub mod chemometrics;
pub mod color;
pub mod cube;
pub mod envi;
pub mod error;
pub mod ga;
pub mod linalg;
pub mod pipeline;
pub mod plot;
pub mod preprocess;
pub mod recon;
pub mod roi;
pub mod synth;

pub use cube::{CubeKind, Hypercube};
pub use error::{Error, Result};
pub use linalg::Matrix;
