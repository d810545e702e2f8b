//! Synthetic scenes with a known latent target, used in place of a measured
//! dataset. Each sample is a disk-shaped object on a spectrally flat
//! background; the object's reflectance is a smooth baseline attenuated by
//! Gaussian absorption bands whose depth scales with the sample's latent
//! value (Beer-Lambert style).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cube::{linear_wavelengths, CubeKind, Hypercube};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::roi::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionPeak {
    pub center_nm: f64,
    pub width_nm: f64,
    /// Optical depth at the peak center per unit latent.
    pub latent_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSceneSpec {
    pub height: usize,
    pub width: usize,
    pub n_bands: usize,
    pub wavelength_range_nm: (f64, f64),
    pub n_samples: usize,
    /// Images per sample; each replicate gets its own noise draw.
    pub replicates: usize,
    pub object_radius_px: usize,
    pub latent_range: (f64, f64),
    pub absorption_peaks: Vec<AbsorptionPeak>,
    /// Noise standard deviation as a fraction of the white-dark span.
    pub noise_sd: f64,
    /// Relative darkening at the object rim (0 = flat lighting).
    pub shading: f64,
    pub background_reflectance: f64,
    pub seed: u64,
}

impl Default for SyntheticSceneSpec {
    fn default() -> Self {
        Self {
            height: 32,
            width: 32,
            n_bands: 60,
            wavelength_range_nm: (400.0, 1000.0),
            n_samples: 40,
            replicates: 2,
            object_radius_px: 10,
            latent_range: (8.0, 16.0),
            absorption_peaks: vec![
                AbsorptionPeak {
                    center_nm: 480.0,
                    width_nm: 30.0,
                    latent_weight: 0.02,
                },
                AbsorptionPeak {
                    center_nm: 670.0,
                    width_nm: 25.0,
                    latent_weight: 0.025,
                },
                AbsorptionPeak {
                    center_nm: 970.0,
                    width_nm: 35.0,
                    latent_weight: 0.015,
                },
            ],
            noise_sd: 0.01,
            shading: 0.2,
            background_reflectance: 0.05,
            seed: 7,
        }
    }
}

const WHITE_LEVEL: f64 = 4000.0;
const DARK_LEVEL: f64 = 120.0;

impl SyntheticSceneSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.wavelength_range_nm;
        if self.n_bands < 3 {
            return Err(Error::InvalidArgument("n_bands must be >= 3".into()));
        }
        if !(lo < hi) {
            return Err(Error::InvalidArgument("wavelength range must be increasing".into()));
        }
        if self.height == 0 || self.width == 0 {
            return Err(Error::InvalidArgument("scene must be at least 1x1".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("replicates must be >= 1".into()));
        }
        if !(self.noise_sd >= 0.0) {
            return Err(Error::InvalidArgument("noise_sd must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.shading) {
            return Err(Error::InvalidArgument("shading must be in [0, 1)".into()));
        }
        if self.latent_range.0 > self.latent_range.1 {
            return Err(Error::InvalidArgument("latent range must be ordered".into()));
        }
        if let Some(p) = self
            .absorption_peaks
            .iter()
            .find(|p| !(lo..=hi).contains(&p.center_nm) || p.width_nm <= 0.0)
        {
            return Err(Error::InvalidArgument(format!(
                "absorption peak at {} nm (width {}) outside [{lo}, {hi}]",
                p.center_nm, p.width_nm
            )));
        }
        Ok(())
    }

    pub fn wavelengths(&self) -> Vec<f64> {
        linear_wavelengths(self.wavelength_range_nm.0, self.wavelength_range_nm.1, self.n_bands)
    }

    /// Ground-truth object disk.
    pub fn object_mask(&self) -> BinaryMask {
        let cy = (self.height as f64 - 1.0) / 2.0;
        let cx = (self.width as f64 - 1.0) / 2.0;
        let r2 = (self.object_radius_px as f64).powi(2);
        let data = (0..self.height * self.width)
            .map(|i| {
                let (y, x) = ((i / self.width) as f64, (i % self.width) as f64);
                (y - cy).powi(2) + (x - cx).powi(2) < r2
            })
            .collect();
        BinaryMask::new(self.height, self.width, data)
    }

    /// Unshaded object reflectance at one wavelength.
    pub fn object_reflectance(&self, wavelength_nm: f64, latent: f64) -> f64 {
        let baseline = 0.15 + 0.55 / (1.0 + (-(wavelength_nm - 560.0) / 40.0).exp());
        let depth: f64 = self
            .absorption_peaks
            .iter()
            .map(|p| {
                let z = (wavelength_nm - p.center_nm) / p.width_nm;
                p.latent_weight * latent * (-0.5 * z * z).exp()
            })
            .sum();
        baseline * (-depth).exp()
    }

    fn shade(&self, row: usize, col: usize) -> f64 {
        let cy = (self.height as f64 - 1.0) / 2.0;
        let cx = (self.width as f64 - 1.0) / 2.0;
        let radius = (self.object_radius_px as f64).max(1.0);
        let rho2 = ((row as f64 - cy).powi(2) + (col as f64 - cx).powi(2)) / (radius * radius);
        1.0 - self.shading * rho2.min(1.0)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub sample_id: String,
    pub replicate: usize,
    pub latent: f64,
    pub raw: Hypercube,
    pub true_reflectance: Hypercube,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub white: Hypercube,
    pub dark: Hypercube,
    pub object_mask: BinaryMask,
    /// One entry per sample, in sample order.
    pub latent_y: Vec<f64>,
    /// `replicates` scenes per sample, grouped by sample.
    pub scenes: Vec<SyntheticScene>,
}

pub fn sample_id(index: usize) -> String {
    format!("s{index:04}")
}

pub fn generate_synthetic_scene(spec: &SyntheticSceneSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let wl = spec.wavelengths();
    let (h, w, b) = (spec.height, spec.width, spec.n_bands);

    // Sensor response rises toward the middle of the range; the white panel
    // also shows mild vignetting, the dark frame a fixed-pattern offset.
    let (lo, hi) = spec.wavelength_range_nm;
    let response: Vec<f64> = wl
        .iter()
        .map(|&l| {
            let u = (l - lo) / (hi - lo);
            0.6 + 0.4 * (std::f64::consts::PI * u).sin()
        })
        .collect();
    let cy = (h as f64 - 1.0) / 2.0;
    let cx = (w as f64 - 1.0) / 2.0;
    let half_diag2 = (cy * cy + cx * cx).max(1.0);
    let white = Hypercube::from_fn(h, w, wl.clone(), CubeKind::RawCounts, |r, c, k| {
        let rho2 = ((r as f64 - cy).powi(2) + (c as f64 - cx).powi(2)) / half_diag2;
        WHITE_LEVEL * response[k] * (1.0 - 0.15 * rho2)
    })?;
    let dark = Hypercube::from_fn(h, w, wl.clone(), CubeKind::RawCounts, |r, c, k| {
        DARK_LEVEL + 3.0 * (((r * 7 + c * 3 + k) % 5) as f64)
    })?;

    let mask = spec.object_mask();
    let (lat_lo, lat_hi) = spec.latent_range;
    let latent_y: Vec<f64> = (0..spec.n_samples)
        .map(|_| if lat_hi > lat_lo { rng.gen_range(lat_lo..lat_hi) } else { lat_lo })
        .collect();
    let noise = Normal::new(0.0, 1.0).expect("unit normal");

    let mut scenes = Vec::with_capacity(spec.n_samples * spec.replicates);
    for (i, &latent) in latent_y.iter().enumerate() {
        let spectrum: Vec<f64> = wl.iter().map(|&l| spec.object_reflectance(l, latent)).collect();
        let truth = Hypercube::from_fn(h, w, wl.clone(), CubeKind::Reflectance, |r, c, k| {
            if mask.get(r, c) {
                spectrum[k] * spec.shade(r, c)
            } else {
                spec.background_reflectance
            }
        })?;
        for rep in 0..spec.replicates {
            let mut data = Vec::with_capacity(h * w * b);
            for (idx, &refl) in truth.data().iter().enumerate() {
                let (wv, dv) = (white.data()[idx], dark.data()[idx]);
                let span = wv - dv;
                let mut v = dv + refl * span;
                if spec.noise_sd > 0.0 {
                    v += spec.noise_sd * span * noise.sample(&mut rng);
                }
                data.push(v);
            }
            let raw = Hypercube::new(h, w, wl.clone(), data, CubeKind::RawCounts)?;
            scenes.push(SyntheticScene {
                sample_id: sample_id(i),
                replicate: rep,
                latent,
                raw,
                true_reflectance: truth.clone(),
            });
        }
    }

    Ok(SyntheticDataset {
        white,
        dark,
        object_mask: mask,
        latent_y,
        scenes,
    })
}


/// Regression data with a known informative subset of columns.
#[derive(Debug, Clone)]
pub struct PlantedBands {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub informative: Vec<usize>,
}

/// `n` rows of `bands` independent standard-normal columns; `y` is a fixed
/// positive combination of `n_informative` distinct random columns plus
/// `N(0, noise_sd^2)`.
pub fn planted_band_data(n: usize, bands: usize, n_informative: usize, noise_sd: f64, seed: u64) -> Result<PlantedBands> {
    if n_informative == 0 || n_informative > bands || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= informative <= bands and n >= 1, got {n_informative} of {bands}, n = {n}"
        )));
    }
    if !(noise_sd >= 0.0) {
        return Err(Error::InvalidArgument("noise_sd must be >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut informative = rand::seq::index::sample(&mut rng, bands, n_informative).into_vec();
    informative.sort_unstable();
    let x = Matrix::from_fn(n, bands, |_, _| unit.sample(&mut rng));
    let y = (0..n)
        .map(|i| {
            let signal: f64 = informative
                .iter()
                .enumerate()
                .map(|(j, &b)| (1.0 - 0.5 * j as f64 / n_informative as f64) * x.get(i, b))
                .sum();
            signal + noise_sd * unit.sample(&mut rng)
        })
        .collect();
    Ok(PlantedBands { x, y, informative })
}
