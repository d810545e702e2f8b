//! White/dark reference calibration of raw counts to reflectance.

use rayon::prelude::*;

use crate::cube::{CubeKind, Hypercube, DEFAULT_R_MAX};
use crate::error::{Error, Result};

/// Denominators at or below this many counts mark the element invalid.
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ReferenceFrames {
    white: Hypercube,
    dark: Hypercube,
    epsilon: f64,
}

impl ReferenceFrames {
    pub fn new(white: Hypercube, dark: Hypercube) -> Result<Self> {
        Self::with_epsilon(white, dark, DEFAULT_EPSILON)
    }

    pub fn with_epsilon(white: Hypercube, dark: Hypercube, epsilon: f64) -> Result<Self> {
        if !white.same_geometry(&dark) {
            return Err(Error::ShapeMismatch(format!(
                "white {:?} vs dark {:?}",
                white.shape(),
                dark.shape()
            )));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be > 0".into()));
        }
        Ok(Self { white, dark, epsilon })
    }

    pub fn white(&self) -> &Hypercube {
        &self.white
    }

    pub fn dark(&self) -> &Hypercube {
        &self.dark
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Reflectance cube plus a per-element validity mask (pixel-major, like the
/// cube data).
#[derive(Debug, Clone)]
pub struct Calibrated {
    pub reflectance: Hypercube,
    pub invalid: Vec<bool>,
}

impl Calibrated {
    /// A pixel is invalid when any of its bands is invalid.
    pub fn invalid_pixels(&self) -> Vec<bool> {
        let b = self.reflectance.bands().max(1);
        self.invalid.chunks(b).map(|px| px.iter().any(|&v| v)).collect()
    }

    pub fn invalid_count(&self) -> usize {
        self.invalid.iter().filter(|&&v| v).count()
    }
}

/// `(raw - dark) / (white - dark)` per element, clipped to `[0, r_max]`.
#[inline]
pub fn reflectance_value(raw: f64, white: f64, dark: f64, epsilon: f64, r_max: f64) -> Option<f64> {
    let denom = white - dark;
    if !(denom > epsilon) {
        return None;
    }
    let r = (raw - dark) / denom;
    r.is_finite().then(|| r.clamp(0.0, r_max))
}

pub fn calibrate_reflectance(raw: &Hypercube, refs: &ReferenceFrames) -> Result<Calibrated> {
    calibrate_reflectance_with(raw, refs, DEFAULT_R_MAX)
}

pub fn calibrate_reflectance_with(raw: &Hypercube, refs: &ReferenceFrames, r_max: f64) -> Result<Calibrated> {
    if !raw.same_geometry(&refs.white) {
        return Err(Error::ShapeMismatch(format!(
            "raw {:?} vs references {:?}",
            raw.shape(),
            refs.white.shape()
        )));
    }
    let (r0, w, d) = (raw.data(), refs.white.data(), refs.dark.data());
    let eps = refs.epsilon;
    let (data, invalid): (Vec<f64>, Vec<bool>) = (0..r0.len())
        .into_par_iter()
        .map(|i| match reflectance_value(r0[i], w[i], d[i], eps, r_max) {
            Some(v) => (v, false),
            None => (0.0, true),
        })
        .unzip();
    let reflectance = Hypercube::with_r_max(
        raw.height(),
        raw.width(),
        raw.wavelengths_nm().to_vec(),
        data,
        CubeKind::Reflectance,
        r_max,
    )?;
    Ok(Calibrated { reflectance, invalid })
}
