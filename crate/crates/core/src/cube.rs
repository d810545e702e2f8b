//! The hypercube raster type shared by every stage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper clip for reflectance values; specular highlights may exceed 1.
pub const DEFAULT_R_MAX: f64 = 2.0;

/// Targets further than this outside the wavelength axis are rejected by
/// [`Hypercube::nearest_band_index`].
pub const BAND_LOOKUP_MARGIN_NM: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CubeKind {
    RawCounts,
    Reflectance,
}

/// Rows x cols x bands array with a wavelength axis.
///
/// Storage is pixel-major: the spectrum of pixel `(row, col)` is the
/// contiguous slice `data[(row * width + col) * bands..][..bands]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypercube {
    height: usize,
    width: usize,
    wavelengths_nm: Vec<f64>,
    data: Vec<f64>,
    kind: CubeKind,
}

impl Hypercube {
    pub fn new(
        height: usize,
        width: usize,
        wavelengths_nm: Vec<f64>,
        data: Vec<f64>,
        kind: CubeKind,
    ) -> Result<Self> {
        Self::with_r_max(height, width, wavelengths_nm, data, kind, DEFAULT_R_MAX)
    }

    pub fn with_r_max(
        height: usize,
        width: usize,
        wavelengths_nm: Vec<f64>,
        data: Vec<f64>,
        kind: CubeKind,
        r_max: f64,
    ) -> Result<Self> {
        let bands = wavelengths_nm.len();
        if data.len() != height * width * bands {
            return Err(Error::ShapeMismatch(format!(
                "data length {} != {height}x{width}x{bands}",
                data.len()
            )));
        }
        if wavelengths_nm.iter().any(|w| !w.is_finite())
            || wavelengths_nm.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidCube(
                "wavelengths must be finite and strictly increasing".into(),
            ));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidCube(format!("non-finite value {v}")));
        }
        if kind == CubeKind::Reflectance {
            if let Some(v) = data.iter().find(|&&v| !(0.0..=r_max).contains(&v)) {
                return Err(Error::InvalidCube(format!(
                    "reflectance {v} outside [0, {r_max}]"
                )));
            }
        }
        Ok(Self {
            height,
            width,
            wavelengths_nm,
            data,
            kind,
        })
    }

    pub fn zeros(height: usize, width: usize, wavelengths_nm: Vec<f64>, kind: CubeKind) -> Result<Self> {
        let n = height * width * wavelengths_nm.len();
        Self::new(height, width, wavelengths_nm, vec![0.0; n], kind)
    }

    /// Builds a cube by evaluating `f(row, col, band)` at every element.
    pub fn from_fn(
        height: usize,
        width: usize,
        wavelengths_nm: Vec<f64>,
        kind: CubeKind,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let bands = wavelengths_nm.len();
        let mut data = Vec::with_capacity(height * width * bands);
        for r in 0..height {
            for c in 0..width {
                for b in 0..bands {
                    data.push(f(r, c, b));
                }
            }
        }
        Self::new(height, width, wavelengths_nm, data, kind)
    }

    /// Re-tags a cube as reflectance, checking the value range.
    pub fn into_reflectance(self) -> Result<Self> {
        Self::new(self.height, self.width, self.wavelengths_nm, self.data, CubeKind::Reflectance)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bands(&self) -> usize {
        self.wavelengths_nm.len()
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.bands())
    }

    pub fn kind(&self) -> CubeKind {
        self.kind
    }

    pub fn wavelengths_nm(&self) -> &[f64] {
        &self.wavelengths_nm
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, band: usize) -> f64 {
        self.data[(row * self.width + col) * self.bands() + band]
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> &[f64] {
        let b = self.bands();
        let start = (row * self.width + col) * b;
        &self.data[start..start + b]
    }

    /// One band as a row-major `height * width` image.
    pub fn band_image(&self, band: usize) -> Vec<f64> {
        let b = self.bands();
        self.data.iter().skip(band).step_by(b).copied().collect()
    }

    /// True when `other` has the same spatial size and wavelength axis.
    pub fn same_geometry(&self, other: &Hypercube) -> bool {
        self.height == other.height
            && self.width == other.width
            && self.wavelengths_nm == other.wavelengths_nm
    }

    /// Sub-cube holding only the given bands; indices must be increasing.
    pub fn select_bands(&self, indices: &[usize]) -> Result<Hypercube> {
        let b = self.bands();
        if let Some(&i) = indices.iter().find(|&&i| i >= b) {
            return Err(Error::InvalidArgument(format!("band index {i} >= {b}")));
        }
        let wavelengths = indices.iter().map(|&i| self.wavelengths_nm[i]).collect();
        let mut data = Vec::with_capacity(self.height * self.width * indices.len());
        for px in self.data.chunks_exact(b.max(1)) {
            data.extend(indices.iter().map(|&i| px[i]));
        }
        Hypercube::new(self.height, self.width, wavelengths, data, self.kind)
    }

    /// Index of the band closest to `target_nm`; ties go to the lower index.
    pub fn nearest_band_index(&self, target_nm: f64) -> Result<usize> {
        nearest_band_index(&self.wavelengths_nm, target_nm)
    }
}

pub fn nearest_band_index(wavelengths_nm: &[f64], target_nm: f64) -> Result<usize> {
    let (Some(&min), Some(&max)) = (wavelengths_nm.first(), wavelengths_nm.last()) else {
        return Err(Error::InvalidArgument("empty wavelength axis".into()));
    };
    let (lo, hi) = (min - BAND_LOOKUP_MARGIN_NM, max + BAND_LOOKUP_MARGIN_NM);
    if !(lo..=hi).contains(&target_nm) {
        return Err(Error::OutOfRange {
            target_nm,
            min_nm: lo,
            max_nm: hi,
        });
    }
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (i, &w) in wavelengths_nm.iter().enumerate() {
        let d = (w - target_nm).abs();
        if d < best_dist {
            best = i;
            best_dist = d;
        }
    }
    Ok(best)
}

/// `n` band centers spaced evenly over `[min_nm, max_nm]` inclusive.
pub fn linear_wavelengths(min_nm: f64, max_nm: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min_nm],
        _ => {
            let step = (max_nm - min_nm) / (n - 1) as f64;
            (0..n).map(|i| min_nm + step * i as f64).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_band_on_linear_grid() {
        let wl = linear_wavelengths(400.0, 1000.0, 204);
        assert_eq!(nearest_band_index(&wl, 602.0).unwrap(), 68);
        assert_eq!(nearest_band_index(&wl, 400.0).unwrap(), 0);
        assert!(matches!(
            nearest_band_index(&wl, 1200.0),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn nearest_band_tie_goes_low() {
        let wl = [400.0, 410.0, 420.0];
        assert_eq!(nearest_band_index(&wl, 405.0).unwrap(), 0);
        assert_eq!(nearest_band_index(&wl, 415.0).unwrap(), 1);
    }

    #[test]
    fn rejects_bad_axes_and_values() {
        assert!(Hypercube::new(1, 1, vec![500.0, 500.0], vec![0.0, 0.0], CubeKind::RawCounts).is_err());
        assert!(Hypercube::new(1, 1, vec![500.0], vec![f64::NAN], CubeKind::RawCounts).is_err());
        assert!(Hypercube::new(1, 1, vec![500.0], vec![2.5], CubeKind::Reflectance).is_err());
        assert!(Hypercube::new(1, 1, vec![500.0], vec![2.5], CubeKind::RawCounts).is_ok());
    }

    #[test]
    fn select_bands_keeps_order() {
        let c = Hypercube::from_fn(2, 2, vec![1.0, 2.0, 3.0], CubeKind::RawCounts, |r, c, b| {
            (r * 100 + c * 10 + b) as f64
        })
        .unwrap();
        let s = c.select_bands(&[0, 2]).unwrap();
        assert_eq!(s.wavelengths_nm(), &[1.0, 3.0]);
        assert_eq!(s.pixel(1, 1), &[110.0, 112.0]);
        assert!(c.select_bands(&[2, 0]).is_err());
    }
}
