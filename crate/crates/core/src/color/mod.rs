//! Rendering reflectance cubes to 8-bit RGB under D65 with the CIE 1931
//! observer and a pure power-law gamma.

mod tables;

use std::path::Path;

use rayon::prelude::*;

use crate::cube::{CubeKind, Hypercube};
use crate::error::{Error, Result};
use crate::roi::BinaryMask;

pub use tables::CIE_5NM;

pub const DEFAULT_GAMMA: f64 = 1.4;
pub const MIN_COVERAGE_NM: (f64, f64) = (420.0, 700.0);

/// Linear sRGB primaries (D65 white) from CIE XYZ.
pub const XYZ_TO_LINEAR_RGB: [[f64; 3]; 3] = [
    [3.240_454_2, -1.537_138_5, -0.498_531_4],
    [-0.969_266_0, 1.876_010_8, 0.041_556_0],
    [0.055_643_4, -0.204_025_9, 1.057_225_2],
];

#[derive(Debug, Clone, PartialEq)]
pub struct ColorTables {
    /// `(nm, x-bar, y-bar, z-bar)`
    pub cmf: Vec<(f64, f64, f64, f64)>,
    /// `(nm, relative power)`
    pub d65: Vec<(f64, f64)>,
    pub gamma: f64,
}

impl Default for ColorTables {
    fn default() -> Self {
        Self {
            cmf: CIE_5NM.iter().map(|&(w, x, y, z, _)| (w, x, y, z)).collect(),
            d65: CIE_5NM.iter().map(|&(w, .., s)| (w, s)).collect(),
            gamma: DEFAULT_GAMMA,
        }
    }
}

/// Piecewise-linear interpolation on an ascending table; zero outside it.
fn interp(table: &[(f64, f64)], x: f64) -> f64 {
    let (Some(first), Some(last)) = (table.first(), table.last()) else {
        return 0.0;
    };
    if x < first.0 || x > last.0 {
        return 0.0;
    }
    let i = table.partition_point(|p| p.0 <= x);
    if i == 0 {
        return first.1;
    }
    if i == table.len() {
        return last.1;
    }
    let (x0, y0) = table[i - 1];
    let (x1, y1) = table[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Integration widths for each band centre (half-way to each neighbour).
fn band_widths(wl: &[f64]) -> Vec<f64> {
    let n = wl.len();
    (0..n)
        .map(|i| {
            let lo = if i == 0 { wl[0] } else { 0.5 * (wl[i - 1] + wl[i]) };
            let hi = if i + 1 == n { wl[n - 1] } else { 0.5 * (wl[i] + wl[i + 1]) };
            hi - lo
        })
        .collect()
}

/// Per-band weights `k * S(l) * cmf(l) * dl` for X, Y and Z, normalised so
/// that a unit reflector integrates to `Y = 1`.
#[derive(Debug, Clone)]
pub struct XyzWeights {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl XyzWeights {
    pub fn new(wavelengths_nm: &[f64], tables: &ColorTables) -> Result<Self> {
        let (Some(&min), Some(&max)) = (wavelengths_nm.first(), wavelengths_nm.last()) else {
            return Err(Error::CoverageError {
                min_nm: f64::NAN,
                max_nm: f64::NAN,
            });
        };
        if min > MIN_COVERAGE_NM.0 || max < MIN_COVERAGE_NM.1 {
            return Err(Error::CoverageError { min_nm: min, max_nm: max });
        }
        let xs: Vec<(f64, f64)> = tables.cmf.iter().map(|&(w, x, _, _)| (w, x)).collect();
        let ys: Vec<(f64, f64)> = tables.cmf.iter().map(|&(w, _, y, _)| (w, y)).collect();
        let zs: Vec<(f64, f64)> = tables.cmf.iter().map(|&(w, _, _, z)| (w, z)).collect();
        let widths = band_widths(wavelengths_nm);
        let mut weights = XyzWeights {
            x: Vec::with_capacity(wavelengths_nm.len()),
            y: Vec::with_capacity(wavelengths_nm.len()),
            z: Vec::with_capacity(wavelengths_nm.len()),
        };
        for (&l, &dl) in wavelengths_nm.iter().zip(&widths) {
            let s = interp(&tables.d65, l) * dl;
            weights.x.push(s * interp(&xs, l));
            weights.y.push(s * interp(&ys, l));
            weights.z.push(s * interp(&zs, l));
        }
        let k = 1.0 / weights.y.iter().sum::<f64>();
        for v in weights.x.iter_mut().chain(&mut weights.y).chain(&mut weights.z) {
            *v *= k;
        }
        Ok(weights)
    }

    pub fn integrate(&self, spectrum: &[f64]) -> [f64; 3] {
        let mut xyz = [0.0; 3];
        for (i, &r) in spectrum.iter().enumerate() {
            xyz[0] += r * self.x[i];
            xyz[1] += r * self.y[i];
            xyz[2] += r * self.z[i];
        }
        xyz
    }
}

/// Tristimulus values per pixel, row-major, `[X, Y, Z]`.
#[derive(Debug, Clone, PartialEq)]
pub struct XyzImage {
    pub height: usize,
    pub width: usize,
    pub data: Vec<[f64; 3]>,
}

pub fn cube_to_xyz(cube: &Hypercube, tables: &ColorTables) -> Result<XyzImage> {
    let weights = XyzWeights::new(cube.wavelengths_nm(), tables)?;
    let data = cube
        .data()
        .par_chunks_exact(cube.bands())
        .map(|px| weights.integrate(px))
        .collect();
    Ok(XyzImage {
        height: cube.height(),
        width: cube.width(),
        data,
    })
}

/// Linear RGB, unclipped.
pub fn xyz_to_linear_rgb(xyz: [f64; 3]) -> [f64; 3] {
    let m = XYZ_TO_LINEAR_RGB;
    [0, 1, 2].map(|i| m[i][0] * xyz[0] + m[i][1] * xyz[1] + m[i][2] * xyz[2])
}

/// Clip to `[0, 1]`, apply `v^(1/gamma)` and quantise to a byte.
pub fn encode_channel(linear: f64, gamma: f64) -> u8 {
    let v = linear.clamp(0.0, 1.0).powf(1.0 / gamma);
    (v * 255.0).round() as u8
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub height: usize,
    pub width: usize,
    /// Interleaved RGB bytes, row-major.
    pub data: Vec<u8>,
    pub gamma_applied: bool,
}

impl RgbImage {
    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let i = (row * self.width + col) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Channel values scaled to `[0, 1]`, pixel-major like the bytes.
    pub fn to_unit(&self) -> Vec<f64> {
        self.data.iter().map(|&v| v as f64 / 255.0).collect()
    }

    /// Copy with pixels outside `mask` set to black.
    pub fn masked(&self, mask: &BinaryMask) -> RgbImage {
        let mut out = self.clone();
        for (px, &keep) in out.data.chunks_exact_mut(3).zip(mask.data()) {
            if !keep {
                px.fill(0);
            }
        }
        out
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        image::save_buffer(
            path,
            &self.data,
            self.width as u32,
            self.height as u32,
            image::ExtendedColorType::Rgb8,
        )
        .map_err(|e| Error::io(path, std::io::Error::other(e)))
    }

    pub fn read_png(path: &Path) -> Result<RgbImage> {
        let img = image::open(path)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?
            .to_rgb8();
        Ok(RgbImage {
            height: img.height() as usize,
            width: img.width() as usize,
            data: img.into_raw(),
            gamma_applied: true,
        })
    }
}

pub fn xyz_to_rgb8(xyz: &XyzImage, gamma: f64) -> RgbImage {
    let data = xyz
        .data
        .iter()
        .flat_map(|&p| xyz_to_linear_rgb(p).map(|c| encode_channel(c, gamma)))
        .collect();
    RgbImage {
        height: xyz.height,
        width: xyz.width,
        data,
        gamma_applied: true,
    }
}

pub fn render_rgb(cube: &Hypercube, tables: &ColorTables) -> Result<RgbImage> {
    if cube.kind() != CubeKind::Reflectance {
        return Err(Error::InvalidArgument("RGB rendering requires a reflectance cube".into()));
    }
    Ok(xyz_to_rgb8(&cube_to_xyz(cube, tables)?, tables.gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::linear_wavelengths;

    fn flat(v: f64) -> Hypercube {
        Hypercube::from_fn(2, 2, linear_wavelengths(400.0, 1000.0, 121), CubeKind::Reflectance, |_, _, _| v).unwrap()
    }

    #[test]
    fn perfect_reflector_is_white() {
        let xyz = cube_to_xyz(&flat(1.0), &ColorTables::default()).unwrap();
        let [x, y, z] = xyz.data[0];
        assert!((y - 1.0).abs() < 1e-12);
        // D65 white point, X/Y ~ 0.9505 and Z/Y ~ 1.089.
        assert!((x - 0.9505).abs() < 0.005, "X = {x}");
        assert!((z - 1.089).abs() < 0.01, "Z = {z}");
        let rgb = xyz_to_rgb8(&xyz, DEFAULT_GAMMA);
        for c in rgb.pixel(0, 0) {
            assert!(c >= 254);
        }
    }

    #[test]
    fn black_is_black() {
        let rgb = render_rgb(&flat(0.0), &ColorTables::default()).unwrap();
        assert!(rgb.data.iter().all(|&v| v == 0));
    }

    #[test]
    fn gamma_encoding_value() {
        assert_eq!(encode_channel(0.5, 1.4), 155);
        assert_eq!(encode_channel(-0.2, 1.4), 0);
        assert_eq!(encode_channel(1.7, 1.4), 255);
    }

    #[test]
    fn coverage_checked() {
        let narrow = Hypercube::zeros(1, 1, linear_wavelengths(450.0, 900.0, 10), CubeKind::Reflectance).unwrap();
        assert!(matches!(cube_to_xyz(&narrow, &ColorTables::default()), Err(Error::CoverageError { .. })));
    }

    #[test]
    fn interpolation() {
        let t = [(0.0, 0.0), (10.0, 1.0), (20.0, 3.0)];
        assert_eq!(interp(&t, 5.0), 0.5);
        assert_eq!(interp(&t, 20.0), 3.0);
        assert_eq!(interp(&t, 15.0), 2.0);
        assert_eq!(interp(&t, 25.0), 0.0);
    }
}
