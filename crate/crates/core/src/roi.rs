//! Object masks from a two-band reflectance difference, ROI mean spectra and
//! replicate averaging.

use std::collections::{BTreeMap, VecDeque};

use crate::cube::{CubeKind, Hypercube};
use crate::error::{Error, Result};

pub const DEFAULT_HI_NM: f64 = 602.0;
pub const DEFAULT_LO_NM: f64 = 452.0;
pub const OTSU_BINS: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    data: Vec<bool>,
    true_count: usize,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, data: Vec<bool>) -> Self {
        assert_eq!(data.len(), height * width, "mask data length");
        let true_count = data.iter().filter(|&&v| v).count();
        Self {
            height,
            width,
            data,
            true_count,
        }
    }

    pub fn full(height: usize, width: usize) -> Self {
        Self::new(height, width, vec![true; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn true_count(&self) -> usize {
        self.true_count
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.width + col]
    }

    /// Keeps only the largest 4-connected component of true cells.
    pub fn largest_component(&self) -> BinaryMask {
        let (h, w) = (self.height, self.width);
        let mut label = vec![0usize; h * w];
        let mut best = (0usize, 0usize);
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..h * w {
            if !self.data[start] || label[start] != 0 {
                continue;
            }
            next += 1;
            label[start] = next;
            queue.push_back(start);
            let mut size = 0;
            while let Some(i) = queue.pop_front() {
                size += 1;
                let (r, c) = (i / w, i % w);
                let mut visit = |j: usize| {
                    if self.data[j] && label[j] == 0 {
                        label[j] = next;
                        queue.push_back(j);
                    }
                };
                if r > 0 {
                    visit(i - w);
                }
                if r + 1 < h {
                    visit(i + w);
                }
                if c > 0 {
                    visit(i - 1);
                }
                if c + 1 < w {
                    visit(i + 1);
                }
            }
            if size > best.1 {
                best = (next, size);
            }
        }
        let data = label.iter().map(|&l| l != 0 && l == best.0).collect();
        BinaryMask::new(h, w, data)
    }

    /// 8-bit grayscale PNG, 255 for true cells.
    pub fn write_png(&self, path: &std::path::Path) -> Result<()> {
        let pixels: Vec<u8> = self.data.iter().map(|&v| if v { 255 } else { 0 }).collect();
        image::save_buffer(
            path,
            &pixels,
            self.width as u32,
            self.height as u32,
            image::ExtendedColorType::L8,
        )
        .map_err(|e| Error::io(path, std::io::Error::other(e)))
    }

    /// Reads a grayscale PNG; nonzero pixels are true.
    pub fn read_png(path: &std::path::Path) -> Result<BinaryMask> {
        let img = image::open(path)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?
            .to_luma8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        Ok(BinaryMask::new(h, w, img.into_raw().into_iter().map(|v| v != 0).collect()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskOptions {
    pub hi_nm: f64,
    pub lo_nm: f64,
    /// Minimum gap between the Otsu class means for an object to count as
    /// present. Unimodal (object-free) difference images fall below it.
    pub min_contrast: f64,
    pub largest_component_only: bool,
}

impl Default for MaskOptions {
    fn default() -> Self {
        Self {
            hi_nm: DEFAULT_HI_NM,
            lo_nm: DEFAULT_LO_NM,
            min_contrast: 0.05,
            largest_component_only: false,
        }
    }
}

/// Otsu split of `values` on `bins` equal-width bins spanning their range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtsuSplit {
    /// Values in bins `0..=last_low_bin` form the low class.
    pub last_low_bin: usize,
    pub min: f64,
    pub max: f64,
    pub bins: usize,
    pub low_mean: f64,
    pub high_mean: f64,
}

impl OtsuSplit {
    #[inline]
    pub fn bin_of(&self, v: f64) -> usize {
        otsu_bin(v, self.min, self.max, self.bins)
    }

    /// Upper edge of the last low-class bin.
    pub fn threshold(&self) -> f64 {
        self.min + (self.max - self.min) * (self.last_low_bin + 1) as f64 / self.bins as f64
    }

    pub fn is_high(&self, v: f64) -> bool {
        self.bin_of(v) > self.last_low_bin
    }
}

#[inline]
fn otsu_bin(v: f64, min: f64, max: f64, bins: usize) -> usize {
    let t = ((v - min) / (max - min) * bins as f64).floor();
    (t.max(0.0) as usize).min(bins - 1)
}

pub fn otsu_split(values: &[f64], bins: usize) -> Result<OtsuSplit> {
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if values.is_empty() || !(max > min) {
        return Err(Error::DegenerateImage);
    }
    let mut hist = vec![0usize; bins];
    let mut sums = vec![0.0; bins];
    for &v in values {
        let k = otsu_bin(v, min, max, bins);
        hist[k] += 1;
        sums[k] += v;
    }
    let total = values.len() as f64;
    let total_sum: f64 = sums.iter().sum();
    let (mut n0, mut s0) = (0.0, 0.0);
    let mut best: Option<(f64, usize, f64, f64)> = None;
    for k in 0..bins - 1 {
        n0 += hist[k] as f64;
        s0 += sums[k];
        let n1 = total - n0;
        if n0 == 0.0 || n1 == 0.0 {
            continue;
        }
        let (m0, m1) = (s0 / n0, (total_sum - s0) / n1);
        let between = n0 * n1 * (m1 - m0).powi(2);
        if best.map_or(true, |(b, ..)| between > b) {
            best = Some((between, k, m0, m1));
        }
    }
    let (_, last_low_bin, low_mean, high_mean) = best.ok_or(Error::DegenerateImage)?;
    Ok(OtsuSplit {
        last_low_bin,
        min,
        max,
        bins,
        low_mean,
        high_mean,
    })
}

/// `band(hi_nm) - band(lo_nm)` per pixel, row-major.
pub fn band_difference(cube: &Hypercube, hi_nm: f64, lo_nm: f64) -> Result<Vec<f64>> {
    let hi = cube.nearest_band_index(hi_nm)?;
    let lo = cube.nearest_band_index(lo_nm)?;
    Ok(cube
        .data()
        .chunks_exact(cube.bands())
        .map(|px| px[hi] - px[lo])
        .collect())
}

/// Object mask by Otsu thresholding of a band-difference image.
/// `invalid_pixels`, when given, is forced false in the output.
pub fn band_difference_mask(
    cube: &Hypercube,
    invalid_pixels: Option<&[bool]>,
    opts: &MaskOptions,
) -> Result<BinaryMask> {
    if cube.kind() != CubeKind::Reflectance {
        return Err(Error::InvalidArgument("segmentation requires a reflectance cube".into()));
    }
    let diff = band_difference(cube, opts.hi_nm, opts.lo_nm)?;
    mask_from_difference(&diff, cube.height(), cube.width(), invalid_pixels, opts)
}

pub fn mask_from_difference(
    diff: &[f64],
    height: usize,
    width: usize,
    invalid_pixels: Option<&[bool]>,
    opts: &MaskOptions,
) -> Result<BinaryMask> {
    if let Some(inv) = invalid_pixels {
        if inv.len() != diff.len() {
            return Err(Error::ShapeMismatch("invalid-pixel mask size".into()));
        }
    }
    let split = otsu_split(diff, OTSU_BINS)?;
    if split.high_mean - split.low_mean < opts.min_contrast {
        return Err(Error::EmptyRoi);
    }
    let data = diff
        .iter()
        .enumerate()
        .map(|(i, &d)| split.is_high(d) && !invalid_pixels.is_some_and(|inv| inv[i]))
        .collect();
    let mut mask = BinaryMask::new(height, width, data);
    if opts.largest_component_only {
        mask = mask.largest_component();
    }
    if mask.true_count() == 0 {
        return Err(Error::EmptyRoi);
    }
    Ok(mask)
}

/// Per-band mean over masked, valid pixels.
pub fn mean_roi_spectrum(cube: &Hypercube, mask: &BinaryMask, invalid_pixels: Option<&[bool]>) -> Result<Vec<f64>> {
    if mask.height() != cube.height() || mask.width() != cube.width() {
        return Err(Error::ShapeMismatch(format!(
            "mask {}x{} vs cube {}x{}",
            mask.height(),
            mask.width(),
            cube.height(),
            cube.width()
        )));
    }
    if invalid_pixels.is_some_and(|inv| inv.len() != mask.data().len()) {
        return Err(Error::ShapeMismatch("invalid-pixel mask size".into()));
    }
    let b = cube.bands();
    let mut sum = vec![0.0; b];
    let mut count = 0usize;
    for (i, px) in cube.data().chunks_exact(b.max(1)).enumerate() {
        if mask.data()[i] && !invalid_pixels.is_some_and(|inv| inv[i]) {
            for (s, v) in sum.iter_mut().zip(px) {
                *s += v;
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyRoi);
    }
    Ok(sum.into_iter().map(|s| s / count as f64).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpectrum {
    pub sample_id: String,
    pub spectrum: Vec<f64>,
    pub n_replicates: usize,
}

/// Element-wise mean per sample id; output sorted by id.
pub fn average_replicates(spectra: &[(String, Vec<f64>)]) -> Result<Vec<SampleSpectrum>> {
    let Some((_, first)) = spectra.first() else {
        return Ok(Vec::new());
    };
    let len = first.len();
    let mut groups: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
    for (id, v) in spectra {
        if v.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "spectrum for `{id}` has {} bands, expected {len}",
                v.len()
            )));
        }
        let entry = groups.entry(id.as_str()).or_insert_with(|| (vec![0.0; len], 0));
        for (s, x) in entry.0.iter_mut().zip(v) {
            *s += x;
        }
        entry.1 += 1;
    }
    Ok(groups
        .into_iter()
        .map(|(id, (sum, n))| SampleSpectrum {
            sample_id: id.to_string(),
            spectrum: sum.into_iter().map(|s| s / n as f64).collect(),
            n_replicates: n,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_band_cube(diff: &[f64]) -> Hypercube {
        // Bands at 452 and 602 nm; difference carried by the 602 band.
        let w = diff.len();
        Hypercube::from_fn(1, w, vec![452.0, 602.0], CubeKind::Reflectance, |_, c, b| {
            if b == 0 {
                0.1
            } else {
                0.1 + diff[c]
            }
        })
        .unwrap()
    }

    #[test]
    fn uniform_cube_is_degenerate() {
        let cube = two_band_cube(&[0.0; 6]);
        assert!(matches!(
            band_difference_mask(&cube, None, &MaskOptions::default()),
            Err(Error::DegenerateImage)
        ));
    }

    #[test]
    fn raw_counts_rejected() {
        let cube = Hypercube::zeros(1, 2, vec![452.0, 602.0], CubeKind::RawCounts).unwrap();
        assert!(band_difference_mask(&cube, None, &MaskOptions::default()).is_err());
    }

    #[test]
    fn separates_two_levels_and_honors_invalid() {
        let cube = two_band_cube(&[0.0, 0.4, 0.4, 0.0, 0.4, 0.0]);
        let m = band_difference_mask(&cube, None, &MaskOptions::default()).unwrap();
        assert_eq!(m.data(), &[false, true, true, false, true, false]);
        let inv = [false, true, false, false, false, false];
        let m = band_difference_mask(&cube, Some(&inv), &MaskOptions::default()).unwrap();
        assert_eq!(m.data(), &[false, false, true, false, true, false]);
    }

    #[test]
    fn low_contrast_is_empty() {
        let cube = two_band_cube(&[0.0, 0.01, 0.0, 0.01]);
        assert!(matches!(
            band_difference_mask(&cube, None, &MaskOptions::default()),
            Err(Error::EmptyRoi)
        ));
    }

    #[test]
    fn largest_component() {
        #[rustfmt::skip]
        let data = vec![
            true, false, true, true,
            false, false, true, false,
            true, false, false, false,
        ];
        let m = BinaryMask::new(3, 4, data).largest_component();
        assert_eq!(m.true_count(), 3);
        assert!(m.get(0, 2) && m.get(0, 3) && m.get(1, 2));
    }

    #[test]
    fn roi_means() {
        let cube = Hypercube::from_fn(1, 3, vec![500.0], CubeKind::Reflectance, |_, c, _| [0.2, 0.4, 0.9][c]).unwrap();
        let mask = BinaryMask::new(1, 3, vec![true, true, false]);
        let m = mean_roi_spectrum(&cube, &mask, None).unwrap();
        assert!((m[0] - 0.3).abs() < 1e-15);
        let inv = [true, false, false];
        assert_eq!(mean_roi_spectrum(&cube, &mask, Some(&inv)).unwrap(), vec![0.4]);
        let empty = BinaryMask::new(1, 3, vec![false; 3]);
        assert!(matches!(mean_roi_spectrum(&cube, &empty, None), Err(Error::EmptyRoi)));
        let constant = Hypercube::from_fn(2, 2, vec![500.0, 600.0], CubeKind::Reflectance, |_, _, _| 0.7).unwrap();
        assert_eq!(mean_roi_spectrum(&constant, &BinaryMask::full(2, 2), None).unwrap(), vec![0.7, 0.7]);
    }

    #[test]
    fn replicate_averaging() {
        let out = average_replicates(&[
            ("s2".into(), vec![1.0, 1.0]),
            ("s1".into(), vec![0.2, 0.4]),
            ("s1".into(), vec![0.4, 0.6]),
        ])
        .unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].sample_id, "s1");
        assert_eq!(out[0].n_replicates, 2);
        assert!((out[0].spectrum[0] - 0.3).abs() < 1e-15 && (out[0].spectrum[1] - 0.5).abs() < 1e-15);
        assert_eq!(out[1].spectrum, vec![1.0, 1.0]);
        assert!(matches!(
            average_replicates(&[("a".into(), vec![1.0]), ("a".into(), vec![1.0, 2.0])]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn many_samples_two_replicates() {
        let spectra: Vec<(String, Vec<f64>)> = (0..141)
            .flat_map(|i| (0..2).map(move |r| (format!("s{i:03}"), vec![i as f64 + r as f64])))
            .collect();
        let out = average_replicates(&spectra).unwrap();
        assert_eq!(out.len(), 141);
        assert!(out.iter().all(|s| s.n_replicates == 2));
    }
}
