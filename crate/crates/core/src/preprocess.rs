//! Spectral pre-treatments: SNV, MSC and Savitzky-Golay first derivative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mean, sample_sd, solve, Matrix};

pub const DEFAULT_SG_WINDOW: usize = 11;
pub const DEFAULT_SG_POLYORDER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Raw,
    Msc,
    Snv,
    Sg1,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Method::Raw),
            "msc" => Ok(Method::Msc),
            "snv" => Ok(Method::Snv),
            "sg1" => Ok(Method::Sg1),
            other => Err(Error::Config(format!("unknown preprocessing method `{other}`"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Raw => "raw",
            Method::Msc => "msc",
            Method::Snv => "snv",
            Method::Sg1 => "sg1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessSpec {
    pub method: Method,
    pub sg_window: usize,
    pub sg_polyorder: usize,
}

impl Default for PreprocessSpec {
    fn default() -> Self {
        Self {
            method: Method::Raw,
            sg_window: DEFAULT_SG_WINDOW,
            sg_polyorder: DEFAULT_SG_POLYORDER,
        }
    }
}

impl PreprocessSpec {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            ..Default::default()
        }
    }
}

/// A pre-treatment with any data-dependent state (the MSC reference)
/// frozen from the calibration set.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessor {
    spec: PreprocessSpec,
    msc_reference: Option<Vec<f64>>,
}

impl Preprocessor {
    /// Freezes the MSC reference as the mean spectrum of `calibration`.
    pub fn fit(spec: PreprocessSpec, calibration: &Matrix) -> Result<Self> {
        let msc_reference = (spec.method == Method::Msc).then(|| calibration.column_means());
        Ok(Self { spec, msc_reference })
    }

    pub fn with_reference(spec: PreprocessSpec, reference: Vec<f64>) -> Self {
        Self {
            spec,
            msc_reference: Some(reference),
        }
    }

    pub fn spec(&self) -> &PreprocessSpec {
        &self.spec
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        match self.spec.method {
            Method::Raw => Ok(x.clone()),
            Method::Snv => {
                let rows: Result<Vec<Vec<f64>>> = x.row_iter().map(snv).collect();
                Matrix::from_rows(&rows?)
            }
            Method::Msc => {
                let reference = self
                    .msc_reference
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("MSC reference not fitted".into()))?;
                msc(x, reference)
            }
            Method::Sg1 => sg_first_derivative(x, self.spec.sg_window, self.spec.sg_polyorder),
        }
    }

    /// Output band count for `bands` input bands.
    pub fn output_bands(&self, bands: usize) -> usize {
        match self.spec.method {
            Method::Sg1 => bands.saturating_sub(self.spec.sg_window - 1),
            _ => bands,
        }
    }
}

/// Standard normal variate: centre and scale by the sample standard
/// deviation.
pub fn snv(spectrum: &[f64]) -> Result<Vec<f64>> {
    if spectrum.len() < 2 {
        return Err(Error::ZeroVariance);
    }
    let m = mean(spectrum);
    let sd = sample_sd(spectrum);
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(spectrum.iter().map(|x| (x - m) / sd).collect())
}

/// Ordinary least-squares fit `row ~ offset + slope * reference`.
pub fn scatter_fit(row: &[f64], reference: &[f64]) -> Result<(f64, f64)> {
    let mr = mean(reference);
    let mx = mean(row);
    let sxx: f64 = reference.iter().map(|r| (r - mr).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let sxy: f64 = reference.iter().zip(row).map(|(r, x)| (r - mr) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok((mx - slope * mr, slope))
}

/// Multiplicative scatter correction against `reference`.
pub fn msc(x: &Matrix, reference: &[f64]) -> Result<Matrix> {
    if reference.len() != x.cols() {
        return Err(Error::ShapeMismatch(format!(
            "reference has {} bands, matrix {}",
            reference.len(),
            x.cols()
        )));
    }
    let mut out = Matrix::zeros(x.rows(), x.cols());
    for i in 0..x.rows() {
        let (a, b) = scatter_fit(x.row(i), reference)?;
        if b.abs() < 1e-12 {
            return Err(Error::DegenerateFit(b));
        }
        for (o, v) in out.row_mut(i).iter_mut().zip(x.row(i)) {
            *o = (v - a) / b;
        }
    }
    Ok(out)
}

fn check_window(window: usize, polyorder: usize, bands: usize) -> Result<()> {
    if window % 2 == 0 || window > bands || polyorder == 0 || polyorder >= window {
        return Err(Error::BadWindow {
            window,
            polyorder,
            bands,
        });
    }
    Ok(())
}

/// First-derivative Savitzky-Golay coefficients (per band index) for the
/// window centre; `coeffs[j]` multiplies sample `center + j - half`.
pub fn sg_derivative_coefficients(window: usize, polyorder: usize) -> Result<Vec<f64>> {
    check_window(window, polyorder, window)?;
    let half = (window / 2) as f64;
    let p = polyorder + 1;
    // The centre derivative is the linear coefficient of the fit, i.e. row 1
    // of (A^T A)^-1 A^T with A the Vandermonde matrix of offsets.
    let ata = Matrix::from_fn(p, p, |r, c| {
        (0..window).map(|i| (i as f64 - half).powi((r + c) as i32)).sum()
    });
    let mut e1 = vec![0.0; p];
    e1[1] = 1.0;
    let row = solve(&ata, &e1).ok_or(Error::BadWindow {
        window,
        polyorder,
        bands: window,
    })?;
    Ok((0..window)
        .map(|i| {
            let z = i as f64 - half;
            row.iter().enumerate().map(|(k, r)| r * z.powi(k as i32)).sum()
        })
        .collect())
}

/// Savitzky-Golay first derivative of each row. Incomplete windows at the
/// edges are dropped, so the output has `bands - window + 1` columns.
pub fn sg_first_derivative(x: &Matrix, window: usize, polyorder: usize) -> Result<Matrix> {
    check_window(window, polyorder, x.cols())?;
    let coeffs = sg_derivative_coefficients(window, polyorder)?;
    let out_cols = x.cols() - window + 1;
    let mut out = Matrix::zeros(x.rows(), out_cols);
    for i in 0..x.rows() {
        let row = x.row(i);
        for (j, o) in out.row_mut(i).iter_mut().enumerate() {
            *o = coeffs.iter().zip(&row[j..j + window]).map(|(c, v)| c * v).sum();
        }
    }
    Ok(out)
}
