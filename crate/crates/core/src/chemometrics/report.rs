use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mean, sample_sd};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub r2: f64,
    pub rmse: f64,
    pub n: usize,
}

pub fn regression_report(y_true: &[f64], y_pred: &[f64]) -> Result<RegressionReport> {
    if y_true.len() != y_pred.len() {
        return Err(Error::ShapeMismatch(format!("{} targets vs {} predictions", y_true.len(), y_pred.len())));
    }
    let n = y_true.len();
    if n < 2 {
        return Err(Error::InvalidArgument("regression report needs at least 2 samples".into()));
    }
    let m = mean(y_true);
    let ss_tot: f64 = y_true.iter().map(|y| (y - m).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let ss_res: f64 = y_true.iter().zip(y_pred).map(|(y, p)| (y - p).powi(2)).sum();
    Ok(RegressionReport {
        r2: 1.0 - ss_res / ss_tot,
        rmse: (ss_res / n as f64).sqrt(),
        n,
    })
}

/// Ratio of the evaluation set's reference sample standard deviation to
/// its RMSEP.
pub fn rpd(y_true_eval: &[f64], rmsep: f64) -> f64 {
    sample_sd(y_true_eval) / rmsep
}

/// One row of a calibration/validation/prediction summary table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlsrTableRow {
    pub n_lv: usize,
    pub calibration: RegressionReport,
    pub validation: RegressionReport,
    pub prediction: RegressionReport,
    pub rpd: f64,
}

pub const TABLE_HEADER: &str = "LV,R2c,RMSEC,R2v,RMSEV,R2p,RMSEP,RPD";

impl PlsrTableRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            self.n_lv,
            self.calibration.r2,
            self.calibration.rmse,
            self.validation.r2,
            self.validation.rmse,
            self.prediction.r2,
            self.prediction.rmse,
            self.rpd
        )
    }
}
