//! Reconstruction quality metrics and the MRAE training loss.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Denominator floor for relative errors, in reflectance units.
pub const DEFAULT_MRAE_FLOOR: f64 = 1e-4;

fn check(rc: &[f64], gt: &[f64]) -> Result<()> {
    if rc.len() != gt.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} elements", rc.len(), gt.len())));
    }
    if rc.is_empty() {
        return Err(Error::InvalidArgument("metrics need at least one element".into()));
    }
    Ok(())
}

/// Mean of `|rc - gt| / max(gt, floor)`.
pub fn mrae(rc: &[f64], gt: &[f64], floor: f64) -> Result<f64> {
    check(rc, gt)?;
    let sum: f64 = rc.iter().zip(gt).map(|(r, g)| (r - g).abs() / g.max(floor)).sum();
    Ok(sum / rc.len() as f64)
}

pub fn rmse_metric(rc: &[f64], gt: &[f64]) -> Result<f64> {
    check(rc, gt)?;
    let sse: f64 = rc.iter().zip(gt).map(|(r, g)| (r - g).powi(2)).sum();
    Ok((sse / rc.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Psnr {
    Db(f64),
    /// Inputs were identical.
    Infinite,
}

impl Psnr {
    pub fn db(self) -> Option<f64> {
        match self {
            Psnr::Db(v) => Some(v),
            Psnr::Infinite => None,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Db(v) => write!(f, "{v:.4}"),
            Psnr::Infinite => f.write_str("inf"),
        }
    }
}

/// `10 log10(peak^2 n / sum (rc - gt)^2)`.
pub fn psnr(rc: &[f64], gt: &[f64], peak: f64) -> Result<Psnr> {
    check(rc, gt)?;
    let sse: f64 = rc.iter().zip(gt).map(|(r, g)| (r - g).powi(2)).sum();
    if sse == 0.0 {
        return Ok(Psnr::Infinite);
    }
    Ok(Psnr::Db(10.0 * (peak * peak * rc.len() as f64 / sse).log10()))
}

/// MRAE and its gradient `sign(pred - gt) / (max(gt, floor) n)`, with
/// `sign(0) = 0`.
pub fn mrae_loss_grad(pred: &[f64], gt: &[f64], floor: f64) -> Result<(f64, Vec<f64>)> {
    check(pred, gt)?;
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(gt)
        .map(|(&p, &g)| {
            let denom = g.max(floor);
            let d = p - g;
            loss += d.abs() / denom;
            let s = if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            };
            s / (denom * n)
        })
        .collect();
    Ok((loss / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mrae_cases() {
        let gt = [1.0, 2.0, 4.0];
        assert_eq!(mrae(&gt, &gt, 1e-4).unwrap(), 0.0);
        assert!((mrae(&[1.1, 1.8, 4.4], &gt, 1e-4).unwrap() - 0.1).abs() < 1e-15);
        // gt below the floor divides by the floor.
        assert!((mrae(&[0.5], &[0.0], 0.25).unwrap() - 2.0).abs() < 1e-15);
        assert!(mrae(&[1.0], &[1.0, 2.0], 1e-4).is_err());
    }

    #[test]
    fn rmse_cases() {
        assert_eq!(rmse_metric(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rmse_metric(&[0.5; 8], &[0.0; 8]).unwrap(), 0.5);
    }

    #[test]
    fn psnr_cases() {
        assert_eq!(psnr(&[0.3; 4], &[0.3; 4], 1.0).unwrap(), Psnr::Infinite);
        assert_eq!(psnr(&[1.0, 0.0], &[0.0, 1.0], 1.0).unwrap(), Psnr::Db(0.0));
        let p = psnr(&[0.1; 10], &[0.0; 10], 1.0).unwrap().db().unwrap();
        assert!((p - 20.0).abs() < 1e-12);
        assert_eq!(psnr(&[255.0], &[0.0], 255.0).unwrap(), Psnr::Db(0.0));
        assert_eq!(Psnr::Infinite.to_string(), "inf");
    }

    #[test]
    fn loss_grad_zero_at_match() {
        let (loss, grad) = mrae_loss_grad(&[0.2, 0.5], &[0.2, 0.5], 1e-4).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn loss_is_scale_free() {
        let (gt, pred) = ([0.2, 0.5, 0.9], [0.25, 0.4, 1.0]);
        let (a, _) = mrae_loss_grad(&pred, &gt, 1e-4).unwrap();
        let scaled = |v: &[f64]| v.iter().map(|x| x * 3.0).collect::<Vec<_>>();
        let (b, _) = mrae_loss_grad(&scaled(&pred), &scaled(&gt), 1e-4).unwrap();
        assert!((a - b).abs() < 1e-15);
    }
}
