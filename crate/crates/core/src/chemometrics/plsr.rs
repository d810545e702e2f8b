//! Single-response PLS regression by NIPALS, with leave-one-out selection
//! of the latent-variable count.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{dot, mean, solve, Matrix};

/// Score vectors with `t't` below this abort the fit.
pub const RANK_TOLERANCE: f64 = 1e-14;
pub const DEFAULT_MAX_LV_CAP: usize = 20;
pub const MODEL_MAGIC: &str = "PLSR1";

#[derive(Debug, Clone, PartialEq)]
pub struct PlsrModel {
    pub x_mean: Vec<f64>,
    pub y_mean: f64,
    /// Weight vectors `w_a`, one per latent variable, each of length B.
    pub weights: Vec<Vec<f64>>,
    pub x_loadings: Vec<Vec<f64>>,
    pub y_loadings: Vec<f64>,
    pub coefficients: Vec<f64>,
}

impl PlsrModel {
    pub fn n_lv(&self) -> usize {
        self.y_loadings.len()
    }

    pub fn bands(&self) -> usize {
        self.x_mean.len()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.y_mean
            + row
                .iter()
                .zip(&self.x_mean)
                .zip(&self.coefficients)
                .map(|((x, m), b)| (x - m) * b)
                .sum::<f64>()
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "{MODEL_MAGIC}");
        let _ = writeln!(s, "bands,{}", self.bands());
        let _ = writeln!(s, "n_lv,{}", self.n_lv());
        let _ = writeln!(s, "y_mean,{:?}", self.y_mean);
        let _ = writeln!(s, "x_mean,{}", join(&self.x_mean));
        let _ = writeln!(s, "coefficients,{}", join(&self.coefficients));
        let _ = writeln!(s, "y_loadings,{}", join(&self.y_loadings));
        for w in &self.weights {
            let _ = writeln!(s, "weight,{}", join(w));
        }
        for p in &self.x_loadings {
            let _ = writeln!(s, "x_loading,{}", join(p));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("PLSR model: {m}"));
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MODEL_MAGIC) {
            return Err(bad("missing PLSR1 magic"));
        }
        let mut model = PlsrModel {
            x_mean: Vec::new(),
            y_mean: f64::NAN,
            weights: Vec::new(),
            x_loadings: Vec::new(),
            y_loadings: Vec::new(),
            coefficients: Vec::new(),
        };
        let (mut bands, mut n_lv) = (None, None);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (key, rest) = line.split_once(',').ok_or_else(|| bad(line))?;
            let values = || -> Result<Vec<f64>> {
                rest.split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|e| bad(&format!("{key}: {e}"))))
                    .collect()
            };
            match key {
                "bands" => bands = Some(rest.trim().parse::<usize>().map_err(|e| bad(&e.to_string()))?),
                "n_lv" => n_lv = Some(rest.trim().parse::<usize>().map_err(|e| bad(&e.to_string()))?),
                "y_mean" => model.y_mean = rest.trim().parse().map_err(|_| bad("y_mean"))?,
                "x_mean" => model.x_mean = values()?,
                "coefficients" => model.coefficients = values()?,
                "y_loadings" => model.y_loadings = values()?,
                "weight" => model.weights.push(values()?),
                "x_loading" => model.x_loadings.push(values()?),
                other => return Err(bad(&format!("unknown key `{other}`"))),
            }
        }
        let (Some(b), Some(a)) = (bands, n_lv) else {
            return Err(bad("missing bands/n_lv"));
        };
        let ok = model.x_mean.len() == b
            && model.coefficients.len() == b
            && model.y_loadings.len() == a
            && model.weights.len() == a
            && model.x_loadings.len() == a
            && model.weights.iter().chain(&model.x_loadings).all(|v| v.len() == b)
            && model.y_mean.is_finite();
        if !ok {
            return Err(bad("inconsistent dimensions"));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// NIPALS components on centred data, before coefficients are assembled.
struct Components {
    x_mean: Vec<f64>,
    y_mean: f64,
    weights: Vec<Vec<f64>>,
    x_loadings: Vec<Vec<f64>>,
    y_loadings: Vec<f64>,
    /// Set when component `failed_at` (0-based) had a vanishing score.
    failed_at: Option<usize>,
}

fn nipals(x: &Matrix, y: &[f64], n_lv: usize) -> Components {
    let b = x.cols();
    let x_mean = x.column_means();
    let y_mean = mean(y);
    let mut xr: Vec<f64> = x
        .row_iter()
        .flat_map(|r| r.iter().zip(&x_mean).map(|(v, m)| v - m))
        .collect();
    let mut yr: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let mut comps = Components {
        x_mean,
        y_mean,
        weights: Vec::with_capacity(n_lv),
        x_loadings: Vec::with_capacity(n_lv),
        y_loadings: Vec::with_capacity(n_lv),
        failed_at: None,
    };

    for a in 0..n_lv {
        // w = X'y / |X'y|
        let mut w = vec![0.0; b];
        for (i, row) in xr.chunks_exact(b).enumerate() {
            let yi = yr[i];
            for (wj, xij) in w.iter_mut().zip(row) {
                *wj += xij * yi;
            }
        }
        let norm = dot(&w, &w).sqrt();
        let x_scale: f64 = xr.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y_scale = dot(&yr, &yr).sqrt();
        if norm <= 1e-12 * x_scale * y_scale || norm == 0.0 {
            // No covariance left with y: take the column carrying the most
            // residual variance so the component is still well defined. Its
            // y-loading comes out zero.
            let mut ss = vec![0.0; b];
            for row in xr.chunks_exact(b) {
                for (s, v) in ss.iter_mut().zip(row) {
                    *s += v * v;
                }
            }
            let j = (0..b).fold(0, |best, j| if ss[j] > ss[best] { j } else { best });
            w.iter_mut().for_each(|v| *v = 0.0);
            w[j] = 1.0;
        } else {
            w.iter_mut().for_each(|v| *v /= norm);
        }

        let t: Vec<f64> = xr.chunks_exact(b).map(|row| dot(row, &w)).collect();
        let tt = dot(&t, &t);
        if tt < RANK_TOLERANCE {
            comps.failed_at = Some(a);
            break;
        }
        let mut p = vec![0.0; b];
        for (i, row) in xr.chunks_exact(b).enumerate() {
            for (pj, xij) in p.iter_mut().zip(row) {
                *pj += xij * t[i];
            }
        }
        p.iter_mut().for_each(|v| *v /= tt);
        let q = dot(&yr, &t) / tt;

        for (i, row) in xr.chunks_exact_mut(b).enumerate() {
            for (xij, pj) in row.iter_mut().zip(&p) {
                *xij -= t[i] * pj;
            }
            yr[i] -= q * t[i];
        }
        comps.weights.push(w);
        comps.x_loadings.push(p);
        comps.y_loadings.push(q);
    }
    comps
}

/// `beta = W (P'W)^-1 q` using the first `a` components.
fn coefficients(comps: &Components, a: usize) -> Result<Vec<f64>> {
    let b = comps.x_mean.len();
    let ptw = Matrix::from_fn(a, a, |i, j| dot(&comps.x_loadings[i], &comps.weights[j]));
    let z = solve(&ptw, &comps.y_loadings[..a]).ok_or(Error::RankDeficient { component: a })?;
    let mut beta = vec![0.0; b];
    for (w, zk) in comps.weights[..a].iter().zip(&z) {
        for (bj, wj) in beta.iter_mut().zip(w) {
            *bj += wj * zk;
        }
    }
    Ok(beta)
}

fn model_from(comps: &Components, a: usize) -> Result<PlsrModel> {
    let coefficients = coefficients(comps, a)?;
    if coefficients.iter().any(|v| !v.is_finite()) {
        return Err(Error::RankDeficient { component: a });
    }
    Ok(PlsrModel {
        x_mean: comps.x_mean.clone(),
        y_mean: comps.y_mean,
        weights: comps.weights[..a].to_vec(),
        x_loadings: comps.x_loadings[..a].to_vec(),
        y_loadings: comps.y_loadings[..a].to_vec(),
        coefficients,
    })
}

fn check_fit_shape(x: &Matrix, y: &[f64]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::ShapeMismatch(format!("{} rows vs {} targets", x.rows(), y.len())));
    }
    if x.rows() < 3 {
        return Err(Error::InvalidArgument("PLSR needs at least 3 samples".into()));
    }
    Ok(())
}

pub fn plsr_fit(x: &Matrix, y: &[f64], n_lv: usize) -> Result<PlsrModel> {
    check_fit_shape(x, y)?;
    if n_lv == 0 || n_lv > (x.rows() - 1).min(x.cols()) {
        return Err(Error::InvalidArgument(format!(
            "n_lv {n_lv} outside 1..=min(n-1, B) = {}",
            (x.rows() - 1).min(x.cols())
        )));
    }
    let comps = nipals(x, y, n_lv);
    if let Some(a) = comps.failed_at {
        return Err(Error::RankDeficient { component: a + 1 });
    }
    model_from(&comps, n_lv)
}

pub fn plsr_predict(model: &PlsrModel, x: &Matrix) -> Result<Vec<f64>> {
    if x.cols() != model.bands() {
        return Err(Error::ShapeMismatch(format!(
            "model expects {} bands, got {}",
            model.bands(),
            x.cols()
        )));
    }
    Ok(x.row_iter().map(|r| model.predict_row(r)).collect())
}

pub fn default_max_lv(n: usize, bands: usize) -> usize {
    n.saturating_sub(2).min(bands).min(DEFAULT_MAX_LV_CAP).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LvSelection {
    pub best_lv: usize,
    /// `rmsecv[a - 1]` for `a` latent variables; `+inf` where a fold was rank
    /// deficient.
    pub rmsecv: Vec<f64>,
}

/// Leave-one-out RMSECV for `1..=max_lv` latent variables. Each fold fits
/// `max_lv` components once; the smaller models are its prefixes.
pub fn select_lv_loocv(x: &Matrix, y: &[f64], max_lv: usize) -> Result<LvSelection> {
    check_fit_shape(x, y)?;
    let n = x.rows();
    if max_lv == 0 || max_lv > (n - 2).min(x.cols()) {
        return Err(Error::InvalidArgument(format!(
            "max_lv {max_lv} outside 1..=min(n-2, B) = {}",
            (n - 2).min(x.cols())
        )));
    }
    // Squared held-out error per fold and component count.
    let folds: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let keep: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let xt = x.select_rows(&keep);
            let yt: Vec<f64> = keep.iter().map(|&j| y[j]).collect();
            let comps = nipals(&xt, &yt, max_lv);
            (1..=max_lv)
                .map(|a| {
                    if comps.failed_at.is_some_and(|f| f < a) {
                        return f64::INFINITY;
                    }
                    match model_from(&comps, a) {
                        Ok(m) => (m.predict_row(x.row(i)) - y[i]).powi(2),
                        Err(_) => f64::INFINITY,
                    }
                })
                .collect()
        })
        .collect();
    let rmsecv: Vec<f64> = (0..max_lv)
        .map(|a| {
            let mut sum = 0.0;
            for f in &folds {
                sum += f[a];
            }
            (sum / n as f64).sqrt()
        })
        .collect();
    let mut best_lv = 1;
    for (a, &r) in rmsecv.iter().enumerate() {
        if r < rmsecv[best_lv - 1] {
            best_lv = a + 1;
        }
    }
    Ok(LvSelection { best_lv, rmsecv })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_target_gives_zero_coefficients() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0], [3.0, 5.0], [0.5, 0.0]]).unwrap();
        let y = [4.0; 4];
        let m = plsr_fit(&x, &y, 2).unwrap();
        assert!(m.coefficients.iter().all(|b| b.abs() < 1e-12));
        let pred = plsr_predict(&m, &x).unwrap();
        assert!(pred.iter().all(|p| (p - 4.0).abs() < 1e-12));
    }

    #[test]
    fn weights_are_unit_norm() {
        let x = Matrix::from_fn(10, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 + 0.1 * (i * j) as f64);
        let y: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        let m = plsr_fit(&x, &y, 3).unwrap();
        for w in &m.weights {
            assert!((dot(w, w) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lv_bounds_and_rank() {
        let x = Matrix::from_fn(5, 3, |i, j| (i + j) as f64);
        let y = [1.0, 2.0, 3.0, 4.0, 6.0];
        assert!(matches!(plsr_fit(&x, &y, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(plsr_fit(&x, &y, 4), Err(Error::InvalidArgument(_))));
        // Every column is the row index plus a constant: rank one after
        // centring, so the second component has no variance left.
        assert!(matches!(plsr_fit(&x, &y, 2), Err(Error::RankDeficient { component: 2 })));
        assert!(matches!(plsr_predict(&plsr_fit(&x, &y, 1).unwrap(), &Matrix::zeros(1, 2)), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn loocv_marks_rank_deficient_lvs_infinite() {
        let x = Matrix::from_fn(8, 3, |i, j| (i + j) as f64);
        let y: Vec<f64> = (0..8).map(|i| 2.0 * i as f64 + 1.0).collect();
        let sel = select_lv_loocv(&x, &y, 3).unwrap();
        assert!(sel.rmsecv[0] < 1e-9);
        assert!(sel.rmsecv[1].is_infinite() && sel.rmsecv[2].is_infinite());
        assert_eq!(sel.best_lv, 1);
    }

    #[test]
    fn model_text_round_trip() {
        let x = Matrix::from_fn(9, 4, |i, j| ((i * 5 + j * j) % 7) as f64 * 0.3 + i as f64 * 0.01);
        let y: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).cos()).collect();
        let m = plsr_fit(&x, &y, 3).unwrap();
        assert_eq!(PlsrModel::from_text(&m.to_text()).unwrap(), m);
        assert!(PlsrModel::from_text("PLSR2\n").is_err());
    }
}
