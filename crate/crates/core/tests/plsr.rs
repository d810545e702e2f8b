use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sforge::chemometrics::{
    partition_sizes, plsr_fit, plsr_predict, random_split, regression_report, rpd, select_lv_loocv, PlsrModel,
    DEFAULT_RATIOS,
};
use sforge::linalg::Matrix;
use sforge::Error;

fn exact_linear(n: usize, b: usize, seed: u64) -> (Matrix, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Matrix::from_fn(n, b, |_, _| rng.gen_range(-1.0..1.0));
    let beta: Vec<f64> = (0..b).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let y = (0..n).map(|i| 1.5 + (0..b).map(|j| beta[j] * x.get(i, j)).sum::<f64>()).collect();
    (x, y, beta)
}

/// Least squares with an intercept via the normal equations.
fn normal_equations(x: &Matrix, y: &[f64]) -> Vec<f64> {
    let (n, b) = (x.rows(), x.cols());
    let a = DMatrix::from_fn(n, b + 1, |i, j| if j == 0 { 1.0 } else { x.get(i, j - 1) });
    let yv = DVector::from_column_slice(y);
    let ata = a.transpose() * &a;
    let sol = ata.lu().solve(&(a.transpose() * yv)).unwrap();
    sol.iter().skip(1).copied().collect()
}

#[test]
fn full_rank_matches_least_squares() {
    let (x, y, beta) = exact_linear(40, 6, 1);
    let model = plsr_fit(&x, &y, 6).unwrap();
    let oracle = normal_equations(&x, &y);
    for j in 0..6 {
        assert!((model.coefficients[j] - oracle[j]).abs() <= 1e-8);
        assert!((model.coefficients[j] - beta[j]).abs() <= 1e-8);
    }
    let pred = plsr_predict(&model, &x).unwrap();
    assert!(pred.iter().zip(&y).all(|(p, t)| (p - t).abs() <= 1e-8));
}

#[test]
fn noisy_full_rank_matches_least_squares() {
    let (x, mut y, _) = exact_linear(40, 6, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    y.iter_mut().for_each(|v| *v += rng.gen_range(-0.3..0.3));
    let model = plsr_fit(&x, &y, 6).unwrap();
    let oracle = normal_equations(&x, &y);
    assert!(model.coefficients.iter().zip(&oracle).all(|(a, b)| (a - b).abs() <= 1e-8));
}

#[test]
fn weights_are_unit_norm() {
    let (x, y, _) = exact_linear(30, 5, 3);
    let model = plsr_fit(&x, &y, 4).unwrap();
    for w in &model.weights {
        let norm: f64 = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn constant_target_and_centre_row() {
    let (x, _, _) = exact_linear(20, 4, 4);
    let y = vec![7.0; 20];
    let model = plsr_fit(&x, &y, 2).unwrap();
    assert!(model.coefficients.iter().all(|&c| c == 0.0));
    assert!(plsr_predict(&model, &x).unwrap().iter().all(|&p| (p - 7.0).abs() <= 1e-12));

    let (x, y, _) = exact_linear(20, 4, 5);
    let model = plsr_fit(&x, &y, 3).unwrap();
    let centre = Matrix::from_rows(&[model.x_mean.clone(), model.x_mean.clone()]).unwrap();
    let p = plsr_predict(&model, &centre).unwrap();
    assert!((p[0] - model.y_mean).abs() <= 1e-12);
    assert_eq!(p[0], p[1]);
}

#[test]
fn single_band_is_simple_regression() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let xs: Vec<f64> = (0..15).map(|_| rng.gen_range(0.0..5.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.7 * x + rng.gen_range(-0.2..0.2)).collect();
    let x = Matrix::from_vec(15, 1, xs.clone()).unwrap();
    let model = plsr_fit(&x, &ys, 1).unwrap();
    let (mx, my) = (xs.iter().sum::<f64>() / 15.0, ys.iter().sum::<f64>() / 15.0);
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = xs.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!((model.coefficients[0] - slope).abs() <= 1e-10);
    let intercept = my - slope * mx;
    let p = plsr_predict(&model, &Matrix::from_vec(1, 1, vec![0.0]).unwrap()).unwrap();
    assert!((p[0] - intercept).abs() <= 1e-10);
}

#[test]
fn centering_invariance() {
    let (x, mut y, _) = exact_linear(25, 5, 7);
    y.iter_mut().enumerate().for_each(|(i, v)| *v += 0.1 * (i as f64).sin());
    let shifted = Matrix::from_fn(25, 5, |i, j| x.get(i, j) + 10.0 * (j as f64 + 1.0));
    let a = plsr_predict(&plsr_fit(&x, &y, 3).unwrap(), &x).unwrap();
    let b = plsr_predict(&plsr_fit(&shifted, &y, 3).unwrap(), &shifted).unwrap();
    assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() <= 1e-9));
}

#[test]
fn fit_errors() {
    let (x, y, _) = exact_linear(10, 3, 8);
    assert!(plsr_fit(&x, &y, 4).is_err());
    assert!(plsr_fit(&x, &y, 0).is_err());
    let model = plsr_fit(&x, &y, 2).unwrap();
    assert!(matches!(plsr_predict(&model, &Matrix::zeros(2, 4)), Err(Error::ShapeMismatch(_))));
    // Two identical columns: rank 1, so a second component has no variance left.
    let col = Matrix::from_fn(10, 2, |i, _| i as f64);
    let yy: Vec<f64> = (0..10).map(|i| i as f64 * 2.0).collect();
    assert!(matches!(plsr_fit(&col, &yy, 2), Err(Error::RankDeficient { component: 2 })));
}

#[test]
fn loocv_equals_brute_force_loop() {
    let (x, mut y, _) = exact_linear(12, 5, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    y.iter_mut().for_each(|v| *v += rng.gen_range(-0.5..0.5));
    let max_lv = 5;
    let sel = select_lv_loocv(&x, &y, max_lv).unwrap();
    for a in 1..=max_lv {
        let mut sse = 0.0;
        for i in 0..12 {
            let keep: Vec<usize> = (0..12).filter(|&j| j != i).collect();
            let model = plsr_fit(&x.select_rows(&keep), &keep.iter().map(|&j| y[j]).collect::<Vec<_>>(), a).unwrap();
            let p = plsr_predict(&model, &x.select_rows(&[i])).unwrap()[0];
            sse += (p - y[i]).powi(2);
        }
        assert_eq!(sel.rmsecv[a - 1], (sse / 12.0).sqrt(), "A = {a}");
    }
    let best = (1..=max_lv)
        .min_by(|&a, &b| sel.rmsecv[a - 1].partial_cmp(&sel.rmsecv[b - 1]).unwrap())
        .unwrap();
    assert_eq!(sel.best_lv, best);
}

#[test]
fn loocv_finds_true_rank() {
    // y depends on the first 3 latent directions of a rank-3 X.
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let t = Matrix::from_fn(20, 3, |_, _| rng.gen_range(-1.0..1.0));
    let p = Matrix::from_fn(3, 8, |_, _| rng.gen_range(-1.0..1.0));
    let x = Matrix::from_fn(20, 8, |i, j| (0..3).map(|k| t.get(i, k) * p.get(k, j)).sum());
    let y: Vec<f64> = (0..20).map(|i| t.get(i, 0) - 2.0 * t.get(i, 1) + 0.5 * t.get(i, 2)).collect();
    let sel = select_lv_loocv(&x, &y, 3).unwrap();
    assert!(sel.rmsecv[2] <= 1e-8);
    assert_eq!(sel.best_lv, 3);
    assert!(select_lv_loocv(&x, &y, 19).is_err());
}

#[test]
fn loocv_ties_go_to_fewer_components() {
    let x = Matrix::from_fn(8, 3, |i, j| ((i * 3 + j) % 5) as f64 + 0.1 * j as f64);
    let y = vec![2.0; 8];
    let sel = select_lv_loocv(&x, &y, 3).unwrap();
    assert_eq!(sel.best_lv, 1);
}

#[test]
fn model_text_round_trip() {
    let (x, y, _) = exact_linear(15, 4, 13);
    let model = plsr_fit(&x, &y, 3).unwrap();
    let back = PlsrModel::from_text(&model.to_text()).unwrap();
    assert_eq!(back, model);
    assert!(PlsrModel::from_text("PLSR0\n").is_err());
}

#[test]
fn splits() {
    assert_eq!(partition_sizes(141, DEFAULT_RATIOS).unwrap(), [85, 28, 28]);
    assert_eq!(partition_sizes(5, DEFAULT_RATIOS).unwrap(), [3, 1, 1]);
    assert!(matches!(partition_sizes(10, [0.5, 0.2, 0.2]), Err(Error::BadRatios(_))));
    let s = random_split(141, DEFAULT_RATIOS, 42).unwrap();
    assert_eq!(s.sizes(), (85, 28, 28));
    assert_eq!(s, random_split(141, DEFAULT_RATIOS, 42).unwrap());
    let mut all: Vec<usize> = s.calibration.iter().chain(&s.validation).chain(&s.prediction).copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..141).collect::<Vec<_>>());
    assert!(random_split(4, DEFAULT_RATIOS, 1).is_err());
}

#[test]
fn reports() {
    let r = regression_report(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
    assert_eq!((r.r2, r.rmse), (1.0, 0.0));
    let r = regression_report(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap();
    assert_eq!(r.r2, 0.0);
    let r = regression_report(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
    assert!((r.rmse - (1.0f64 / 3.0).sqrt()).abs() <= 1e-15);
    assert!(matches!(regression_report(&[2.0, 2.0], &[1.0, 3.0]), Err(Error::ZeroVariance)));
    assert_eq!(rpd(&[10.0, 12.0, 14.0], 1.0), 2.0);
    assert_eq!(rpd(&[10.0, 12.0, 14.0], 2.0), 1.0);
}
