use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sforge::color::{
    cube_to_xyz, encode_channel, render_rgb, xyz_to_linear_rgb, xyz_to_rgb8, ColorTables, RgbImage, XyzImage, CIE_5NM,
};
use sforge::cube::linear_wavelengths;
use sforge::roi::BinaryMask;
use sforge::{CubeKind, Error, Hypercube};

fn cube_from_spectrum(wl: &[f64], f: impl Fn(f64) -> f64) -> Hypercube {
    Hypercube::from_fn(1, 1, wl.to_vec(), CubeKind::Reflectance, |_, _, b| f(wl[b])).unwrap()
}

#[test]
fn perfect_and_null_reflectors() {
    let wl = linear_wavelengths(400.0, 1000.0, 204);
    let t = ColorTables::default();
    let white = cube_to_xyz(&cube_from_spectrum(&wl, |_| 1.0), &t).unwrap().data[0];
    assert!((white[1] - 1.0).abs() <= 1e-12);
    // D65 white point, x = 0.3127, y = 0.3290.
    assert!((white[0] - 0.9505).abs() < 0.003 && (white[2] - 1.089).abs() < 0.005);
    let black = cube_to_xyz(&cube_from_spectrum(&wl, |_| 0.0), &t).unwrap().data[0];
    assert_eq!(black, [0.0; 3]);
    let rgb = xyz_to_rgb8(&XyzImage { height: 1, width: 1, data: vec![white] }, 1.4);
    assert!(rgb.data.iter().all(|&v| v >= 254));
    assert_eq!(xyz_to_rgb8(&XyzImage { height: 1, width: 1, data: vec![[0.0; 3]] }, 1.4).data, vec![0, 0, 0]);
}

/// Direct summation over the 5 nm table with no interpolation.
fn table_sum(f: impl Fn(f64) -> f64) -> [f64; 3] {
    let mut xyz = [0.0; 3];
    for &(l, x, y, z, s) in CIE_5NM.iter() {
        let r = f(l) * s;
        xyz[0] += r * x;
        xyz[1] += r * y;
        xyz[2] += r * z;
    }
    xyz
}

#[test]
fn blue_gaussian_has_more_z_than_orange() {
    let gauss = |c: f64| move |l: f64| (-((l - c) / 10.0f64).powi(2) / 2.0).exp();
    let wl: Vec<f64> = (0..=120).map(|i| 400.0 + 5.0 * i as f64).collect();
    let t = ColorTables::default();
    let b = cube_to_xyz(&cube_from_spectrum(&wl, gauss(450.0)), &t).unwrap().data[0];
    let o = cube_to_xyz(&cube_from_spectrum(&wl, gauss(600.0)), &t).unwrap().data[0];
    assert!(b[2] / b[1] > o[2] / o[1]);
    // On the table grid the ratios agree with a direct table sum; the only
    // differences are the 380-395 nm tail and the half-width end band.
    let (sb, so) = (table_sum(gauss(450.0)), table_sum(gauss(600.0)));
    assert!((b[2] / b[1] - sb[2] / sb[1]).abs() <= 1e-4 * (sb[2] / sb[1]));
    assert!((o[0] / o[1] - so[0] / so[1]).abs() <= 1e-4 * (so[0] / so[1]));
}

#[test]
fn gamma_encoding() {
    assert_eq!(encode_channel(0.5, 1.4), 155);
    assert_eq!(encode_channel(0.0, 1.4), 0);
    assert_eq!(encode_channel(1.0, 1.4), 255);
    assert_eq!(encode_channel(-0.3, 1.4), 0);
    assert_eq!(encode_channel(1.7, 1.4), 255);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let v: f64 = rng.gen_range(0.0..1.0);
        let enc = v.powf(1.0 / 1.4);
        assert!((encode_channel(v, 1.4) as f64 / 255.0 - enc).abs() <= 0.5 / 255.0 + 1e-12);
    }
}

#[test]
fn grey_scene_is_neutral() {
    let wl = linear_wavelengths(400.0, 1000.0, 60);
    let cube = Hypercube::from_fn(3, 3, wl, CubeKind::Reflectance, |_, _, _| 0.4).unwrap();
    let rgb = render_rgb(&cube, &ColorTables::default()).unwrap();
    for px in rgb.data.chunks_exact(3) {
        let (lo, hi) = (px.iter().min().unwrap(), px.iter().max().unwrap());
        assert!(hi - lo <= 2, "{px:?}");
    }
}

fn random_cube(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Hypercube {
    let wl = linear_wavelengths(400.0, 1000.0, 40);
    Hypercube::from_fn(h, w, wl, CubeKind::Reflectance, |_, _, _| rng.gen_range(0.0..1.0)).unwrap()
}

#[test]
fn rendering_commutes_with_masking() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cube = random_cube(&mut rng, 6, 5);
    let mask = BinaryMask::new(6, 5, (0..30).map(|_| rng.gen_bool(0.5)).collect());
    let t = ColorTables::default();
    let a = render_rgb(&cube, &t).unwrap().masked(&mask);
    // Zero the masked-out spectra first; a zero spectrum renders black.
    let zeroed = Hypercube::from_fn(6, 5, cube.wavelengths_nm().to_vec(), CubeKind::Reflectance, |r, c, b| {
        if mask.get(r, c) { cube.get(r, c, b) } else { 0.0 }
    })
    .unwrap();
    assert_eq!(render_rgb(&zeroed, &t).unwrap(), a);
    // Each pixel renders the same alone as in the image.
    let full = render_rgb(&cube, &t).unwrap();
    let single = Hypercube::new(1, 1, cube.wavelengths_nm().to_vec(), cube.pixel(2, 3).to_vec(), CubeKind::Reflectance).unwrap();
    assert_eq!(render_rgb(&single, &t).unwrap().pixel(0, 0), full.pixel(2, 3));
}

#[test]
fn darker_never_brighter() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cube = random_cube(&mut rng, 4, 4);
    let t = ColorTables::default();
    let base = cube_to_xyz(&cube, &t).unwrap();
    for c in [0.9, 0.5, 0.1] {
        let scaled = Hypercube::from_fn(4, 4, cube.wavelengths_nm().to_vec(), CubeKind::Reflectance, |r, col, b| {
            c * cube.get(r, col, b)
        })
        .unwrap();
        let s = cube_to_xyz(&scaled, &t).unwrap();
        for (p, q) in base.data.iter().zip(&s.data) {
            let (lp, lq) = (xyz_to_linear_rgb(*p), xyz_to_linear_rgb(*q));
            for ch in 0..3 {
                // Non-negative channels shrink; clipped bytes never grow.
                if lp[ch] >= 0.0 {
                    assert!(lq[ch] <= lp[ch]);
                }
                assert!(encode_channel(lq[ch], 1.4) <= encode_channel(lp[ch], 1.4));
            }
        }
    }
}

#[test]
fn coverage_and_kind_errors() {
    let t = ColorTables::default();
    let narrow = Hypercube::zeros(1, 1, linear_wavelengths(500.0, 1000.0, 20), CubeKind::Reflectance).unwrap();
    assert!(matches!(cube_to_xyz(&narrow, &t), Err(Error::CoverageError { .. })));
    let raw = Hypercube::zeros(1, 1, linear_wavelengths(400.0, 1000.0, 20), CubeKind::RawCounts).unwrap();
    assert!(render_rgb(&raw, &t).is_err());
}

#[test]
fn png_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rgb = render_rgb(&random_cube(&mut rng, 5, 7), &ColorTables::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.png");
    rgb.write_png(&p).unwrap();
    assert_eq!(RgbImage::read_png(&p).unwrap(), rgb);
}
