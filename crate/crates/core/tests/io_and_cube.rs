use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sforge::cube::{linear_wavelengths, nearest_band_index};
use sforge::envi::{parse_envi_header, read_bil_cube, read_envi, write_bil_cube, write_envi, DataType};
use sforge::{CubeKind, Error, Hypercube};

fn f32_cube(h: usize, w: usize, b: usize, values: Vec<f32>) -> Hypercube {
    let wl = (0..b).map(|i| 400.0 + 7.5 * i as f64).collect();
    Hypercube::new(h, w, wl, values.into_iter().map(f64::from).collect(), CubeKind::RawCounts).unwrap()
}

proptest! {
    #[test]
    fn bil_round_trip_is_identity(
        (h, w, b, values) in (1usize..6, 1usize..6, 1usize..6).prop_flat_map(|(h, w, b)| {
            (Just(h), Just(w), Just(b), prop::collection::vec(-1e6f32..1e6f32, h * w * b))
        })
    ) {
        let cube = f32_cube(h, w, b, values);
        let (header, bytes) = write_bil_cube(&cube);
        let back = read_bil_cube(&header, &bytes).unwrap();
        prop_assert_eq!(back, cube);
    }

    #[test]
    fn nearest_band_is_monotone(a in 300.0f64..1100.0, d in 0.0f64..200.0) {
        let wl = linear_wavelengths(400.0, 1000.0, 204);
        if let (Ok(i), Ok(j)) = (nearest_band_index(&wl, a), nearest_band_index(&wl, a + d)) {
            prop_assert!(i <= j);
        }
    }
}

#[test]
fn hundred_random_cubes_round_trip_bit_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let (h, w, b) = (rng.gen_range(1..9), rng.gen_range(1..9), rng.gen_range(1..9));
        let v: Vec<f32> = (0..h * w * b).map(|_| rng.gen_range(-10.0f32..4000.0)).collect();
        let cube = f32_cube(h, w, b, v);
        let (header, bytes) = write_bil_cube(&cube);
        let back = read_bil_cube(&header, &bytes).unwrap();
        assert!(back.data().iter().zip(cube.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn hand_laid_bil_payload() {
    // One line, two samples, two bands: line 0 holds band 0 for both
    // samples, then band 1 for both.
    let header = parse_envi_header("ENVI\nsamples = 2\nlines = 1\nbands = 2\ninterleave = bil\ndata type = 4\nbyte order = 0\n").unwrap();
    let vals = [1.0f32, 2.0, 3.0, 4.0];
    let bytes: Vec<u8> = vals.iter().flat_map(|v| v.to_le_bytes()).collect();
    let cube = read_bil_cube(&header, &bytes).unwrap();
    assert_eq!(cube.get(0, 0, 0), 1.0);
    assert_eq!(cube.get(0, 1, 0), 2.0);
    assert_eq!(cube.get(0, 0, 1), 3.0);
    assert_eq!(cube.get(0, 1, 1), 4.0);
    assert_eq!(cube.kind(), CubeKind::RawCounts);
}

#[test]
fn paper_scale_header_and_payload() {
    let h = parse_envi_header("samples = 512\nlines = 512\nbands = 204\ninterleave = bil\ndata type = 4").unwrap();
    assert_eq!((h.samples, h.lines, h.bands, h.data_type), (512, 512, 204, DataType::Float32));
    let cube = Hypercube::zeros(512, 512, linear_wavelengths(400.0, 1000.0, 15), CubeKind::Reflectance).unwrap();
    let (_, bytes) = write_bil_cube(&cube);
    assert_eq!(bytes.len(), 512 * 512 * 15 * 4);
}

#[test]
fn header_errors() {
    assert!(matches!(
        parse_envi_header("samples = 2\nlines = 2\nbands = 0\ninterleave = bil\ndata type = 4"),
        Err(Error::MalformedHeader(_))
    ));
    assert!(matches!(
        parse_envi_header("samples = 2\nlines = 2\nbands = 2\ninterleave = bsq\ndata type = 4"),
        Err(Error::UnsupportedInterleave(_))
    ));
    assert!(matches!(
        parse_envi_header("samples = 2\nbands = 2\ninterleave = bil\ndata type = 4"),
        Err(Error::MalformedHeader(_))
    ));
    let h = parse_envi_header("samples = 1\nlines = 1\nbands = 2\ninterleave = bil\ndata type = 4").unwrap();
    assert!(matches!(read_bil_cube(&h, &[0u8; 7]), Err(Error::TruncatedPayload { .. })));
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cube = f32_cube(3, 3, 4, (0..36).map(|v| v as f32 * 0.5).collect());
    let hdr = write_envi(&dir.path().join("cube"), &cube).unwrap();
    assert_eq!(read_envi(&hdr).unwrap(), cube);
}

#[test]
fn band_lookup() {
    let wl = linear_wavelengths(400.0, 1000.0, 204);
    assert_eq!(nearest_band_index(&wl, 602.0).unwrap(), 68);
    assert_eq!(nearest_band_index(&wl, 400.0).unwrap(), 0);
    assert!(matches!(nearest_band_index(&wl, 1200.0), Err(Error::OutOfRange { .. })));
    // Exactly halfway between two centres goes to the lower index.
    assert_eq!(nearest_band_index(&[400.0, 410.0], 405.0).unwrap(), 0);
}
