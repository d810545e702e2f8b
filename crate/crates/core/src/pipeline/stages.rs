use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use super::dataset::{self, write_text, ManifestEntry, SpectraTable, SpectrumRow};
use super::{Phase, Workspace};
use crate::calibration::{calibrate_reflectance, ReferenceFrames};
use crate::chemometrics::{
    default_max_lv, plsr_fit, plsr_predict, random_split, regression_report, rpd, select_lv_loocv, PlsrTableRow,
    TABLE_HEADER,
};
use crate::color::{render_rgb, ColorTables, RgbImage};
use crate::cube::Hypercube;
use crate::envi::{read_envi, write_envi};
use crate::error::{Error, Result};
use crate::ga::{ga_select, GaRunRecord};
use crate::linalg::Matrix;
use crate::preprocess::{PreprocessSpec, Preprocessor};
use crate::recon::{self, mrae, psnr, rmse_metric, Checkpoint, NetworkConfig, TrainingPair};
use crate::roi::{average_replicates, band_difference_mask, mean_roi_spectrum, BinaryMask};

pub(crate) const SPLITS: [&str; 3] = ["calibration", "validation", "prediction"];

pub(crate) fn split_path(ws: &Workspace, part: &str) -> PathBuf {
    ws.out(format!("split/{part}.csv"))
}

fn mkdir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn manifest(ws: &Workspace, stage: &'static str) -> Result<Vec<ManifestEntry>> {
    ws.record(stage, Phase::Run, &ws.data(dataset::MANIFEST));
    dataset::read_manifest(&ws.config.paths.data_dir)
}

fn read_cube(ws: &Workspace, stage: &'static str, path: &Path) -> Result<Hypercube> {
    ws.record(stage, Phase::Run, path);
    read_envi(path)
}

fn read_reflectance(ws: &Workspace, stage: &'static str, path: &Path) -> Result<Hypercube> {
    read_cube(ws, stage, path)?.into_reflectance()
}

fn read_mask(ws: &Workspace, stage: &'static str, path: &Path) -> Result<BinaryMask> {
    ws.record(stage, Phase::Run, path);
    BinaryMask::read_png(path)
}

pub(crate) fn read_table(ws: &Workspace, stage: &'static str, phase: Phase, path: &Path) -> Result<SpectraTable> {
    ws.record(stage, phase, path);
    SpectraTable::read(path)
}

/// `(sample_id, value)` rows of one split, sorted by id.
pub(crate) fn read_split(ws: &Workspace, stage: &'static str, phase: Phase, part: &str) -> Result<Vec<(String, f64)>> {
    let path = split_path(ws, part);
    ws.record(stage, phase, &path);
    Ok(dataset::read_references(&path)?.into_iter().collect())
}

fn calibrated_path(ws: &Workspace, e: &ManifestEntry) -> PathBuf {
    ws.out(format!("calibrated/{}.hdr", e.scene_name()))
}

fn invalid_path(ws: &Workspace, e: &ManifestEntry) -> PathBuf {
    ws.out(format!("calibrated/{}_invalid.png", e.scene_name()))
}

fn mask_path(ws: &Workspace, e: &ManifestEntry) -> PathBuf {
    ws.out(format!("masks/{}.png", e.scene_name()))
}

fn selected_path(ws: &Workspace, e: &ManifestEntry) -> PathBuf {
    ws.out(format!("selected/{}.hdr", e.scene_name()))
}

fn rgb_path(ws: &Workspace, e: &ManifestEntry) -> PathBuf {
    ws.out(format!("rgb/{}.png", e.scene_name()))
}

fn reconstructed_path(ws: &Workspace, e: &ManifestEntry) -> PathBuf {
    ws.out(format!("reconstructed/{}.hdr", e.scene_name()))
}

pub fn calibrate(ws: &Workspace) -> Result<()> {
    const STAGE: &str = "calibrate";
    let white = read_cube(ws, STAGE, &ws.data(dataset::WHITE))?;
    let dark = read_cube(ws, STAGE, &ws.data(dataset::DARK))?;
    let refs = ReferenceFrames::new(white, dark)?;
    mkdir(&ws.out("calibrated"))?;
    for e in manifest(ws, STAGE)? {
        let raw = read_cube(ws, STAGE, &e.raw)?;
        let cal = calibrate_reflectance(&raw, &refs)?;
        write_envi(&ws.out(format!("calibrated/{}", e.scene_name())), &cal.reflectance)?;
        let inv = BinaryMask::new(raw.height(), raw.width(), cal.invalid_pixels());
        inv.write_png(&invalid_path(ws, &e))?;
    }
    Ok(())
}

pub fn mask(ws: &Workspace) -> Result<()> {
    const STAGE: &str = "mask";
    let opts = ws.config.segmentation.options();
    mkdir(&ws.out("masks"))?;
    for e in manifest(ws, STAGE)? {
        let cube = read_reflectance(ws, STAGE, &calibrated_path(ws, &e))?;
        let invalid = read_mask(ws, STAGE, &invalid_path(ws, &e))?;
        let m = band_difference_mask(&cube, Some(invalid.data()), &opts)
            .map_err(|err| Error::InvalidArgument(format!("scene {}: {err}", e.scene_name())))?;
        m.write_png(&mask_path(ws, &e))?;
    }
    Ok(())
}

/// Mean ROI spectrum per image of `cube_path`, then per-sample averages.
fn extract_spectra(
    ws: &Workspace,
    stage: &'static str,
    cube_path: impl Fn(&ManifestEntry) -> PathBuf,
) -> Result<(SpectraTable, SpectraTable)> {
    let mut wavelengths = Vec::new();
    let mut rows = Vec::new();
    for e in manifest(ws, stage)? {
        let cube = read_reflectance(ws, stage, &cube_path(&e))?;
        let m = read_mask(ws, stage, &mask_path(ws, &e))?;
        let invalid = read_mask(ws, stage, &invalid_path(ws, &e))?;
        let spectrum = mean_roi_spectrum(&cube, &m, Some(invalid.data()))?;
        if wavelengths.is_empty() {
            wavelengths = cube.wavelengths_nm().to_vec();
        }
        rows.push(SpectrumRow {
            sample_id: e.sample_id.clone(),
            replicate: Some(e.replicate),
            values: spectrum,
        });
    }
    let pairs: Vec<(String, Vec<f64>)> = rows.iter().map(|r| (r.sample_id.clone(), r.values.clone())).collect();
    let samples = average_replicates(&pairs)?
        .into_iter()
        .map(|s| SpectrumRow {
            sample_id: s.sample_id,
            replicate: None,
            values: s.spectrum,
        })
        .collect();
    Ok((
        SpectraTable {
            wavelengths_nm: wavelengths.clone(),
            rows,
        },
        SpectraTable {
            wavelengths_nm: wavelengths,
            rows: samples,
        },
    ))
}

pub fn extract(ws: &Workspace) -> Result<()> {
    let (reps, samples) = extract_spectra(ws, "extract", |e| calibrated_path(ws, e))?;
    reps.write(&ws.out("spectra/replicates.csv"))?;
    samples.write(&ws.out("spectra/samples.csv"))
}

fn design(table: &SpectraTable, ids: &[String]) -> Result<Matrix> {
    let rows: Vec<&[f64]> = table.select(ids)?.into_iter().map(|r| r.values.as_slice()).collect();
    Matrix::from_rows(&rows)
}

/// Fits PLSR on the calibration split of `spectra` (LV count by LOOCV),
/// saves the model and scores all three splits.
fn plsr_table(
    ws: &Workspace,
    stage: &'static str,
    spectra: &Path,
    preprocess: PreprocessSpec,
    name: &str,
) -> Result<PlsrTableRow> {
    let table = read_table(ws, stage, Phase::Fit, spectra)?;
    let cal = read_split(ws, stage, Phase::Fit, "calibration")?;
    let (cal_ids, cal_y): (Vec<String>, Vec<f64>) = cal.into_iter().unzip();
    let pre = Preprocessor::fit(preprocess, &design(&table, &cal_ids)?)?;
    let x_cal = pre.apply(&design(&table, &cal_ids)?)?;
    let max_lv = ws.config.plsr.max_lv.min(default_max_lv(x_cal.rows(), x_cal.cols()));
    let lv = select_lv_loocv(&x_cal, &cal_y, max_lv)?;
    let model = plsr_fit(&x_cal, &cal_y, lv.best_lv)?;
    let model_path = ws.out(format!("plsr/{name}.plsr"));
    dataset::ensure_parent(&model_path)?;
    model.save(&model_path)?;
    let calibration = regression_report(&cal_y, &plsr_predict(&model, &x_cal)?)?;

    let mut eval = Vec::new();
    for part in &SPLITS[1..] {
        let (ids, y): (Vec<String>, Vec<f64>) = read_split(ws, stage, Phase::Evaluate, part)?.into_iter().unzip();
        let x = pre.apply(&design(&table, &ids)?)?;
        eval.push((regression_report(&y, &plsr_predict(&model, &x)?)?, y));
    }
    let row = PlsrTableRow {
        n_lv: lv.best_lv,
        calibration,
        validation: eval[0].0,
        prediction: eval[1].0,
        rpd: rpd(&eval[1].1, eval[1].0.rmse),
    };
    write_text(
        &ws.out(format!("plsr/{name}.csv")),
        &format!("{TABLE_HEADER}\n{}\n", row.csv_line()),
    )?;
    Ok(row)
}

fn selected_bands(ws: &Workspace, stage: &'static str) -> Result<Vec<usize>> {
    let path = ws.out("ga/selected.csv");
    ws.record(stage, Phase::Run, &path);
    let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Format {
            path: path.clone(),
            msg: e.to_string(),
        })?;
        out.push(rec[0].parse().map_err(|_| Error::Format {
            path: path.clone(),
            msg: format!("bad band index `{}`", &rec[0]),
        })?);
    }
    if out.is_empty() {
        return Err(Error::Format {
            path,
            msg: "no bands selected".into(),
        });
    }
    Ok(out)
}

/// Split, full-spectrum PLSR, GA band selection and the selected-band cubes.
pub fn select(ws: &Workspace) -> Result<()> {
    const STAGE: &str = "select";
    let samples_path = ws.out("spectra/samples.csv");
    let samples = read_table(ws, STAGE, Phase::Run, &samples_path)?;
    let refs_path = ws.data(dataset::REFERENCE);
    ws.record(STAGE, Phase::Run, &refs_path);
    let refs = dataset::read_references(&refs_path)?;
    let labelled: Vec<(String, f64)> = samples
        .rows
        .iter()
        .filter_map(|r| refs.get(&r.sample_id).map(|&v| (r.sample_id.clone(), v)))
        .collect();
    let split = random_split(labelled.len(), ws.config.split.ratios, ws.config.split.seed)?;
    for (part, idx) in SPLITS.iter().zip([&split.calibration, &split.validation, &split.prediction]) {
        let rows: Vec<(String, f64)> = idx.iter().map(|&i| labelled[i].clone()).collect();
        dataset::write_references(&split_path(ws, part), &rows)?;
    }

    plsr_table(ws, STAGE, &samples_path, ws.config.preprocess, "full_spectrum")?;

    // GA on the untreated calibration spectra.
    let table = read_table(ws, STAGE, Phase::Fit, &samples_path)?;
    let (cal_ids, cal_y): (Vec<String>, Vec<f64>) = read_split(ws, STAGE, Phase::Fit, "calibration")?.into_iter().unzip();
    let result = ga_select(&design(&table, &cal_ids)?, &cal_y, &table.wavelengths_nm, &ws.config.ga)?;
    let mut text = String::from("band_index,wavelength_nm\n");
    for (i, wl) in result.selected_indices.iter().zip(&result.selected_wavelengths) {
        text.push_str(&format!("{i},{wl}\n"));
    }
    write_text(&ws.out("ga/selected.csv"), &text)?;
    let record = serde_json::to_string_pretty(&GaRunRecord::new(&ws.config.ga, &result))
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    write_text(&ws.out("ga/run.json"), &(record + "\n"))?;

    mkdir(&ws.out("selected"))?;
    for e in manifest(ws, STAGE)? {
        let cube = read_reflectance(ws, STAGE, &calibrated_path(ws, &e))?;
        write_envi(
            &ws.out(format!("selected/{}", e.scene_name())),
            &cube.select_bands(&result.selected_indices)?,
        )?;
    }
    Ok(())
}

pub fn render(ws: &Workspace) -> Result<()> {
    const STAGE: &str = "render";
    let tables = ColorTables {
        gamma: ws.config.color.gamma,
        ..Default::default()
    };
    mkdir(&ws.out("rgb"))?;
    for e in manifest(ws, STAGE)? {
        let cube = read_reflectance(ws, STAGE, &calibrated_path(ws, &e))?;
        render_rgb(&cube, &tables)?.write_png(&rgb_path(ws, &e))?;
    }
    Ok(())
}

fn read_rgb(ws: &Workspace, stage: &'static str, e: &ManifestEntry) -> Result<RgbImage> {
    let path = rgb_path(ws, e);
    ws.record(stage, Phase::Run, &path);
    RgbImage::read_png(&path)
}

fn zero_outside(cube: &Hypercube, mask: &BinaryMask) -> Result<Hypercube> {
    let b = cube.bands();
    let mut data = cube.data().to_vec();
    for (px, &keep) in data.chunks_exact_mut(b).zip(mask.data()) {
        if !keep {
            px.fill(0.0);
        }
    }
    Hypercube::new(cube.height(), cube.width(), cube.wavelengths_nm().to_vec(), data, cube.kind())
}

/// Trains on the images of calibration-split samples only.
pub fn train(ws: &Workspace) -> Result<()> {
    const STAGE: &str = "train";
    let cal: BTreeSet<String> = read_split(ws, STAGE, Phase::Fit, "calibration")?
        .into_iter()
        .map(|(id, _)| id)
        .collect();
    let bands = selected_bands(ws, STAGE)?.len();
    let mut wavelengths = Vec::new();
    let mut pairs = Vec::new();
    for e in manifest(ws, STAGE)?.into_iter().filter(|e| cal.contains(&e.sample_id)) {
        let mut rgb = read_rgb(ws, STAGE, &e)?;
        let mut target = read_reflectance(ws, STAGE, &selected_path(ws, &e))?;
        if ws.config.report.mask_network_inputs {
            let m = read_mask(ws, STAGE, &mask_path(ws, &e))?;
            rgb = rgb.masked(&m);
            target = zero_outside(&target, &m)?;
        }
        wavelengths = target.wavelengths_nm().to_vec();
        pairs.push(TrainingPair::new(&rgb, &target)?);
    }
    let net_cfg = NetworkConfig {
        out_bands: bands,
        ..ws.config.network
    };
    let outcome = recon::train(&pairs, net_cfg, &ws.config.train)?;
    let model_path = ws.out("recon/model.hsdn");
    dataset::ensure_parent(&model_path)?;
    Checkpoint::new(outcome.best, wavelengths)?.save(&model_path)?;
    let mut text = String::from("epoch,mean_mrae,lr\n");
    for r in &outcome.trace {
        text.push_str(&format!("{},{},{}\n", r.epoch, r.mean_mrae, r.lr));
    }
    write_text(&ws.out("recon/trace.csv"), &text)?;
    write_text(&ws.out("recon/best_epoch.txt"), &format!("{}\n", outcome.best_epoch))
}

/// Reconstructs every image, then re-extracts ROI spectra from both the
/// selected-band and the reconstructed cubes.
pub fn reconstruct(ws: &Workspace) -> Result<()> {
    const STAGE: &str = "reconstruct";
    let model_path = ws.out("recon/model.hsdn");
    ws.record(STAGE, Phase::Run, &model_path);
    let ckpt = Checkpoint::load(&model_path)?;
    mkdir(&ws.out("reconstructed"))?;
    for e in manifest(ws, STAGE)? {
        let rgb = read_rgb(ws, STAGE, &e)?;
        let cube = recon::reconstruct(&ckpt.network, &rgb, &ckpt.wavelengths_nm)?;
        write_envi(&ws.out(format!("reconstructed/{}", e.scene_name())), &cube)?;
    }
    let (_, gt) = extract_spectra(ws, STAGE, |e| selected_path(ws, e))?;
    gt.write(&ws.out("spectra/selected_samples.csv"))?;
    let (_, rc) = extract_spectra(ws, STAGE, |e| reconstructed_path(ws, e))?;
    rc.write(&ws.out("spectra/reconstructed_samples.csv"))
}

/// Full-frame reconstruction metrics per split, then PLSR on the
/// selected-band spectra and on the reconstructed spectra.
pub fn evaluate(ws: &Workspace) -> Result<()> {
    const STAGE: &str = "evaluate";
    let entries = manifest(ws, STAGE)?;
    let mut text = String::from("split,MRAE,RMSE,PSNR\n");
    for part in SPLITS {
        let ids: BTreeSet<String> = read_split(ws, STAGE, Phase::Evaluate, part)?
            .into_iter()
            .map(|(id, _)| id)
            .collect();
        let (mut gt, mut rc) = (Vec::new(), Vec::new());
        for e in entries.iter().filter(|e| ids.contains(&e.sample_id)) {
            gt.extend_from_slice(read_reflectance(ws, STAGE, &selected_path(ws, e))?.data());
            rc.extend_from_slice(read_reflectance(ws, STAGE, &reconstructed_path(ws, e))?.data());
        }
        let m = mrae(&rc, &gt, ws.config.train.mrae_floor)?;
        let r = rmse_metric(&rc, &gt)?;
        let p = psnr(&rc, &gt, ws.config.report.psnr_peak)?;
        text.push_str(&format!("{part},{m:.4},{r:.4},{p}\n"));
    }
    write_text(&ws.out("recon/metrics.csv"), &text)?;

    let raw = PreprocessSpec::default();
    plsr_table(ws, STAGE, &ws.out("spectra/selected_samples.csv"), raw, "gt_selected")?;
    plsr_table(ws, STAGE, &ws.out("spectra/reconstructed_samples.csv"), raw, "reconstructed")?;
    Ok(())
}

/// Reference values of every labelled sample, for picking plot samples.
pub(crate) fn all_references(ws: &Workspace, stage: &'static str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for part in SPLITS {
        out.extend(read_split(ws, stage, Phase::Run, part)?);
    }
    Ok(out)
}
