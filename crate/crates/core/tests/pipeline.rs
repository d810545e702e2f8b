use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sforge::pipeline::{
    read_manifest, run_pipeline, run_stage, write_synthetic_dataset, Phase, PipelineConfig, RunReport, Stage,
    Workspace,
};
use sforge::plot;
use sforge::synth::SyntheticSceneSpec;
use sforge::Error;

fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(&p, root, out);
            } else if p.file_name().unwrap() != "timings.csv" {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn desk_pipeline_is_accurate_reproducible_and_leak_free() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig::desk(tmp.path().join("data"), tmp.path().join("run"));
    write_synthetic_dataset(&cfg.synth, &cfg.paths.data_dir).unwrap();

    let ws = Workspace::new(cfg.clone());
    let timings = run_pipeline(&ws).unwrap();
    assert_eq!(timings.0.len(), 9);

    let rep = RunReport::read_csv(&ws.out("report.csv")).unwrap();
    assert_eq!(rep, RunReport::collect(&ws).unwrap());
    assert_eq!(rep.plsr.len(), 3);
    assert_eq!(rep.selected_wavelengths.len(), 15);
    let splits: Vec<&str> = rep.recon.iter().map(|r| r.split.as_str()).collect();
    assert_eq!(splits, ["calibration", "validation", "prediction"]);
    let gt = rep.plsr_table("gt_selected").unwrap().r2p;
    let rc = rep.plsr_table("reconstructed").unwrap().r2p;
    assert!(gt >= 0.90, "ground-truth R2p {gt}");
    assert!(rc >= gt - 0.15, "reconstructed R2p {rc} vs {gt}");

    let text = fs::read_to_string(ws.out("report.txt")).unwrap();
    assert!(text.contains("LV      R2c    RMSEC      R2v    RMSEV      R2p    RMSEP      RPD"));
    for f in ["plots/trace.png", "plots/spectra_min.png", "plots/spectra_mean.png", "plots/spectra_max.png"] {
        assert!(ws.out(f).is_file(), "{f}");
    }

    // Fitting never reads held-out reference values.
    let held_out = [ws.out("split/validation.csv"), ws.out("split/prediction.csv")];
    let audit = ws.audit();
    assert!(audit.iter().any(|a| a.phase == Phase::Fit));
    for a in audit.iter().filter(|a| a.phase == Phase::Fit) {
        assert!(!held_out.contains(&a.path), "{} read {} while fitting", a.stage, a.path.display());
        assert!(!a.path.ends_with("reference.csv"));
    }
    assert!(audit.iter().any(|a| a.phase == Phase::Evaluate && held_out.contains(&a.path)));

    // Delete and rerun: every output except timings is byte-identical.
    let before = snapshot(ws.out_dir());
    fs::remove_dir_all(ws.out_dir()).unwrap();
    run_pipeline(&Workspace::new(cfg)).unwrap();
    let after = snapshot(&tmp.path().join("run"));
    assert_eq!(before.keys().collect::<Vec<_>>(), after.keys().collect::<Vec<_>>());
    for (k, v) in &before {
        assert!(after[k] == *v, "{} differs", k.display());
    }
}

#[test]
fn stages_fail_with_their_name() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig::desk(tmp.path().join("data"), tmp.path().join("run"));
    let spec = SyntheticSceneSpec {
        n_samples: 6,
        ..cfg.synth.clone()
    };
    write_synthetic_dataset(&spec, &cfg.paths.data_dir).unwrap();
    let ws = Workspace::new(cfg);
    let err = run_stage(&ws, Stage::Mask).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: "mask", .. }), "{err}");
    assert!(!err.is_config());
    assert!(err.to_string().starts_with("stage `mask` failed"));

    run_stage(&ws, Stage::Calibrate).unwrap();
    run_stage(&ws, Stage::Mask).unwrap();
    run_stage(&ws, Stage::Extract).unwrap();
    let samples = fs::read_to_string(ws.out("spectra/samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 7);
    assert!(samples.starts_with("sample_id,wl_400.00,"));
}

#[test]
fn synthetic_dataset_writer() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = SyntheticSceneSpec {
        n_samples: 3,
        ..Default::default()
    };
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let entries = write_synthetic_dataset(&spec, &a).unwrap();
    write_synthetic_dataset(&spec, &b).unwrap();
    assert_eq!(entries.len(), 3 * spec.replicates);
    assert_eq!(read_manifest(&a).unwrap(), entries);
    assert_eq!(snapshot(&a), snapshot(&b));

    let empty = tmp.path().join("empty");
    let none = write_synthetic_dataset(
        &SyntheticSceneSpec {
            n_samples: 0,
            ..Default::default()
        },
        &empty,
    )
    .unwrap();
    assert!(none.is_empty());
    assert!(read_manifest(&empty).unwrap().is_empty());
}

fn desk_toml() -> String {
    PipelineConfig::desk("data".into(), "out".into()).to_toml()
}

#[test]
fn config_round_trips_and_resolves_paths() {
    let cfg = PipelineConfig::from_toml(&desk_toml(), Path::new("/base")).unwrap();
    assert_eq!(cfg, PipelineConfig::desk("/base/data".into(), "/base/out".into()));
}

#[test]
fn config_errors() {
    let base = Path::new("/base");
    for section in ["synth", "split", "ga", "train"] {
        let text: String = {
            let mut table: toml::Table = desk_toml().parse().unwrap();
            table[section].as_table_mut().unwrap().remove("seed");
            toml::to_string(&table).unwrap()
        };
        let err = PipelineConfig::from_toml(&text, base).unwrap_err();
        assert!(err.is_config(), "{section}: {err}");
        assert!(err.to_string().contains(section));
    }

    let unknown = desk_toml() + "\n[extra]\nx = 1\n";
    assert!(PipelineConfig::from_toml(&unknown, base).unwrap_err().is_config());

    let mut table: toml::Table = desk_toml().parse().unwrap();
    table["network"].as_table_mut().unwrap().insert("out_bands".into(), 7.into());
    let err = PipelineConfig::from_toml(&toml::to_string(&table).unwrap(), base).unwrap_err();
    assert!(err.is_config(), "{err}");

    let mut table: toml::Table = desk_toml().parse().unwrap();
    table["split"]
        .as_table_mut()
        .unwrap()
        .insert("ratios".into(), toml::Value::try_from([0.5, 0.5, 0.5]).unwrap());
    assert!(PipelineConfig::from_toml(&toml::to_string(&table).unwrap(), base).unwrap_err().is_config());

    assert!(PipelineConfig::from_toml("not = [valid", base).unwrap_err().is_config());
}

#[test]
fn seed_override_touches_every_seed() {
    let mut cfg = PipelineConfig::desk("d".into(), "o".into());
    cfg.override_seeds(99);
    assert_eq!([cfg.synth.seed, cfg.split.seed, cfg.ga.seed, cfg.train.seed], [99; 4]);
}

#[test]
fn plots() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out = tmp.path().join("x.png");
    assert!(matches!(plot::plot_csv(&empty, &out), Err(Error::Parse(_))));
    let header_only = tmp.path().join("header.csv");
    fs::write(&header_only, "epoch,mean_mrae,lr\n").unwrap();
    assert!(matches!(plot::plot_csv(&header_only, &out), Err(Error::Parse(_))));
    let garbage = tmp.path().join("garbage.csv");
    fs::write(&garbage, "epoch,mean_mrae\n1,abc\n").unwrap();
    assert!(matches!(plot::plot_csv(&garbage, &out), Err(Error::Parse(_))));

    let trace = tmp.path().join("trace.csv");
    let rows: String = (1..=50).map(|e| format!("{e},{},0.0002\n", 1.0 / e as f64)).collect();
    fs::write(&trace, format!("epoch,mean_mrae,lr\n{rows}")).unwrap();
    plot::plot_csv(&trace, &out).unwrap();
    let img = image::open(&out).unwrap().to_rgb8();
    assert_eq!(img.dimensions(), (640, 400));
    assert!(img.pixels().any(|p| p.0 != [255, 255, 255] && p.0 != [0, 0, 0]));

    let spectra = tmp.path().join("spectra.csv");
    fs::write(&spectra, "sample_id,wl_400.00,wl_500.00,wl_600.00\nS1,0.1,0.2,0.3\nS2,0.3,0.2,0.1\n").unwrap();
    plot::plot_csv(&spectra, &out).unwrap();
    plot::plot_paired_csv(&spectra, &spectra, "S2", &out).unwrap();
    assert!(matches!(plot::plot_paired_csv(&spectra, &spectra, "S9", &out), Err(Error::Parse(_))));
}
