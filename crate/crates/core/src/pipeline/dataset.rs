//! On-disk dataset layout and CSV tables shared by the stages.
//!
//! A dataset directory holds `white.hdr`, `dark.hdr`, a `manifest.csv`
//! (`sample_id,replicate,raw,truth`, paths relative to the directory; `truth`
//! may be empty) and `reference.csv` (`sample_id,value`).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::envi::write_envi;
use crate::error::{Error, Result};
use crate::synth::{generate_synthetic_scene, SyntheticSceneSpec};

pub const MANIFEST: &str = "manifest.csv";
pub const REFERENCE: &str = "reference.csv";
pub const WHITE: &str = "white.hdr";
pub const DARK: &str = "dark.hdr";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub sample_id: String,
    pub replicate: usize,
    pub raw: PathBuf,
    pub truth: Option<PathBuf>,
}

impl ManifestEntry {
    /// File stem used for every per-scene output.
    pub fn scene_name(&self) -> String {
        format!("{}_r{}", self.sample_id, self.replicate)
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        msg: e.to_string(),
    }
}

fn format_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

pub(crate) fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_f64(path: &Path, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format_err(path, format!("`{s}` is not a finite number")))
}

pub fn read_manifest(data_dir: &Path) -> Result<Vec<ManifestEntry>> {
    let path = data_dir.join(MANIFEST);
    let mut rdr = reader(&path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(&path, e))?;
        if rec.len() < 3 {
            return Err(format_err(&path, "expected sample_id,replicate,raw[,truth]"));
        }
        let replicate = rec[1]
            .parse()
            .map_err(|_| format_err(&path, format!("bad replicate `{}`", &rec[1])))?;
        let truth = rec.get(3).filter(|t| !t.is_empty()).map(|t| data_dir.join(t));
        out.push(ManifestEntry {
            sample_id: rec[0].to_string(),
            replicate,
            raw: data_dir.join(&rec[2]),
            truth,
        });
    }
    Ok(out)
}

/// `sample_id -> value`.
pub fn read_references(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut rdr = reader(path)?;
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != 2 {
            return Err(format_err(path, "expected sample_id,value"));
        }
        if out.insert(rec[0].to_string(), parse_f64(path, &rec[1])?).is_some() {
            return Err(format_err(path, format!("duplicate sample `{}`", &rec[0])));
        }
    }
    Ok(out)
}

pub fn write_references(path: &Path, values: &[(String, f64)]) -> Result<()> {
    let mut text = String::from("sample_id,value\n");
    for (id, v) in values {
        text.push_str(&format!("{id},{v}\n"));
    }
    write_text(path, &text)
}

/// Rows of spectra keyed by sample id (and replicate for per-image tables).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectraTable {
    pub wavelengths_nm: Vec<f64>,
    pub rows: Vec<SpectrumRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub sample_id: String,
    pub replicate: Option<usize>,
    pub values: Vec<f64>,
}

impl SpectraTable {
    /// Rows in the order of `ids`.
    pub fn select(&self, ids: &[String]) -> Result<Vec<&SpectrumRow>> {
        let index: BTreeMap<&str, &SpectrumRow> = self.rows.iter().map(|r| (r.sample_id.as_str(), r)).collect();
        ids.iter()
            .map(|id| {
                index
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::InvalidArgument(format!("no spectrum for sample `{id}`")))
            })
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let with_rep = self.rows.iter().any(|r| r.replicate.is_some());
        let mut text = String::from("sample_id");
        if with_rep {
            text.push_str(",replicate");
        }
        for wl in &self.wavelengths_nm {
            text.push_str(&format!(",wl_{wl:.2}"));
        }
        text.push('\n');
        for r in &self.rows {
            text.push_str(&r.sample_id);
            if with_rep {
                text.push_str(&format!(",{}", r.replicate.unwrap_or(0)));
            }
            for v in &r.values {
                text.push_str(&format!(",{v}"));
            }
            text.push('\n');
        }
        write_text(path, &text)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut rdr = reader(path)?;
        let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
        if headers.is_empty() || &headers[0] != "sample_id" {
            return Err(Error::Parse(format!("{}: missing `sample_id` header", path.display())));
        }
        let with_rep = headers.get(1) == Some("replicate");
        let first_wl = if with_rep { 2 } else { 1 };
        let wavelengths_nm = headers
            .iter()
            .skip(first_wl)
            .map(|h| {
                h.strip_prefix("wl_")
                    .ok_or_else(|| format_err(path, format!("column `{h}` is not wl_<nm>")))
                    .and_then(|v| parse_f64(path, v))
            })
            .collect::<Result<Vec<_>>>()?;
        if wavelengths_nm.is_empty() {
            return Err(Error::Parse(format!("{}: no wavelength columns", path.display())));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            let replicate = if with_rep {
                Some(rec[1].parse().map_err(|_| format_err(path, format!("bad replicate `{}`", &rec[1])))?)
            } else {
                None
            };
            let values = rec.iter().skip(first_wl).map(|v| parse_f64(path, v)).collect::<Result<Vec<_>>>()?;
            rows.push(SpectrumRow {
                sample_id: rec[0].to_string(),
                replicate,
                values,
            });
        }
        Ok(Self { wavelengths_nm, rows })
    }
}

/// Writes a synthetic dataset: white/dark references, one raw and one
/// truth cube per image, manifest and reference values. Returns the
/// manifest entries.
pub fn write_synthetic_dataset(spec: &SyntheticSceneSpec, dir: &Path) -> Result<Vec<ManifestEntry>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = String::from("sample_id,replicate,raw,truth\n");
    let mut refs = Vec::new();
    let mut entries = Vec::new();
    if spec.n_samples == 0 {
        spec.validate()?;
        write_text(&dir.join(MANIFEST), &manifest)?;
        write_references(&dir.join(REFERENCE), &refs)?;
        return Ok(entries);
    }
    let ds = generate_synthetic_scene(spec)?;
    write_envi(&dir.join("white"), &ds.white)?;
    write_envi(&dir.join("dark"), &ds.dark)?;
    ds.object_mask.write_png(&dir.join("object_mask.png"))?;
    fs::create_dir_all(dir.join("raw")).map_err(|e| Error::io(dir.join("raw"), e))?;
    fs::create_dir_all(dir.join("truth")).map_err(|e| Error::io(dir.join("truth"), e))?;
    for s in &ds.scenes {
        let entry = ManifestEntry {
            sample_id: s.sample_id.clone(),
            replicate: s.replicate,
            raw: PathBuf::new(),
            truth: None,
        };
        let name = entry.scene_name();
        let raw_rel = format!("raw/{name}.hdr");
        let truth_rel = format!("truth/{name}.hdr");
        write_envi(&dir.join("raw").join(&name), &s.raw)?;
        write_envi(&dir.join("truth").join(&name), &s.true_reflectance)?;
        manifest.push_str(&format!("{},{},{raw_rel},{truth_rel}\n", s.sample_id, s.replicate));
        entries.push(ManifestEntry {
            raw: dir.join(raw_rel),
            truth: Some(dir.join(truth_rel)),
            ..entry
        });
        if s.replicate == 0 {
            refs.push((s.sample_id.clone(), s.latent));
        }
    }
    write_text(&dir.join(MANIFEST), &manifest)?;
    write_references(&dir.join(REFERENCE), &refs)?;
    Ok(entries)
}
