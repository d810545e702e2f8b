//! Run summary assembled from stage outputs. Timings are not part of it.

use std::fs;
use std::path::Path;

use super::stages::{all_references, read_table};
use super::{Phase, Workspace};
use crate::error::{Error, Result};
use crate::plot;
use crate::recon::Psnr;

pub const PLSR_TABLES: [&str; 3] = ["full_spectrum", "gt_selected", "reconstructed"];
const PLSR_COLUMNS: [&str; 8] = ["LV", "R2c", "RMSEC", "R2v", "RMSEV", "R2p", "RMSEP", "RPD"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlsrSummary {
    pub table: String,
    pub n_lv: usize,
    pub r2c: f64,
    pub rmsec: f64,
    pub r2v: f64,
    pub rmsev: f64,
    pub r2p: f64,
    pub rmsep: f64,
    pub rpd: f64,
}

impl PlsrSummary {
    fn values(&self) -> [f64; 8] {
        [
            self.n_lv as f64,
            self.r2c,
            self.rmsec,
            self.r2v,
            self.rmsev,
            self.r2p,
            self.rmsep,
            self.rpd,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconMetricsRow {
    pub split: String,
    pub mrae: f64,
    pub rmse: f64,
    pub psnr: Psnr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub seeds: Vec<(String, u64)>,
    pub selected_wavelengths: Vec<f64>,
    pub plsr: Vec<PlsrSummary>,
    pub recon: Vec<ReconMetricsRow>,
}

fn bad(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

fn read_csv_rows(ws: &Workspace, path: &Path) -> Result<Vec<csv::StringRecord>> {
    ws.record("report", Phase::Run, path);
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file)
        .records()
        .map(|r| r.map_err(|e| bad(path, e.to_string())))
        .collect()
}

fn num(path: &Path, s: &str) -> Result<f64> {
    s.parse().map_err(|_| bad(path, format!("`{s}` is not a number")))
}

fn parse_psnr(s: &str) -> Option<Psnr> {
    if s == "inf" {
        Some(Psnr::Infinite)
    } else {
        s.parse().ok().map(Psnr::Db)
    }
}

impl RunReport {
    /// Reads the stage outputs under the run directory.
    pub fn collect(ws: &Workspace) -> Result<Self> {
        let c = &ws.config;
        let seeds = vec![
            ("synth".to_string(), c.synth.seed),
            ("split".to_string(), c.split.seed),
            ("ga".to_string(), c.ga.seed),
            ("train".to_string(), c.train.seed),
        ];
        let sel_path = ws.out("ga/selected.csv");
        let selected_wavelengths = read_csv_rows(ws, &sel_path)?
            .iter()
            .map(|r| num(&sel_path, r.get(1).unwrap_or("")))
            .collect::<Result<_>>()?;
        let mut plsr = Vec::new();
        for name in PLSR_TABLES {
            let path = ws.out(format!("plsr/{name}.csv"));
            let rows = read_csv_rows(ws, &path)?;
            let row = rows.first().ok_or_else(|| bad(&path, "empty table"))?;
            let v: Vec<f64> = row.iter().map(|s| num(&path, s)).collect::<Result<_>>()?;
            if v.len() != PLSR_COLUMNS.len() {
                return Err(bad(&path, "expected 8 columns"));
            }
            plsr.push(PlsrSummary {
                table: name.to_string(),
                n_lv: v[0] as usize,
                r2c: v[1],
                rmsec: v[2],
                r2v: v[3],
                rmsev: v[4],
                r2p: v[5],
                rmsep: v[6],
                rpd: v[7],
            });
        }
        let m_path = ws.out("recon/metrics.csv");
        let recon = read_csv_rows(ws, &m_path)?
            .iter()
            .map(|r| {
                Ok(ReconMetricsRow {
                    split: r[0].to_string(),
                    mrae: num(&m_path, &r[1])?,
                    rmse: num(&m_path, &r[2])?,
                    psnr: parse_psnr(&r[3]).ok_or_else(|| bad(&m_path, "bad PSNR"))?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            seeds,
            selected_wavelengths,
            plsr,
            recon,
        })
    }

    pub fn plsr_table(&self, name: &str) -> Option<&PlsrSummary> {
        self.plsr.iter().find(|p| p.table == name)
    }

    /// Long format: `section,row,metric,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("section,row,metric,value\n");
        for (name, seed) in &self.seeds {
            s.push_str(&format!("seed,{name},seed,{seed}\n"));
        }
        for (i, wl) in self.selected_wavelengths.iter().enumerate() {
            s.push_str(&format!("selected,{i},wavelength_nm,{wl:.2}\n"));
        }
        for p in &self.plsr {
            s.push_str(&format!("plsr,{},LV,{}\n", p.table, p.n_lv));
            for (col, v) in PLSR_COLUMNS.iter().zip(p.values()).skip(1) {
                s.push_str(&format!("plsr,{},{col},{v:.4}\n", p.table));
            }
        }
        for r in &self.recon {
            s.push_str(&format!("recon,{},MRAE,{:.4}\n", r.split, r.mrae));
            s.push_str(&format!("recon,{},RMSE,{:.4}\n", r.split, r.rmse));
            s.push_str(&format!("recon,{},PSNR,{}\n", r.split, r.psnr));
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("Run report\n\nseeds:");
        for (name, seed) in &self.seeds {
            s.push_str(&format!(" {name}={seed}"));
        }
        s.push_str(&format!(
            "\n\nSelected wavelengths ({} bands, nm)\n",
            self.selected_wavelengths.len()
        ));
        let wl: Vec<String> = self.selected_wavelengths.iter().map(|w| format!("{w:.2}")).collect();
        for chunk in wl.chunks(8) {
            s.push_str(&format!("  {}\n", chunk.join(", ")));
        }
        s.push_str("\nPLSR models\n");
        s.push_str(&format!("{:<15}", "spectra"));
        for c in PLSR_COLUMNS {
            s.push_str(&format!("{c:>9}"));
        }
        s.push('\n');
        for p in &self.plsr {
            s.push_str(&format!("{:<15}{:>9}", p.table, p.n_lv));
            for v in &p.values()[1..] {
                s.push_str(&format!("{v:>9.4}"));
            }
            s.push('\n');
        }
        s.push_str("\nReconstruction (selected bands, full frame)\n");
        s.push_str(&format!("{:<15}{:>9}{:>9}{:>10}\n", "split", "MRAE", "RMSE", "PSNR"));
        for r in &self.recon {
            s.push_str(&format!(
                "{:<15}{:>9.4}{:>9.4}{:>10}\n",
                r.split,
                r.mrae,
                r.rmse,
                r.psnr.to_string()
            ));
        }
        s
    }

    /// Reads back a `report.csv`.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut out = Self {
            seeds: Vec::new(),
            selected_wavelengths: Vec::new(),
            plsr: Vec::new(),
            recon: Vec::new(),
        };
        for rec in csv::Reader::from_reader(file).records() {
            let rec = rec.map_err(|e| bad(path, e.to_string()))?;
            let (section, row, metric, value) = (&rec[0], &rec[1], &rec[2], &rec[3]);
            match section {
                "seed" => out
                    .seeds
                    .push((row.to_string(), value.parse().map_err(|_| bad(path, "bad seed"))?)),
                "selected" => out.selected_wavelengths.push(num(path, value)?),
                "plsr" => {
                    if metric == "LV" {
                        out.plsr.push(PlsrSummary {
                            table: row.to_string(),
                            n_lv: value.parse().map_err(|_| bad(path, "bad LV"))?,
                            r2c: f64::NAN,
                            rmsec: f64::NAN,
                            r2v: f64::NAN,
                            rmsev: f64::NAN,
                            r2p: f64::NAN,
                            rmsep: f64::NAN,
                            rpd: f64::NAN,
                        });
                        continue;
                    }
                    let p = out
                        .plsr
                        .last_mut()
                        .filter(|p| p.table == row)
                        .ok_or_else(|| bad(path, "PLSR metric before its LV row"))?;
                    let v = num(path, value)?;
                    match metric {
                        "R2c" => p.r2c = v,
                        "RMSEC" => p.rmsec = v,
                        "R2v" => p.r2v = v,
                        "RMSEV" => p.rmsev = v,
                        "R2p" => p.r2p = v,
                        "RMSEP" => p.rmsep = v,
                        "RPD" => p.rpd = v,
                        other => return Err(bad(path, format!("unknown PLSR metric `{other}`"))),
                    }
                }
                "recon" => {
                    if out.recon.last().map_or(true, |r| r.split != row) {
                        out.recon.push(ReconMetricsRow {
                            split: row.to_string(),
                            mrae: f64::NAN,
                            rmse: f64::NAN,
                            psnr: Psnr::Infinite,
                        });
                    }
                    let r = out.recon.last_mut().expect("pushed above");
                    match metric {
                        "MRAE" => r.mrae = num(path, value)?,
                        "RMSE" => r.rmse = num(path, value)?,
                        "PSNR" => r.psnr = parse_psnr(value).ok_or_else(|| bad(path, "bad PSNR"))?,
                        other => return Err(bad(path, format!("unknown metric `{other}`"))),
                    }
                }
                other => return Err(bad(path, format!("unknown section `{other}`"))),
            }
        }
        Ok(out)
    }
}

/// Sample ids with the minimum, closest-to-mean and maximum reference value.
fn pick_samples(refs: &[(String, f64)]) -> Option<[(String, &'static str); 3]> {
    let first = refs.first()?;
    let mean = refs.iter().map(|r| r.1).sum::<f64>() / refs.len() as f64;
    let mut lo = first;
    let mut hi = first;
    let mut mid = first;
    for r in refs {
        if r.1 < lo.1 {
            lo = r;
        }
        if r.1 > hi.1 {
            hi = r;
        }
        if (r.1 - mean).abs() < (mid.1 - mean).abs() {
            mid = r;
        }
    }
    Some([(lo.0.clone(), "min"), (mid.0.clone(), "mean"), (hi.0.clone(), "max")])
}

pub fn report(ws: &Workspace) -> Result<()> {
    const STAGE: &str = "report";
    let rep = RunReport::collect(ws)?;
    super::dataset::write_text(&ws.out("report.csv"), &rep.to_csv())?;
    super::dataset::write_text(&ws.out("report.txt"), &rep.to_text())?;

    let trace = ws.out("recon/trace.csv");
    ws.record(STAGE, Phase::Run, &trace);
    plot::plot_trace_csv(&trace, &ws.out("plots/trace.png"))?;

    let gt_path = ws.out("spectra/selected_samples.csv");
    let rc_path = ws.out("spectra/reconstructed_samples.csv");
    let gt = read_table(ws, STAGE, Phase::Run, &gt_path)?;
    let rc = read_table(ws, STAGE, Phase::Run, &rc_path)?;
    let refs: Vec<(String, f64)> = all_references(ws, STAGE)?.into_iter().collect();
    if let Some(picks) = pick_samples(&refs) {
        for (id, tag) in picks {
            plot::plot_paired_spectra(&gt, &rc, &id, &ws.out(format!("plots/spectra_{tag}.png")))?;
        }
    }
    Ok(())
}
