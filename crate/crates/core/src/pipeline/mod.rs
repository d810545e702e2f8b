//! End-to-end workflow. Every stage reads only files written by earlier
//! stages (or the dataset) and writes its outputs under the run directory,
//! so any stage can be rerun on its own.

pub mod config;
pub mod dataset;
mod report;
mod stages;

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use crate::error::{Error, Result};

pub use config::{
    ColorConfig, Paths, PipelineConfig, PlsrConfig, ReportConfig, SegmentationConfig, SplitConfig, REQUIRED_SEEDS,
};
pub use dataset::{read_manifest, read_references, write_synthetic_dataset, ManifestEntry, SpectraTable, SpectrumRow};
pub use report::{PlsrSummary, ReconMetricsRow, RunReport};

/// Why a stage touched a file. `Fit` reads feed model fitting and must
/// never include held-out reference values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Run,
    Fit,
    Evaluate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Access {
    pub stage: &'static str,
    pub phase: Phase,
    pub path: PathBuf,
}

/// Config plus a log of every file read by the stages.
#[derive(Debug)]
pub struct Workspace {
    pub config: PipelineConfig,
    audit: Mutex<Vec<Access>>,
}

impl Workspace {
    pub fn new(config: PipelineConfig) -> Self {
        Self {
            config,
            audit: Mutex::new(Vec::new()),
        }
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.paths.out_dir
    }

    pub fn out(&self, rel: impl AsRef<Path>) -> PathBuf {
        self.config.paths.out_dir.join(rel)
    }

    pub fn data(&self, rel: impl AsRef<Path>) -> PathBuf {
        self.config.paths.data_dir.join(rel)
    }

    pub(crate) fn record(&self, stage: &'static str, phase: Phase, path: &Path) {
        self.audit.lock().expect("audit lock").push(Access {
            stage,
            phase,
            path: path.to_path_buf(),
        });
    }

    pub fn audit(&self) -> Vec<Access> {
        self.audit.lock().expect("audit lock").clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Calibrate,
    Mask,
    Extract,
    Select,
    Render,
    Train,
    Reconstruct,
    Evaluate,
    Report,
}

pub const STAGES: [Stage; 9] = [
    Stage::Calibrate,
    Stage::Mask,
    Stage::Extract,
    Stage::Select,
    Stage::Render,
    Stage::Train,
    Stage::Reconstruct,
    Stage::Evaluate,
    Stage::Report,
];

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Calibrate => "calibrate",
            Stage::Mask => "mask",
            Stage::Extract => "extract",
            Stage::Select => "select",
            Stage::Render => "render",
            Stage::Train => "train",
            Stage::Reconstruct => "reconstruct",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        STAGES
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown stage `{s}`")))
    }
}

/// Runs one stage. Failures are wrapped with the stage name.
pub fn run_stage(ws: &Workspace, stage: Stage) -> Result<()> {
    let name = stage.name();
    let res = match stage {
        Stage::Calibrate => stages::calibrate(ws),
        Stage::Mask => stages::mask(ws),
        Stage::Extract => stages::extract(ws),
        Stage::Select => stages::select(ws),
        Stage::Render => stages::render(ws),
        Stage::Train => stages::train(ws),
        Stage::Reconstruct => stages::reconstruct(ws),
        Stage::Evaluate => stages::evaluate(ws),
        Stage::Report => report::report(ws),
    };
    res.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

/// Writes the resolved config to the run directory.
pub fn write_run_config(ws: &Workspace) -> Result<()> {
    dataset::write_text(&ws.out("config.toml"), &ws.config.to_toml())
}

/// Wall-clock seconds per stage. Kept out of the report so reports stay
/// byte-identical across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Timings(pub Vec<(Stage, f64)>);

/// Every stage in order, then `timings.csv`.
pub fn run_pipeline(ws: &Workspace) -> Result<Timings> {
    write_run_config(ws)?;
    let mut timings = Vec::with_capacity(STAGES.len());
    for stage in STAGES {
        let t0 = Instant::now();
        run_stage(ws, stage)?;
        timings.push((stage, t0.elapsed().as_secs_f64()));
    }
    let mut text = String::from("stage,seconds\n");
    for (s, t) in &timings {
        text.push_str(&format!("{s},{t:.3}\n"));
    }
    dataset::write_text(&ws.out("timings.csv"), &text)?;
    Ok(Timings(timings))
}
