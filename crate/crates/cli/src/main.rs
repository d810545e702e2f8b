use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sforge::pipeline::{run_pipeline, run_stage, write_run_config, write_synthetic_dataset, PipelineConfig, Stage, Workspace};
use sforge::{plot, Error};

/// Hyperspectral calibration, band selection and RGB-to-spectral
/// reconstruction pipeline.
#[derive(Parser)]
#[command(name = "sforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Replaces the output directory from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset to the config's data_dir.
    Synth(Common),
    /// Run every stage and print the report.
    Pipeline(Common),
    /// Raw cubes to reflectance.
    Calibrate(Common),
    /// Object masks from the band-difference image.
    Mask(Common),
    /// ROI mean spectra and replicate averages.
    Extract(Common),
    /// Split, full-spectrum PLSR, GA band selection, selected-band cubes.
    Select(Common),
    /// Reflectance cubes to RGB PNGs.
    Render(Common),
    /// Train the reconstruction network.
    Train(Common),
    /// Reconstruct every image and re-extract spectra.
    Reconstruct(Common),
    /// Reconstruction metrics and PLSR on selected and reconstructed spectra.
    Evaluate(Common),
    /// Report tables and plots.
    Report(Common),
    /// Line plot of a training trace or spectra CSV.
    Plot {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Reconstructed spectra to overlay on `input` for `--sample`.
        #[arg(long, requires = "sample")]
        paired: Option<PathBuf>,
        #[arg(long, requires = "paired")]
        sample: Option<String>,
    },
}

fn load(c: &Common) -> sforge::Result<PipelineConfig> {
    let mut cfg = match PipelineConfig::load(&c.config) {
        Err(Error::Io { path, source }) => return Err(Error::Config(format!("{}: {source}", path.display()))),
        other => other?,
    };
    if let Some(out) = &c.out {
        cfg.paths.out_dir = out.clone();
    }
    if let Some(seed) = c.seed {
        cfg.override_seeds(seed);
    }
    Ok(cfg)
}

fn stage_cmd(c: &Common, stage: Stage) -> sforge::Result<()> {
    let ws = Workspace::new(load(c)?);
    write_run_config(&ws)?;
    run_stage(&ws, stage)?;
    eprintln!("{stage}: done");
    Ok(())
}

fn print_file(path: &Path) {
    if let Ok(text) = fs::read_to_string(path) {
        print!("{text}");
    }
}

fn run(cli: Cli) -> sforge::Result<()> {
    match cli.command {
        Command::Synth(c) => {
            let cfg = load(&c)?;
            let entries = write_synthetic_dataset(&cfg.synth, &cfg.paths.data_dir)?;
            eprintln!("wrote {} images to {}", entries.len(), cfg.paths.data_dir.display());
            Ok(())
        }
        Command::Pipeline(c) => {
            let ws = Workspace::new(load(&c)?);
            let timings = run_pipeline(&ws)?;
            print_file(&ws.out("report.txt"));
            println!("\nTimings (s)");
            for (stage, secs) in timings.0 {
                println!("  {:<12}{secs:>9.3}", stage.name());
            }
            Ok(())
        }
        Command::Calibrate(c) => stage_cmd(&c, Stage::Calibrate),
        Command::Mask(c) => stage_cmd(&c, Stage::Mask),
        Command::Extract(c) => stage_cmd(&c, Stage::Extract),
        Command::Select(c) => stage_cmd(&c, Stage::Select),
        Command::Render(c) => stage_cmd(&c, Stage::Render),
        Command::Train(c) => stage_cmd(&c, Stage::Train),
        Command::Reconstruct(c) => stage_cmd(&c, Stage::Reconstruct),
        Command::Evaluate(c) => stage_cmd(&c, Stage::Evaluate),
        Command::Report(c) => {
            stage_cmd(&c, Stage::Report)?;
            let cfg = load(&c)?;
            print_file(&cfg.paths.out_dir.join("report.txt"));
            Ok(())
        }
        Command::Plot {
            input,
            output,
            paired,
            sample,
        } => match (paired, sample) {
            (Some(rc), Some(id)) => plot::plot_paired_csv(&input, &rc, &id, &output),
            _ => plot::plot_csv(&input, &output),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                if !e.to_string().contains(&s.to_string()) {
                    eprintln!("  caused by: {s}");
                }
                src = s.source();
            }
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
