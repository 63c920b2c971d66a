//! Experiment runners. Each writes CSV tables, optional SVG plots and a
//! manifest into the configured output directory.

mod audit;
mod best_response;
mod growth;
pub mod multiround;
mod welfare;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{ConfigError, Experiment, ExperimentConfig};
use crate::format::{csv_writer, fmt_real, FormatError};
use crate::svg::Plot;

pub use audit::{check_against_reference, ReferenceRow, BUILTIN_REFERENCE};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEVIATION: i32 = 3;

pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] statcontract_core::Error),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        }
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Format(e.into())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub dir: PathBuf,
    /// Output file names relative to `dir`, manifest last.
    pub files: Vec<String>,
    /// Mismatches against a reference; nonempty means exit code 3.
    pub deviations: Vec<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.deviations.is_empty() {
            EXIT_SUCCESS
        } else {
            EXIT_DEVIATION
        }
    }
}

/// Collects the files an experiment writes.
struct Output {
    dir: PathBuf,
    plots: bool,
    files: Vec<String>,
    deviations: Vec<String>,
}

impl Output {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|source| RunError::Io { path, source })?;
        self.files.push(name.to_owned());
        Ok(())
    }

    fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), RunError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| FormatError::Io(e.into_error()))?;
        self.write(name, &bytes)
    }

    fn svg(&mut self, name: &str, plot: &Plot) -> Result<(), RunError> {
        if self.plots {
            self.write(name, plot.render().as_bytes())?;
        }
        Ok(())
    }
}

/// Label-friendly number, e.g. `1.645` or `50`.
fn tag(x: f64) -> String {
    fmt_real(x)
}

/// Runs the configured experiment and writes its manifest.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let plots = config.flag("plots")?;
    let dir = config.output_dir();
    create_dir(&dir)?;
    let mut out = Output { dir: dir.clone(), plots, files: Vec::new(), deviations: Vec::new() };
    match config.experiment() {
        Experiment::Welfare => welfare::run(config, &mut out)?,
        Experiment::FdaAudit => audit::run(config, &mut out)?,
        Experiment::EvalueGrowth => growth::run(config, &mut out)?,
        Experiment::Multiround => multiround::run(config, &mut out)?,
        Experiment::BestResponse => best_response::run(config, &mut out)?,
    }
    let manifest = config.manifest(&out.files);
    out.write(MANIFEST, manifest.as_bytes())?;
    Ok(RunOutcome { dir, files: out.files, deviations: out.deviations })
}

fn create_dir(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.to_owned(), source })
}
