//! Scenario-driven front end: load a scenario, run its task, write a
//! deterministic report and CSV artifacts.

mod report;
mod scenario;
mod tasks;

use std::fs;
use std::path::{Path, PathBuf};

pub use report::{Check, Criterion, Report};
pub use scenario::{Expect, Scenario, SheetSpec, Task, Tolerances};
pub use crate::solve::emit_sheet;

use crate::error::{Error, Result};

/// Options of `kfield run`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub scenario: PathBuf,
    pub out: PathBuf,
    pub overwrite: bool,
    pub seed: Option<u64>,
}

/// Loads the scenario, runs it, writes artifacts and `report.txt` into the
/// output directory and returns the report.
pub fn run(opts: &RunOptions) -> Result<Report> {
    let mut scenario = Scenario::load(&opts.scenario)?;
    if let Some(seed) = opts.seed {
        scenario.seed = seed;
    }
    let name = opts
        .scenario
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let (mut report, artifacts) = tasks::execute(&scenario, &name)?;
    ensure_dir(&opts.out)?;
    for (file, sheet) in &artifacts {
        emit_sheet(sheet, &opts.out.join(file), opts.overwrite)?;
        report.artifacts.push(file.clone());
    }
    let path = opts.out.join("report.txt");
    if path.exists() && !opts.overwrite {
        return Err(Error::Io { path, message: "file exists (pass --overwrite to replace it)".into() });
    }
    fs::write(&path, report.render()).map_err(|e| Error::Io { path, message: e.to_string() })?;
    Ok(report)
}

/// Runs a scenario without touching the file system.
pub fn evaluate(scenario: &Scenario, name: &str) -> Result<Report> {
    let (mut report, artifacts) = tasks::execute(scenario, name)?;
    report.artifacts = artifacts.into_iter().map(|(f, _)| f).collect();
    Ok(report)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), message: e.to_string() })
}
