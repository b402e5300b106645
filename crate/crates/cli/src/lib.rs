//! Configuration, reproduction targets and report plumbing behind the `diqkd` binary.

pub mod config;
pub mod reproduce;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use config::RunConfig;

/// Exit codes of the binary.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const ACCEPTANCE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(diqkd::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Numerical(_) | CliError::Io(_) => exit::NUMERICAL,
        }
    }
}

impl From<diqkd::Error> for CliError {
    fn from(e: diqkd::Error) -> Self {
        match e {
            diqkd::Error::Io(m) => CliError::Io(std::io::Error::other(m)),
            other => CliError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// One recomputed quantity next to its reference value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub target: String,
    pub quantity: String,
    pub computed: f64,
    pub paper: String,
    pub tolerance: String,
    pub pass: bool,
}

impl Row {
    pub fn within(target: &str, quantity: &str, computed: f64, paper: f64, tol: f64) -> Self {
        Row {
            target: target.into(),
            quantity: quantity.into(),
            computed,
            paper: format!("{paper}"),
            tolerance: format!("±{tol:e}"),
            pass: (computed - paper).abs() <= tol,
        }
    }

    pub fn check(target: &str, quantity: &str, computed: f64, paper: &str, tolerance: &str, pass: bool) -> Self {
        Row {
            target: target.into(),
            quantity: quantity.into(),
            computed,
            paper: paper.into(),
            tolerance: tolerance.into(),
            pass,
        }
    }
}

/// Rows plus any data files a target produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

pub fn rows_to_csv(rows: &[Row]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(std::io::Error::other(e)))
}

/// Joins `name` under `dir`, refusing anything that would escape it.
pub fn output_path(dir: &Path, name: &str) -> CliResult<PathBuf> {
    let rel = Path::new(name);
    if rel.is_absolute() || rel.components().any(|c| !matches!(c, std::path::Component::Normal(_))) {
        return Err(CliError::Config(format!("output name {name} leaves the output directory")));
    }
    Ok(dir.join(rel))
}

pub fn write_outputs(dir: &Path, files: &[(String, String)]) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    for (name, body) in files {
        std::fs::write(output_path(dir, name)?, body)?;
    }
    Ok(())
}
