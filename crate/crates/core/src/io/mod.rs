//! File formats: Matrix Market matrices, system directories, JSON reports
//! and CSV frequency data.

pub mod mtx;
pub mod report;
pub mod system;

pub use mtx::{format_mtx, parse_mtx, read_mtx, write_mtx, Storage};
pub use report::{Check, Report, SCHEMA_VERSION};
pub use system::{read_system, write_reduced, write_system, LoadedSystem, MassKind, SystemMeta};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}
