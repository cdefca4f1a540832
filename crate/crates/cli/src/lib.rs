//! Command implementations behind the `darksight` binary.
//!
//! Each command is a plain function returning a summary, so tests drive them
//! without spawning processes. Every successful run writes a
//! [`RunManifest`] next to its outputs.

mod config;
mod enhance;
mod eval;
mod exit;
mod manifest;
mod report_hist;
mod train;

pub use config::{parse_train_config, TrainSettings};
pub use enhance::{cmd_enhance, EnhanceMethod, EnhanceOptions, EnhanceSummary};
pub use eval::{cmd_eval, EvalOptions, EvalSummary};
pub use exit::{exit_code, UsageError, EXIT_OTHER, EXIT_PARSE, EXIT_USAGE, EXIT_VALIDATION};
pub use manifest::RunManifest;
pub use report_hist::cmd_report_hist;
pub use train::{cmd_train, sibling_paths, TrainOptions, TrainPaths, TrainSummary};

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Regular files in `dir` with extension `ext` (case-insensitive), sorted.
pub(crate) fn list_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case(ext))
        })
        .collect();
    files.sort();
    Ok(files)
}

pub(crate) fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .with_context(|| format!("creating directory {}", parent.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
